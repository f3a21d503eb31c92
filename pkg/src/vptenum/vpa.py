"""Pushdown acceptors driven by the letter's open/close/neutral class.

The acceptor pushes exactly on opens and pops exactly on closes, so a
word's stack discipline is fixed by its letter classes and only
well-nested inputs can be accepted. Determinization works over sets of
state pairs (origin of the current level, current state) rather than
sets of states; the pair keeps enough history to resolve the pop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as _cartesian

from vptenum.nested import StructuredAlphabet, Token, TokenKind


class ResourceCapError(RuntimeError):
    """An exhaustive check outgrew its configured budget."""


@dataclass(frozen=True)
class Vpa:
    """Nondeterministic visibly pushdown acceptor.

    Transitions:
      opens:    set of (q, a, q2, x)   push x
      closes:   set of (q, a, x, q2)   pop x
      neutrals: set of (q, a, q2)
    """

    states: frozenset
    alphabet: StructuredAlphabet
    stack_symbols: frozenset
    opens: frozenset
    closes: frozenset
    neutrals: frozenset
    initial: frozenset
    final: frozenset

    def __post_init__(self):
        for q, a, q2, x in self.opens:
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"open transition uses undeclared state: {(q, a, q2, x)}")
            if a not in self.alphabet.opens:
                raise ValueError(f"open transition on non-open letter {a!r}")
            if x not in self.stack_symbols:
                raise ValueError(f"open transition pushes undeclared symbol {x!r}")
        for q, a, x, q2 in self.closes:
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"close transition uses undeclared state: {(q, a, x, q2)}")
            if a not in self.alphabet.closes:
                raise ValueError(f"close transition on non-close letter {a!r}")
            if x not in self.stack_symbols:
                raise ValueError(f"close transition pops undeclared symbol {x!r}")
        for q, a, q2 in self.neutrals:
            if q not in self.states or q2 not in self.states:
                raise ValueError(f"neutral transition uses undeclared state: {(q, a, q2)}")
            if a not in self.alphabet.neutrals:
                raise ValueError(f"neutral transition on non-neutral letter {a!r}")
        if not self.initial <= self.states or not self.final <= self.states:
            raise ValueError("initial and final states must be declared states")

    def open_index(self) -> dict:
        idx: dict = {}
        for q, a, q2, x in self.opens:
            idx.setdefault((q, a), []).append((q2, x))
        return idx

    def close_index(self) -> dict:
        idx: dict = {}
        for q, a, x, q2 in self.closes:
            idx.setdefault((q, a, x), []).append(q2)
        return idx

    def neutral_index(self) -> dict:
        idx: dict = {}
        for q, a, q2 in self.neutrals:
            idx.setdefault((q, a), []).append(q2)
        return idx


@dataclass(frozen=True)
class VpaRun:
    """One complete run: n+1 states and, per position, the pushed symbol
    at opens (None elsewhere)."""

    states: tuple
    pushed: tuple


def enumerate_runs(vpa: Vpa, tokens, max_runs: int | None = None) -> list[VpaRun]:
    """All runs over the whole token sequence from initial states.

    Runs need not end accepting or at empty stack; they only must never
    get stuck. Raises ResourceCapError past max_runs.
    """
    toks = list(tokens)
    oidx, cidx, nidx = vpa.open_index(), vpa.close_index(), vpa.neutral_index()
    runs: list[VpaRun] = []
    # frame: (position index, state, stack tuple, states so far, pushes so far)
    work = [(0, q, (), (q,), ()) for q in sorted(vpa.initial, key=repr)]
    while work:
        i, q, stack, seen, pushed = work.pop()
        if i == len(toks):
            runs.append(VpaRun(seen, pushed))
            if max_runs is not None and len(runs) > max_runs:
                raise ResourceCapError(f"run enumeration exceeded {max_runs} runs")
            continue
        tok = toks[i]
        if tok.kind == TokenKind.OPEN:
            for q2, x in oidx.get((q, tok.name), ()):
                work.append((i + 1, q2, stack + (x,), seen + (q2,), pushed + (x,)))
        elif tok.kind == TokenKind.CLOSE:
            if not stack:
                continue
            x = stack[-1]
            for q2 in cidx.get((q, tok.name, x), ()):
                work.append((i + 1, q2, stack[:-1], seen + (q2,), pushed + (None,)))
        else:
            for q2 in nidx.get((q, tok.name), ()):
                work.append((i + 1, q2, stack, seen + (q2,), pushed + (None,)))
    return runs


def accepts(vpa: Vpa, tokens) -> bool:
    """Subset simulation over state pairs; one pass, no run materialization.

    Raises ValueError on inputs that are not well nested.
    """
    oidx, cidx, nidx = vpa.open_index(), vpa.close_index(), vpa.neutral_index()
    pairs = {(q, q) for q in vpa.initial}
    stack: list[set] = []
    open_positions: list[int] = []
    pos = 0
    for tok in tokens:
        pos += 1
        if tok.kind == TokenKind.OPEN:
            summary = set()
            seed = set()
            for p, p2 in pairs:
                for q2, x in oidx.get((p2, tok.name), ()):
                    summary.add((p, x, q2))
                    seed.add((q2, q2))
            stack.append(summary)
            open_positions.append(pos)
            pairs = seed
        elif tok.kind == TokenKind.CLOSE:
            if not stack:
                raise ValueError(f"unbalanced close at position {pos}")
            summary = stack.pop()
            open_positions.pop()
            by_first: dict = {}
            for p2, q2 in pairs:
                by_first.setdefault(p2, []).append(q2)
            nxt = set()
            for p, x, p2 in summary:
                for q2 in by_first.get(p2, ()):
                    for q3 in cidx.get((q2, tok.name, x), ()):
                        nxt.add((p, q3))
            pairs = nxt
        else:
            nxt = set()
            for p, q in pairs:
                for q2 in nidx.get((q, tok.name), ()):
                    nxt.add((p, q2))
            pairs = nxt
    if stack:
        raise ValueError(f"unbalanced open at position {open_positions[0]}")
    return any(p in vpa.initial and q in vpa.final for p, q in pairs)


@dataclass
class DetVpa:
    """Deterministic view of a Vpa, materialized lazily.

    Subset states are frozensets of (level origin, current) pairs and
    are created only when a processed word reaches them; nothing else
    is ever built. The transition function is partial: a missing entry
    on some letter means the word is rejected.
    """

    base: Vpa
    start: frozenset = field(init=False)
    open_memo: dict = field(default_factory=dict)
    close_memo: dict = field(default_factory=dict)
    neutral_memo: dict = field(default_factory=dict)
    seen_states: set = field(default_factory=set)

    def __post_init__(self):
        self.start = frozenset((q, q) for q in self.base.initial)
        self.seen_states.add(self.start)
        self._oidx = self.base.open_index()
        self._cidx = self.base.close_index()
        self._nidx = self.base.neutral_index()

    def _open(self, state: frozenset, a: str) -> tuple[frozenset, frozenset]:
        key = (state, a)
        hit = self.open_memo.get(key)
        if hit is None:
            summary, seed = set(), set()
            for p, p2 in state:
                for q2, x in self._oidx.get((p2, a), ()):
                    summary.add((p, x, q2))
                    seed.add((q2, q2))
            hit = (frozenset(seed), frozenset(summary))
            self.open_memo[key] = hit
            self.seen_states.add(hit[0])
        return hit

    def _close(self, state: frozenset, a: str, summary: frozenset) -> frozenset:
        key = (state, a, summary)
        hit = self.close_memo.get(key)
        if hit is None:
            by_first: dict = {}
            for p2, q2 in state:
                by_first.setdefault(p2, []).append(q2)
            nxt = set()
            for p, x, p2 in summary:
                for q2 in by_first.get(p2, ()):
                    for q3 in self._cidx.get((q2, a, x), ()):
                        nxt.add((p, q3))
            hit = frozenset(nxt)
            self.close_memo[key] = hit
            self.seen_states.add(hit)
        return hit

    def _neutral(self, state: frozenset, a: str) -> frozenset:
        key = (state, a)
        hit = self.neutral_memo.get(key)
        if hit is None:
            hit = frozenset(
                (p, q2) for p, q in state for q2 in self._nidx.get((q, a), ())
            )
            self.neutral_memo[key] = hit
            self.seen_states.add(hit)
        return hit

    def is_final(self, state: frozenset) -> bool:
        return any(p in self.base.initial and q in self.base.final for p, q in state)

    def accepts(self, tokens) -> bool:
        state = self.start
        stack: list[frozenset] = []
        open_positions: list[int] = []
        pos = 0
        for tok in tokens:
            pos += 1
            if tok.kind == TokenKind.OPEN:
                state, summary = self._open(state, tok.name)
                stack.append(summary)
                open_positions.append(pos)
            elif tok.kind == TokenKind.CLOSE:
                if not stack:
                    raise ValueError(f"unbalanced close at position {pos}")
                state = self._close(state, tok.name, stack.pop())
                open_positions.pop()
            else:
                state = self._neutral(state, tok.name)
        if stack:
            raise ValueError(f"unbalanced open at position {open_positions[0]}")
        return self.is_final(state)


def determinize(vpa: Vpa) -> DetVpa:
    """Deterministic equivalent over pair-set states, built on demand."""
    return DetVpa(vpa)


def well_nested_words(alphabet: StructuredAlphabet, max_len: int) -> list[tuple[Token, ...]]:
    """Every well-nested token sequence of length at most max_len."""
    opens = sorted(alphabet.opens)
    closes = sorted(alphabet.closes)
    neutrals = sorted(alphabet.neutrals)
    memo: dict[int, list[tuple[Token, ...]]] = {0: [()]}

    def of_len(n: int) -> list[tuple[Token, ...]]:
        if n in memo:
            return memo[n]
        words: list[tuple[Token, ...]] = []
        for c in neutrals:
            head = (Token(TokenKind.NEUTRAL, c),)
            for rest in of_len(n - 1):
                words.append(head + rest)
        for m in range(0, n - 1):
            for a, b in _cartesian(opens, closes):
                for inner in of_len(m):
                    bracketed = (
                        (Token(TokenKind.OPEN, a),)
                        + inner
                        + (Token(TokenKind.CLOSE, b),)
                    )
                    for rest in of_len(n - 2 - m):
                        words.append(bracketed + rest)
        memo[n] = words
        return words

    all_words: list[tuple[Token, ...]] = []
    for n in range(max_len + 1):
        all_words.extend(of_len(n))
    return all_words


def language_equal_upto(a1, a2, max_len: int, alphabet: StructuredAlphabet | None = None, word_cap: int = 2_000_000) -> bool:
    """Exhaustively compare acceptance on well-nested words up to max_len.

    Both arguments need an ``accepts(tokens)`` method (Vpa works via the
    module function, so plain Vpa values are wrapped). Refuses to run
    past word_cap candidate words.
    """

    def as_acceptor(a):
        if isinstance(a, Vpa):
            class _Wrap:
                def __init__(self, v):
                    self.v = v

                def accepts(self, toks):
                    return accepts(self.v, toks)

            return _Wrap(a)
        return a

    if alphabet is None:
        for cand in (a1, a2):
            base = cand.base if isinstance(cand, DetVpa) else cand
            if isinstance(base, Vpa):
                alphabet = base.alphabet
                break
    if alphabet is None:
        raise ValueError("no alphabet available; pass one explicitly")
    count_guard = 0
    m1, m2 = as_acceptor(a1), as_acceptor(a2)
    for word in well_nested_words(alphabet, max_len):
        count_guard += 1
        if count_guard > word_cap:
            raise ResourceCapError(f"equality check exceeded {word_cap} words")
        if m1.accepts(word) != m2.accepts(word):
            return False
    return True
