"""Extraction grammars over nested documents, compiled to transducers.

A grammar assigns spans to variables by deriving ref-words: document
letters interleaved with capture markers (written ⊢x for the start of
x's span and ⊣x for its end). Productions come in exactly three
shapes: erase, prepend one neutral-or-marker symbol, or wrap an
open/close pair around one nonterminal and continue with another.

Compilation goes grammar -> marker-reading acceptor -> transducer. The
acceptor reads markers as extra neutral letters; the transducer hides
them by fusing every maximal chain of marker transitions into the
following letter transition, whose output symbol is the set of fused
markers. Evaluating the transducer on the document (with a synthetic
end marker appended, so trailing marker chains have a letter to fuse
into) yields one output word per span assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from vptenum.nested import Span, StructuredAlphabet, Token, TokenKind
from vptenum.vpa import Vpa, ResourceCapError
from vptenum import engine
from vptenum.vpt import Vpt, is_io_deterministic

END_MARKER = "#"


class GrammarError(ValueError):
    """The grammar file is malformed or breaks a shape rule."""


class NotFunctionalError(ValueError):
    """Some accepted ref-word does not use every variable exactly once."""


def open_marker(var: str) -> str:
    return "⊢" + var  # ⊢x


def close_marker(var: str) -> str:
    return "⊣" + var  # ⊣x


@dataclass(frozen=True)
class EpsProduction:
    head: str


@dataclass(frozen=True)
class ChainProduction:
    """head -> sym tail, where sym is a neutral letter or a marker."""

    head: str
    sym: str
    is_marker: bool
    tail: str


@dataclass(frozen=True)
class NestProduction:
    """head -> <a inner a> tail."""

    head: str
    letter: str
    inner: str
    tail: str


@dataclass(frozen=True)
class Vpeg:
    variables: frozenset
    nonterminals: frozenset
    alphabet: StructuredAlphabet
    start: str
    productions: tuple


def parse_vpeg(text: str) -> Vpeg:
    """Parse the grammar format:

        var x y
        start S
        S -> eps | a S | (x S | x) S | <a S a> S

    Alternatives separated by `|`; captures written `(x` and `x)`;
    `#` starts a comment. Nonterminals are the tokens that appear on
    the left of `->`.
    """
    lines = []
    for raw in text.splitlines():
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append(body)
    variables: list[str] = []
    start: str | None = None
    rule_lines: list[tuple[str, str]] = []
    for line in lines:
        parts = line.split()
        if parts[0] == "var":
            variables.extend(parts[1:])
        elif parts[0] == "start":
            if len(parts) != 2:
                raise GrammarError(f"start line needs one symbol: {line!r}")
            if start is not None:
                raise GrammarError("duplicate start line")
            start = parts[1]
        else:
            if "->" not in parts:
                raise GrammarError(f"expected a production: {line!r}")
            arrow = parts.index("->")
            if arrow != 1:
                raise GrammarError(f"production needs a single head: {line!r}")
            rule_lines.append((parts[0], " ".join(parts[2:])))
    if start is None:
        raise GrammarError("missing start line")
    if len(set(variables)) != len(variables):
        raise GrammarError("duplicate variable declaration")
    varset = frozenset(variables)
    heads = frozenset(h for h, _ in rule_lines)
    if start not in heads:
        raise GrammarError(f"start symbol {start!r} has no production")

    def parse_alt(head: str, alt: str):
        toks = alt.split()
        if not toks:
            raise GrammarError(f"empty alternative in {head!r}")
        if toks == ["eps"]:
            return EpsProduction(head)
        if len(toks) == 2:
            sym, tail = toks
            if tail not in heads:
                raise GrammarError(f"unknown nonterminal {tail!r} in {head!r}")
            if sym.startswith("(") and len(sym) > 1:
                var = sym[1:]
                if var not in varset:
                    raise GrammarError(f"undeclared variable {var!r} in {head!r}")
                return ChainProduction(head, open_marker(var), True, tail)
            if sym.endswith(")") and len(sym) > 1:
                var = sym[:-1]
                if var not in varset:
                    raise GrammarError(f"undeclared variable {var!r} in {head!r}")
                return ChainProduction(head, close_marker(var), True, tail)
            if sym in heads:
                raise GrammarError(
                    f"rule {head!r} -> {alt!r} rejected: not a grammar shape"
                )
            if sym.startswith("<") or sym.endswith(">"):
                raise GrammarError(f"stray bracket symbol {sym!r} in {head!r}")
            return ChainProduction(head, sym, False, tail)
        if len(toks) == 4:
            o, inner, c, tail = toks
            if not (o.startswith("<") and len(o) > 1 and c.endswith(">") and len(c) > 1):
                raise GrammarError(f"malformed bracket production {alt!r} in {head!r}")
            if o[1:] != c[:-1]:
                raise GrammarError(f"mismatched brackets {o!r} {c!r} in {head!r}")
            for nt in (inner, tail):
                if nt not in heads:
                    raise GrammarError(f"unknown nonterminal {nt!r} in {head!r}")
            return NestProduction(head, o[1:], inner, tail)
        raise GrammarError(f"rule {head!r} -> {alt!r} rejected: not a grammar shape")

    productions = []
    for head, rhs in rule_lines:
        for alt in rhs.split("|"):
            productions.append(parse_alt(head, alt.strip()))

    opens, closes, neutrals = set(), set(), set()
    for p in productions:
        if isinstance(p, NestProduction):
            opens.add(p.letter)
            closes.add(p.letter)
        elif isinstance(p, ChainProduction) and not p.is_marker:
            neutrals.add(p.sym)
    alphabet = StructuredAlphabet(
        opens=frozenset(opens), closes=frozenset(closes), neutrals=frozenset(neutrals)
    )
    return Vpeg(
        variables=varset,
        nonterminals=heads,
        alphabet=alphabet,
        start=start,
        productions=tuple(productions),
    )


def nullable_set(vpeg: Vpeg, *, ops: list | None = None) -> frozenset:
    """Nonterminals that derive the empty ref-word, as a least fixpoint.

    With the three production shapes only direct erasure qualifies
    (every other shape emits at least one ref-word symbol), so the
    fixpoint closes after one round; the loop is kept for the day a
    shape with erasable items appears. When `ops` is given, the number
    of loop iterations executed is appended to it.
    """
    nullable: set[str] = set()
    steps = 0
    changed = True
    while changed:
        changed = False
        for p in vpeg.productions:
            steps += 1
            if isinstance(p, EpsProduction) and p.head not in nullable:
                nullable.add(p.head)
                changed = True
    if ops is not None:
        ops.append(steps)
    return frozenset(nullable)


def to_evpa(vpeg: Vpeg, *, ops: list | None = None) -> Vpa:
    """Acceptor for the grammar's ref-words; markers ride as neutrals.

    States are the nonterminals. A chain production becomes one neutral
    transition; a bracket production pushes its own stack symbol on the
    open and pops it into the continuation from every erasing state.
    One pass over the productions, so construction is linear in them;
    when `ops` is given, the number of loop iterations executed
    (including those of the erasable-set fixpoint) is appended to it.
    """
    sub: list[int] = []
    finals = nullable_set(vpeg, ops=sub)
    steps = sub[0]
    opens, closes, neutrals = set(), set(), set()
    stack_symbols = set()
    marker_letters = set()
    for i, p in enumerate(vpeg.productions):
        steps += 1
        if isinstance(p, ChainProduction):
            neutrals.add((p.head, p.sym, p.tail))
            if p.is_marker:
                marker_letters.add(p.sym)
        elif isinstance(p, NestProduction):
            z = f"z{i}"
            stack_symbols.add(z)
            opens.add((p.head, p.letter, p.inner, z))
            for w in finals:
                steps += 1
                closes.add((w, p.letter, z, p.tail))
    if ops is not None:
        ops.append(steps)
    alphabet = StructuredAlphabet(
        opens=vpeg.alphabet.opens,
        closes=vpeg.alphabet.closes,
        neutrals=vpeg.alphabet.neutrals | marker_letters,
    )
    return Vpa(
        states=vpeg.nonterminals,
        alphabet=alphabet,
        stack_symbols=frozenset(stack_symbols) or frozenset({"z"}),
        opens=frozenset(opens),
        closes=frozenset(closes),
        neutrals=frozenset(neutrals),
        initial=frozenset({vpeg.start}),
        final=finals,
    )


def _marker_edges(evpa: Vpa, variables) -> list[tuple[str, str, str]]:
    markers = {open_marker(x) for x in variables} | {close_marker(x) for x in variables}
    return [(q, a, q2) for q, a, q2 in evpa.neutrals if a in markers]


def _well_nested_pairs(vpa: Vpa) -> set:
    """All (p, q) with q reachable from p by one complete well-nested
    ref-word factor (the empty factor included)."""
    pairs = {(q, q) for q in vpa.states}
    for q, _, q2 in vpa.neutrals:
        pairs.add((q, q2))
    opens_by_sym: dict = {}
    for q, a, q2, x in vpa.opens:
        opens_by_sym.setdefault(x, []).append((q, q2))
    closes_by_sym: dict = {}
    for q, a, x, q2 in vpa.closes:
        closes_by_sym.setdefault(x, []).append((q, q2))
    changed = True
    while changed:
        changed = False
        new = set()
        by_first: dict = {}
        for p, q in pairs:
            by_first.setdefault(p, []).append(q)
        for p, q in pairs:
            for q2 in by_first.get(q, ()):
                if (p, q2) not in pairs:
                    new.add((p, q2))
        for x, oedges in opens_by_sym.items():
            for o_from, o_to in oedges:
                for mid in by_first.get(o_to, ()):
                    for c_from, c_to in closes_by_sym.get(x, ()):
                        if c_from == mid and (o_from, c_to) not in pairs:
                            new.add((o_from, c_to))
        if new:
            pairs |= new
            changed = True
    return pairs


def check_functional(evpa: Vpa, variables) -> None:
    """Reject unless every accepted ref-word opens and closes every
    variable exactly once, start before end.

    Runs the marker bookkeeping as a product automaton (statuses per
    variable: unopened, open, closed, plus a poison state for misuse)
    and asks, via well-nested reachability, whether any accepting state
    is reachable with anything other than all-closed books.
    """
    xs = sorted(variables)
    clean = tuple(0 for _ in xs)
    done = tuple(2 for _ in xs)
    bad = None

    def bump(vec, a):
        if vec is bad:
            return bad
        for i, x in enumerate(xs):
            if a == open_marker(x):
                if vec[i] != 0:
                    return bad
                return vec[:i] + (1,) + vec[i + 1 :]
            if a == close_marker(x):
                if vec[i] != 1:
                    return bad
                return vec[:i] + (2,) + vec[i + 1 :]
        return vec

    vecs = [bad, clean]
    frontier = [clean]
    markers = {open_marker(x) for x in xs} | {close_marker(x) for x in xs}
    while frontier:
        vec = frontier.pop()
        for a in markers:
            nxt = bump(vec, a)
            if nxt not in vecs:
                vecs.append(nxt)
                frontier.append(nxt)

    states = frozenset((q, vec) for q in evpa.states for vec in vecs)
    neutrals = set()
    for q, a, q2 in evpa.neutrals:
        for vec in vecs:
            neutrals.add(((q, vec), a, (q2, bump(vec, a))))
    opens = set()
    for q, a, q2, x in evpa.opens:
        for vec in vecs:
            opens.add(((q, vec), a, (q2, vec), x))
    closes = set()
    for q, a, x, q2 in evpa.closes:
        for vec in vecs:
            closes.add(((q, vec), a, x, (q2, vec)))
    product = Vpa(
        states=states,
        alphabet=evpa.alphabet,
        stack_symbols=evpa.stack_symbols,
        opens=frozenset(opens),
        closes=frozenset(closes),
        neutrals=frozenset(neutrals),
        initial=frozenset((q, clean) for q in evpa.initial),
        final=frozenset((q, vec) for q in evpa.final for vec in vecs),
    )
    pairs = _well_nested_pairs(product)
    for q0 in evpa.initial:
        for p, (q, vec) in pairs:
            if p == (q0, clean) and q in evpa.final and vec != done:
                if vec is bad:
                    raise NotFunctionalError(
                        "grammar not functional: some accepted ref-word "
                        "repeats or misorders a capture"
                    )
                missing = [x for i, x in enumerate(xs) if vec[i] != 2]
                raise NotFunctionalError(
                    "grammar not functional: some accepted ref-word leaves "
                    f"variable(s) {', '.join(missing)} unassigned"
                )


def evpa_to_vpt(evpa: Vpa, variables, max_vpaths: int = 100_000) -> Vpt:
    """Fuse marker chains into the following letter transition.

    Marker transitions must form an acyclic graph over states (else a
    chain could be pumped forever); a cycle is rejected outright. For
    every maximal-or-shorter chain ending at p and every letter
    transition leaving p, the result gets a copy of that transition
    whose source is the chain's start and whose output is the set of
    markers along the chain. Letter transitions also survive unfused
    with empty output, and a fresh final state is reachable only by the
    synthetic end marker, fused or not.
    """
    edges = _marker_edges(evpa, variables)
    adj: dict = {}
    for q, a, q2 in edges:
        adj.setdefault(q, []).append((a, q2))
    # cycle check over marker edges only
    color: dict = {}
    for q0 in adj:
        if color.get(q0):
            continue
        stack = [(q0, iter(adj.get(q0, ())))]
        color[q0] = 1
        while stack:
            q, it = stack[-1]
            advanced = False
            for _, q2 in it:
                c = color.get(q2, 0)
                if c == 1:
                    raise GrammarError(
                        f"capture transitions form a cycle through state {q2!r}"
                    )
                if c == 0:
                    color[q2] = 1
                    stack.append((q2, iter(adj.get(q2, ()))))
                    advanced = True
                    break
            if not advanced:
                color[q] = 2
                stack.pop()

    # (chain start, fused marker set) per chain end state
    ending_at: dict = {}
    count = 0
    work = [(q, frozenset({a}), q2) for q, a, q2 in edges]
    while work:
        start, fused, end = work.pop()
        bucket = ending_at.setdefault(end, set())
        if (start, fused) in bucket:
            continue
        bucket.add((start, fused))
        count += 1
        if count > max_vpaths:
            raise ResourceCapError(f"marker chain expansion exceeded {max_vpaths}")
        for a, q2 in adj.get(end, ()):
            work.append((start, fused | {a}, q2))

    final = "qf"
    while final in evpa.states:
        final += "_"
    opens, closes, neutrals = set(), set(), set()
    outputs = set()
    for q, a, q2, x in evpa.opens:
        opens.add((q, a, None, q2, x))
        for start, fused in ending_at.get(q, ()):
            outputs.add(fused)
            opens.add((start, a, fused, q2, x))
    for q, a, x, q2 in evpa.closes:
        closes.add((q, a, None, x, q2))
        for start, fused in ending_at.get(q, ()):
            outputs.add(fused)
            closes.add((start, a, fused, x, q2))
    marker_letters = {a for _, a, _ in edges}
    for q, a, q2 in evpa.neutrals:
        if a in marker_letters:
            continue
        neutrals.add((q, a, None, q2))
        for start, fused in ending_at.get(q, ()):
            outputs.add(fused)
            neutrals.add((start, a, fused, q2))
    for q in evpa.final:
        neutrals.add((q, END_MARKER, None, final))
        for start, fused in ending_at.get(q, ()):
            outputs.add(fused)
            neutrals.add((start, END_MARKER, fused, final))
    alphabet = StructuredAlphabet(
        opens=evpa.alphabet.opens,
        closes=evpa.alphabet.closes,
        neutrals=(evpa.alphabet.neutrals - marker_letters) | {END_MARKER},
    )
    return Vpt(
        states=evpa.states | {final},
        alphabet=alphabet,
        stack_symbols=evpa.stack_symbols,
        output_symbols=frozenset(outputs),
        opens=frozenset(opens),
        closes=frozenset(closes),
        neutrals=frozenset(neutrals),
        initial=evpa.initial,
        final=frozenset({final}),
    )


@dataclass(frozen=True)
class SpanMapping:
    spans: tuple  # sorted tuple of (variable, Span)

    def render(self) -> str:
        return " ".join(f"{x}=[{s.start},{s.end})" for x, s in self.spans)


def decode_mapping(output_word, variables) -> SpanMapping:
    """Read span ends off a (marker set, position) word.

    A start marker at position k begins the span at k; an end marker at
    position k ends it exclusively at k, so a pair at the same position
    is the empty span. Each variable must start once and end once.
    """
    starts: dict = {}
    ends: dict = {}
    for capset, pos in output_word:
        for marker in capset:
            kind_open = marker[0] == "⊢"
            var = marker[1:]
            target = starts if kind_open else ends
            if var in target:
                raise NotFunctionalError(f"duplicate capture for variable {var!r}")
            target[var] = pos
    spans = []
    for x in sorted(variables):
        if x not in starts or x not in ends:
            raise NotFunctionalError(f"missing capture for variable {x!r}")
        if starts[x] > ends[x]:
            raise NotFunctionalError(f"span of variable {x!r} ends before it starts")
        spans.append((x, Span(starts[x], ends[x])))
    return SpanMapping(tuple(spans))


def compile_vpeg(vpeg: Vpeg) -> Vpt:
    evpa = to_evpa(vpeg)
    check_functional(evpa, vpeg.variables)
    return evpa_to_vpt(evpa, vpeg.variables)


def evaluate_spanner(vpeg: Vpeg, tokens, smoothing: int = 4) -> Iterator[SpanMapping]:
    """Stream the grammar's span assignments over the document.

    The document gets the synthetic end marker appended. Structurally
    deterministic compilations run as-is; anything else goes through
    determinization first, which also squeezes out duplicate results
    that grammar-level ambiguity would produce.
    """
    vpt = compile_vpeg(vpeg)
    doc = [_retag(tok, vpt.alphabet) for tok in tokens]
    doc.append(Token(TokenKind.NEUTRAL, END_MARKER))
    mode = "check" if is_io_deterministic(vpt) else "determinize"
    for word in engine.evaluate(vpt, doc, mode=mode, smoothing=smoothing):
        yield decode_mapping(word, vpeg.variables)


def _retag(tok: Token, alphabet: StructuredAlphabet) -> Token:
    """Check a document token against the grammar's alphabet."""
    if tok.name == END_MARKER or not alphabet.kind_of(tok.name, tok.kind):
        raise GrammarError(
            f"document symbol {tok.name!r} not in grammar alphabet"
        )
    return tok
