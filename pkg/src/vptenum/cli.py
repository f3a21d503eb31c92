"""Command-line front end.

Subcommands: run (evaluate a transducer over a document), oracle
(brute-force reference, optionally diffed against the engine), spanner
(grammar evaluation), determinize (rewrite a transducer file), bench
(instrumented synthetic runs as CSV).

Exit codes: 0 success, 1 usage, 2 bad input (document, machine file, or
grammar), 3 resource cap, 4 ambiguity-mode violation, 5 oracle diff
mismatch.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from vptenum import engine, formats, spanner
from vptenum.ecs import EMPTY
from vptenum.enumtree import DEFAULT_SMOOTHING, Enumerator
from vptenum.nested import StructuredAlphabet, Token, TokenKind, TokenizeError, tokenize
from vptenum.vpa import ResourceCapError
from vptenum.vpt import Vpt, is_io_deterministic, io_determinize, oracle_enumerate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_MODE = 4
EXIT_DIFF = 5


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is taken
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def render_word(word) -> str:
    if not word:
        return "ε"
    return " ".join(f"{sym}@{pos}" for sym, pos in word)


def _document(path: str, alphabet: StructuredAlphabet):
    """Token stream for a document path; '-' reads stdin incrementally."""
    if path == "-":
        return tokenize(sys.stdin, alphabet)
    handle = open(path, "r", encoding="utf-8")
    return tokenize(handle, alphabet)


def _load_vpt(path: str) -> Vpt:
    with open(path, "r", encoding="utf-8") as fh:
        return formats.parse_vpt(fh.read())


def _mode_of(args) -> str:
    if args.trust_unambiguous:
        return "trust"
    if args.determinize_first:
        return "determinize"
    return "check"


def _add_mode_flags(sub) -> None:
    group = sub.add_mutually_exclusive_group()
    group.add_argument(
        "--check-deterministic",
        action="store_true",
        help="refuse transducers that are not deterministic in (letter, output); the default",
    )
    group.add_argument(
        "--trust-unambiguous",
        action="store_true",
        help="skip the check; the caller vouches for one accepting run per result",
    )
    group.add_argument(
        "--determinize-first",
        action="store_true",
        help="determinize before evaluating",
    )


def _write_stats(args, stats: engine.EngineStats, enum: Enumerator | None) -> None:
    dest = open(args.stats_out, "w", encoding="utf-8", newline="") if args.stats_out else sys.stderr
    try:
        writer = csv.writer(dest)
        writer.writerow(
            ["record", "index", "visits", "scans", "ecs_calls", "nodes_added", "delay_steps", "output_len"]
        )
        for k, sym in enumerate(stats.per_symbol, start=1):
            writer.writerow(["symbol", k, sym.visits, sym.scans, sym.ecs_calls, sym.nodes_added, "", ""])
        fin = stats.finalize
        writer.writerow(["finalize", "", fin.visits, fin.scans, fin.ecs_calls, fin.nodes_added, "", ""])
        if enum is not None:
            for i, (gap, length) in enumerate(enum.gaps, start=1):
                writer.writerow(["output", i, "", "", "", "", gap, length])
    finally:
        if dest is not sys.stderr:
            dest.close()


def cmd_run(args) -> int:
    vpt = _load_vpt(args.transducer)
    vpt = engine.resolve_mode(vpt, _mode_of(args))
    doc = _document(args.document, vpt.alphabet)
    result = engine.preprocess(vpt, doc, checkpoints=args.checkpoint)
    if args.checkpoint:
        for k, depth, handle in result.checkpoints:
            accepting = "yes" if depth == 0 and handle != EMPTY else "no"
            print(f"checkpoint k={k} depth={depth} accepting={accepting}", file=sys.stderr)
    enum = Enumerator(
        result.arena, result.root, smoothing=args.smoothing, instrument=args.stats
    )
    print("#")
    emitted = 0
    for word in enum:
        print(render_word(word))
        emitted += 1
        if args.limit is not None and emitted >= args.limit:
            break
    print("#")
    if args.stats:
        _write_stats(args, result.stats, enum)
    return EXIT_OK


def cmd_oracle(args) -> int:
    vpt = _load_vpt(args.transducer)
    doc = list(_document(args.document, vpt.alphabet))
    reference = oracle_enumerate(vpt, doc, max_configs=args.max_configs)
    for word in sorted(reference, key=lambda w: (len(w), w)):
        print(render_word(word))
    if args.diff:
        mode = "check" if is_io_deterministic(vpt) else "determinize"
        got = frozenset(engine.evaluate(vpt, doc, mode=mode))
        if got != reference:
            missing = sorted(reference - got, key=repr)
            extra = sorted(got - reference, key=repr)
            print(
                f"mismatch: engine lacks {len(missing)} word(s), "
                f"adds {len(extra)} word(s)",
                file=sys.stderr,
            )
            for w in missing[:5]:
                print(f"  missing: {render_word(w)}", file=sys.stderr)
            for w in extra[:5]:
                print(f"  extra:   {render_word(w)}", file=sys.stderr)
            return EXIT_DIFF
    return EXIT_OK


def cmd_spanner(args) -> int:
    with open(args.grammar, "r", encoding="utf-8") as fh:
        vpeg = spanner.parse_vpeg(fh.read())
    doc_alphabet = StructuredAlphabet(
        opens=vpeg.alphabet.opens,
        closes=vpeg.alphabet.closes,
        neutrals=vpeg.alphabet.neutrals,
    )
    doc = _document(args.document, doc_alphabet)
    emitted = 0
    for mapping in spanner.evaluate_spanner(vpeg, doc):
        print(mapping.render())
        emitted += 1
        if args.limit is not None and emitted >= args.limit:
            break
    return EXIT_OK


def cmd_determinize(args) -> int:
    vpt = _load_vpt(args.transducer)
    det = io_determinize(vpt, max_states=args.max_states)
    text = formats.serialize_vpt(det)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _bench_vpt() -> Vpt:
    # one bracket pair around a run of binary choices and silent padding
    alphabet = StructuredAlphabet(
        opens=frozenset({"r"}), closes=frozenset({"r"}), neutrals=frozenset({"b", "c"})
    )
    return Vpt(
        states=frozenset({"q0", "q1", "qf"}),
        alphabet=alphabet,
        stack_symbols=frozenset({"X"}),
        output_symbols=frozenset({"u", "v"}),
        opens=frozenset({("q0", "r", None, "q1", "X")}),
        closes=frozenset({("q1", "r", None, "X", "qf")}),
        neutrals=frozenset(
            {("q1", "b", "u", "q1"), ("q1", "b", "v", "q1"), ("q1", "c", None, "q1")}
        ),
        initial=frozenset({"q0"}),
        final=frozenset({"qf"}),
    )


def _bench_doc(length: int, choices: int):
    if length < choices + 2:
        raise ValueError(f"bench length {length} too short for {choices} choices")
    yield Token(TokenKind.OPEN, "r")
    for _ in range(choices):
        yield Token(TokenKind.NEUTRAL, "b")
    for _ in range(length - choices - 2):
        yield Token(TokenKind.NEUTRAL, "c")
    yield Token(TokenKind.CLOSE, "r")


def cmd_bench(args) -> int:
    lengths = [int(part) for part in args.lengths.split(",") if part]
    vpt = _bench_vpt()
    dest = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(dest)
        writer.writerow(
            ["record", "length", "index", "visits", "scans", "ecs_calls", "nodes_added", "delay_steps", "output_len"]
        )
        for length in lengths:
            result = engine.preprocess(vpt, _bench_doc(length, args.choices))
            for k, sym in enumerate(result.stats.per_symbol, start=1):
                writer.writerow(
                    ["symbol", length, k, sym.visits, sym.scans, sym.ecs_calls, sym.nodes_added, "", ""]
                )
            enum = Enumerator(result.arena, result.root, instrument=True)
            taken = 0
            for _ in enum:
                taken += 1
                if taken >= args.limit:
                    break
            for i, (gap, out_len) in enumerate(enum.gaps, start=1):
                writer.writerow(["output", length, i, "", "", "", "", gap, out_len])
    finally:
        if dest is not sys.stdout:
            dest.close()
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="vptenum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a transducer over a document")
    run.add_argument("-t", "--transducer", required=True, help="transducer file")
    run.add_argument("-d", "--document", required=True, help="document file, or - for stdin")
    _add_mode_flags(run)
    run.add_argument("--limit", type=int, default=None, help="stop after this many results")
    run.add_argument("--smoothing", type=int, default=DEFAULT_SMOOTHING, help="delay smoothing factor")
    run.add_argument("--checkpoint", action="store_true", help="report per-symbol acceptance on stderr")
    run.add_argument("--stats", action="store_true", help="emit instrumentation CSV")
    run.add_argument("--stats-out", default=None, help="write the CSV here instead of stderr")
    run.set_defaults(func=cmd_run)

    oracle = sub.add_parser("oracle", help="brute-force reference output set")
    oracle.add_argument("-t", "--transducer", required=True)
    oracle.add_argument("-d", "--document", required=True)
    oracle.add_argument("--diff", action="store_true", help="also run the engine and compare")
    oracle.add_argument("--max-configs", type=int, default=5_000_000)
    oracle.set_defaults(func=cmd_oracle)

    span = sub.add_parser("spanner", help="evaluate an extraction grammar")
    span.add_argument("-g", "--grammar", required=True, help="grammar file")
    span.add_argument("-d", "--document", required=True)
    span.add_argument("--limit", type=int, default=None)
    span.set_defaults(func=cmd_spanner)

    det = sub.add_parser("determinize", help="rewrite a transducer deterministically")
    det.add_argument("-t", "--transducer", required=True)
    det.add_argument("-o", "--out", default=None, help="output file (default stdout)")
    det.add_argument("--max-states", type=int, default=4096)
    det.set_defaults(func=cmd_determinize)

    bench = sub.add_parser("bench", help="instrumented synthetic runs")
    bench.add_argument("--lengths", default="1000,10000,100000", help="comma-separated document lengths")
    bench.add_argument("--choices", type=int, default=40, help="binary choice positions per document")
    bench.add_argument("--limit", type=int, default=10_000, help="results enumerated per document")
    bench.add_argument("-o", "--out", default=None, help="CSV file (default stdout)")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        TokenizeError,
        engine.NestingError,
        formats.FormatError,
        spanner.GrammarError,
        spanner.NotFunctionalError,
    ) as exc:
        print(f"vptenum: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        # the consumer closed our stdout (e.g. `vptenum bench | head`);
        # silence the interpreter-exit flush and follow Unix convention
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(f"vptenum: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceCapError as exc:
        print(f"vptenum: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except engine.AmbiguityError as exc:
        print(f"vptenum: mode violation: {exc}", file=sys.stderr)
        return EXIT_MODE


if __name__ == "__main__":
    raise SystemExit(main())
