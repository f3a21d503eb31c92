"""Command-line surface: subcommands, exit codes, output framing."""

import csv
import io
import subprocess
import sys

import pytest

from vptenum import engine
from vptenum.cli import (
    EXIT_CAP,
    EXIT_DIFF,
    EXIT_INPUT,
    EXIT_MODE,
    EXIT_OK,
    EXIT_USAGE,
    main,
    render_word,
)
from vptenum.formats import parse_vpt
from vptenum.vpt import is_io_deterministic

# one bracket pair, two outputs per b, silent c padding
CHOICE_VPT = """\
states: q0 q1 qf
initial: q0
final: qf
stack: X
outputs: u v
open r q0 -> q1 push X out -
close r q1 pop X -> qf out -
neutral b q1 -> q1 out u
neutral b q1 -> q1 out v
neutral c q1 -> q1 out -
"""

# two transitions under the same (state, letter, output) key
AMBIGUOUS_VPT = """\
states: q0 q1
initial: q0
final: q1
outputs: o
neutral c q0 -> q0 out o
neutral c q0 -> q1 out o
neutral c q1 -> q1 out o
"""

GRAMMAR = """\
var x
start S
S -> <a A a> T | <a P a> S
A -> (x B
B -> c B | x) C
C -> eps
P -> c P | eps
T -> <a P a> T | eps
"""


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


def run_main(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out.splitlines(), err.splitlines()


class TestRun:
    def test_framing_and_words(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b b r>")
        code, out, err = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_OK
        assert out[0] == "#" and out[-1] == "#"
        assert sorted(out[1:-1]) == ["u@2 u@3", "u@2 v@3", "v@2 u@3", "v@2 v@3"]
        assert err == []

    def test_empty_word_prints_epsilon(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r c c r>")
        code, out, _ = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_OK
        assert out == ["#", "ε", "#"]

    def test_rejected_document_double_hash(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "c")
        code, out, _ = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_OK
        assert out == ["#", "#"]

    def test_limit(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b b b r>")
        code, out, _ = run_main(capsys, ["run", "-t", t, "-d", d, "--limit", "3"])
        assert code == EXIT_OK
        assert len(out) == 5  # framing + 3 words

    def test_document_from_stdin(self, capsys, files, monkeypatch):
        t = files("m.vpt", CHOICE_VPT)
        monkeypatch.setattr(sys, "stdin", io.StringIO("<r b r>"))
        code, out, _ = run_main(capsys, ["run", "-t", t, "-d", "-"])
        assert code == EXIT_OK
        assert sorted(out[1:-1]) == ["u@2", "v@2"]

    def test_document_comments(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "# header note\n<r b\n# middle\nr>\n")
        code, out, _ = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_OK
        assert sorted(out[1:-1]) == ["u@2", "v@2"]

    def test_checkpoint_lines(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r c r>")
        code, out, err = run_main(capsys, ["run", "-t", t, "-d", d, "--checkpoint"])
        assert code == EXIT_OK
        assert err == [
            "checkpoint k=1 depth=1 accepting=no",
            "checkpoint k=2 depth=1 accepting=no",
            "checkpoint k=3 depth=0 accepting=yes",
        ]

    def test_checkpoint_accepting_prefixes(self, capsys, files):
        # the machine accepts exactly one element, so acceptance turns
        # on after the first close and off again once a second element
        # strands every run
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b r> <r r>")
        code, _, err = run_main(capsys, ["run", "-t", t, "-d", d, "--checkpoint"])
        assert code == EXIT_OK
        flags = [line.rsplit("=", 1)[1] for line in err]
        assert flags == ["no", "no", "yes", "no", "no"]

    def test_smoothing_flag(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b b r>")
        code, out, _ = run_main(capsys, ["run", "-t", t, "-d", d, "--smoothing", "9"])
        assert code == EXIT_OK
        assert len(out) == 6

    def test_stats_csv_schema(self, capsys, files, tmp_path):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b b r>")
        stats = tmp_path / "stats.csv"
        code, _, _ = run_main(
            capsys, ["run", "-t", t, "-d", d, "--stats", "--stats-out", str(stats)]
        )
        assert code == EXIT_OK
        rows = list(csv.reader(stats.open()))
        assert rows[0] == [
            "record",
            "index",
            "visits",
            "scans",
            "ecs_calls",
            "nodes_added",
            "delay_steps",
            "output_len",
        ]
        kinds = [row[0] for row in rows[1:]]
        assert kinds.count("symbol") == 4  # one per document symbol
        assert kinds.count("finalize") == 1
        assert kinds.count("output") == 4  # one per enumerated word
        for row in rows[1:]:
            if row[0] == "symbol":
                assert int(row[2]) >= 0 and int(row[5]) >= 0
            if row[0] == "output":
                assert int(row[6]) >= 1  # delay steps
                assert int(row[7]) in (0, 2)  # ε or two emissions

    def test_stats_default_to_stderr(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b r>")
        code, _, err = run_main(capsys, ["run", "-t", t, "-d", d, "--stats"])
        assert code == EXIT_OK
        assert err[0].startswith("record,index,visits")

    def test_ambiguous_machine_refused_by_default(self, capsys, files):
        t = files("m.vpt", AMBIGUOUS_VPT)
        d = files("d.txt", "c c")
        code, _, err = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_MODE
        assert err and err[0].startswith("vptenum: mode violation:")

    def test_determinize_first_deduplicates(self, capsys, files):
        t = files("m.vpt", AMBIGUOUS_VPT)
        d = files("d.txt", "c c")
        code, out, _ = run_main(
            capsys, ["run", "-t", t, "-d", d, "--determinize-first"]
        )
        assert code == EXIT_OK
        assert out == ["#", "o@1 o@2", "#"]

    def test_trust_mode_shows_the_lie(self, capsys, files):
        # vouching for a machine with two accepting runs per result
        # yields duplicates: the check exists for a reason
        t = files("m.vpt", AMBIGUOUS_VPT)
        d = files("d.txt", "c c")
        code, out, _ = run_main(
            capsys, ["run", "-t", t, "-d", d, "--trust-unambiguous"]
        )
        assert code == EXIT_OK
        assert out == ["#", "o@1 o@2", "o@1 o@2", "#"]

    def test_unbalanced_document(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b")
        code, _, err = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_INPUT
        assert "unbalanced open at position 1" in err[0]

    def test_unbalanced_close(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b r> r>")
        code, _, err = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_INPUT
        assert "unbalanced close at position 4" in err[0]

    def test_unknown_document_symbol(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r z r>")
        code, _, err = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_INPUT

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run_main(
            capsys,
            ["run", "-t", str(tmp_path / "none.vpt"), "-d", str(tmp_path / "none.txt")],
        )
        assert code == EXIT_INPUT
        assert err[0].startswith("vptenum: error:")

    def test_malformed_machine_file(self, capsys, files):
        t = files("m.vpt", "states q0\n")
        d = files("d.txt", "c")
        code, _, err = run_main(capsys, ["run", "-t", t, "-d", d])
        assert code == EXIT_INPUT
        assert "vptenum: error:" in err[0]


class TestOracle:
    def test_sorted_reference_output(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b b r>")
        code, out, _ = run_main(capsys, ["oracle", "-t", t, "-d", d])
        assert code == EXIT_OK
        assert out == ["u@2 u@3", "u@2 v@3", "v@2 u@3", "v@2 v@3"]

    def test_diff_agrees(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b c b r>")
        code, _, err = run_main(capsys, ["oracle", "-t", t, "-d", d, "--diff"])
        assert code == EXIT_OK
        assert err == []

    def test_empty_reference_set_prints_nothing(self, capsys, files):
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "c")  # no transition from q0 on c: rejected
        code, out, err = run_main(capsys, ["oracle", "-t", t, "-d", d])
        assert code == EXIT_OK
        assert out == []
        assert err == []

    def test_diff_mismatch_exit_code(self, capsys, files, monkeypatch):
        # force a disagreement to exercise the reporting path
        t = files("m.vpt", CHOICE_VPT)
        d = files("d.txt", "<r b r>")
        monkeypatch.setattr(engine, "evaluate", lambda *a, **k: [(("u", 2),)])
        code, _, err = run_main(capsys, ["oracle", "-t", t, "-d", d, "--diff"])
        assert code == EXIT_DIFF
        assert err[0] == "mismatch: engine lacks 1 word(s), adds 0 word(s)"
        assert err[1] == "  missing: v@2"


class TestSpanner:
    def test_mappings(self, capsys, files):
        g = files("g.vpeg", GRAMMAR)
        d = files("d.txt", "<a c c a> <a c a>")
        code, out, _ = run_main(capsys, ["spanner", "-g", g, "-d", d])
        assert code == EXIT_OK
        assert sorted(out) == ["x=[2,4)", "x=[6,7)"]

    def test_limit(self, capsys, files):
        g = files("g.vpeg", GRAMMAR)
        d = files("d.txt", "<a c a> <a c a> <a c a>")
        code, out, _ = run_main(capsys, ["spanner", "-g", g, "-d", d, "--limit", "2"])
        assert code == EXIT_OK
        assert len(out) == 2

    def test_rejected_document_prints_nothing(self, capsys, files):
        g = files("g.vpeg", GRAMMAR)
        d = files("d.txt", "c")
        code, out, _ = run_main(capsys, ["spanner", "-g", g, "-d", d])
        assert code == EXIT_OK
        assert out == []

    def test_bad_grammar(self, capsys, files):
        g = files("g.vpeg", "start S\nS -> A B\nA -> eps\nB -> eps")
        d = files("d.txt", "c")
        code, _, err = run_main(capsys, ["spanner", "-g", g, "-d", d])
        assert code == EXIT_INPUT
        assert "not a grammar shape" in err[0]

    def test_not_functional_grammar(self, capsys, files):
        g = files("g.vpeg", "var x\nstart S\nS -> eps")
        d = files("d.txt", "")
        code, _, err = run_main(capsys, ["spanner", "-g", g, "-d", d])
        assert code == EXIT_INPUT
        assert "not functional" in err[0]

    def test_foreign_document_symbol(self, capsys, files):
        g = files("g.vpeg", GRAMMAR)
        d = files("d.txt", "<a z a>")
        code, _, err = run_main(capsys, ["spanner", "-g", g, "-d", d])
        assert code == EXIT_INPUT


class TestDeterminize:
    def test_stdout_output(self, capsys, files):
        t = files("m.vpt", AMBIGUOUS_VPT)
        code, out, _ = run_main(capsys, ["determinize", "-t", t])
        assert code == EXIT_OK
        det = parse_vpt("\n".join(out) + "\n")
        assert is_io_deterministic(det)

    def test_file_output(self, capsys, files, tmp_path):
        t = files("m.vpt", AMBIGUOUS_VPT)
        dest = tmp_path / "det.vpt"
        code, out, _ = run_main(capsys, ["determinize", "-t", t, "-o", str(dest)])
        assert code == EXIT_OK
        assert out == []
        assert is_io_deterministic(parse_vpt(dest.read_text()))

    def test_state_cap(self, capsys, files):
        t = files("m.vpt", AMBIGUOUS_VPT)
        code, _, err = run_main(capsys, ["determinize", "-t", t, "--max-states", "1"])
        assert code == EXIT_CAP
        assert err[0].startswith("vptenum: resource cap:")


class TestBench:
    def test_csv_schema(self, capsys, files, tmp_path):
        dest = tmp_path / "bench.csv"
        code, out, _ = run_main(
            capsys,
            ["bench", "--lengths", "20,40", "--choices", "3", "--limit", "10", "-o", str(dest)],
        )
        assert code == EXIT_OK
        assert out == []
        rows = list(csv.reader(dest.open()))
        assert rows[0] == [
            "record",
            "length",
            "index",
            "visits",
            "scans",
            "ecs_calls",
            "nodes_added",
            "delay_steps",
            "output_len",
        ]
        symbol_rows = [r for r in rows[1:] if r[0] == "symbol"]
        output_rows = [r for r in rows[1:] if r[0] == "output"]
        assert len(symbol_rows) == 20 + 40
        assert {r[1] for r in symbol_rows} == {"20", "40"}
        # 2^3 words per document, both documents fully enumerated
        assert len(output_rows) == 16
        for r in output_rows:
            assert int(r[7]) >= 1

    def test_stdout_default(self, capsys):
        code, out, _ = run_main(
            capsys, ["bench", "--lengths", "10", "--choices", "2", "--limit", "4"]
        )
        assert code == EXIT_OK
        assert out[0].startswith("record,length,index")


class TestUsage:
    def test_no_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == EXIT_USAGE

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--frobnicate"])
        assert exc.value.code == EXIT_USAGE

    def test_conflicting_mode_flags(self, files):
        t = files("m.vpt", CHOICE_VPT)
        with pytest.raises(SystemExit) as exc:
            main(["run", "-t", t, "-d", "-", "--trust-unambiguous", "--determinize-first"])
        assert exc.value.code == EXIT_USAGE


class TestRenderWord:
    def test_empty(self):
        assert render_word(()) == "ε"

    def test_positions(self):
        assert render_word((("o", 1), ("p", 12))) == "o@1 p@12"


def test_console_script_entry_point(tmp_path):
    t = tmp_path / "m.vpt"
    t.write_text(CHOICE_VPT, encoding="utf-8")
    d = tmp_path / "d.txt"
    d.write_text("<r b r>", encoding="utf-8")
    proc = subprocess.run(
        ["vptenum", "run", "-t", str(t), "-d", str(d)],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0
    lines = proc.stdout.splitlines()
    assert lines[0] == "#" and lines[-1] == "#"
    assert sorted(lines[1:-1]) == ["u@2", "v@2"]


def test_broken_pipe_exits_quietly():
    proc = subprocess.Popen(
        [sys.executable, "-m", "vptenum.cli", "bench", "--lengths", "100000", "--limit", "4096"],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    for _ in range(2):
        proc.stdout.readline()
    proc.stdout.close()
    _, err = proc.communicate(timeout=60)
    assert proc.returncode == EXIT_OK
    assert err == b""
