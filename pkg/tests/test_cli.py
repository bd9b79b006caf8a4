import io
import sys

import pytest

from treetrans.cli import main
from treetrans.examples import SOURCES, builtin
from treetrans.syntax import format_definition, parse_definition


def cli(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


@pytest.fixture
def swap_file(tmp_path):
    p = tmp_path / "swap.tt"
    p.write_text(SOURCES["conditional-swap"])
    return str(p)


def test_run_tree(swap_file):
    assert cli("run", "-t", swap_file, "-i", "a(b(c),c)") == (0, "a(c,b(c))\n")


def test_run_builtin_by_name():
    assert cli("run", "-t", "builtin:postfix", "-i", "a(b(c),c)") == (0, "cbca\n")
    assert cli("run", "-t", "postfix", "-i", "a(b(c),c)") == (0, "cbca\n")


def test_run_string_pipeline():
    code, out = cli("run", "-t", "encode", "-t", "builtin:reverse-mtt", "-t", "decode", "-s", "abc")
    assert (code, out) == (0, "cba\n")


def test_run_string_on_a_unary_transducer_encodes_automatically():
    assert cli("run", "-t", "builtin:unary-reverse", "-s", "abc") == (0, "cba\n")


def test_run_shared_and_dedup():
    code, out = cli("run", "-t", "builtin:quadratic", "-i", "S(S(0))", "--shared")
    assert code == 0
    assert len([ln for ln in out.splitlines() if not ln.startswith("root")]) == 6
    code, out = cli("run", "-t", "builtin:quadratic", "-i", "S(S(0))", "--shared", "--dedup")
    assert len([ln for ln in out.splitlines() if not ln.startswith("root")]) == 5


def test_run_bottom_up(swap_file):
    code, out = cli("run", "-t", swap_file, "-i", "a(b(c),c)", "--bottom-up")
    assert code == 0
    assert out.splitlines() == ["q0 = a(c,b(c))", "q1 = a(b(c),c)", "output = a(c,b(c))"]


def test_undefined_transduction_exits_1(tmp_path):
    p = tmp_path / "partial.tt"
    p.write_text(SOURCES["conditional-swap"].replace("q1<c> -> c;", ""))
    assert cli("run", "-t", str(p), "-i", "b(c)")[0] == 1


def test_usage_errors_exit_2(tmp_path, swap_file):
    assert cli("run", "-t", swap_file)[0] == 2  # no input
    assert cli("run", "-t", str(tmp_path / "missing.tt"), "-i", "c")[0] == 2
    assert cli("run", "-t", swap_file, "-i", "a(c")[0] == 2
    assert cli("nonsense")[0] == 2
    bad = tmp_path / "bad.tt"
    bad.write_text("input {c:0}\nrules {")
    assert cli("run", "-t", str(bad), "-i", "c")[0] == 2
    assert cli("convert", "-t", swap_file, "--eliminate-lookahead")[0] == 2


@pytest.mark.parametrize(
    "flag,name",
    [
        ("--to-register-machine", "b-replacement"),
        ("--eliminate-lookahead", "b-replacement-mtt"),
        ("--tdtts-to-mtt", "unary-reverse"),
        ("--mtt-to-tdtts", "reverse-mtt"),
        ("--tdtts-to-sst", "unary-lookahead"),
    ],
)
def test_convert_round_trips_and_is_equivalent(tmp_path, flag, name):
    out_file = tmp_path / "out.txt"
    code, _ = cli("convert", "-t", "builtin:" + name, flag, "-o", str(out_file))
    assert code == 0
    converted = parse_definition(out_file.read_text())
    assert format_definition(converted) == out_file.read_text()
    assert cli("check-equiv", "builtin:" + name, str(out_file), "--max-size", "6")[0] == 0


def test_check_equiv_reports_counterexample(tmp_path, swap_file):
    p = tmp_path / "altered.tt"
    p.write_text(SOURCES["conditional-swap"].replace("q1<b(t)> -> b(q1<t>);", "q1<b(t)> -> c;"))
    code, out = cli("check-equiv", swap_file, str(p), "--max-size", "4")
    assert code == 1
    assert out.startswith("FAIL") and "b(b(c))" in out
    code, out = cli("check-equiv", swap_file, swap_file, "--max-size", "4")
    assert code == 0 and out.startswith("PASS")


def test_check_equiv_pipelines():
    code, out = cli("check-equiv", "builtin:reverse-sst", "encode,builtin:reverse-mtt,decode", "--max-size", "5")
    assert code == 0, out


def test_fuzz_command():
    code, out = cli("fuzz", "--kind", "tdtt", "--seed", "1", "--count", "2", "--max-size", "4")
    assert code == 0
    assert out == cli("fuzz", "--kind", "tdtt", "--seed", "1", "--count", "2", "--max-size", "4")[1]
    assert out.splitlines()[-1].endswith("0 failures")
    code, one = cli("fuzz", "--kind", "tdtt", "--seed", "1", "--index", "1", "--max-size", "4")
    assert code == 0 and "model 1 " in one and "model 0 " not in one


def test_stats_csv(tmp_path):
    p = tmp_path / "growth.csv"
    assert cli("stats", "--example", "quadratic", "--n-from", "1", "--n-to", "5", "--csv", str(p))[0] == 0
    rows = p.read_text().splitlines()
    assert rows[0] == "n,input_size,tree_size,dag_memo_nodes,dag_dedup_nodes,micros"
    assert len(rows) == 6
    assert rows[2].startswith("2,3,8,6,5,")
    assert cli("stats", "--example", "quadratic", "--n-from", "5", "--n-to", "1")[0] == 2


def test_dot_command():
    code, out = cli("dot", "-i", "c")
    assert code == 0 and out.startswith("digraph") and out.count("[label=") == 1
    code, out = cli("dot", "-t", "builtin:quadratic", "-i", "S(S(0))", "--shared", "--dedup")
    assert code == 0 and out.count(" -> ") == 6
    assert cli("dot", "-t", "builtin:b-replacement", "--lookahead")[0] == 0
    code, out = cli("dot", "-t", "builtin:conditional-swap", "-i", "a(b(c),c)", "--trace")
    assert code == 0 and "q0 = a(c,b(c))" in out
    assert cli("dot", "-t", "builtin:postfix", "-i", "c")[0] == 2


def test_examples_command():
    code, out = cli("examples")
    assert code == 0 and "copying-mtt" in out.split()
    code, out = cli("examples", "conditional-swap")
    assert parse_definition(out) == builtin("conditional-swap")
    assert cli("examples", "no-such-thing")[0] == 2


def test_stdin_definition(monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO(SOURCES["postfix"]))
    assert cli("run", "-t", "-", "-i", "b(c)") == (0, "cb\n")
