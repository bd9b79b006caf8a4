import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import quadratic_by_sum
from treetrans.examples import TREE_TDTTS, builtin
from treetrans.fuzz import random_model
from treetrans.rules import TransductionError
from treetrans.sharing import (
    CSV_HEADER,
    dedup,
    growth_report,
    is_minimal,
    memo_bound,
    quadratic_input,
    quadratic_size,
    run_shared,
)
from treetrans.tdtt import run_topdown
from treetrans.terms import (
    RankedAlphabet,
    TermDag,
    TermError,
    Tree,
    dag_stats,
    enumerate_trees,
    format_term,
    parse_dag,
    parse_term,
    random_tree,
    tree_size,
    tree_to_dag,
    unfold,
)

ABC = RankedAlphabet.of({"a": 2, "b": 1, "c": 0})


def test_quadratic_on_two():
    tt = builtin("quadratic")
    d = run_shared(tt, quadratic_input(2))
    assert format_term(unfold(d)) == "a(b(b(c)),a(b(c),c))"
    assert dag_stats(d)[0] == 6
    assert dag_stats(dedup(d)) == (5, 6)


def test_figure_dag_is_already_minimal():
    d = parse_dag("0: c\n1: b(0)\n2: b(1)\n3: a(1,0)\n4: a(2,3)\nroot: 4")
    assert is_minimal(d)
    assert dag_stats(dedup(d)) == (5, 6)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 10, 100])
def test_quadratic_closed_form(n):
    assert quadratic_size(n) == quadratic_by_sum(n)


def test_quadratic_tree_sizes_up_to_100():
    tt = builtin("quadratic")
    for n in range(1, 101):
        assert tree_size(unfold(run_shared(tt, quadratic_input(n)))) == quadratic_by_sum(n)


def test_shared_unfolds_to_topdown_on_the_family():
    tt = builtin("quadratic")
    for n in range(51):
        t = quadratic_input(n)
        assert unfold(run_shared(tt, t)) == run_topdown(tt, t)


@pytest.mark.parametrize("name", TREE_TDTTS)
def test_shared_unfolds_to_topdown_on_enumerated_inputs(name):
    tt = builtin(name)
    for t in enumerate_trees(tt.input, 7):
        try:
            want = run_topdown(tt, t)
        except TransductionError:
            with pytest.raises(TransductionError):
                run_shared(tt, t)
            continue
        d = run_shared(tt, t)
        assert unfold(d) == want
        assert dag_stats(d)[0] <= memo_bound(tt, t)
        dd = dedup(d)
        assert unfold(dd) == want and is_minimal(dd)
        assert dag_stats(dd)[0] <= dag_stats(d)[0]


def test_conditional_swap_shared():
    tt = builtin("conditional-swap")
    d = run_shared(tt, parse_term("a(b(c),c)", ABC))
    assert format_term(unfold(d)) == "a(c,b(c))"


def test_no_sharing_gives_a_tree_shaped_dag():
    tt = builtin("conditional-swap")
    t = parse_term("a(b(c),c)", ABC)
    d = run_shared(tt, t)
    nodes, edges = dag_stats(d)
    assert nodes == tree_size(unfold(d)) and edges == nodes - 1


def test_linear_vs_quadratic_growth():
    rep = growth_report(builtin("quadratic"), quadratic_input, [25, 50])
    r25, r50 = rep.row(25), rep.row(50)
    assert 1.8 <= r50.dag_dedup_nodes / r25.dag_dedup_nodes <= 2.2
    assert 3.5 <= r50.tree_size / r25.tree_size <= 4.5


def test_growth_report_csv():
    rep = growth_report(builtin("quadratic"), quadratic_input, range(1, 4))
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) == "n,input_size,tree_size,dag_memo_nodes,dag_dedup_nodes,micros"
    assert len(lines) == 4
    n, insize, size, memo, ded, _ = lines[2].split(",")
    assert (n, insize, size, memo, ded) == ("2", "3", "8", "6", "5")
    for r in rep.rows:
        assert min(r.input_size, r.tree_size, r.dag_memo_nodes, r.dag_dedup_nodes) > 0
    with pytest.raises(KeyError):
        rep.row(99)


def test_dedup_is_idempotent_and_keeps_unique_trees():
    t = parse_term("a(b(c),c)", ABC)
    d = tree_to_dag(t)
    assert dag_stats(dedup(d)) == (3, 3)  # c, b(c) and the root
    once = dedup(d)
    assert dedup(once) == once
    uniq = tree_to_dag(parse_term("b(c)", ABC))
    assert dag_stats(dedup(uniq)) == dag_stats(uniq)


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_dedup_preserves_unfold_and_is_minimal(seed):
    t = random_tree(ABC, 25, random.Random(seed))
    d = dedup(tree_to_dag(t))
    assert unfold(d) == t
    assert is_minimal(d)
    assert dedup(d) == d


def test_is_minimal_detects_duplicates():
    d = TermDag({0: ("c", ()), 1: ("c", ()), 2: ("a", (0, 1))}, 2)
    assert not is_minimal(d)
    assert is_minimal(dedup(d))


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_fuzzed_tree_tdtts_share_correctly(index):
    tt = random_model("tdtt", 5, index)
    if tt.string_output:
        return
    for t in enumerate_trees(tt.input, 5):
        try:
            want = run_topdown(tt, t)
        except TransductionError:
            continue
        d = run_shared(tt, t)
        assert unfold(d) == want
        assert dag_stats(d)[0] <= memo_bound(tt, t)


def test_string_output_is_rejected():
    with pytest.raises(TermError):
        run_shared(builtin("postfix"), Tree("c"))
