import pytest

from oracles import UNDEF, remark_formula
from treetrans.examples import UNARY_TDTTS, builtin
from treetrans.rules import TransductionError
from treetrans.sst import (
    OutputUndefined,
    Reg,
    Sst,
    doubling_sst,
    identity_sst,
    is_copyless,
    remark_example,
    reverse_sst,
    run_sst,
    sst_configuration,
    swap_sst,
    tdtts_unary_to_sst,
)
from treetrans.syntax import format_definition, parse_definition
from treetrans.tdtt import run_topdown
from treetrans.terms import TermError, encode_string, enumerate_strings


def sst_outcome(s, w):
    try:
        return run_sst(s, w)
    except TransductionError:
        return UNDEF


def tt_outcome(tt, w):
    try:
        return run_topdown(tt, encode_string(w, tt.input))
    except TransductionError:
        return UNDEF


def test_reverse_reads_right_to_left():
    assert run_sst(reverse_sst(), "abc") == "cba"
    for w in enumerate_strings("abc", 6):
        assert run_sst(reverse_sst(), w) == w[::-1]


def test_identity_sst():
    for w in enumerate_strings("abc", 6):
        assert run_sst(identity_sst(), w) == w


def test_remark_goldens():
    s = remark_example()
    assert run_sst(s, "aa") == "aa"
    assert run_sst(s, "abab") == "abbb"
    assert run_sst(s, "") == ""
    assert run_sst(s, "b") == "b"


def test_remark_matches_formula_up_to_length_10():
    s = remark_example()
    for w in enumerate_strings("ab", 10):
        assert run_sst(s, w) == remark_formula(w)


def test_copyless_checks():
    assert is_copyless(reverse_sst()) is True
    assert is_copyless(remark_example()) is True
    bad = is_copyless(doubling_sst())
    assert bad is not True
    assert bad[0].where == ("update", "s", "a") and bad[0].register == "X" and bad[0].count == 2


def test_copy_in_output_is_reported():
    X = Reg("X")
    s = Sst(("a",), ("a",), ("s",), "s", ("X",), {"X": ()},
            {("s", "a"): ("s", {"X": ("a", X)})}, {"s": (X, X)})
    assert run_sst(s, "aa") == "aaaa"
    (v,) = is_copyless(s)
    assert v.where == ("output", "s")


@pytest.mark.parametrize("n", range(13))
def test_doubling_is_exponential(n):
    assert len(run_sst(doubling_sst(), "a" * n)) == 2 ** n


def test_updates_are_simultaneous():
    s = swap_sst()
    for k in range(8):
        assert run_sst(s, "a" * k) == ("a" * k if k % 2 == 0 else "b" + "a" * k)
    # read sequentially, Y would see the new X and become "baa"
    regs = sst_configuration(s, "a").registers
    assert regs == {"X": "ba", "Y": "a"}


def test_missing_output_raises():
    X = Reg("X")
    s = Sst(("a",), ("a",), ("s", "t"), "s", ("X",), {"X": ()},
            {("s", "a"): ("t", {"X": (X,)}), ("t", "a"): ("t", {"X": (X,)})}, {"s": (X,)})
    assert run_sst(s, "") == ""
    with pytest.raises(OutputUndefined) as info:
        run_sst(s, "a")
    assert info.value.state == "t"


def test_validation():
    X = Reg("X")
    with pytest.raises(TermError):  # transition missing
        Sst(("a", "b"), ("a",), ("s",), "s", ("X",), {"X": ()}, {("s", "a"): ("s", {"X": (X,)})}, {})
    with pytest.raises(TermError):  # unknown register
        Sst(("a",), ("a",), ("s",), "s", ("X",), {"X": ()}, {("s", "a"): ("s", {"X": (Reg("Y"),)})}, {})
    with pytest.raises(TermError):  # init mentions a register
        Sst(("a",), ("a",), ("s",), "s", ("X",), {"X": (X,)}, {("s", "a"): ("s", {"X": (X,)})}, {})


def test_unknown_input_symbol():
    with pytest.raises(TermError):
        run_sst(reverse_sst(), "abd")


@pytest.mark.parametrize("name", UNARY_TDTTS)
def test_tdtts_to_sst_agrees_up_to_length_8(name):
    tt = builtin(name)
    s = tdtts_unary_to_sst(tt)
    assert set(s.registers) == set(tt.states)
    letters = "".join(s.input)
    for w in enumerate_strings(letters, 8):
        assert sst_outcome(s, w) == tt_outcome(tt, w)


def test_lookahead_states_become_control_states():
    tt = builtin("unary-lookahead")
    s = tdtts_unary_to_sst(tt)
    assert set(s.states) == set(tt.lookahead.states) == {"r+", "r-"}


def test_partial_source_gives_undefined_output():
    tt = builtin("unary-partial")
    s = tdtts_unary_to_sst(tt)
    undefined = [w for w in enumerate_strings("ab", 5) if tt_outcome(tt, w) == UNDEF]
    assert undefined
    for w in undefined:
        with pytest.raises(OutputUndefined):
            run_sst(s, w)


def test_identity_tdtts_gives_identity_sst():
    s = tdtts_unary_to_sst(builtin("unary-identity"))
    for w in enumerate_strings("ab", 6):
        assert run_sst(s, w) == w
    assert is_copyless(s) is True


def test_non_unary_input_is_rejected():
    with pytest.raises(TermError):
        tdtts_unary_to_sst(builtin("postfix"))


@pytest.mark.parametrize("make", [remark_example, doubling_sst, reverse_sst, swap_sst])
def test_sst_text_round_trip(make):
    s = make()
    again = parse_definition(format_definition(s))
    assert again == s
