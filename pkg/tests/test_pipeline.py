import pytest

from oracles import leaves, polish_trees
from treetrans.examples import SOURCES, TDTTS, builtin
from treetrans.mtt import tdtts_to_mtt_unary
from treetrans.pipeline import (
    STRING,
    TREE,
    Pipeline,
    PipelineError,
    StageError,
    check_equiv,
    decode_stage,
    encode_stage,
    from_stages,
    run_pipeline,
    stage,
    yield_stage,
)
from treetrans.rules import UNDEFINED
from treetrans.sst import reverse_sst
from treetrans.syntax import parse_definition
from treetrans.tdtt import to_register_machine
from treetrans.terms import RankedAlphabet, Tree, enumerate_strings, enumerate_trees, format_term, parse_term

ABC = RankedAlphabet.of({"a": 2, "b": 1, "c": 0})


def T(text):
    return parse_term(text, ABC)


def test_yield_after_identity_mtt():
    m = builtin("identity-mtt")
    p = Pipeline((stage(m), yield_stage(m.output)))
    assert run_pipeline(p, T("a(c,c)")) == "cc"
    for t in enumerate_trees(ABC, 6):
        assert p(t) == "".join(leaves(t))


def test_decode_reverse_encode():
    m = builtin("reverse-mtt")
    p = from_stages(["encode", m, "decode"])
    assert p.in_kind == STRING and p.out_kind == STRING
    assert run_pipeline(p, "ab") == "ba"
    for w in enumerate_strings("abc", 6):
        assert p(w) == w[::-1]


def test_empty_pipeline_is_identity():
    p = Pipeline()
    t = T("a(b(c),c)")
    assert run_pipeline(p, t) is t
    assert run_pipeline(p, "abc") == "abc"
    assert p.in_kind is None and p.out_kind is None


def test_incompatible_kinds_are_rejected():
    with pytest.raises(PipelineError):
        Pipeline((stage(builtin("postfix")), stage(builtin("identity-mtt"))))
    # tree output over {a,b,c} does not fit a unary input alphabet
    with pytest.raises(PipelineError):
        Pipeline((stage(builtin("conditional-swap")), stage(builtin("reverse-mtt"))))
    with pytest.raises(PipelineError):
        from_stages(["nonsense", builtin("reverse-mtt")])


def test_sst_stage_fits_after_decode():
    m = builtin("reverse-mtt")
    p = from_stages(["encode", m, "decode", reverse_sst()])
    for w in enumerate_strings("abc", 5):
        assert p(w) == w


@pytest.mark.parametrize("cut", [0, 1, 2, 3, 4])
def test_associativity(cut):
    m = builtin("reverse-mtt")
    items = [encode_stage(m.input), stage(m), stage(m), decode_stage(m.output)]
    whole = Pipeline(tuple(items))
    split = Pipeline(tuple(items[:cut])).then(Pipeline(tuple(items[cut:])))
    assert split.stages == whole.stages
    for w in enumerate_strings("abc", 5):
        assert whole(w) == split(w) == w


def test_nested_application_matches_flat():
    swap = builtin("conditional-swap")
    inner = Pipeline((stage(swap),))
    twice = inner.then(inner)
    for t in enumerate_trees(ABC, 6):
        assert twice(t) == inner(inner(t))


ALTERED = SOURCES["conditional-swap"].replace("q1<b(t)> -> b(q1<t>);", "q1<b(t)> -> c;")


def test_altered_swap_gives_a_counterexample():
    left = builtin("conditional-swap")
    right = parse_definition(ALTERED)
    v = check_equiv(left, right, 4)
    assert not v.passed
    assert format_term(v.counterexample.input) == "b(b(c))"
    assert format_term(v.counterexample.left) == "b(b(c))"
    assert format_term(v.counterexample.right) == "b(c)"
    assert v.inputs_tested == 4
    assert "FAIL" in str(v) or "b(b(c))" in str(v)


def test_definedness_counts_as_a_difference():
    tt = builtin("conditional-swap")
    partial = parse_definition(SOURCES["conditional-swap"].replace("q1<c> -> c;", ""))
    v = check_equiv(tt, partial, 5)
    assert not v.passed
    assert v.counterexample.right is UNDEFINED


@pytest.mark.parametrize("bound", range(1, 7))
def test_check_equiv_tests_exactly_the_enumerated_inputs(bound):
    tt = builtin("conditional-swap")
    v = check_equiv(tt, to_register_machine(tt), bound)
    assert v.passed
    assert v.inputs_tested == len(polish_trees(ABC, bound))


def test_unary_tree_inputs_are_strings_in_disguise():
    tt = builtin("unary-reverse")
    v = check_equiv(tt, tdtts_to_mtt_unary(tt), 6)
    assert v.passed
    assert v.inputs_tested == sum(3 ** k for k in range(6))  # at most 6 nodes: strings up to length 5


def test_string_and_tree_sides_are_aligned_automatically():
    v = check_equiv(reverse_sst(), builtin("reverse-mtt"), 5)
    assert v.passed
    assert v.inputs_tested == sum(3 ** k for k in range(6))


def test_different_input_alphabets_are_rejected():
    with pytest.raises(PipelineError):
        check_equiv(builtin("conditional-swap"), builtin("unary-identity"), 3)


def test_stage_errors_carry_the_index():
    partial = parse_definition(SOURCES["conditional-swap"].replace("q1<c> -> c;", ""))
    p = Pipeline((stage(builtin("conditional-swap")), stage(partial)))
    with pytest.raises(StageError) as info:
        p(T("b(c)"))
    assert info.value.index == 1


@pytest.mark.parametrize("name", [n for n in TDTTS if builtin(n).output.__class__ is RankedAlphabet])
def test_shared_and_bottom_up_stages(name):
    tt = builtin(name)
    for sem in ("bottom-up", "shared"):
        assert check_equiv(stage(tt), stage(tt, sem), 6).passed


def test_stage_signatures():
    s = stage(builtin("postfix"))
    assert (s.in_kind, s.out_kind) == (TREE, STRING)
    assert stage(s) is s
    with pytest.raises(TypeError):
        stage(Tree("c"))
