import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import leaves, polish_count, polish_trees
from treetrans.terms import (
    ArityError,
    Context,
    CycleError,
    Param,
    RankedAlphabet,
    TermDag,
    TermError,
    TermSyntaxError,
    Tree,
    UnknownLetterError,
    count_trees,
    dag_stats,
    decode_string,
    encode_string,
    enumerate_strings,
    enumerate_trees,
    format_dag,
    format_term,
    normalize,
    parse_context,
    parse_dag,
    parse_term,
    random_tree,
    substitute,
    tree_size,
    tree_to_dag,
    unary_alphabet,
    unfold,
    yield_of,
)

ABC = RankedAlphabet.of({"a": 2, "b": 1, "c": 0})
UNARY = unary_alphabet("abc")


def T(text, alphabet=None):
    return parse_term(text, alphabet)


# --- parsing and printing ---------------------------------------------------

def test_parse_leaf():
    t = T("c", ABC)
    assert t.label == "c" and t.children == ()


def test_parse_nested():
    t = T("a(b(c),c)", ABC)
    assert t == Tree("a", [Tree("b", [Tree("c")]), Tree("c")])
    assert format_term(t) == "a(b(c),c)"


def test_parse_tolerates_whitespace_but_prints_none():
    assert format_term(T(" a ( b(c) ,\n c ) ", ABC)) == "a(b(c),c)"


def test_arity_mismatch():
    with pytest.raises(ArityError):
        T("a(b,c)", ABC)


def test_unknown_letter():
    with pytest.raises(UnknownLetterError):
        T("d", ABC)


@pytest.mark.parametrize("text", ["a(c,", "a(c c)", "", "b(c))", "(c)"])
def test_syntax_errors_report_position(text):
    with pytest.raises(TermSyntaxError) as info:
        T(text, ABC)
    assert info.value.pos >= 0


def test_parameter_names_are_reserved():
    with pytest.raises(TermError):
        RankedAlphabet.of({"x1": 0})


def test_alphabet_rejects_duplicates_and_bad_arity():
    with pytest.raises(TermError):
        RankedAlphabet.of([("a", 1), ("a", 2)])
    with pytest.raises(TermError):
        RankedAlphabet.of({"a": -1})


def test_parse_without_alphabet_infers_arity():
    assert T("f(g(h),h)") == Tree("f", [Tree("g", [Tree("h")]), Tree("h")])


# --- contexts and substitution ------------------------------------------------

def test_substitute_identity_context():
    ident = parse_context("x1", 1)
    dup = parse_context("a(x1,x1)", 1, ABC)
    assert substitute(ident, [dup]).body == dup.body


def test_substitute_composes_unary_contexts():
    al = RankedAlphabet.of({"a": 1, "b": 1, "c": 1, "ε": 0})
    f = parse_context("a(b(x1))", 1, al)
    g = parse_context("a(c(x1))", 1, al)
    assert format_term(substitute(f, [g]).body) == "a(b(a(c(x1))))"


def test_substitute_ground_argument():
    f = parse_context("a(x1,x1)", 1, ABC)
    arg = Context(0, T("b(c)", ABC))
    out = substitute(f, [arg])
    assert format_term(out.body) == "a(b(c),b(c))"
    assert out.arity == 0


def test_substitute_arity_mismatch():
    f = parse_context("a(x1,x2)", 2, ABC)
    with pytest.raises(TermError):
        substitute(f, [Context(0, T("c", ABC))])


def test_context_rejects_out_of_range_parameter():
    with pytest.raises(TermError):
        parse_context("a(x1,x3)", 2, ABC)


def test_normalize_shrinks_arity():
    ctx = Context(3, T("b(c)", ABC))
    assert normalize(ctx).arity == 0
    assert normalize(parse_context("a(x2,c)", 3, ABC)).arity == 2


def _naive_subst(body, args):
    if isinstance(body, Param):
        return args[body.index - 1]
    return Tree(body.label, [_naive_subst(c, args) for c in body.children])


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_substitute_matches_naive_replacement(seed):
    rng = random.Random(seed)
    al = RankedAlphabet.of({"a": 2, "b": 1, "c": 0, "p1": 0, "p2": 0})
    body = random_tree(al, 9, rng)
    # turn the placeholder leaves into parameters
    def lift(t):
        if t.label in ("p1", "p2"):
            return Param(int(t.label[1]))
        return Tree(t.label, [lift(c) for c in t.children])

    ctx = Context(2, lift(body))
    args = [Context(0, random_tree(ABC, 5, rng)) for _ in range(2)]
    got = substitute(ctx, args).body
    assert got == _naive_subst(ctx.body, [a.body for a in args])


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_unary_substitution_is_associative(seed):
    rng = random.Random(seed)
    al = RankedAlphabet.of({"a": 1, "b": 1, "ε": 0})

    def chain():
        w = "".join(rng.choice("ab") for _ in range(rng.randint(0, 4)))
        body = Param(1)
        for ch in reversed(w):
            body = Tree(ch, [body])
        return Context(1, body)

    f, g, h = chain(), chain(), chain()
    left = substitute(substitute(f, [g]), [h])
    right = substitute(f, [substitute(g, [h])])
    assert left.body == right.body
    assert al  # alphabet only documents the letters used


# --- yield and string codecs -------------------------------------------------------

def test_yield_neutral_leaf():
    al = RankedAlphabet.of({"a": 2, "ε": 0}, neutral=["ε"])
    assert yield_of(T("ε", al), al) == ""


def test_yield_left_to_right():
    al = RankedAlphabet.of({"a": 2, "c": 0, "d": 0, "ε": 0}, neutral=["ε"])
    t = T("a(c,a(d,ε))", al)
    assert yield_of(t, al) == "cd"
    assert yield_of(t, al) == "".join(x for x in leaves(t) if x != "ε")


def test_yield_is_a_homomorphism_on_enumerated_trees():
    for t in enumerate_trees(ABC, 7):
        if t.children:
            assert yield_of(t, ABC) == "".join(yield_of(c, ABC) for c in t.children)


def test_codec_examples():
    assert encode_string("", UNARY) == Tree("ε")
    assert format_term(encode_string("abac", UNARY)) == "a(b(a(c(ε))))"
    assert decode_string(T("a(b(a(c(ε))))", UNARY)) == "abac"


def test_decode_rejects_non_chains():
    with pytest.raises(TermError):
        decode_string(T("a(b(c),c)", ABC))
    with pytest.raises(TermError):
        decode_string(T("a(b(c))"))  # chain ends in c, not ε


def test_encode_rejects_unknown_symbol():
    with pytest.raises(TermError):
        encode_string("abd", UNARY)


def test_codecs_round_trip_up_to_length_8():
    for w in enumerate_strings("abc", 8):
        assert decode_string(encode_string(w, UNARY)) == w


@given(st.text(alphabet="abc", max_size=20))
def test_encode_after_decode_is_identity(w):
    t = encode_string(w, UNARY)
    assert encode_string(decode_string(t), UNARY) == t


# --- term DAGs ----------------------------------------------------------------------------

FIGURE_DAG = """
0: c
1: b(0)
2: b(1)
3: a(1,0)
4: a(2,3)
root: 4
"""


def test_unfold_of_a_tree_shaped_dag():
    t = T("a(b(c),c)", ABC)
    assert unfold(tree_to_dag(t)) == t


def test_unfold_shared_figure():
    d = parse_dag(FIGURE_DAG)
    assert format_term(unfold(d)) == "a(b(b(c)),a(b(c),c))"
    assert dag_stats(d) == (5, 6)


def test_unfold_diamond():
    d = TermDag({0: ("c", ()), 1: ("b", (0,)), 2: ("a", (1, 1))}, 2)
    assert format_term(unfold(d)) == "a(b(c),b(c))"


def test_cycles_are_rejected():
    d = TermDag({0: ("b", (1,)), 1: ("b", (0,))}, 0)
    with pytest.raises(CycleError):
        unfold(d)
    with pytest.raises(CycleError):
        parse_dag("0: b(1)\n1: b(0)\nroot: 0").topological()


def test_dag_text_round_trip():
    d = parse_dag(FIGURE_DAG)
    assert parse_dag(format_dag(d)) == d


def test_dag_validation():
    with pytest.raises(TermError):
        parse_dag("0: a(1)\nroot: 0")
    with pytest.raises(TermError):
        TermDag({0: ("c", ())}, 3).validate(ABC)


def test_unfold_preserves_yield_with_multiplicity():
    d = parse_dag(FIGURE_DAG)

    def scan(i):
        label, kids = d.nodes[i]
        return label if not kids else "".join(scan(k) for k in kids)

    assert yield_of(unfold(d), ABC) == scan(d.root)


# --- sizes and enumeration ----------------------------------------------------------------

def test_tree_size():
    assert tree_size(T("c", ABC)) == 1
    assert tree_size(T("a(b(b(c)),a(b(c),c))", ABC)) == 8


def test_tree_size_counts_shared_subtrees_twice():
    c = Tree("c")
    shared = Tree("b", [c])
    assert tree_size(Tree("a", [shared, shared])) == 5


def test_enumerate_small_examples():
    assert enumerate_trees(RankedAlphabet.of({"c": 0}), 2) == [Tree("c")]
    chain = RankedAlphabet.of({"b": 1, "c": 0})
    assert [format_term(t) for t in enumerate_trees(chain, 3)] == ["c", "b(c)", "b(b(c))"]


def test_enumerate_abc_up_to_4_nodes():
    # size first, then the preorder label sequence in declaration order a < b < c
    got = [format_term(t) for t in enumerate_trees(ABC, 4)]
    assert got == [
        "c",
        "b(c)",
        "a(c,c)",
        "b(b(c))",
        "a(b(c),c)",
        "a(c,b(c))",
        "b(a(c,c))",
        "b(b(b(c)))",
    ]
    assert got == [format_term(t) for t in polish_trees(ABC, 4)]


@pytest.mark.parametrize("n", range(1, 8))
def test_enumeration_count_matches_brute_force(n):
    trees = enumerate_trees(ABC, n)
    assert len(set(trees)) == len(trees)
    assert trees == polish_trees(ABC, n)
    assert count_trees(ABC, n) == polish_count(ABC, n)


def test_enumerate_needs_a_leaf():
    with pytest.raises(TermError):
        enumerate_trees(RankedAlphabet.of({"b": 1}), 3)
    with pytest.raises(TermError):
        enumerate_trees(ABC, 0)


def test_random_tree_respects_bound_and_alphabet():
    rng = random.Random(7)
    for _ in range(100):
        t = random_tree(ABC, 30, rng)
        assert tree_size(t) <= 30
        assert T(format_term(t), ABC) == t


@given(st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_print_parse_round_trip(seed):
    t = random_tree(ABC, 25, random.Random(seed))
    assert parse_term(format_term(t), ABC) == t


def test_deep_trees_do_not_hit_the_recursion_limit():
    t = Tree("c")
    for _ in range(20_000):
        t = Tree("b", [t])
    u = parse_term(format_term(t), ABC)
    assert u == t and hash(u) == hash(t)
    assert tree_size(t) == 20_001
