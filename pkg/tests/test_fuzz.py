import pytest

from oracles import la_state
from treetrans.bta import check_total, run_dbta
from treetrans.fuzz import KINDS, fuzz, model_rng, random_model, random_tdtt
from treetrans.mtt import MacroTT
from treetrans.mtt import check_wellformed as mtt_wellformed
from treetrans.pipeline import check_equiv
from treetrans.syntax import format_definition
from treetrans.tdtt import TopDownTT, check_wellformed, to_register_machine
from treetrans.terms import enumerate_trees


def test_seed_one_count_one():
    rep = fuzz("tdtt", 1, 1, max_size=3)
    assert rep.count == 1
    assert {r.index for r in rep.results} == {0}
    assert rep.passed
    lines = rep.text().splitlines()
    assert lines[0].startswith("fuzz kind=tdtt seed=1 count=1")
    assert lines[-1].startswith("summary: 1 models")


@pytest.mark.parametrize("kind", KINDS)


def test_reports_are_byte_identical(kind):
    a = fuzz(kind, 42, 5, max_size=4).text()
    b = fuzz(kind, 42, 5, max_size=4).text()
    assert a == b


@pytest.mark.parametrize("kind", KINDS)


def test_models_depend_only_on_seed_and_index(kind):
    for i in range(10):
        assert format_definition(random_model(kind, 3, i)) == format_definition(random_model(kind, 3, i))
    texts = {format_definition(random_model(kind, 3, i)) for i in range(10)}
    assert len(texts) > 1


def test_replaying_one_index():
    whole = fuzz("mtt", 8, 4, max_size=4)
    one = fuzz("mtt", 8, 1, max_size=4, start=2)
    assert [r.verdict for r in one.results] == [r.verdict for r in whole.results if r.index == 2]


@pytest.mark.parametrize("kind", KINDS)


def test_generated_models_are_wellformed(kind):
    for i in range(30):
        m = random_model(kind, 11, i)
        if isinstance(m, MacroTT):
            assert mtt_wellformed(m) == []
        else:
            assert isinstance(m, TopDownTT) and check_wellformed(m) == []
        if m.lookahead is not None:
            assert check_total(m.lookahead) == []


def test_partial_models_are_generated():
    partial = 0
    for i in range(40):
        m = random_model("tdtt", 2, i)
        have = {(r.state, r.letter) for r in m.rules}
        if len(have) < len(m.states) * len(m.input.letters):
            partial += 1
    assert partial > 0


def test_hundred_lookahead_tdtts_pass_the_register_machine_check():
    for i in range(100):
        tt = random_tdtt(model_rng("la", 1, i), lookahead=True)
        assert tt.lookahead is not None
        v = check_equiv(tt, to_register_machine(tt), 6)
        assert v.passed, (i, str(v))


def test_lookahead_tables_agree_with_recursive_run():
    tt = random_tdtt(model_rng("la", 1, 0), lookahead=True)
    for t in enumerate_trees(tt.input, 6):
        assert run_dbta(tt.lookahead, t) == la_state(tt.lookahead, t)


@pytest.mark.parametrize("kind", KINDS)


def test_small_campaign_is_green(kind):
    rep = fuzz(kind, 1, 15, max_size=5)
    assert rep.passed, rep.text()
    assert rep.results


def test_unknown_kind():
    with pytest.raises(ValueError):
        random_model("nope", 1, 0)
