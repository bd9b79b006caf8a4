"""Random well-formed models and differential testing of every conversion."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Optional

from .bta import Dbta
from .mtt import MacroTT, eliminate_lookahead, mtt_unary_to_tdtts, tdtts_to_mtt_unary
from .pipeline import EquivVerdict, check_equiv, equivalence_inputs, stage
from .rules import Call, Out, Rule
from .sst import Sst, tdtts_unary_to_sst
from .tdtt import TopDownTT, to_register_machine
from .terms import Param, RankedAlphabet, random_tree

ABC = RankedAlphabet.of({"a": 2, "b": 1, "c": 0})
UNARY_AB = RankedAlphabet.of({"a": 1, "b": 1, "ε": 0})
KINDS = ("tdtt", "mtt", "sst")


def random_dbta(alphabet: RankedAlphabet, rng: random.Random, n_states: Optional[int] = None) -> Dbta:
    n = n_states or rng.randint(1, 3)
    states = tuple(f"r{i}" for i in range(n))
    delta = {}
    for a, k in alphabet.letters:
        for vec in itertools.product(states, repeat=k):
            delta[(a, vec)] = rng.choice(states)
    return Dbta(alphabet, states, delta)


def _patterns(rng, lookahead, arity, p):
    """Patterns for one (state, letter): a wildcard default with concrete
    overrides, or one entry per concrete vector; each kept with probability p."""
    if lookahead is None or arity == 0:
        return [(None,) * arity] if rng.random() < p else []
    vectors = list(itertools.product(lookahead.states, repeat=arity))
    if rng.random() < 0.3:
        out = [(None,) * arity] if rng.random() < p else []
        return out + [v for v in vectors if rng.random() < 0.25]
    return [v for v in vectors if rng.random() < p]


def _tree_rhs(rng, states, arity, output, depth):
    calls = [(q, i) for q in states for i in range(1, arity + 1)]
    if calls and (depth == 0 or rng.random() < 0.4):
        q, i = rng.choice(calls)
        return Call(q, i)
    letters = output.letters if depth > 0 else output.nullary
    if depth == 0 and not letters:
        raise ValueError("output alphabet has no nullary letter")
    a, k = rng.choice(letters) if depth > 0 else (rng.choice(letters), 0)
    return Out(a, tuple(_tree_rhs(rng, states, arity, output, depth - 1) for _ in range(k)))


def _string_rhs(rng, states, arity, symbols):
    calls = [(q, i) for q in states for i in range(1, arity + 1)]
    items = []
    for _ in range(rng.randint(0, 3)):
        if calls and rng.random() < 0.5:
            q, i = rng.choice(calls)
            items.append(Call(q, i))
        else:
            items.append(rng.choice(symbols))
    return tuple(items)


def random_tdtt(
    rng: random.Random,
    *,
    alphabet: RankedAlphabet = ABC,
    output=ABC,
    lookahead: Optional[bool] = None,
    n_states: Optional[int] = None,
    p: float = 0.9,
    depth: int = 3,
) -> TopDownTT:
    """A random deterministic top-down transducer.  ``output`` is a ranked
    alphabet for tree output or a tuple of symbols for string output."""
    if lookahead is None:
        lookahead = rng.random() < 0.5
    la = random_dbta(alphabet, rng) if lookahead else None
    states = tuple(f"q{i}" for i in range(n_states or rng.randint(1, 3)))
    string = not isinstance(output, RankedAlphabet)
    rules = []
    for q in states:
        for a, k in alphabet.letters:
            for pat in _patterns(rng, la, k, p):
                if string:
                    rhs = _string_rhs(rng, states, k, tuple(output))
                else:
                    rhs = _tree_rhs(rng, states, k, output, depth)
                rules.append(Rule(q, a, pat, rhs))
    return TopDownTT(alphabet, output, states, states[0], tuple(rules), la)


def _mtt_rhs(rng, states, arity, n_params, output, depth):
    leaves = [("param", j) for j in range(1, n_params + 1)]
    leaves += [("out", a) for a in output.nullary]
    leaves += [("call", q, i) for q, n in states if n == 0 for i in range(1, arity + 1)]
    if depth == 0 or rng.random() < 0.3:
        pick = rng.choice(leaves)
        if pick[0] == "param":
            return Param(pick[1])
        if pick[0] == "out":
            return Out(pick[1])
        return Call(pick[1], pick[2])
    calls = [(q, n, i) for q, n in states for i in range(1, arity + 1)]
    if calls and rng.random() < 0.5:
        q, n, i = rng.choice(calls)
        return Call(q, i, tuple(_mtt_rhs(rng, states, arity, n_params, output, depth - 1) for _ in range(n)))
    a, k = rng.choice(output.letters)
    return Out(a, tuple(_mtt_rhs(rng, states, arity, n_params, output, depth - 1) for _ in range(k)))


def random_mtt(
    rng: random.Random,
    *,
    alphabet: RankedAlphabet = ABC,
    output: RankedAlphabet = ABC,
    lookahead: Optional[bool] = None,
    max_arity: int = 2,
    p: float = 0.9,
    depth: int = 3,
) -> MacroTT:
    """A random deterministic macro tree transducer with a 0-ary initial state."""
    if lookahead is None:
        lookahead = rng.random() < 0.5
    la = random_dbta(alphabet, rng) if lookahead else None
    states = [("q0", 0)] + [(f"q{i}", rng.randint(0, max_arity)) for i in range(1, rng.randint(1, 3))]
    rules = []
    for q, n in states:
        for a, k in alphabet.letters:
            for pat in _patterns(rng, la, k, p):
                rules.append(Rule(q, a, pat, _mtt_rhs(rng, states, k, n, output, depth)))
    return MacroTT(alphabet, output, tuple(states), "q0", tuple(rules), la)


def model_rng(kind: str, seed: int, index: int) -> random.Random:
    return random.Random(f"{kind}:{seed}:{index}")


def random_model(kind: str, seed: int, index: int):
    """The ``index``-th model of a fuzz run; replaying needs only these three values."""
    rng = model_rng(kind, seed, index)
    if kind == "tdtt":
        mode = rng.choice(("tree", "string", "unary"))
        if mode == "tree":
            return random_tdtt(rng)
        if mode == "string":
            return random_tdtt(rng, output=("a", "b", "c"))
        return random_tdtt(rng, alphabet=UNARY_AB, output=("a", "b"))
    if kind == "mtt":
        if rng.random() < 0.5:
            return random_mtt(rng)
        return random_mtt(rng, alphabet=UNARY_AB, output=UNARY_AB)
    if kind == "sst":
        return random_tdtt(rng, alphabet=UNARY_AB, output=("a", "b"))
    raise ValueError(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}")


def conversions(kind: str, model) -> list[tuple[str, object]]:
    """(name, right-hand side) pairs, each expected to match ``model``."""
    if kind == "tdtt":
        out = [
            ("register-machine", to_register_machine(model)),
            ("bottom-up", stage(model, "bottom-up")),
        ]
        if not model.string_output:
            out.append(("shared", stage(model, "shared")))
        elif model.input.is_unary():
            as_mtt = tdtts_to_mtt_unary(model)
            out.append(("tdtts-to-mtt", as_mtt))
            out.append(("mtt-round-trip", mtt_unary_to_tdtts(as_mtt)))
        return out
    if kind == "mtt":
        out = [("bottom-up", stage(model, "bottom-up"))]
        if model.lookahead is not None:
            out.append(("eliminate-lookahead", eliminate_lookahead(model)))
        if model.unary_output:
            out.append(("mtt-to-tdtts", mtt_unary_to_tdtts(model)))
        return out
    if kind == "sst":
        return [("tdtts-to-sst", tdtts_unary_to_sst(model)), ("register-machine", to_register_machine(model))]
    raise ValueError(kind)


@dataclass(frozen=True)
class CheckResult:
    index: int
    conversion: str
    verdict: EquivVerdict


@dataclass
class FuzzReport:
    kind: str
    seed: int
    count: int
    max_size: int
    random_inputs: int = 0
    results: list[CheckResult] = field(default_factory=list)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.verdict.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def text(self) -> str:
        lines = [
            f"fuzz kind={self.kind} seed={self.seed} count={self.count} "
            f"max_size={self.max_size} random_inputs={self.random_inputs}"
        ]
        for r in self.results:
            status = "ok" if r.verdict.passed else "FAIL"
            lines.append(f"model {r.index} {r.conversion}: {status} ({r.verdict.inputs_tested} inputs)")
            if not r.verdict.passed:
                lines.append(f"  replay: --kind {self.kind} --seed {self.seed} --index {r.index}")
                lines.append(f"  {r.verdict.counterexample}")
        lines.append(
            f"summary: {self.count} models, {len(self.results)} checks, {len(self.failures)} failures"
        )
        return "\n".join(lines) + "\n"


def _inputs(model, max_size, random_inputs, random_size, rng):
    alphabet = model.input
    xs = equivalence_inputs("tree", alphabet, max_size)
    xs += [random_tree(alphabet, random_size, rng) for _ in range(random_inputs)]
    return xs


def fuzz(
    kind: str,
    seed: int,
    count: int,
    max_size: int = 6,
    random_inputs: int = 0,
    random_size: int = 30,
    start: int = 0,
) -> FuzzReport:
    """Generate ``count`` models and compare each with all of its conversions on
    every input tree up to ``max_size`` nodes, plus ``random_inputs`` random
    trees of at most ``random_size`` nodes.  Models are numbered from
    ``start``, so a single failing model can be replayed with ``count=1``."""
    report = FuzzReport(kind, seed, count, max_size, random_inputs)
    for i in range(start, start + count):
        model = random_model(kind, seed, i)
        rng = random.Random(f"inputs:{kind}:{seed}:{i}")
        xs = _inputs(model, max_size, random_inputs, random_size, rng)
        for name, other in conversions(kind, model):
            # string-input conversions enumerate strings up to the same bound
            given = None if isinstance(other, Sst) else xs
            report.results.append(CheckResult(i, name, check_equiv(model, other, max_size, inputs=given)))
    return report
