"""Sequential composition of machines and bounded equivalence checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

from .mtt import MacroTT, run_mtt_bottomup, run_oi
from .rules import UNDEFINED, TransductionError, UndefinedTransition
from .sharing import run_shared
from .sst import Sst, run_sst
from .tdtt import RegisterMachine, TopDownTT, run_bottomup, run_register_machine, run_topdown
from .terms import (
    RankedAlphabet,
    decode_string,
    encode_string,
    enumerate_strings,
    enumerate_trees,
    unfold,
    yield_of,
)

TREE, STRING = "tree", "string"


class PipelineError(ValueError):
    pass


class StageError(TransductionError):
    def __init__(self, index: int, stage: "Stage", cause: Exception):
        self.index = index
        self.cause = cause
        super().__init__(f"stage {index} ({stage.name}): {cause}")


@dataclass(frozen=True)
class Stage:
    """One step of a pipeline.  ``None`` kinds or alphabets accept anything."""

    name: str
    fn: Callable[[Any], Any] = field(compare=False)
    in_kind: Optional[str]
    in_alphabet: Any
    out_kind: Optional[str]
    out_alphabet: Any

    def __call__(self, x):
        return self.fn(x)


def _out_sig(output):
    if isinstance(output, RankedAlphabet):
        return TREE, output
    return STRING, tuple(output)


def _machine_runner(m: RegisterMachine):
    def run(t):
        out = run_register_machine(m, t).output
        if out is UNDEFINED:
            raise UndefinedTransition(m.result, t.label)
        return out

    return run


def _bottomup_runner(tt: TopDownTT):
    def run(t):
        out = run_bottomup(tt, t).output
        if out is UNDEFINED:
            raise UndefinedTransition(tt.initial, t.label)
        return out

    return run


def stage(obj, semantics: str = "default") -> Stage:
    """Wrap a machine as a stage.

    ``semantics`` selects ``"bottom-up"`` evaluation for transducers or
    ``"shared"`` (shared run, then unfold) for tree-output top-down ones.
    """
    if isinstance(obj, Stage):
        return obj
    if isinstance(obj, TopDownTT):
        kind, alpha = _out_sig(obj.output)
        fn = {
            "default": lambda t: run_topdown(obj, t),
            "bottom-up": _bottomup_runner(obj),
            "shared": lambda t: unfold(run_shared(obj, t)),
        }[semantics]
        return Stage(f"tdtt/{semantics}", fn, TREE, obj.input, kind, alpha)
    if isinstance(obj, MacroTT):
        fn = {"default": lambda t: run_oi(obj, t), "bottom-up": lambda t: run_mtt_bottomup(obj, t)}[semantics]
        return Stage(f"mtt/{semantics}", fn, TREE, obj.input, TREE, obj.output)
    if isinstance(obj, RegisterMachine):
        kind, alpha = _out_sig(obj.output)
        return Stage("machine", _machine_runner(obj), TREE, obj.input, kind, alpha)
    if isinstance(obj, Sst):
        return Stage("sst", lambda w: run_sst(obj, w), STRING, tuple(obj.input), STRING, tuple(obj.output))
    raise TypeError(f"cannot use {type(obj).__name__} as a pipeline stage")


def encode_stage(alphabet: RankedAlphabet) -> Stage:
    symbols = tuple(a for a, k in alphabet.letters if k == 1)
    return Stage("encode", lambda s: encode_string(s, alphabet), STRING, symbols, TREE, alphabet)


def decode_stage(alphabet: Optional[RankedAlphabet] = None) -> Stage:
    end = alphabet.end_letter() if alphabet is not None else "ε"
    symbols = tuple(a for a, k in alphabet.letters if k == 1) if alphabet is not None else None
    return Stage("decode", lambda t: decode_string(t, end), TREE, alphabet, STRING, symbols)


def yield_stage(alphabet: Optional[RankedAlphabet] = None) -> Stage:
    symbols = None
    if alphabet is not None:
        symbols = tuple(a for a, k in alphabet.letters if k == 0 and a not in alphabet.neutral)
    return Stage("yield", lambda t: yield_of(t, alphabet), TREE, alphabet, STRING, symbols)


def _compatible(out_kind, out_alpha, in_kind, in_alpha) -> bool:
    if out_kind is None or in_kind is None:
        return True
    if out_kind != in_kind:
        return False
    if out_alpha is None or in_alpha is None:
        return True
    if out_kind == TREE:
        return all(a in in_alpha and in_alpha.arity(a) == k for a, k in out_alpha.letters)
    return set(out_alpha) <= set(in_alpha)


@dataclass(frozen=True)
class Pipeline:
    stages: tuple[Stage, ...] = ()

    def __post_init__(self):
        stages = tuple(stage(s) for s in self.stages)
        object.__setattr__(self, "stages", stages)
        for i in range(len(stages) - 1):
            a, b = stages[i], stages[i + 1]
            if not _compatible(a.out_kind, a.out_alphabet, b.in_kind, b.in_alphabet):
                raise PipelineError(f"stage {i} ({a.name}) output does not fit stage {i + 1} ({b.name}) input")

    @property
    def in_kind(self):
        return self.stages[0].in_kind if self.stages else None

    @property
    def in_alphabet(self):
        return self.stages[0].in_alphabet if self.stages else None

    @property
    def out_kind(self):
        return self.stages[-1].out_kind if self.stages else None

    @property
    def out_alphabet(self):
        return self.stages[-1].out_alphabet if self.stages else None

    def then(self, other) -> "Pipeline":
        other = other if isinstance(other, Pipeline) else Pipeline((other,))
        return Pipeline(self.stages + other.stages)

    def __call__(self, x):
        return run_pipeline(self, x)


def run_pipeline(p: Pipeline, x):
    for i, s in enumerate(p.stages):
        try:
            x = s(x)
        except StageError:
            raise
        except TransductionError as e:
            raise StageError(i, s, e) from e
    return x


def as_pipeline(obj) -> Pipeline:
    if isinstance(obj, Pipeline):
        return obj
    if isinstance(obj, (list, tuple)):
        return Pipeline(tuple(obj))
    return Pipeline((stage(obj),))


def outcome(fn, x):
    """``fn(x)``, or ``UNDEFINED`` if the transduction is undefined there."""
    try:
        return fn(x)
    except TransductionError:
        return UNDEFINED


@dataclass(frozen=True)
class Counterexample:
    input: Any
    left: Any
    right: Any

    def __str__(self):
        return f"input {self.input}: left {_show(self.left)}, right {_show(self.right)}"


def _show(v):
    if v is UNDEFINED:
        return "undefined"
    if isinstance(v, str):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class EquivVerdict:
    passed: bool
    counterexample: Optional[Counterexample]
    inputs_tested: int

    def __str__(self):
        if self.passed:
            return f"equivalent on all {self.inputs_tested} inputs"
        return f"counterexample after {self.inputs_tested} inputs: {self.counterexample}"


def _same_letters(a: RankedAlphabet, b: RankedAlphabet) -> bool:
    return set(a.letters) == set(b.letters)


def _align(left: Pipeline, right: Pipeline) -> tuple[Pipeline, Pipeline, str, Any]:
    """Insert string codecs so both sides share one input and output kind."""
    if left.in_kind != right.in_kind:
        if left.in_kind == TREE and left.in_alphabet is not None and left.in_alphabet.is_unary():
            left = Pipeline((encode_stage(left.in_alphabet),) + left.stages)
        elif right.in_kind == TREE and right.in_alphabet is not None and right.in_alphabet.is_unary():
            right = Pipeline((encode_stage(right.in_alphabet),) + right.stages)
        else:
            raise PipelineError(f"incompatible input kinds {left.in_kind} and {right.in_kind}")
    if left.out_kind != right.out_kind:
        if left.out_kind == TREE:
            left = left.then(decode_stage(left.out_alphabet))
        elif right.out_kind == TREE:
            right = right.then(decode_stage(right.out_alphabet))
        else:
            raise PipelineError(f"incompatible output kinds {left.out_kind} and {right.out_kind}")
    kind = left.in_kind or right.in_kind
    la, ra = left.in_alphabet, right.in_alphabet
    if la is not None and ra is not None:
        same = _same_letters(la, ra) if kind == TREE else set(la) == set(ra)
        if not same:
            raise PipelineError("the two sides read different input alphabets")
    return left, right, kind, la if la is not None else ra


def equivalence_inputs(kind: str, alphabet, bound: int) -> list:
    if kind == TREE:
        return enumerate_trees(alphabet, bound)
    if kind == STRING:
        return enumerate_strings(tuple(alphabet), bound)
    raise PipelineError("cannot enumerate inputs without a known input kind")


def check_equiv(left, right, bound: int, inputs: Optional[Iterable] = None) -> EquivVerdict:
    """Compare outputs and definedness on every input up to ``bound``.

    ``bound`` is a maximum node count for tree inputs and a maximum length
    for string inputs.  Extra ``inputs`` may be supplied instead.
    """
    lp, rp, kind, alphabet = _align(as_pipeline(left), as_pipeline(right))
    if inputs is None:
        if alphabet is None:
            raise PipelineError("cannot enumerate inputs for two identity pipelines")
        inputs = equivalence_inputs(kind, alphabet, bound)
    tested = 0
    for x in inputs:
        tested += 1
        a = outcome(lambda v: run_pipeline(lp, v), x)
        b = outcome(lambda v: run_pipeline(rp, v), x)
        if not _equal(a, b):
            return EquivVerdict(False, Counterexample(x, a, b), tested)
    return EquivVerdict(True, None, tested)


def _equal(a, b) -> bool:
    if a is UNDEFINED or b is UNDEFINED:
        return a is b
    return type(a) is type(b) and a == b


def describe(obj) -> str:
    p = as_pipeline(obj)
    return " | ".join(s.name for s in p.stages) or "identity"


def from_stages(items: Sequence) -> Pipeline:
    """Build a pipeline from machines and the adapter names
    ``encode``/``decode``/``yield``, resolving adapter alphabets from the
    neighbouring stages."""
    resolved: list = []
    pending = list(items)
    for i, item in enumerate(pending):
        if isinstance(item, str):
            prev = resolved[-1] if resolved else None
            nxt = next((x for x in pending[i + 1:] if not isinstance(x, str)), None)
            if item == "encode":
                target = stage(nxt).in_alphabet if nxt is not None else None
                if target is None:
                    raise PipelineError("encode needs a following stage with a unary tree input")
                resolved.append(encode_stage(target))
            elif item == "decode":
                resolved.append(decode_stage(prev.out_alphabet if prev is not None else None))
            elif item == "yield":
                resolved.append(yield_stage(prev.out_alphabet if prev is not None else None))
            else:
                raise PipelineError(f"unknown adapter {item!r}")
        else:
            resolved.append(stage(item))
    return Pipeline(tuple(resolved))

