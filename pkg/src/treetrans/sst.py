"""Right-to-left streaming string transducers with concatenable registers.

The run starts at the right end of the input with the ``init`` register
values, consumes symbols from right to left, and updates all registers
simultaneously.  Register contents are strings or ``UNDEFINED``; an
expression that uses an undefined register is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .rules import UNDEFINED, AmbiguousRules, Call, TransductionError
from .tdtt import DUMMY_STATE, TopDownTT, ensure_wellformed
from .terms import TermError


class OutputUndefined(TransductionError):
    def __init__(self, state, reason="no output expression"):
        self.state = state
        super().__init__(f"output undefined in final state {state}: {reason}")


@dataclass(frozen=True)
class Reg:
    name: str

    def __str__(self):
        return self.name


# An expression is UNDEFINED or a tuple of literal symbols (str) and Regs.


def _expr_registers(expr):
    if expr is UNDEFINED:
        return []
    return [item.name for item in expr if isinstance(item, Reg)]


@dataclass(frozen=True)
class Sst:
    input: tuple[str, ...]
    output: tuple[str, ...]
    states: tuple[str, ...]
    initial: str
    registers: tuple[str, ...]
    init: Mapping[str, object]
    update: Mapping[tuple[str, str], tuple[str, Mapping[str, object]]]
    final: Mapping[str, object]

    def __post_init__(self):
        for f in ("input", "output", "states", "registers"):
            object.__setattr__(self, f, tuple(getattr(self, f)))
        object.__setattr__(self, "init", dict(self.init))
        object.__setattr__(self, "update", {k: (s, dict(u)) for k, (s, u) in self.update.items()})
        object.__setattr__(self, "final", dict(self.final))
        regs = set(self.registers)
        if self.initial not in self.states:
            raise TermError(f"initial state {self.initial} is not declared")
        if regs & set(self.output):
            raise TermError("register names must differ from output symbols")
        if set(self.init) != regs:
            raise TermError("init must give a value to every register")
        for r, e in self.init.items():
            if _expr_registers(e):
                raise TermError(f"initial value of {r} may not mention registers")
            self._check_expr(e, f"init {r}")
        for s in self.states:
            for a in self.input:
                if (s, a) not in self.update:
                    raise TermError(f"missing transition for state {s} on {a}")
        for (s, a), (nxt, upd) in self.update.items():
            if s not in self.states or nxt not in self.states or a not in self.input:
                raise TermError(f"bad transition {s},{a} -> {nxt}")
            if set(upd) != regs:
                raise TermError(f"transition {s},{a} must update every register")
            for r, e in upd.items():
                self._check_expr(e, f"transition {s},{a} register {r}")
        for s, e in self.final.items():
            if s not in self.states:
                raise TermError(f"output for unknown state {s}")
            self._check_expr(e, f"output {s}")

    def _check_expr(self, expr, where):
        if expr is UNDEFINED:
            return
        for item in expr:
            if isinstance(item, Reg):
                if item.name not in self.registers:
                    raise TermError(f"{where}: unknown register {item.name}")
            elif item not in self.output:
                raise TermError(f"{where}: unknown output symbol {item!r}")


def _eval(expr, regs):
    if expr is UNDEFINED:
        return UNDEFINED
    parts = []
    for item in expr:
        if isinstance(item, Reg):
            v = regs[item.name]
            if v is UNDEFINED:
                return UNDEFINED
            parts.append(v)
        else:
            parts.append(item)
    return "".join(parts)


class SstConfig(NamedTuple):
    state: str
    registers: dict


def sst_configuration(s: Sst, w: str) -> SstConfig:
    state = s.initial
    regs = {r: _eval(e, {}) for r, e in s.init.items()}
    for sym in reversed(w):
        try:
            state, upd = s.update[(state, sym)]
        except KeyError:
            raise TermError(f"symbol {sym!r} is not an input symbol") from None
        regs = {r: _eval(e, regs) for r, e in upd.items()}
    return SstConfig(state, regs)


def run_sst(s: Sst, w: str) -> str:
    state, regs = sst_configuration(s, w)
    if state not in s.final:
        raise OutputUndefined(state)
    out = _eval(s.final[state], regs)
    if out is UNDEFINED:
        raise OutputUndefined(state, "the output expression uses an undefined register")
    return out


class CopyViolation(NamedTuple):
    where: tuple  # ("update", state, symbol) or ("output", state)
    register: str
    count: int


def is_copyless(s: Sst) -> list[CopyViolation] | bool:
    """``True`` if no transition or output uses a register twice, else the violations."""
    bad = []
    for (state, sym), (_, upd) in sorted(s.update.items()):
        counts: dict[str, int] = {}
        for r in s.registers:
            for name in _expr_registers(upd[r]):
                counts[name] = counts.get(name, 0) + 1
        bad.extend(CopyViolation(("update", state, sym), r, c) for r, c in sorted(counts.items()) if c > 1)
    for state, e in sorted(s.final.items()):
        counts = {}
        for name in _expr_registers(e):
            counts[name] = counts.get(name, 0) + 1
        bad.extend(CopyViolation(("output", state), r, c) for r, c in sorted(counts.items()) if c > 1)
    return True if not bad else bad


def tdtts_unary_to_sst(tt: TopDownTT) -> Sst:
    """Right-to-left SST for a tree-to-string transducer reading unary trees.

    Control states are the lookahead states (or one dummy state); registers
    are the transducer's states.
    """
    if not tt.string_output:
        raise TermError("expected a tree-to-string transducer")
    if not tt.input.is_unary():
        raise TermError(f"input alphabet {tt.input} is not unary letters plus one end marker")
    ensure_wellformed(tt)
    end = tt.input.end_letter()
    symbols = tuple(a for a, k in tt.input.letters if k == 1)
    disp = tt.dispatcher()
    la = tt.lookahead
    states = la.states if la is not None else (DUMMY_STATE,)

    def lookup(q, letter, vec):
        try:
            return disp.lookup(q, letter, vec)
        except AmbiguousRules:
            raise TermError(f"ambiguous rules for {q}<{letter}>") from None

    def translate(rule):
        if rule is None:
            return UNDEFINED
        return tuple(Reg(i.state) if isinstance(i, Call) else i for i in rule.rhs)

    initial = la.step(end, ()) if la is not None else DUMMY_STATE
    init = {q: translate(lookup(q, end, ())) for q in tt.states}
    update = {}
    for s in states:
        for a in symbols:
            vec = (s,) if la is not None else (None,)
            nxt = la.step(a, (s,)) if la is not None else DUMMY_STATE
            update[(s, a)] = (nxt, {q: translate(lookup(q, a, vec)) for q in tt.states})
    final = {s: (Reg(tt.initial),) for s in states}
    return Sst(symbols, tt.output, states, initial, tt.states, init, update, final)


def remark_example() -> Sst:
    """Copyless SST for ``a^n -> a^n`` and ``a^n b w -> a^n b b^|w|``.

    Reading right to left, ``R`` holds the current run of a's, ``S`` a
    b-shadow of that run, and ``T`` the b-block for everything from the
    leftmost b read so far to the right end (that b included).
    """
    R, S, T = Reg("R"), Reg("S"), Reg("T")
    on_a = {"R": ("a", R), "S": ("b", S), "T": (T,)}
    on_b = {"R": (), "S": (), "T": ("b", S, T)}
    update = {
        ("s0", "a"): ("s0", on_a),
        ("s0", "b"): ("s1", on_b),
        ("s1", "a"): ("s1", on_a),
        ("s1", "b"): ("s1", on_b),
    }
    final = {"s0": (R,), "s1": (R, T)}
    return Sst(("a", "b"), ("a", "b"), ("s0", "s1"), "s0", ("R", "S", "T"),
               {"R": (), "S": (), "T": ()}, update, final)


def doubling_sst() -> Sst:
    """``X := X.X`` on every symbol: output length ``2**len(w)``."""
    X = Reg("X")
    return Sst(("a",), ("a",), ("s",), "s", ("X",), {"X": ("a",)},
               {("s", "a"): ("s", {"X": (X, X)})}, {"s": (X,)})


def reverse_sst(symbols=("a", "b", "c")) -> Sst:
    X = Reg("X")
    update = {("s", a): ("s", {"X": (X, a)}) for a in symbols}
    return Sst(symbols, symbols, ("s",), "s", ("X",), {"X": ()}, update, {"s": (X,)})


def identity_sst(symbols=("a", "b", "c")) -> Sst:
    X = Reg("X")
    update = {("s", a): ("s", {"X": (a, X)}) for a in symbols}
    return Sst(symbols, symbols, ("s",), "s", ("X",), {"X": ()}, update, {"s": (X,)})


def swap_sst() -> Sst:
    """``X, Y := Y.a, X.a`` from ``X = "", Y = "b"``.

    With simultaneous updates ``X`` ends as ``a^k`` for even ``k`` and
    ``b a^k`` for odd ``k``; sequential updates would give something else.
    """
    X, Y = Reg("X"), Reg("Y")
    update = {("s", "a"): ("s", {"X": (Y, "a"), "Y": (X, "a")})}
    return Sst(("a",), ("a", "b"), ("s",), "s", ("X", "Y"), {"X": (), "Y": ("b",)}, update, {"s": (X,)})
