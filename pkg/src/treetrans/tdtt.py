"""Deterministic top-down tree(-to-string) transducers with regular lookahead.

A transducer has two semantics that must agree:

* ``run_topdown`` evaluates ``initial<t>`` by rewriting from the root, and
* ``run_bottomup`` computes, for every node and every state ``q``, the
  register value ``q<subtree>`` from the registers of the children.

``to_register_machine`` folds the lookahead automaton into the finite control
of a lookahead-free bottom-up machine with one register per state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional, Union

from .bta import Dbta, annotate
from .rules import (
    UNDEFINED,
    AmbiguousRules,
    Call,
    Diagnostic,
    Dispatcher,
    IllFormedError,
    Out,
    Rule,
    UndefinedTransition,
    concrete_vectors,
    determinism_diagnostics,
    pattern_diagnostics,
)
from .terms import RankedAlphabet, Tree, distinct_postorder

StringOutput = tuple  # output symbols of a tree-to-string transducer


@dataclass(frozen=True)
class TopDownTT:
    input: RankedAlphabet
    output: Union[RankedAlphabet, StringOutput]
    states: tuple[str, ...]
    initial: str
    rules: tuple[Rule, ...]
    lookahead: Optional[Dbta] = None

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "rules", tuple(self.rules))
        if not isinstance(self.output, RankedAlphabet):
            object.__setattr__(self, "output", tuple(self.output))

    @property
    def string_output(self) -> bool:
        return not isinstance(self.output, RankedAlphabet)

    def dispatcher(self) -> Dispatcher:
        return Dispatcher(self.rules)

    def vector(self, children, la: Optional[dict]) -> tuple:
        if la is None:
            return (None,) * len(children)
        return tuple(la[id(c)] for c in children)


def _rhs_diagnostics(tt: TopDownTT, rule: Rule) -> list[Diagnostic]:
    out = []
    k = tt.input.arity(rule.letter) if rule.letter in tt.input else 0

    def bad(msg):
        out.append(Diagnostic("rhs", rule.state, rule.letter, rule.pattern, msg))

    def check_call(c: Call):
        if c.state not in tt.states:
            bad(f"call to unknown state {c.state}")
        if not 1 <= c.child <= k:
            bad(f"child index {c.child} out of range for {rule.letter} of arity {k}")
        if c.args:
            bad("top-down calls take no arguments")

    if tt.string_output:
        if not isinstance(rule.rhs, tuple):
            bad("string-mode right-hand side must be a concatenation")
            return out
        for item in rule.rhs:
            if isinstance(item, Call):
                check_call(item)
            elif isinstance(item, str):
                if item not in tt.output:
                    bad(f"unknown output symbol {item!r}")
            else:
                bad(f"bad concatenation item {item!r}")
        return out

    def walk(e):
        if isinstance(e, Call):
            check_call(e)
        elif isinstance(e, Out):
            if e.label not in tt.output:
                bad(f"unknown output letter {e.label}")
            elif tt.output.arity(e.label) != len(e.args):
                bad(f"output letter {e.label} has arity {tt.output.arity(e.label)}")
            for a in e.args:
                walk(a)
        else:
            bad(f"bad tree right-hand side {e!r}")

    walk(rule.rhs)
    return out


def check_wellformed(tt: TopDownTT) -> list[Diagnostic]:
    """All invariant violations; an empty list means well-formed."""
    diags = []
    if len(set(tt.states)) != len(tt.states) or not tt.states:
        diags.append(Diagnostic("states", None, None, (), "states must be a non-empty set"))
    if tt.initial not in tt.states:
        diags.append(Diagnostic("states", tt.initial, None, (), f"initial state {tt.initial} is not declared"))
    if tt.lookahead is not None and tt.lookahead.alphabet != tt.input:
        diags.append(Diagnostic("lookahead", None, None, (), "lookahead alphabet differs from the input alphabet"))
    for rule in tt.rules:
        if rule.state not in tt.states:
            diags.append(Diagnostic("states", rule.state, rule.letter, rule.pattern, f"rule for unknown state {rule.state}"))
        diags.extend(pattern_diagnostics(rule, tt.input, tt.lookahead))
        diags.extend(_rhs_diagnostics(tt, rule))
    diags.extend(determinism_diagnostics(tt.rules, tt.states, tt.input, tt.lookahead))
    return diags


def ensure_wellformed(tt) -> None:
    from .mtt import MacroTT, check_wellformed as mtt_check

    diags = mtt_check(tt) if isinstance(tt, MacroTT) else check_wellformed(tt)
    if diags:
        raise IllFormedError(diags)


def _select(disp: Dispatcher, state, letter, vec, path):
    try:
        rule = disp.lookup(state, letter, vec)
    except AmbiguousRules:
        raise IllFormedError([Diagnostic("nondeterministic", state, letter, vec, f"ambiguous rules for {state}<{letter}>")])
    if rule is None:
        raise UndefinedTransition(state, letter, vec, path)
    return rule


def run_topdown(tt: TopDownTT, t: Tree):
    """Normal form of ``initial<t>``: a tree, or a string in string mode.

    Raises :class:`UndefinedTransition` where the function is undefined.
    """
    return eval_state(tt, tt.initial, t)


def eval_state(tt: TopDownTT, state: str, t: Tree):
    disp = tt.dispatcher()
    la = annotate(tt.lookahead, t) if tt.lookahead is not None else None
    memo: dict = {}
    string = tt.string_output

    def ev(q, node, path):
        key = (q, id(node))
        hit = memo.get(key)
        if hit is not None:
            return hit
        rule = _select(disp, q, node.label, tt.vector(node.children, la), path)
        if string:
            parts = []
            for item in rule.rhs:
                if isinstance(item, Call):
                    parts.append(ev(item.state, node.children[item.child - 1], path + (item.child,)))
                else:
                    parts.append(item)
            value = "".join(parts)
        else:
            value = build(rule.rhs, node, path)
        memo[key] = value
        return value

    def build(e, node, path):
        if isinstance(e, Call):
            return ev(e.state, node.children[e.child - 1], path + (e.child,))
        return Tree(e.label, [build(a, node, path) for a in e.args])

    return ev(state, t, ())


class BottomUpResult(NamedTuple):
    registers: dict  # state -> value or UNDEFINED
    output: object  # register of the initial state
    state: Optional[str]  # lookahead state at the root


def _apply_tree(e, child_regs):
    """Evaluate a tree RHS over child registers; UNDEFINED if it uses one."""
    if isinstance(e, Call):
        return child_regs[e.child - 1][e.state]
    args = []
    for a in e.args:
        v = _apply_tree(a, child_regs)
        if v is UNDEFINED:
            return UNDEFINED
        args.append(v)
    return Tree(e.label, args)


def _apply_string(items, child_regs):
    parts = []
    for item in items:
        if isinstance(item, Call):
            v = child_regs[item.child - 1][item.state]
            if v is UNDEFINED:
                return UNDEFINED
            parts.append(v)
        else:
            parts.append(item)
    return "".join(parts)


def bottomup_configurations(tt: TopDownTT, t: Tree) -> dict[int, tuple[Optional[str], dict]]:
    """``id(subtree) -> (lookahead state, registers)`` for every subtree."""
    disp = tt.dispatcher()
    apply = _apply_string if tt.string_output else _apply_tree
    configs: dict[int, tuple] = {}
    for node in distinct_postorder(t):
        if id(node) in configs:
            continue
        kids = [configs[id(c)] for c in node.children]
        if tt.lookahead is not None:
            vec = tuple(k[0] for k in kids)
            here = tt.lookahead.step(node.label, vec)
        else:
            vec = (None,) * len(kids)
            here = None
        child_regs = [k[1] for k in kids]
        regs = {}
        for q in tt.states:
            try:
                rule = disp.lookup(q, node.label, vec)
            except AmbiguousRules:
                raise IllFormedError([Diagnostic("nondeterministic", q, node.label, vec, f"ambiguous rules for {q}<{node.label}>")])
            regs[q] = UNDEFINED if rule is None else apply(rule.rhs, child_regs)
        configs[id(node)] = (here, regs)
    return configs


def run_bottomup(tt: TopDownTT, t: Tree) -> BottomUpResult:
    state, regs = bottomup_configurations(tt, t)[id(t)]
    return BottomUpResult(regs, regs[tt.initial], state)


# ---------------------------------------------------------------------------
# Register machines (multi bottom-up transducers)

DUMMY_STATE = "*"


@dataclass(frozen=True)
class RegRef:
    """Register ``register`` of child ``child`` (1-based)."""

    child: int
    register: str


@dataclass(frozen=True)
class RegisterMachine:
    input: RankedAlphabet
    output: Union[RankedAlphabet, StringOutput]
    states: tuple[str, ...]
    registers: tuple[str, ...]
    result: str
    transitions: Mapping  # (letter, child states) -> (next state, {register: expr | UNDEFINED})

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "registers", tuple(self.registers))
        if not isinstance(self.output, RankedAlphabet):
            object.__setattr__(self, "output", tuple(self.output))
        if self.result not in self.registers:
            raise ValueError(f"output register {self.result} is not a register")
        for (letter, vec), (nxt, updates) in self.transitions.items():
            if nxt not in self.states or any(s not in self.states for s in vec):
                raise ValueError(f"transition {letter}{vec} mentions an unknown state")
            if set(updates) != set(self.registers):
                raise ValueError(f"transition {letter}{vec} must update every register")
            for expr in updates.values():
                for ref in _refs(expr):
                    if ref.register not in self.registers or not 1 <= ref.child <= len(vec):
                        raise ValueError(f"transition {letter}{vec} has a bad register reference {ref}")

    @property
    def string_output(self) -> bool:
        return not isinstance(self.output, RankedAlphabet)


def _refs(expr):
    if expr is UNDEFINED:
        return
    if isinstance(expr, tuple):
        for item in expr:
            if isinstance(item, RegRef):
                yield item
    elif isinstance(expr, RegRef):
        yield expr
    else:
        for a in expr.args:
            yield from _refs(a)


def _to_regexpr(rhs):
    if isinstance(rhs, tuple):
        return tuple(RegRef(i.child, i.state) if isinstance(i, Call) else i for i in rhs)
    if isinstance(rhs, Call):
        return RegRef(rhs.child, rhs.state)
    return Out(rhs.label, tuple(_to_regexpr(a) for a in rhs.args))


def to_register_machine(tt: TopDownTT) -> RegisterMachine:
    """Lookahead states become control states, transducer states become registers."""
    ensure_wellformed(tt)
    disp = tt.dispatcher()
    states = tt.lookahead.states if tt.lookahead is not None else (DUMMY_STATE,)
    transitions = {}
    for letter, k in tt.input.letters:
        for vec in concrete_vectors(tt.lookahead, k):
            if tt.lookahead is not None:
                nxt, key = tt.lookahead.step(letter, vec), vec
            else:
                nxt, key = DUMMY_STATE, (DUMMY_STATE,) * k
            updates = {}
            for q in tt.states:
                rule = disp.lookup(q, letter, vec)
                updates[q] = UNDEFINED if rule is None else _to_regexpr(rule.rhs)
            transitions[(letter, key)] = (nxt, updates)
    return RegisterMachine(tt.input, tt.output, states, tt.states, tt.initial, transitions)


def _eval_regexpr(expr, child_regs, string: bool):
    if expr is UNDEFINED:
        return UNDEFINED
    if string:
        parts = []
        for item in expr:
            if isinstance(item, RegRef):
                v = child_regs[item.child - 1][item.register]
                if v is UNDEFINED:
                    return UNDEFINED
                parts.append(v)
            else:
                parts.append(item)
        return "".join(parts)
    if isinstance(expr, RegRef):
        return child_regs[expr.child - 1][expr.register]
    args = []
    for a in expr.args:
        v = _eval_regexpr(a, child_regs, False)
        if v is UNDEFINED:
            return UNDEFINED
        args.append(v)
    return Tree(expr.label, args)


class MachineResult(NamedTuple):
    state: str
    registers: dict
    output: object


def run_register_machine(m: RegisterMachine, t: Tree) -> MachineResult:
    """One bottom-up pass; registers hold values or ``UNDEFINED``."""
    configs: dict[int, tuple] = {}
    for node in distinct_postorder(t):
        if id(node) in configs:
            continue
        kids = [configs[id(c)] for c in node.children]
        vec = tuple(k[0] for k in kids)
        try:
            nxt, updates = m.transitions[(node.label, vec)]
        except KeyError:
            raise ValueError(f"register machine has no transition for {node.label}{vec}") from None
        child_regs = [k[1] for k in kids]
        regs = {r: _eval_regexpr(updates[r], child_regs, m.string_output) for r in m.registers}
        configs[id(node)] = (nxt, regs)
    state, regs = configs[id(t)]
    return MachineResult(state, regs, regs[m.result])
