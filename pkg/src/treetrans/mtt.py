"""Deterministic macro tree transducers.

States carry parameters.  ``run_oi`` is the outermost (call-by-name)
semantics, evaluated on demand so that an argument is computed only if
its parameter is actually used.  ``run_bottomup``
instead stores one context per state at every node and composes contexts
by substitution; an undefined argument only poisons the result when the
consuming context mentions the corresponding parameter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

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
    determinism_diagnostics,
    pattern_diagnostics,
)
from .terms import Context, Param, RankedAlphabet, TermError, Tree, substitute_body, distinct_postorder
from .tdtt import TopDownTT, ensure_wellformed


@dataclass(frozen=True)
class MacroTT:
    input: RankedAlphabet
    output: RankedAlphabet
    states: tuple[tuple[str, int], ...]
    initial: str
    rules: tuple[Rule, ...]
    lookahead: Optional[Dbta] = None

    def __post_init__(self):
        states = self.states.items() if isinstance(self.states, dict) else self.states
        object.__setattr__(self, "states", tuple((str(q), int(n)) for q, n in states))
        object.__setattr__(self, "rules", tuple(self.rules))

    @property
    def state_names(self) -> tuple[str, ...]:
        return tuple(q for q, _ in self.states)

    def arity(self, state: str) -> int:
        for q, n in self.states:
            if q == state:
                return n
        raise KeyError(state)

    def dispatcher(self) -> Dispatcher:
        return Dispatcher(self.rules)

    def vector(self, children, la) -> tuple:
        if la is None:
            return (None,) * len(children)
        return tuple(la[id(c)] for c in children)

    @property
    def unary_output(self) -> bool:
        return all(k <= 1 for _, k in self.output.letters)


def check_wellformed(m: MacroTT) -> list[Diagnostic]:
    diags = []
    arities = dict(m.states)
    if len(arities) != len(m.states) or not m.states:
        diags.append(Diagnostic("states", None, None, (), "states must be a non-empty set"))
    if m.initial not in arities:
        diags.append(Diagnostic("states", m.initial, None, (), f"initial state {m.initial} is not declared"))
    elif arities[m.initial] != 0:
        diags.append(Diagnostic("states", m.initial, None, (), "initial state must have no parameters"))
    if m.lookahead is not None and m.lookahead.alphabet != m.input:
        diags.append(Diagnostic("lookahead", None, None, (), "lookahead alphabet differs from the input alphabet"))
    for rule in m.rules:
        if rule.state not in arities:
            diags.append(Diagnostic("states", rule.state, rule.letter, rule.pattern, f"rule for unknown state {rule.state}"))
            continue
        diags.extend(pattern_diagnostics(rule, m.input, m.lookahead))
        k = m.input.arity(rule.letter) if rule.letter in m.input else 0
        n = arities[rule.state]

        def bad(msg, rule=rule):
            diags.append(Diagnostic("rhs", rule.state, rule.letter, rule.pattern, msg))

        stack = [rule.rhs]
        while stack:
            e = stack.pop()
            if isinstance(e, Param):
                if e.index > n:
                    bad(f"parameter x{e.index} beyond arity {n} of {rule.state}")
            elif isinstance(e, Call):
                if e.state not in arities:
                    bad(f"call to unknown state {e.state}")
                elif len(e.args) != arities[e.state]:
                    bad(f"call to {e.state} with {len(e.args)} arguments, expected {arities[e.state]}")
                if not 1 <= e.child <= k:
                    bad(f"child index {e.child} out of range for {rule.letter} of arity {k}")
                stack.extend(e.args)
            elif isinstance(e, Out):
                if e.label not in m.output:
                    bad(f"unknown output letter {e.label}")
                elif m.output.arity(e.label) != len(e.args):
                    bad(f"output letter {e.label} has arity {m.output.arity(e.label)}")
                stack.extend(e.args)
            else:
                bad(f"bad right-hand side {e!r}")
    diags.extend(determinism_diagnostics(m.rules, m.state_names, m.input, m.lookahead))
    return diags


def _select(disp, state, letter, vec, path):
    try:
        rule = disp.lookup(state, letter, vec)
    except AmbiguousRules:
        raise IllFormedError([Diagnostic("nondeterministic", state, letter, vec, f"ambiguous rules for {state}<{letter}>")])
    if rule is None:
        raise UndefinedTransition(state, letter, vec, path)
    return rule


# ---------------------------------------------------------------------------
# Outermost semantics


def run_oi_open(m: MacroTT, state: str, t: Tree) -> Context:
    """Normal form of ``state<t>(x1, ..., xn)`` with formal parameters.

    Evaluation is demand-driven from the root.  The open context of each
    reached (state, subtree) pair is computed once; a call then substitutes
    only the arguments whose parameters occur in that context, so a
    discarded argument is never evaluated (call-by-need).
    """
    disp = m.dispatcher()
    la = annotate(m.lookahead, t) if m.lookahead is not None else None
    opened: dict[tuple, object] = {}

    def open_(q, node, path):
        key = (q, id(node))
        hit = opened.get(key)
        if hit is None:
            try:
                rule = _select(disp, q, node.label, m.vector(node.children, la), path)
                hit = ev(rule.rhs, node, path)
            except UndefinedTransition as exc:
                hit = exc
            opened[key] = hit
        if isinstance(hit, UndefinedTransition):
            raise hit
        return hit

    def ev(e, node, path):
        if isinstance(e, Param):
            return e
        if isinstance(e, Out):
            return Tree(e.label, [ev(a, node, path) for a in e.args])
        body = open_(e.state, node.children[e.child - 1], path + (e.child,))
        if not e.args:
            return body
        used = body.params
        args = [ev(a, node, path) if j in used else None for j, a in enumerate(e.args, 1)]
        return substitute_body(body, args)

    return Context(m.arity(state), open_(state, t, ()))


def run_oi(m: MacroTT, t: Tree) -> Tree:
    return run_oi_open(m, m.initial, t).body


# ---------------------------------------------------------------------------
# Bottom-up semantics


def _apply(e, child_regs):
    """Evaluate a rule RHS to a context body over child registers, or UNDEFINED."""
    if isinstance(e, Param):
        return e
    if isinstance(e, Out):
        args = []
        for a in e.args:
            v = _apply(a, child_regs)
            if v is UNDEFINED:
                return UNDEFINED
            args.append(v)
        return Tree(e.label, args)
    ctx = child_regs[e.child - 1][e.state]
    if ctx is UNDEFINED:
        return UNDEFINED
    used = ctx.body.params
    args = []
    for j, a in enumerate(e.args, 1):
        if j in used:
            v = _apply(a, child_regs)
            if v is UNDEFINED:
                return UNDEFINED
            args.append(v)
        else:
            args.append(None)  # discarded argument, never inspected
    return substitute_body(ctx.body, args)


def bottomup_configurations(m: MacroTT, t: Tree) -> dict[int, tuple]:
    """``id(subtree) -> (lookahead state, {state: Context | UNDEFINED})``."""
    disp = m.dispatcher()
    configs: dict[int, tuple] = {}
    for node in distinct_postorder(t):
        if id(node) in configs:
            continue
        kids = [configs[id(c)] for c in node.children]
        if m.lookahead is not None:
            vec = tuple(k[0] for k in kids)
            here = m.lookahead.step(node.label, vec)
        else:
            vec = (None,) * len(kids)
            here = None
        child_regs = [k[1] for k in kids]
        regs = {}
        for q, n in m.states:
            try:
                rule = disp.lookup(q, node.label, vec)
            except AmbiguousRules:
                raise IllFormedError([Diagnostic("nondeterministic", q, node.label, vec, f"ambiguous rules for {q}<{node.label}>")])
            if rule is None:
                regs[q] = UNDEFINED
            else:
                body = _apply(rule.rhs, child_regs)
                regs[q] = UNDEFINED if body is UNDEFINED else Context(n, body)
        configs[id(node)] = (here, regs)
    return configs


def run_bottomup(m: MacroTT, t: Tree) -> dict:
    return bottomup_configurations(m, t)[id(t)][1]


def run_mtt_bottomup(m: MacroTT, t: Tree) -> Tree:
    """Output via the bottom-up semantics; raises if undefined."""
    v = run_bottomup(m, t)[m.initial]
    if v is UNDEFINED:
        raise UndefinedTransition(m.initial, t.label, (), ())
    return v.body


# ---------------------------------------------------------------------------
# Lookahead elimination


def _fresh(base: str, taken) -> str:
    name, i = base, 1
    while name in taken:
        i += 1
        name = f"{base}{i}"
    return name


@dataclass(frozen=True)
class Elimination:
    mtt: MacroTT
    selector: str
    sink: str


def eliminate_lookahead_detailed(m: MacroTT) -> Elimination:
    ensure_wellformed(m)
    la = m.lookahead
    if la is None:
        return Elimination(m, "", "")
    taken = set(m.state_names)
    sel = _fresh("sel", taken)
    sink = _fresh("sink", taken | {sel})
    n = len(la.states)
    disp = m.dispatcher()

    def tower(k, prefix, leaf_for):
        if len(prefix) == k:
            return leaf_for(prefix)
        branches = tuple(tower(k, prefix + (r,), leaf_for) for r in la.states)
        if all(b == branches[0] for b in branches):
            return branches[0]  # the selector is total, so an all-equal choice is a no-op
        return Call(sel, len(prefix) + 1, branches)

    rules = []
    for letter, k in m.input.letters:
        def pick(vec, letter=letter):
            return Param(la.index(la.step(letter, vec)))

        rules.append(Rule(sel, letter, (None,) * k, tower(k, (), pick)))

    for q, _ in m.states:
        for letter, k in m.input.letters:
            chosen = {vec: disp.lookup(q, letter, vec) for vec in itertools.product(la.states, repeat=k)}
            if all(r is None for r in chosen.values()):
                continue

            def leaf(vec, chosen=chosen):
                rule = chosen[vec]
                return rule.rhs if rule is not None else Call(sink, 1, ())

            rules.append(Rule(q, letter, (None,) * k, tower(k, (), leaf)))

    states = m.states + ((sel, n), (sink, 0))
    return Elimination(MacroTT(m.input, m.output, states, m.initial, tuple(rules), None), sel, sink)


def eliminate_lookahead(m: MacroTT) -> MacroTT:
    """An equivalent MTT without lookahead.

    Lookahead state ``r_i`` of a subtree is encoded as the value
    ``(x1..xn) -> x_i`` of a fresh n-ary selector state; each rule becomes a
    nest of selector calls that branches on the children's lookahead states.
    """
    return eliminate_lookahead_detailed(m).mtt


def tower_leaf_count(rhs, selector: str) -> int:
    """Leaves of the selector dispatch tower at the top of ``rhs``."""
    if isinstance(rhs, Call) and rhs.state == selector:
        return sum(tower_leaf_count(a, selector) for a in rhs.args)
    return 1


# ---------------------------------------------------------------------------
# Unary output and tree-to-string transducers


def _chain(items, tail):
    acc = tail
    for item in reversed(items):
        if isinstance(item, Call):
            acc = Call(item.state, item.child, (acc,))
        else:
            acc = Out(item, (acc,))
    return acc


def tdtts_to_mtt_unary(tt: TopDownTT, end: str = "ε") -> MacroTT:
    """Represent each concatenable string by the unary context ``x -> w(x)``."""
    if not tt.string_output:
        raise TermError("expected a tree-to-string transducer")
    ensure_wellformed(tt)
    if end in tt.output:
        raise TermError(f"output symbol {end!r} clashes with the end marker")
    output = RankedAlphabet.of([(s, 1) for s in tt.output] + [(end, 0)])
    main = _fresh("main", set(tt.states))
    states = ((main, 0),) + tuple((q, 1) for q in tt.states)
    rules = []
    for r in tt.rules:
        if r.state == tt.initial:
            rules.append(Rule(main, r.letter, r.pattern, _chain(r.rhs, Out(end))))
    for r in tt.rules:
        rules.append(Rule(r.state, r.letter, r.pattern, _chain(r.rhs, Param(1))))
    return MacroTT(tt.input, output, states, main, tuple(rules), tt.lookahead)


GROUND = "g"


def _tail(e, child_tails):
    """Where a unary context ends: parameter index, GROUND (ε) or UNDEFINED."""
    while True:
        if isinstance(e, Param):
            return e.index
        if isinstance(e, Out):
            if not e.args:
                return GROUND
            e = e.args[0]
            continue
        v = child_tails[e.child - 1][e.state]
        if v is UNDEFINED or v == GROUND:
            return v
        e = e.args[v - 1]


def _string_part(e, child_tails):
    out = []
    while True:
        if isinstance(e, Param):
            return tuple(out)
        if isinstance(e, Out):
            if not e.args:
                return tuple(out)
            out.append(e.label)
            e = e.args[0]
            continue
        out.append(Call(e.state, e.child))
        v = child_tails[e.child - 1][e.state]
        if not isinstance(v, int):
            return tuple(out)
        e = e.args[v - 1]


def _tail_code(v) -> str:
    return "u" if v is UNDEFINED else str(v)


def mtt_unary_to_tdtts(m: MacroTT) -> TopDownTT:
    """A tree-to-string transducer with lookahead computing ``decode(m(t))``.

    Its lookahead automaton tracks, for each MTT state, how that state's
    unary context ends ("tail map"), together with m's own lookahead state.
    """
    ensure_wellformed(m)
    if not m.output.is_unary():
        raise TermError(f"output alphabet {m.output} is not unary letters plus one end marker")
    la = m.lookahead
    disp = m.dispatcher()
    names = m.state_names

    def step(letter, kids):
        """kids: tuple of (la state, tail tuple) -> (la state, tail tuple)."""
        vec = tuple(k[0] for k in kids)
        here = la.step(letter, vec) if la is not None else None
        child_tails = [dict(zip(names, k[1])) for k in kids]
        tails = []
        for q in names:
            rule = disp.lookup(q, letter, vec)
            tails.append(UNDEFINED if rule is None else _tail(rule.rhs, child_tails))
        return (here, tuple(tails))

    # reachable lookahead configurations, in discovery order
    found: list = []
    seen = set()
    changed = True
    while changed:
        changed = False
        for letter, k in m.input.letters:
            for kids in itertools.product(list(found), repeat=k):
                s = step(letter, kids)
                if s not in seen:
                    seen.add(s)
                    found.append(s)
                    changed = True

    def name(s):
        here, tails = s
        code = "~" + "-".join(_tail_code(v) for v in tails)
        return (here or "") + code

    names_of = {s: name(s) for s in found}
    delta = {}
    rules = []
    for letter, k in m.input.letters:
        for kids in itertools.product(found, repeat=k):
            s = step(letter, kids)
            delta[(letter, tuple(names_of[c] for c in kids))] = names_of[s]
            vec = tuple(c[0] for c in kids)
            pattern = tuple(names_of[c] for c in kids)
            child_tails = [dict(zip(names, c[1])) for c in kids]
            for q, tail in zip(names, s[1]):
                if tail is UNDEFINED:
                    continue
                rule = disp.lookup(q, letter, vec if la is not None else (None,) * k)
                rules.append(Rule(q, letter, pattern, _string_part(rule.rhs, child_tails)))
    lookahead = Dbta(m.input, tuple(names_of[s] for s in found), delta)
    symbols = tuple(a for a, n in m.output.letters if n == 1)
    return TopDownTT(m.input, symbols, names, m.initial, tuple(rules), lookahead)


def is_unary_chain(ctx: Context) -> bool:
    """True iff the body is unary letters ending in one parameter or a nullary letter."""
    node = ctx.body
    while isinstance(node, Tree) and len(node.children) == 1:
        node = node.children[0]
    return isinstance(node, Param) or not node.children
