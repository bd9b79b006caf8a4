"""Right-hand sides, rules and rule selection shared by the transducer models."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

from .terms import Param


class _Undefined:
    """Register value of a call that has no normal form."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "undefined"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_Undefined, ())


UNDEFINED = _Undefined()


class TransductionError(Exception):
    """A run failed; the transduced function is undefined on this input."""


class UndefinedTransition(TransductionError):
    def __init__(self, state, letter, vector=(), path=()):
        self.state = state
        self.letter = letter
        self.vector = tuple(vector)
        self.path = tuple(path)
        where = "root" if not self.path else "/".join(map(str, self.path))
        la = f" with lookahead ({','.join(v or '_' for v in self.vector)})" if any(self.vector) else ""
        super().__init__(f"no rule for state {state} at letter {letter}{la} (input path {where})")


class IllFormedError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(d.message for d in self.diagnostics[:5])
        super().__init__(f"ill-formed transducer: {lines}")


class Diagnostic(NamedTuple):
    kind: str
    state: Optional[str]
    letter: Optional[str]
    vector: tuple
    message: str


@dataclass(frozen=True)
class Call:
    """``state<t_child>(args...)``; ``child`` is 1-based, ``args`` empty for top-down rules."""

    state: str
    child: int
    args: tuple = ()

    def __str__(self):
        from .syntax import format_rhs

        return format_rhs(self)


@dataclass(frozen=True)
class Out:
    """An output letter applied to right-hand sides."""

    label: str
    args: tuple = ()

    def __str__(self):
        from .syntax import format_rhs

        return format_rhs(self)


# A tree RHS is an Out/Call/Param; a string RHS is a tuple of literal symbols and Calls.
TreeRhs = Union[Out, Call, Param]
StringRhs = tuple
Pattern = tuple  # one lookahead state or None (wildcard) per child


@dataclass(frozen=True)
class Rule:
    state: str
    letter: str
    pattern: Pattern
    rhs: object

    @property
    def key(self):
        return (self.state, self.letter, self.pattern)


def pattern_matches(pattern: Pattern, vector: tuple) -> bool:
    return all(p is None or p == v for p, v in zip(pattern, vector))


def at_least_as_specific(p: Pattern, q: Pattern) -> bool:
    return all(b is None or a == b for a, b in zip(p, q))


class AmbiguousRules(Exception):
    def __init__(self, rules):
        self.rules = rules
        super().__init__("ambiguous rules")


class Dispatcher:
    """Selects the most specific applicable rule for a concrete lookahead vector.

    Without lookahead the vector is all ``None`` and only all-wildcard
    patterns match.
    """

    def __init__(self, rules: Sequence[Rule]):
        self._by_head: dict[tuple[str, str], list[Rule]] = defaultdict(list)
        for r in rules:
            bucket = self._by_head[(r.state, r.letter)]
            if r not in bucket:
                bucket.append(r)
        self._cache: dict = {}

    def lookup(self, state: str, letter: str, vector: tuple) -> Rule | None:
        key = (state, letter, vector)
        try:
            hit = self._cache[key]
        except KeyError:
            hit = self._cache[key] = self._select(state, letter, vector)
        if isinstance(hit, AmbiguousRules):
            raise hit
        return hit

    def _select(self, state, letter, vector):
        candidates = [r for r in self._by_head.get((state, letter), ()) if pattern_matches(r.pattern, vector)]
        if not candidates:
            return None
        best = [r for r in candidates if all(at_least_as_specific(r.pattern, o.pattern) for o in candidates)]
        if len(best) == 1:
            return best[0]
        return AmbiguousRules(best or candidates)

    def heads(self):
        return self._by_head.keys()


def concrete_vectors(lookahead, arity: int):
    if lookahead is None:
        return [(None,) * arity]
    return list(itertools.product(lookahead.states, repeat=arity))


def determinism_diagnostics(rules, states, alphabet, lookahead) -> list[Diagnostic]:
    """Check that every concrete lookahead vector selects at most one rule."""
    disp = Dispatcher(rules)
    out = []
    for state, letter in sorted(disp.heads()):
        if letter not in alphabet:
            continue
        for vec in concrete_vectors(lookahead, alphabet.arity(letter)):
            try:
                disp.lookup(state, letter, vec)
            except AmbiguousRules as e:
                shown = ",".join(v or "_" for v in vec)
                out.append(
                    Diagnostic(
                        "nondeterministic",
                        state,
                        letter,
                        vec,
                        f"{len(e.rules)} incomparable rules for {state}<{letter}> under lookahead ({shown})",
                    )
                )
    return out


def pattern_diagnostics(rule: Rule, alphabet, lookahead) -> list[Diagnostic]:
    out = []
    if rule.letter not in alphabet:
        return [Diagnostic("unknown-letter", rule.state, rule.letter, (), f"rule for unknown input letter {rule.letter}")]
    k = alphabet.arity(rule.letter)
    if len(rule.pattern) != k:
        out.append(Diagnostic("pattern", rule.state, rule.letter, rule.pattern, f"pattern length {len(rule.pattern)} != arity {k}"))
    for p in rule.pattern:
        if p is None:
            continue
        if lookahead is None:
            out.append(Diagnostic("pattern", rule.state, rule.letter, rule.pattern, "lookahead pattern without a lookahead automaton"))
            break
        if p not in lookahead.states:
            out.append(Diagnostic("pattern", rule.state, rule.letter, rule.pattern, f"unknown lookahead state {p}"))
    return out


def rhs_size(rhs) -> int:
    if isinstance(rhs, tuple):
        return len(rhs)
    if isinstance(rhs, Param):
        return 1
    return 1 + sum(rhs_size(a) for a in rhs.args)


def rhs_calls(rhs):
    """Every Call in the right-hand side, outermost first."""
    if isinstance(rhs, tuple):
        for item in rhs:
            if isinstance(item, Call):
                yield item
        return
    if isinstance(rhs, Call):
        yield rhs
    if isinstance(rhs, (Call, Out)):
        for a in rhs.args:
            yield from rhs_calls(a)
