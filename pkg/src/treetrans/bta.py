"""Deterministic bottom-up tree automata, used as lookahead devices."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .terms import RankedAlphabet, Tree, TermError, distinct_postorder


class IncompleteAutomatonError(TermError):
    def __init__(self, missing):
        self.missing = missing
        shown = ", ".join(f"{a}({','.join(v)})" for a, v in missing[:5])
        more = f" and {len(missing) - 5} more" if len(missing) > 5 else ""
        super().__init__(f"lookahead automaton is not total: missing {shown}{more}")


@dataclass(frozen=True)
class Dbta:
    alphabet: RankedAlphabet
    states: tuple[str, ...]
    delta: Mapping[tuple[str, tuple[str, ...]], str]
    require_total: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        delta = {(a, tuple(v)): r for (a, v), r in self.delta.items()}
        object.__setattr__(self, "delta", delta)
        if len(set(self.states)) != len(self.states):
            raise TermError("duplicate lookahead state")
        known = set(self.states)
        for (a, vec), r in delta.items():
            if a not in self.alphabet:
                raise TermError(f"transition on unknown letter {a!r}")
            if len(vec) != self.alphabet.arity(a):
                raise TermError(f"transition {a}{vec} has wrong arity")
            for s in (*vec, r):
                if s not in known:
                    raise TermError(f"transition {a}{vec} -> {r} mentions unknown state {s!r}")
        if self.require_total:
            missing = check_total(self)
            if missing:
                raise IncompleteAutomatonError(missing)

    def __hash__(self):
        return hash((self.alphabet, self.states, tuple(sorted(self.delta.items()))))

    def index(self, state: str) -> int:
        """1-based position of ``state`` in declaration order."""
        return self.states.index(state) + 1

    def step(self, letter: str, children: tuple[str, ...]) -> str:
        try:
            return self.delta[(letter, children)]
        except KeyError:
            raise IncompleteAutomatonError([(letter, children)]) from None


def check_total(a: Dbta) -> list[tuple[str, tuple[str, ...]]]:
    """Every (letter, child-state vector) with no transition; empty iff total."""
    missing = []
    for letter, k in a.alphabet.letters:
        for vec in itertools.product(a.states, repeat=k):
            if (letter, vec) not in a.delta:
                missing.append((letter, vec))
    return missing


def run_dbta(a: Dbta, t: Tree) -> str:
    return annotate(a, t)[id(t)]


def annotate(a: Dbta, t: Tree) -> dict[int, str]:
    """Lookahead state of every subtree, keyed by ``id`` of the subtree object."""
    states: dict[int, str] = {}
    for node in distinct_postorder(t):
        if id(node) not in states:
            states[id(node)] = a.step(node.label, tuple(states[id(c)] for c in node.children))
    return states


PLUS, MINUS = "r+", "r-"


def contains_letter(alphabet: RankedAlphabet, letter: str = "b") -> Dbta:
    """``r+`` on trees containing ``letter``, ``r-`` otherwise."""
    delta = {}
    for name, k in alphabet.letters:
        for vec in itertools.product((PLUS, MINUS), repeat=k):
            delta[(name, vec)] = PLUS if name == letter or PLUS in vec else MINUS
    return Dbta(alphabet, (PLUS, MINUS), delta)


def contains_b() -> Dbta:
    return contains_letter(RankedAlphabet.of({"a": 2, "b": 1, "c": 0}), "b")
