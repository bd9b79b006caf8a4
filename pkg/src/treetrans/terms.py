"""Ranked alphabets, trees, contexts and term DAGs.

Trees are immutable and hash-consed only by value: two structurally equal
trees compare equal and hash equal, but may be distinct objects.  Hashes are
computed once at construction, and equality checks remember the node pairs
they have already compared, so trees that share subtrees in memory (as
produced by copying transducers) are compared in time proportional to the
number of distinct objects rather than the unfolded size.
"""

from __future__ import annotations

import functools
import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

EPSILON = "ε"

# Characters that cannot appear in letter names.  The first group is
# reserved by the term syntax, the second by the definition-file syntax.
_RESERVED = set("()<>,|.") | set("{}:;='\"@")
_PARAM_RE = re.compile(r"x[0-9]+\Z")


class TermError(ValueError):
    pass


class TermSyntaxError(TermError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}" if text else message)


class UnknownLetterError(TermError):
    pass


class ArityError(TermError):
    pass


class CycleError(TermError):
    pass


def check_letter_name(name: str) -> None:
    if not isinstance(name, str) or not name:
        raise TermError(f"invalid letter name {name!r}")
    if any(ch.isspace() or ch in _RESERVED for ch in name):
        raise TermError(f"letter name {name!r} contains a reserved character")
    if _PARAM_RE.match(name):
        raise TermError(f"letter name {name!r} is reserved for parameters")


@dataclass(frozen=True)
class RankedAlphabet:
    """Letters with fixed arities, in declaration order.

    ``neutral`` letters are nullary letters erased by :func:`yield_of`.
    """

    letters: tuple[tuple[str, int], ...]
    neutral: frozenset[str] = frozenset()
    _arity: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        arity = {}
        for name, k in self.letters:
            check_letter_name(name)
            if name in arity:
                raise TermError(f"duplicate letter {name!r}")
            if not isinstance(k, int) or k < 0:
                raise TermError(f"letter {name!r} has invalid arity {k!r}")
            arity[name] = k
        for name in self.neutral:
            if arity.get(name) != 0:
                raise TermError(f"neutral letter {name!r} must be a nullary letter")
        object.__setattr__(self, "letters", tuple(self.letters))
        object.__setattr__(self, "neutral", frozenset(self.neutral))
        object.__setattr__(self, "_arity", arity)

    @classmethod
    def of(cls, letters: Mapping[str, int] | Iterable[tuple[str, int]], neutral=()):
        items = letters.items() if isinstance(letters, Mapping) else letters
        return cls(tuple((str(n), int(k)) for n, k in items), frozenset(neutral))

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise UnknownLetterError(f"unknown letter {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._arity

    def __iter__(self) -> Iterator[str]:
        return (name for name, _ in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.letters)

    @property
    def nullary(self) -> tuple[str, ...]:
        return tuple(name for name, k in self.letters if k == 0)

    @property
    def max_arity(self) -> int:
        return max((k for _, k in self.letters), default=0)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def as_dict(self) -> dict[str, int]:
        return dict(self.letters)

    def is_unary(self) -> bool:
        """True when every letter is unary except exactly one nullary end marker."""
        return len(self.nullary) == 1 and all(k <= 1 for _, k in self.letters)

    def end_letter(self) -> str:
        ends = self.nullary
        if EPSILON in ends:
            return EPSILON
        if len(ends) != 1:
            raise TermError(f"alphabet {self} has no unique end-of-string letter")
        return ends[0]

    def __str__(self) -> str:
        return "{" + ",".join(f"{n}:{k}" for n, k in self.letters) + "}"


class Param:
    """The parameter leaf ``x<index>`` of a context (1-based)."""

    __slots__ = ("index", "_hash", "params")

    def __init__(self, index: int):
        if index < 1:
            raise TermError(f"parameter index must be positive, got {index}")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "_hash", hash(("$param", index)))
        object.__setattr__(self, "params", frozenset((index,)))

    def __setattr__(self, name, value):
        raise AttributeError("Param is immutable")

    label = property(lambda self: f"x{self.index}")
    children = ()

    def __eq__(self, other):
        return isinstance(other, Param) and other.index == self.index

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Param({self.index})"

    def __str__(self):
        return f"x{self.index}"


_NO_PARAMS: frozenset[int] = frozenset()


class Tree:
    """A node ``label(children...)``; children may include :class:`Param` leaves."""

    __slots__ = ("label", "children", "_hash", "params")

    def __init__(self, label: str, children: Sequence[Term] = ()):
        children = tuple(children)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "_hash", hash((label, tuple(c._hash for c in children))))
        if children:
            ps = _NO_PARAMS.union(*(c.params for c in children))
        else:
            ps = _NO_PARAMS
        object.__setattr__(self, "params", ps)

    def __setattr__(self, name, value):
        raise AttributeError("Tree is immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Tree) or self._hash != other._hash:
            return False
        return _structurally_equal(self, other)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return f"Tree({str(self)!r})"

    def __str__(self):
        return format_term(self)

    @property
    def is_ground(self) -> bool:
        return not self.params


Term = Union[Tree, Param]


def _structurally_equal(a: Tree, b: Tree) -> bool:
    seen = set()
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        key = (id(x), id(y))
        if key in seen:
            continue
        seen.add(key)
        if isinstance(x, Param) or isinstance(y, Param):
            if x != y:
                return False
            continue
        if x._hash != y._hash or x.label != y.label or len(x.children) != len(y.children):
            return False
        stack.extend(zip(x.children, y.children))
    return True


def leaf(label: str) -> Tree:
    return Tree(label, ())


def format_term(t: Term) -> str:
    """Print ``t`` in the concrete syntax, without whitespace."""
    out = []
    stack: list = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, Param):
            out.append(str(item))
        else:
            out.append(item.label)
            if item.children:
                out.append("(")
                stack.append(")")
                for i, c in enumerate(reversed(item.children)):
                    stack.append(c)
                    if i < len(item.children) - 1:
                        stack.append(",")
    return "".join(out)


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN_NAME = re.compile(r"[^\s(),<>|.{}:;='\"@]+")


class _TermParser:
    def __init__(self, text: str, alphabet: RankedAlphabet | None, max_param: int | None):
        self.text = text
        self.pos = 0
        self.alphabet = alphabet
        self.max_param = max_param

    def error(self, message):
        raise TermSyntaxError(message, self.text, self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def name(self) -> str:
        self.skip()
        m = _TOKEN_NAME.match(self.text, self.pos)
        if not m:
            self.error("expected a letter name")
        self.pos = m.end()
        return m.group()

    def term(self) -> Term:
        # explicit stack of open applications: (start, name, children)
        stack: list[tuple[int, str, list]] = []
        while True:
            start = self.pos
            name = self.name()
            if self.peek() == "(":
                self.pos += 1
                stack.append((start, name, []))
                continue
            done = self.build(start, name, [])
            while True:
                if not stack:
                    return done
                stack[-1][2].append(done)
                if self.peek() == ",":
                    self.pos += 1
                    break
                self.expect(")")
                start, name, children = stack.pop()
                done = self.build(start, name, children)

    def build(self, start: int, name: str, children: list) -> Term:
        if _PARAM_RE.match(name):
            if self.max_param is None:
                self.pos = start
                self.error(f"parameter {name} not allowed here")
            if children:
                self.pos = start
                self.error(f"parameter {name} cannot have children")
            index = int(name[1:])
            if not 1 <= index <= self.max_param:
                self.pos = start
                self.error(f"parameter {name} out of range 1..{self.max_param}")
            return Param(index)
        if self.alphabet is not None:
            if name not in self.alphabet:
                raise UnknownLetterError(f"unknown letter {name!r} at position {start}")
            k = self.alphabet.arity(name)
            if k != len(children):
                raise ArityError(
                    f"letter {name!r} has arity {k} but got {len(children)} children at position {start}"
                )
        return Tree(name, children)

    def parse(self) -> Term:
        t = self.term()
        if self.peek():
            self.error("unexpected trailing input")
        return t


def parse_term(text: str, alphabet: RankedAlphabet | None = None) -> Tree:
    """Parse ``name | name(term, ...)``; arities are checked when an alphabet is given."""
    return _TermParser(text, alphabet, None).parse()


def parse_context(text: str, arity: int, alphabet: RankedAlphabet | None = None) -> "Context":
    return Context(arity, _TermParser(text, alphabet, arity).parse())


def check_tree(t: Term, alphabet: RankedAlphabet, allow_params: bool = False) -> None:
    """Raise unless ``t`` is well-formed over ``alphabet``."""
    seen = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Param):
            if not allow_params:
                raise TermError(f"unexpected parameter {node}")
            continue
        k = alphabet.arity(node.label)
        if k != len(node.children):
            raise ArityError(f"letter {node.label!r} has arity {k} but got {len(node.children)} children")
        stack.extend(node.children)


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class Context:
    """A tree with parameter leaves ``x1..x{arity}``; arity 0 means a plain tree."""

    arity: int
    body: Term

    def __post_init__(self):
        if self.arity < 0:
            raise TermError("context arity must be non-negative")
        if self.body.params and max(self.body.params) > self.arity:
            raise TermError(f"context body {self.body} uses a parameter beyond arity {self.arity}")

    def __str__(self):
        if self.arity == 0:
            return format_term(self.body)
        xs = ",".join(f"x{i}" for i in range(1, self.arity + 1))
        return f"({xs}) -> {format_term(self.body)}"

    @property
    def used_arity(self) -> int:
        return max(self.body.params, default=0)

    def __call__(self, *args: Term) -> Term:
        return substitute_body(self.body, args)


def substitute_body(body: Term, args: Sequence[Term]) -> Term:
    """Replace every ``x_i`` in ``body`` by ``args[i-1]``.

    Subtrees without parameters are reused, and shared subtrees are
    rewritten once, so the result shares structure with the inputs.
    """
    if not body.params:
        return body
    memo: dict[int, Term] = {}
    stack = [(body, False)]
    while stack:
        node, ready = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if not node.params:
            memo[key] = node
        elif isinstance(node, Param):
            memo[key] = args[node.index - 1]
        elif ready:
            memo[key] = Tree(node.label, [memo[id(c)] for c in node.children])
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in node.children if id(c) not in memo)
    return memo[id(body)]


def substitute(ctx: Context, args: Sequence[Context], arity: int | None = None) -> Context:
    """Compose ``ctx`` with ``args``: ``x_i`` becomes ``args[i-1]``.

    The result has the given ``arity``; by default the largest arity among
    the arguments.
    """
    if len(args) != ctx.arity:
        raise ArityError(f"context of arity {ctx.arity} applied to {len(args)} arguments")
    if arity is None:
        arity = max((a.arity for a in args), default=0)
    return Context(arity, substitute_body(ctx.body, [a.body for a in args]))


def normalize(ctx: Context) -> Context:
    """Shrink the declared arity to the largest parameter index in use."""
    return Context(ctx.used_arity, ctx.body)


# ---------------------------------------------------------------------------
# Yield and string codecs


def yield_of(t: Tree, alphabet: RankedAlphabet | None = None) -> str:
    """Left-to-right leaf labels, with the alphabet's neutral letters erased."""
    neutral = alphabet.neutral if alphabet is not None else frozenset()
    out = []
    stack = [t]
    while stack:
        node = stack.pop()
        if node.children:
            stack.extend(reversed(node.children))
        elif isinstance(node, Param):
            raise TermError("yield of a context is undefined")
        elif node.label not in neutral:
            out.append(node.label)
    return "".join(out)


def encode_string(s: str, alphabet: RankedAlphabet) -> Tree:
    """``"abac"`` becomes ``a(b(a(c(ε))))``; each character is one unary letter."""
    t = leaf(alphabet.end_letter())
    for ch in reversed(s):
        if alphabet._arity.get(ch) != 1:
            raise TermError(f"symbol {ch!r} is not a unary letter of {alphabet}")
        t = Tree(ch, (t,))
    return t


def decode_string(t: Term, end: str = EPSILON) -> str:
    out = []
    node = t
    while True:
        if isinstance(node, Param):
            raise TermError("cannot decode a context parameter as a string")
        if len(node.children) == 1:
            out.append(node.label)
            node = node.children[0]
        elif not node.children and node.label == end:
            return "".join(out)
        else:
            raise TermError(f"{format_term(t)} is not a unary chain ending in {end}")


def unary_alphabet(symbols: Iterable[str], end: str = EPSILON) -> RankedAlphabet:
    return RankedAlphabet.of([(s, 1) for s in symbols] + [(end, 0)])


# ---------------------------------------------------------------------------
# Term DAGs


@dataclass(frozen=True)
class TermDag:
    """A rooted DAG: ``nodes[id] = (label, child ids)``."""

    nodes: Mapping[int, tuple[str, tuple[int, ...]]]
    root: int

    def __post_init__(self):
        nodes = {int(i): (lab, tuple(int(c) for c in kids)) for i, (lab, kids) in self.nodes.items()}
        object.__setattr__(self, "nodes", nodes)
        if self.root not in nodes:
            raise TermError(f"root {self.root} is not a node")
        for i, (_, kids) in nodes.items():
            for c in kids:
                if c not in nodes:
                    raise TermError(f"node {i} refers to missing node {c}")

    def __hash__(self):
        return hash((self.root, tuple(sorted(self.nodes.items()))))

    def reachable(self) -> set[int]:
        seen = {self.root}
        stack = [self.root]
        while stack:
            for c in self.nodes[stack.pop()][1]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    def topological(self) -> list[int]:
        """Reachable node ids, children before parents; raises on a cycle."""
        order = []
        state: dict[int, int] = {}
        stack = [(self.root, False)]
        while stack:
            i, done = stack.pop()
            if done:
                state[i] = 2
                order.append(i)
                continue
            s = state.get(i)
            if s == 2:
                continue
            if s == 1:
                raise CycleError(f"cycle through node {i}")
            state[i] = 1
            stack.append((i, True))
            for c in reversed(self.nodes[i][1]):
                if state.get(c) == 1:
                    raise CycleError(f"cycle through node {c}")
                if state.get(c) != 2:
                    stack.append((c, False))
        return order

    def validate(self, alphabet: RankedAlphabet | None = None) -> list[str]:
        problems = []
        try:
            self.topological()
        except CycleError as e:
            problems.append(str(e))
        unreachable = set(self.nodes) - self.reachable()
        if unreachable:
            problems.append(f"unreachable nodes {sorted(unreachable)}")
        if alphabet is not None:
            for i, (lab, kids) in sorted(self.nodes.items()):
                if lab not in alphabet:
                    problems.append(f"node {i}: unknown letter {lab!r}")
                elif alphabet.arity(lab) != len(kids):
                    problems.append(f"node {i}: arity mismatch for {lab!r}")
        return problems

    def renumbered(self) -> "TermDag":
        """Same DAG restricted to reachable nodes, ids 0.. in topological order."""
        order = self.topological()
        new = {old: i for i, old in enumerate(order)}
        nodes = {new[old]: (self.nodes[old][0], tuple(new[c] for c in self.nodes[old][1])) for old in order}
        return TermDag(nodes, new[self.root])


def unfold(d: TermDag) -> Tree:
    built: dict[int, Tree] = {}
    for i in d.topological():
        label, kids = d.nodes[i]
        built[i] = Tree(label, [built[c] for c in kids])
    return built[d.root]


def tree_to_dag(t: Tree) -> TermDag:
    """The tree as an unshared DAG, ids in postorder."""
    nodes = {}

    def go(node):
        kids = tuple(go(c) for c in node.children)
        i = len(nodes)
        nodes[i] = (node.label, kids)
        return i

    root = go(t)
    return TermDag(nodes, root)


def dag_stats(d: TermDag) -> tuple[int, int]:
    reach = d.reachable()
    return len(reach), sum(len(d.nodes[i][1]) for i in reach)


def format_dag(d: TermDag) -> str:
    d = d.renumbered()
    lines = []
    for i in sorted(d.nodes):
        label, kids = d.nodes[i]
        lines.append(f"{i}: {label}({','.join(map(str, kids))})" if kids else f"{i}: {label}")
    lines.append(f"root: {d.root}")
    return "\n".join(lines) + "\n"


_DAG_LINE = re.compile(r"\s*(\d+)\s*:\s*([^\s(),]+)\s*(?:\(\s*([\d\s,]*)\))?\s*\Z")


def parse_dag(text: str) -> TermDag:
    nodes = {}
    root = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("root"):
            m = re.fullmatch(r"root\s*:\s*(\d+)", line)
            if not m:
                raise TermSyntaxError(f"bad root line {raw!r} on line {lineno}")
            root = int(m.group(1))
            continue
        m = _DAG_LINE.match(line)
        if not m:
            raise TermSyntaxError(f"bad node line {raw!r} on line {lineno}")
        i = int(m.group(1))
        if i in nodes:
            raise TermSyntaxError(f"duplicate node id {i} on line {lineno}")
        kids = tuple(int(x) for x in (m.group(3) or "").replace(",", " ").split())
        if m.group(3) is not None and not kids:
            raise TermSyntaxError(f"empty child list on line {lineno}")
        nodes[i] = (m.group(2), kids)
    if root is None:
        raise TermSyntaxError("missing root line")
    return TermDag(nodes, root)


# ---------------------------------------------------------------------------
# Sizes, enumeration, sampling


def _fold(t: Term, combine) -> int:
    """Bottom-up fold, once per distinct node object; iterative so that very
    deep trees are fine."""
    memo: dict[int, int] = {}
    stack = [(t, False)]
    while stack:
        node, ready = stack.pop()
        if id(node) in memo:
            continue
        if ready or not node.children:
            memo[id(node)] = combine([memo[id(c)] for c in node.children])
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in node.children if id(c) not in memo)
    return memo[id(t)]


def tree_size(t: Term) -> int:
    """Node count of the unfolded tree (shared subtrees counted with multiplicity)."""
    return _fold(t, lambda kids: 1 + sum(kids))


def tree_height(t: Term) -> int:
    return _fold(t, lambda kids: 1 + max(kids, default=0))


def subtrees(t: Tree) -> Iterator[Tree]:
    """All subtrees in preorder."""
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def distinct_postorder(t: Tree) -> list[Tree]:
    """Each distinct node object once, children before parents."""
    seen: set[int] = set()
    out: list[Tree] = []
    stack = [(t, False)]
    while stack:
        node, ready = stack.pop()
        if ready:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        stack.extend((c, False) for c in reversed(node.children) if id(c) not in seen)
    return out


def preorder_key(t: Tree, alphabet: RankedAlphabet) -> tuple[int, ...]:
    order = {name: i for i, name in enumerate(alphabet.names)}
    return tuple(order[n.label] for n in subtrees(t))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways to write ``total`` as ``parts`` positive integers."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for cut in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cut + (total,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def _trees_by_size(alphabet: RankedAlphabet, max_nodes: int) -> list[list[Tree]]:
    by_size: list[list[Tree]] = [[] for _ in range(max_nodes + 1)]
    for n in range(1, max_nodes + 1):
        for name, k in alphabet.letters:
            for sizes in _compositions(n - 1, k):
                for kids in itertools.product(*(by_size[s] for s in sizes)):
                    by_size[n].append(Tree(name, kids))
    return by_size


def enumerate_trees(alphabet: RankedAlphabet, max_nodes: int) -> list[Tree]:
    """Every tree with at most ``max_nodes`` nodes, ordered by size, then by
    the preorder label sequence in the alphabet's declaration order."""
    if max_nodes < 1:
        raise TermError("max_nodes must be at least 1")
    if not alphabet.nullary:
        raise TermError(f"alphabet {alphabet} has no nullary letter, so no finite trees")
    order = {name: i for i, name in enumerate(alphabet.names)}
    result = []
    for group in _trees_by_size(alphabet, max_nodes)[1:]:
        group.sort(key=lambda t: tuple(order[n.label] for n in subtrees(t)))
        result.extend(group)
    return result


def enumerate_strings(symbols: Sequence[str], max_length: int) -> list[str]:
    """All strings up to ``max_length``, by length then in symbol order."""
    out = []
    for n in range(max_length + 1):
        out.extend("".join(p) for p in itertools.product(symbols, repeat=n))
    return out


@functools.lru_cache(maxsize=64)
def _count_table(alphabet: RankedAlphabet, size: int) -> tuple[int, ...]:
    counts = [0] * (size + 1)
    for n in range(1, size + 1):
        total = 0
        for _, k in alphabet.letters:
            for sizes in _compositions(n - 1, k):
                prod = 1
                for s in sizes:
                    prod *= counts[s]
                total += prod
        counts[n] = total
    return tuple(counts)


def count_trees(alphabet: RankedAlphabet, size: int) -> int:
    return _count_table(alphabet, size)[size] if size >= 1 else 0


def random_tree(alphabet: RankedAlphabet, max_nodes: int, rng: random.Random) -> Tree:
    """A tree drawn uniformly among those of a uniformly chosen feasible size."""
    counts = _count_table(alphabet, max(max_nodes, 0))
    sizes = [n for n in range(1, max_nodes + 1) if counts[n]]
    if not sizes:
        raise TermError(f"no trees with at most {max_nodes} nodes over {alphabet}")

    def sample(n):
        options = []
        for name, k in alphabet.letters:
            for parts in _compositions(n - 1, k):
                weight = 1
                for s in parts:
                    weight *= counts[s]
                if weight:
                    options.append((weight, name, parts))
        pick = rng.randrange(sum(w for w, _, _ in options))
        for weight, name, parts in options:
            if pick < weight:
                return Tree(name, [sample(s) for s in parts])
            pick -= weight
        raise AssertionError("unreachable")

    return sample(rng.choice(sizes))
