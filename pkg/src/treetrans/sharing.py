"""Shared evaluation of top-down tree transducers into term DAGs."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .bta import annotate
from .rules import Call, rhs_size
from .tdtt import TopDownTT, _select, ensure_wellformed
from .terms import TermDag, Tree, TermError, dag_stats, tree_size, unfold


def run_shared(tt: TopDownTT, t: Tree) -> TermDag:
    """Evaluate with one DAG fragment per (state, input position).

    Each demanded pair contributes a single copy of its rule's right-hand
    side; every other demand for the same pair points at that copy.
    """
    if tt.string_output:
        raise TermError("shared evaluation needs a tree-output transducer")
    ensure_wellformed(tt)
    disp = tt.dispatcher()
    la = annotate(tt.lookahead, t) if tt.lookahead is not None else None
    nodes: dict[int, tuple] = {}
    memo: dict[tuple, int] = {}

    def ev(q, node, path):
        key = (q, path)
        hit = memo.get(key)
        if hit is not None:
            return hit
        rule = _select(disp, q, node.label, tt.vector(node.children, la), path)
        hit = memo[key] = build(rule.rhs, node, path)
        return hit

    def build(e, node, path):
        if isinstance(e, Call):
            return ev(e.state, node.children[e.child - 1], path + (e.child,))
        kids = tuple(build(a, node, path) for a in e.args)
        i = len(nodes)
        nodes[i] = (e.label, kids)
        return i

    root = ev(tt.initial, t, ())
    return TermDag(nodes, root).renumbered()


def memo_bound(tt: TopDownTT, t: Tree) -> int:
    """Upper bound on run_shared's node count: states x input size x largest RHS."""
    biggest = max((rhs_size(r.rhs) for r in tt.rules), default=0)
    return len(tt.states) * tree_size(t) * biggest


def dedup(d: TermDag) -> TermDag:
    """Merge structurally identical sub-DAGs (canonical bottom-up numbering)."""
    canon: dict[int, int] = {}
    table: dict[tuple, int] = {}
    nodes: dict[int, tuple] = {}
    for i in d.topological():
        label, kids = d.nodes[i]
        key = (label, tuple(canon[c] for c in kids))
        j = table.get(key)
        if j is None:
            j = table[key] = len(nodes)
            nodes[j] = key
        canon[i] = j
    return TermDag(nodes, canon[d.root])


def is_minimal(d: TermDag) -> bool:
    """No two reachable nodes have the same label and child list."""
    seen = set()
    for i in d.reachable():
        key = d.nodes[i]
        if key in seen:
            return False
        seen.add(key)
    return True


def quadratic_input(n: int) -> Tree:
    """``S^n(0)``."""
    t = Tree("0")
    for _ in range(n):
        t = Tree("S", (t,))
    return t


def quadratic_size(n: int) -> int:
    return n * (n + 1) // 2 + 2 * n + 1


CSV_HEADER = ("n", "input_size", "tree_size", "dag_memo_nodes", "dag_dedup_nodes", "micros")


@dataclass(frozen=True)
class GrowthRow:
    n: int
    input_size: int
    tree_size: int
    dag_memo_nodes: int
    dag_dedup_nodes: int
    micros: int


@dataclass
class GrowthReport:
    rows: list[GrowthRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.n, r.input_size, r.tree_size, r.dag_memo_nodes, r.dag_dedup_nodes, r.micros])
        return buf.getvalue()

    def row(self, n: int) -> GrowthRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)


def growth_report(tt: TopDownTT, family: Callable[[int], Tree], n_range: Iterable[int]) -> GrowthReport:
    report = GrowthReport()
    for n in n_range:
        t = family(n)
        start = time.perf_counter()
        dag = run_shared(tt, t)
        micros = int((time.perf_counter() - start) * 1e6)
        size = tree_size(unfold(dag))
        report.rows.append(
            GrowthRow(n, tree_size(t), size, dag_stats(dag)[0], dag_stats(dedup(dag))[0], micros)
        )
    return report
