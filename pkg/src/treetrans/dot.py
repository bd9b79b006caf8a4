"""Graphviz DOT rendering of trees, term DAGs, automata and bottom-up runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .bta import Dbta
from .mtt import MacroTT
from .mtt import bottomup_configurations as mtt_configurations
from .rules import UNDEFINED
from .tdtt import TopDownTT
from .tdtt import bottomup_configurations as tdtt_configurations
from .terms import Context, TermDag, Tree, format_term


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


@dataclass(frozen=True)
class RunTrace:
    """A bottom-up run of ``machine`` on ``tree``, rendered with the
    lookahead state and register contents at every node."""

    machine: Union[TopDownTT, MacroTT]
    tree: Tree


def _render(v) -> str:
    if v is UNDEFINED:
        return "undefined"
    if isinstance(v, Context):
        return format_term(v.body)
    if isinstance(v, str):
        return repr(v)
    return format_term(v)


def tree_dot(t: Tree, name: str = "tree") -> str:
    lines = [f"digraph {name} {{"]
    order = list(_positions(t))
    for i, (node, _) in enumerate(order):
        lines.append(f"  n{i} [label={_quote(node.label)}];")
    for i, (_, parent) in enumerate(order):
        if parent is not None:
            p, k = parent
            lines.append(f"  n{p} -> n{i} [label=\"{k}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _positions(t: Tree):
    """Preorder (node, (parent index, child number)) pairs; shared subtrees are
    drawn once per occurrence."""
    stack = [(t, None)]
    i = 0
    while stack:
        node, parent = stack.pop()
        yield node, parent
        here = i
        i += 1
        for k in range(len(node.children), 0, -1):
            stack.append((node.children[k - 1], (here, k)))


def dag_dot(d: TermDag, name: str = "dag") -> str:
    lines = [f"digraph {name} {{"]
    reach = sorted(d.reachable())
    for i in reach:
        label, _ = d.nodes[i]
        extra = ", peripheries=2" if i == d.root else ""
        lines.append(f"  n{i} [label={_quote(label)}{extra}];")
    for i in reach:
        for k, c in enumerate(d.nodes[i][1], 1):
            lines.append(f"  n{i} -> n{c} [label=\"{k}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dbta_dot(a: Dbta, name: str = "dbta") -> str:
    """States as ellipses; each transition is a box labelled by its letter,
    with numbered edges from argument states and one edge to the target."""
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    sid = {s: f"s{i}" for i, s in enumerate(a.states)}
    for s in a.states:
        lines.append(f"  {sid[s]} [label={_quote(s)}];")
    for j, ((letter, vec), r) in enumerate(sorted(a.delta.items())):
        lines.append(f"  t{j} [shape=box, label={_quote(letter)}];")
        for k, s in enumerate(vec, 1):
            lines.append(f"  {sid[s]} -> t{j} [label=\"{k}\"];")
        lines.append(f"  t{j} -> {sid[r]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def trace_dot(trace: RunTrace, name: str = "run") -> str:
    m, t = trace.machine, trace.tree
    if isinstance(m, MacroTT):
        configs = mtt_configurations(m, t)
        names = m.state_names
    else:
        configs = tdtt_configurations(m, t)
        names = m.states
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    order = list(_positions(t))
    for i, (node, _) in enumerate(order):
        la, regs = configs[id(node)]
        rows = [node.label if la is None else f"{node.label} [{la}]"]
        rows += [f"{q} = {_render(regs[q])}" for q in names]
        lines.append(f"  n{i} [label={_quote(chr(10).join(rows))}];")
    for i, (_, parent) in enumerate(order):
        if parent is not None:
            p, k = parent
            lines.append(f"  n{p} -> n{i} [label=\"{k}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(obj) -> str:
    """DOT text for a Tree, TermDag, Dbta or RunTrace."""
    if isinstance(obj, Tree):
        return tree_dot(obj)
    if isinstance(obj, TermDag):
        return dag_dot(obj)
    if isinstance(obj, Dbta):
        return dbta_dot(obj)
    if isinstance(obj, RunTrace):
        return trace_dot(obj)
    raise TypeError(f"cannot render {type(obj).__name__} as DOT")
