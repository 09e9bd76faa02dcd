"""Witness trees for parsed phases and multiphases.

Spans are half-open ``[start, end)`` offsets into the parsed request string.
Trees are immutable; the demand vector and critical set are stored as built
and :func:`recompute_demand` re-derives them for consistency checks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

from ..core import DemandVector, sum_demands


@dataclass(frozen=True)
class LeafPhase:
    """A (1, H)-phase: requests over ``H + {point}`` with at least one ``point``."""

    anchors: frozenset
    start: int
    end: int
    point: object
    opening: object
    demand: DemandVector

    level = 1

    @property
    def critical_set(self) -> tuple:
        return (self.point,)

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Multiphase:
    level: int
    anchors: frozenset
    start: int
    end: int
    children: tuple
    demand: DemandVector
    critical_set: tuple

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class NodePhase:
    """An (l, H)-phase for ``l >= 2``: explore multiphase plus exploit multiphases.

    ``exploit`` holds ``(p, multiphase)`` pairs in critical-set order.
    """

    level: int
    anchors: frozenset
    start: int
    end: int
    explore: Multiphase
    critical_set: tuple
    exploit: tuple
    demand: DemandVector

    @property
    def length(self) -> int:
        return self.end - self.start

    def exploit_part(self, p) -> Multiphase:
        for q, m in self.exploit:
            if q == p:
                return m
        raise KeyError(p)


PhaseTree = Union[LeafPhase, NodePhase]
Tree = Union[LeafPhase, NodePhase, Multiphase]


def shift(tree: Tree, delta: int) -> Tree:
    """The same tree with every span moved by ``delta``."""
    if delta == 0:
        return tree
    if isinstance(tree, LeafPhase):
        return replace(tree, start=tree.start + delta, end=tree.end + delta)
    if isinstance(tree, Multiphase):
        return replace(
            tree,
            start=tree.start + delta,
            end=tree.end + delta,
            children=tuple(shift(c, delta) for c in tree.children),
        )
    return replace(
        tree,
        start=tree.start + delta,
        end=tree.end + delta,
        explore=shift(tree.explore, delta),
        exploit=tuple((p, shift(m, delta)) for p, m in tree.exploit),
    )


def recompute_demand(tree: Tree, leaf_demand) -> DemandVector:
    """Demand vector rebuilt bottom-up from the leaves' opening requests."""
    if isinstance(tree, LeafPhase):
        return leaf_demand(tree.opening)
    if isinstance(tree, Multiphase):
        return sum_demands(recompute_demand(c, leaf_demand) for c in tree.children)
    return recompute_demand(tree.explore, leaf_demand) + sum_demands(
        recompute_demand(m, leaf_demand) for _, m in tree.exploit
    )


def iter_nodes(tree: Tree):
    """Every node of the tree, parents before children."""
    yield tree
    if isinstance(tree, Multiphase):
        for c in tree.children:
            yield from iter_nodes(c)
    elif isinstance(tree, NodePhase):
        yield from iter_nodes(tree.explore)
        for _, m in tree.exploit:
            yield from iter_nodes(m)


def locate(tree: Tree, locator: tuple) -> Tree:
    """Follow a locator: ``"E"`` (explore), ``("X", p)`` (exploit part), ``i`` (i'th child).

    Raises ``LookupError`` when the locator leaves the tree.
    """
    node = tree
    for step in locator:
        if step == "E" and isinstance(node, NodePhase):
            node = node.explore
        elif isinstance(step, tuple) and step[:1] == ("X",) and isinstance(node, NodePhase):
            try:
                node = node.exploit_part(step[1])
            except KeyError:
                raise LookupError(f"no exploit part for {step[1]!r}") from None
        elif isinstance(step, int) and isinstance(node, Multiphase):
            if not 0 <= step < len(node.children):
                raise LookupError(f"multiphase has no child {step}")
            node = node.children[step]
        else:
            raise LookupError(f"locator step {step!r} does not apply to {type(node).__name__}")
    return node


def _fmt_point(p) -> str:
    if isinstance(p, tuple):
        return ":".join(str(x) for x in p)
    return str(p)


def _fmt_set(points) -> str:
    return "{" + " ".join(_fmt_point(p) for p in sorted(points)) + "}"


def _fmt_demand(v: DemandVector) -> str:
    return "{" + " ".join(f"{_fmt_point(p)}={v[p]}" for p in v.support()) + "}"


def to_text(tree: Tree) -> str:
    """Canonical single-line nested form, stable across runs."""
    if isinstance(tree, LeafPhase):
        return (
            f"(leaf 1 H={_fmt_set(tree.anchors)} [{tree.start},{tree.end}) "
            f"p={_fmt_point(tree.point)})"
        )
    if isinstance(tree, Multiphase):
        kids = " ".join(to_text(c) for c in tree.children)
        return (
            f"(multiphase {tree.level} H={_fmt_set(tree.anchors)} [{tree.start},{tree.end}) "
            f"v={_fmt_demand(tree.demand)} {kids})"
        )
    exploit = " ".join(f"({_fmt_point(p)} {to_text(m)})" for p, m in tree.exploit)
    crit = " ".join(_fmt_point(p) for p in tree.critical_set)
    return (
        f"(phase {tree.level} H={_fmt_set(tree.anchors)} [{tree.start},{tree.end}) "
        f"v={_fmt_demand(tree.demand)} (explore {to_text(tree.explore)}) "
        f"(critical {crit}) (exploit {exploit}))"
    )


def to_pretty(tree: Tree, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(tree, LeafPhase):
        return f"{pad}leaf H={_fmt_set(tree.anchors)} [{tree.start},{tree.end}) p={_fmt_point(tree.point)}"
    if isinstance(tree, Multiphase):
        lines = [
            f"{pad}multiphase l={tree.level} H={_fmt_set(tree.anchors)} "
            f"[{tree.start},{tree.end}) |v|={tree.demand.norm}"
        ]
        lines += [to_pretty(c, indent + 1) for c in tree.children]
        return "\n".join(lines)
    lines = [
        f"{pad}phase l={tree.level} H={_fmt_set(tree.anchors)} [{tree.start},{tree.end}) "
        f"|v|={tree.demand.norm} S=[{' '.join(_fmt_point(p) for p in tree.critical_set)}]",
        f"{pad}  explore:",
        to_pretty(tree.explore, indent + 2),
    ]
    for p, m in tree.exploit:
        lines.append(f"{pad}  exploit {_fmt_point(p)}:")
        lines.append(to_pretty(m, indent + 2))
    return "\n".join(lines)
