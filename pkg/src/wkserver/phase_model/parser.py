"""Resumable longest-prefix parser for phases and multiphases.

Each parser consumes one request at a time. ``feed`` returns ``False``
exactly when the consumed prefix was a phase (multiphase) and appending the
request breaks that; by the prefix-extension property no longer prefix can
become one again, so at that point the parse is final and the rejected
request belongs to whatever comes next.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

from ..core import DemandVector
from .trees import LeafPhase, Multiphase, NodePhase, Tree


class _Leaf:
    __slots__ = ("model", "anchors", "start", "pos", "point", "opening", "done")

    def __init__(self, setting, anchors: frozenset, start: int):
        self.model = setting.model
        self.anchors = anchors
        self.start = start
        self.pos = start
        self.point = None
        self.opening = None
        self.done = False

    level = 1

    @property
    def accepting(self) -> bool:
        return self.point is not None

    def feed(self, r) -> bool:
        if self.done:
            raise RuntimeError("feed() after the parse terminated")
        if self.model.satisfied(self.anchors, r):
            pass
        elif self.point is None:
            self.point = self.model.leaf_point(r)
            self.opening = r
        elif not self.model.satisfied(self.anchors | {self.point}, r):
            self.done = True
            return False
        self.pos += 1
        return True

    def tree(self) -> LeafPhase:
        if self.point is None:
            raise ValueError("no phase has been parsed yet")
        return LeafPhase(
            self.anchors, self.start, self.pos, self.point, self.opening,
            self.model.leaf_demand(self.opening),
        )

    def open_leaves(self):
        if not self.done:
            yield self


class _Multi:
    __slots__ = ("setting", "level", "anchors", "start", "pos", "count",
                 "finished", "current", "done")

    def __init__(self, setting, level: int, anchors: frozenset, start: int):
        self.setting = setting
        self.level = level
        self.anchors = anchors
        self.start = start
        self.pos = start
        self.count = setting.weights.ratio(level)
        self.finished: list = []
        self.current = phase_parser(setting, level, anchors, start)
        self.done = False

    @property
    def accepting(self) -> bool:
        if self.done:
            return True
        return len(self.finished) == self.count - 1 and self.current.accepting

    def feed(self, r) -> bool:
        if self.done:
            raise RuntimeError("feed() after the parse terminated")
        if not self.current.feed(r):
            self.finished.append(self.current.tree())
            if len(self.finished) == self.count:
                self.done = True
                return False
            self.current = phase_parser(self.setting, self.level, self.anchors, self.pos)
            if not self.current.feed(r):
                raise AssertionError("a fresh phase parser must accept its first request")
        self.pos += 1
        return True

    def tree(self) -> Multiphase:
        children = list(self.finished)
        if not self.done:
            if not self.accepting:
                raise ValueError("no multiphase has been parsed yet")
            children.append(self.current.tree())
        demand = DemandVector()
        for c in children:
            demand = demand + c.demand
        crit = self.setting.model.critical_set(
            demand, self.level + 1, self.setting.critical_size(self.level + 1)
        )
        return Multiphase(self.level, self.anchors, self.start, self.pos, tuple(children), demand, crit)

    def open_leaves(self):
        if not self.done:
            yield from self.current.open_leaves()


class _Node:
    __slots__ = ("setting", "level", "anchors", "start", "pos", "explore",
                 "explore_tree", "critical", "children", "done")

    def __init__(self, setting, level: int, anchors: frozenset, start: int):
        self.setting = setting
        self.level = level
        self.anchors = anchors
        self.start = start
        self.pos = start
        self.explore = _Multi(setting, level - 1, anchors, start)
        self.explore_tree: Optional[Multiphase] = None
        self.critical: tuple = ()
        self.children: dict = {}
        self.done = False

    @property
    def exploring(self) -> bool:
        return self.explore_tree is None

    @property
    def accepting(self) -> bool:
        if self.done:
            return True
        if self.exploring:
            return False
        running = [c for c in self.children.values() if not c.done]
        return bool(running) and all(c.accepting for c in running)

    def feed(self, r) -> bool:
        if self.done:
            raise RuntimeError("feed() after the parse terminated")
        if self.exploring:
            if self.explore.feed(r):
                self.pos += 1
                return True
            self._begin_exploit()
        consumed = False
        for p in self.critical:
            child = self.children[p]
            if not child.done and child.feed(r):
                consumed = True
        if not consumed:
            self.done = True
            return False
        self.pos += 1
        return True

    def _begin_exploit(self):
        self.explore_tree = self.explore.tree()
        self.critical = self.explore_tree.critical_set
        self.children = {
            p: _Multi(self.setting, self.level - 1, self.anchors | {p}, self.pos)
            for p in self.critical
        }

    def tree(self) -> NodePhase:
        if not self.accepting:
            raise ValueError("no phase has been parsed yet")
        exploit = tuple((p, self.children[p].tree()) for p in self.critical)
        demand = self.explore_tree.demand
        for _, m in exploit:
            demand = demand + m.demand
        return NodePhase(
            self.level, self.anchors, self.start, self.pos, self.explore_tree,
            self.critical, exploit, demand,
        )

    def open_leaves(self):
        if self.done:
            return
        if self.exploring:
            yield from self.explore.open_leaves()
        else:
            for p in self.critical:
                yield from self.children[p].open_leaves()


def phase_parser(setting, level: int, anchors: frozenset, start: int = 0):
    """A fresh incremental parser for an (level, anchors)-phase."""
    if level == 1:
        return _Leaf(setting, anchors, start)
    return _Node(setting, level, anchors, start)


def multiphase_parser(setting, level: int, anchors: frozenset, start: int = 0):
    if level >= setting.k:
        raise ValueError(f"multiphases exist only below level k={setting.k}")
    return _Multi(setting, level, anchors, start)


class Status(enum.Enum):
    NO_PHASE_PREFIX = "NoPhasePrefix"
    PROPER_PREFIX = "ProperPrefix"
    WHOLE_STRING = "WholeStringParses"


@dataclass(frozen=True)
class ParseOutcome:
    status: Status
    tree: Optional[Tree] = None
    consumed: int = 0

    def __str__(self):
        if self.status is Status.PROPER_PREFIX:
            return f"{self.status.value}({self.consumed})"
        return self.status.value


def _run(parser, requests: Iterable) -> ParseOutcome:
    n = 0
    for r in requests:
        if not parser.feed(r):
            return ParseOutcome(Status.PROPER_PREFIX, parser.tree(), n)
        n += 1
    if parser.accepting:
        return ParseOutcome(Status.WHOLE_STRING, parser.tree(), n)
    return ParseOutcome(Status.NO_PHASE_PREFIX, None, 0)


def _prepare(setting, level, anchors, requests):
    if not 1 <= level <= setting.k:
        raise ValueError(f"level must be in 1..{setting.k}, got {level}")
    anchors = setting.model.check_anchors(anchors, level)
    requests = [setting.model.check_request(r) for r in requests]
    return anchors, requests


def parse_phase(setting, level: int, anchors: Iterable, requests: Iterable) -> ParseOutcome:
    """Longest prefix of ``requests`` that is an (level, anchors)-phase."""
    anchors, requests = _prepare(setting, level, anchors, requests)
    return _run(phase_parser(setting, level, anchors), requests)


def parse_multiphase(setting, level: int, anchors: Iterable, requests: Iterable) -> ParseOutcome:
    anchors, requests = _prepare(setting, level, anchors, requests)
    return _run(multiphase_parser(setting, level, anchors), requests)


@dataclass(frozen=True)
class PhaseSplit:
    """A request string cut into consecutive (k, {})-phases."""

    phases: tuple
    tail_start: int
    tail_is_phase: bool

    @property
    def boundaries(self) -> list[tuple[int, int]]:
        return [(t.start, t.end) for t in self.phases]


def split_phases(setting, requests: Iterable) -> PhaseSplit:
    """Cut ``requests`` into complete (k, {})-phases plus an unfinished tail."""
    requests = [setting.model.check_request(r) for r in requests]
    k = setting.k
    done = []
    parser = phase_parser(setting, k, frozenset(), 0)
    for i, r in enumerate(requests):
        if not parser.feed(r):
            done.append(parser.tree())
            parser = phase_parser(setting, k, frozenset(), i)
            parser.feed(r)
    tail = parser.start
    return PhaseSplit(tuple(done), tail, parser.accepting and tail < len(requests))
