"""Randomized online strategies for weighted k-server on uniform metrics.

``PhaseStrategy`` at level ``l`` serves the longest (l, H)-phase prefix of
its input while moving only the ``l`` lightest servers: it explores with one
(l-1)-multiphase strategy, then runs one imaginary multiphase strategy per
critical point and follows them in a uniformly random order, switching to
the next surviving one whenever the followed run terminates.

Randomness: every strategy instance owns a ``random.Random`` (MT19937)
seeded with :func:`derive_seed` of the root seed and its recursion path, so
sibling runs are independent and a whole run is reproducible from one seed.
Permutations are Fisher-Yates shuffles of the critical set in its canonical
(demand desc, point asc) order, drawing ``randrange(i + 1)`` for
``i = n-1 .. 1``.
"""

from __future__ import annotations

import enum
import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .core import DemandVector, move_cost, moved_servers
from .errors import ValidationError


def derive_seed(root: int, path: str) -> int:
    """64-bit sub-seed: first 8 bytes of sha256(``"{root}|{path}"``), big endian."""
    digest = hashlib.sha256(f"{int(root)}|{path}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class RngStream:
    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def permutation(self, items) -> tuple:
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self._rng.randrange(i + 1)
            out[i], out[j] = out[j], out[i]
        return tuple(out)

    def randrange(self, n: int) -> int:
        return self._rng.randrange(n)


class Status(enum.Enum):
    TERMINATED = "Terminated"
    AWAITING = "AwaitingMoreRequests"


@dataclass(frozen=True)
class TraceRecord:
    """One consumed request; ``config`` is the real configuration after it.

    Text form (``config`` is not serialised), tab separated: ``index  request  moved  cost  path`` where
    ``moved`` lists 1-based server levels joined by commas (``-`` if none).
    """

    index: int
    request: object
    moved: tuple
    cost: Fraction
    path: str
    config: tuple = field(default=(), compare=False)

    def to_line(self, fmt_request=str) -> str:
        moved = ",".join(str(m) for m in self.moved) or "-"
        return f"{self.index}\t{fmt_request(self.request)}\t{moved}\t{self.cost}\t{self.path}"


TRACE_HEADER = "# index\trequest\tmoved\tcost\tpath"


class _Base:
    def __init__(self, setting, level, anchors, config, root_seed, path):
        self.setting = setting
        self.model = setting.model
        self.level = level
        self.anchors = anchors
        self.config = tuple(config)
        self.root_seed = root_seed
        self.path = path
        self.cost = Fraction(0)
        self.consumed = 0
        self.done = False
        self.demand: Optional[DemandVector] = None

    def _move_to(self, config):
        if config != self.config:
            self.cost += move_cost(self.config, config, self.setting.weights)
            self.config = config

    def _check_open(self):
        if self.done:
            raise RuntimeError("feed() after the strategy terminated")


class OnePhaseStrategy(_Base):
    """Moves the lightest server to the first unanchored request and sits there."""

    def __init__(self, setting, anchors, config, root_seed=0, path=""):
        super().__init__(setting, 1, anchors, config, root_seed, path)
        self.point = None
        self.opening = None

    def feed(self, r) -> bool:
        self._check_open()
        if self.model.satisfied(self.anchors, r):
            pass
        elif self.point is None:
            self.point = self.model.leaf_point(r)
            self.opening = r
            self._move_to(self.model.place(self.config, 1, self.point))
        elif not self.model.satisfied(self.anchors | {self.point}, r):
            self.done = True
            self.demand = self.model.leaf_demand(self.opening)
            return False
        self.consumed += 1
        return True

    def deciding_path(self) -> str:
        return self.path


class MultiphaseStrategy(_Base):
    """Chains ``w_{l+1}/w_l`` phase strategies, threading the configuration."""

    def __init__(self, setting, level, anchors, config, root_seed=0, path=""):
        super().__init__(setting, level, anchors, config, root_seed, path)
        self.count = setting.weights.ratio(level)
        self.index = 0
        self.total = DemandVector()
        self.child = self._spawn()

    def _spawn(self):
        return make_phase_strategy(
            self.setting, self.level, self.anchors, self.config, self.root_seed,
            f"{self.path}/M{self.index}",
        )

    def feed(self, r) -> bool:
        self._check_open()
        if not self.child.feed(r):
            self.total = self.total + self.child.demand
            self.index += 1
            if self.index == self.count:
                self.done = True
                self.demand = self.total
                return False
            self.child = self._spawn()
            if not self.child.feed(r):
                raise AssertionError("a fresh phase strategy must serve its first request")
        self._move_to(self.child.config)
        self.consumed += 1
        return True

    def deciding_path(self) -> str:
        return self.child.deciding_path()


class PhaseStrategy(_Base):
    """Explore, then follow imaginary per-critical-point runs in random order."""

    def __init__(self, setting, level, anchors, config, root_seed=0, path=""):
        super().__init__(setting, level, anchors, config, root_seed, path)
        self.initial = self.config
        self.explore = MultiphaseStrategy(
            setting, level - 1, anchors, self.config, root_seed, f"{path}/E"
        )
        self.explore_demand: Optional[DemandVector] = None
        self.critical: tuple = ()
        self.order: tuple = ()
        self.follow = 0
        self.children: dict = {}
        self.child_demand: dict = {}
        self.followed: list = []
        self.switches = 0
        self.switch_cost = Fraction(0)

    @property
    def exploring(self) -> bool:
        return self.explore_demand is None

    def feed(self, r) -> bool:
        self._check_open()
        if self.exploring:
            if self.explore.feed(r):
                self._move_to(self.explore.config)
                self.consumed += 1
                return True
            self._begin_exploit()

        followed = self.order[self.follow]
        for p in self.critical:
            child = self.children[p]
            if not child.done and not child.feed(r):
                self.child_demand[p] = child.demand
        if self.children[followed].done:
            nxt = next(
                (i for i, p in enumerate(self.order) if not self.children[p].done), None
            )
            if nxt is None:
                self.done = True
                self.demand = self.explore_demand
                for p in self.critical:
                    self.demand = self.demand + self.child_demand[p]
                return False
            self.follow = nxt
            self.followed.append(self.order[nxt])
            self.switches += 1
            target = self.children[self.order[nxt]]
            before = self.cost
            self._move_to(target.config)
            # bookkeeping only: switching cost bundled with the child's own move on r
            self.switch_cost += self.cost - before
        else:
            self._move_to(self.children[followed].config)
        self.consumed += 1
        return True

    def _begin_exploit(self):
        self.explore_demand = self.explore.demand
        self.critical = self.model.critical_set(
            self.explore_demand, self.level, self.setting.critical_size(self.level)
        )
        rng = RngStream(derive_seed(self.root_seed, self.path))
        self.order = rng.permutation(self.critical)
        self.follow = 0
        self.followed = [self.order[0]]
        self.children = {
            p: MultiphaseStrategy(
                self.setting, self.level - 1, self.anchors | {p},
                self.model.place(self.initial, self.level, p), self.root_seed,
                f"{self.path}/X{self.model.token(p)}",
            )
            for p in self.critical
        }

    def deciding_path(self) -> str:
        if self.exploring:
            return self.explore.deciding_path()
        return self.children[self.order[self.follow]].deciding_path()

    def child_lengths(self) -> dict:
        """Requests served (in imagination) by each exploit run so far."""
        return {p: c.consumed for p, c in self.children.items()}


def make_phase_strategy(setting, level, anchors, config, root_seed=0, path=""):
    if level == 1:
        return OnePhaseStrategy(setting, anchors, config, root_seed, path)
    return PhaseStrategy(setting, level, anchors, config, root_seed, path)


@dataclass
class RunResult:
    status: Status
    consumed: int
    demand: Optional[DemandVector]
    trace: list
    cost: Fraction
    final_config: tuple
    strategy: object = field(repr=False, default=None)

    @property
    def terminated(self) -> bool:
        return self.status is Status.TERMINATED


def _validate(setting, level, anchors, config):
    model = setting.model
    if not 1 <= level <= setting.k:
        raise ValidationError(f"level must be in 1..{setting.k}, got {level}")
    anchors = model.check_anchors(anchors, level)
    config = model.check_config(config)
    if not model.anchors_held(anchors, config, level):
        raise ValidationError(
            f"anchors {sorted(anchors)} are not covered by servers {level + 1}..{setting.k}"
        )
    return anchors, config


def _drive(strategy, stream, start_index=0) -> RunResult:
    trace = []
    for i, r in enumerate(stream):
        r = strategy.model.check_request(r)
        before, cost_before = strategy.config, strategy.cost
        if not strategy.feed(r):
            return RunResult(
                Status.TERMINATED, strategy.consumed, strategy.demand, trace,
                strategy.cost, strategy.config, strategy,
            )
        trace.append(TraceRecord(
            start_index + i, r, moved_servers(before, strategy.config),
            strategy.cost - cost_before, strategy.deciding_path(), strategy.config,
        ))
    return RunResult(
        Status.AWAITING, strategy.consumed, None, trace, strategy.cost, strategy.config, strategy
    )


def run_1_phase(setting, anchors, config, stream: Iterable, seed: int = 0) -> RunResult:
    anchors, config = _validate(setting, 1, anchors, config)
    return _drive(OnePhaseStrategy(setting, anchors, config, seed), stream)


def run_multiphase(setting, level, anchors, config, stream: Iterable, seed: int = 0) -> RunResult:
    anchors, config = _validate(setting, level, anchors, config)
    if level >= setting.k:
        raise ValidationError(f"multiphase strategies exist only below level k={setting.k}")
    return _drive(MultiphaseStrategy(setting, level, anchors, config, seed), stream)


def run_phase(setting, level, anchors, config, stream: Iterable, seed: int = 0) -> RunResult:
    anchors, config = _validate(setting, level, anchors, config)
    return _drive(make_phase_strategy(setting, level, anchors, config, seed), stream)


@dataclass
class OnlineResult:
    """Outcome of :func:`serve_online`; ``phases`` counts every call, the last may be open."""

    cost: Fraction
    phase_costs: list
    phase_lengths: list
    completed: int
    trace: list
    final_config: tuple
    switches: list

    @property
    def phases(self) -> int:
        return len(self.phase_costs)


def serve_online(setting, config, stream: Iterable, seed: int = 0) -> OnlineResult:
    """Serve ``stream`` by repeatedly calling the k-phase strategy."""
    k = setting.k
    _, config = _validate(setting, k, (), config)
    costs, lengths, switches, trace = [], [], [], []
    completed = 0
    strategy = None
    for i, r in enumerate(stream):
        r = setting.model.check_request(r)
        if strategy is None:
            strategy = make_phase_strategy(setting, k, frozenset(), config, seed, f"/{len(costs)}")
        before, cost_before = strategy.config, strategy.cost
        if not strategy.feed(r):
            completed += 1
            costs.append(strategy.cost)
            lengths.append(strategy.consumed)
            switches.append(getattr(strategy, "switches", 0))
            config = strategy.config
            strategy = make_phase_strategy(setting, k, frozenset(), config, seed, f"/{len(costs)}")
            before, cost_before = strategy.config, strategy.cost
            if not strategy.feed(r):
                raise AssertionError("a fresh phase strategy must serve its first request")
        trace.append(TraceRecord(
            i, r, moved_servers(before, strategy.config), strategy.cost - cost_before,
            f"/{len(costs)}" + strategy.deciding_path()[len(strategy.path):], strategy.config,
        ))
    if strategy is not None:
        costs.append(strategy.cost)
        lengths.append(strategy.consumed)
        switches.append(getattr(strategy, "switches", 0))
        config = strategy.config
    return OnlineResult(sum(costs, Fraction(0)), costs, lengths, completed, trace, config, switches)
