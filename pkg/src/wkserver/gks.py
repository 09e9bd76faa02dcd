"""Generalized k-server on weighted uniform metrics.

There are k disjoint uniform spaces M_1..M_k, one server in each, and a
request is a k-tuple with one point per space; it is served when some server
l sits on ``r[l]``. A point is written ``(l, i)`` (space l, 1-based, index i);
a configuration stores just the k indices.

Only two behaviours of the phase grammar change, and they live in
:class:`GksModel`: a request is satisfied by an anchor set H when one of its
coordinates is in H, and a level-1 phase opened by request ``r`` contributes
one unit at every coordinate of ``r``. Critical sets at level l are taken
over the projection of the demand vector onto M_l. The parser, strategies
and OPT dynamic program are shared with the weighted k-server code.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .core import DemandVector, top_d
from .errors import ValidationError
from .offline import opt_cost
from .phase_model.parser import parse_multiphase, parse_phase, split_phases
from .setting import Setting
from .strategy import run_multiphase, run_phase, serve_online


class GksMetric:
    def __init__(self, sizes: Sequence[int]):
        sizes = tuple(int(s) for s in sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValidationError(f"space sizes must be positive, got {sizes}")
        self.sizes = sizes

    @property
    def k(self) -> int:
        return len(self.sizes)

    def space(self, level: int) -> list:
        return [(level, i) for i in range(self.sizes[level - 1])]

    def check(self, p):
        if not (isinstance(p, tuple) and len(p) == 2):
            raise ValidationError(f"a point is a (space, index) pair, got {p!r}")
        level, i = p
        if not 1 <= level <= self.k or not 0 <= i < self.sizes[level - 1]:
            raise ValidationError(f"point {p!r} lies outside spaces of sizes {self.sizes}")
        return (int(level), int(i))


class GksModel:
    def __init__(self, sizes: Sequence[int]):
        self.metric = GksMetric(sizes)
        self.k = self.metric.k

    def __repr__(self):
        return f"GksModel(sizes={self.metric.sizes})"

    def check_request(self, r):
        r = tuple(r)
        if len(r) != self.k:
            raise ValidationError(f"request {r} must have one coordinate per space ({self.k})")
        for level, i in enumerate(r, 1):
            self.metric.check((level, i))
        return tuple(int(x) for x in r)

    def check_point(self, p, level=None):
        p = self.metric.check(tuple(p))
        if level is not None and p[0] != level:
            raise ValidationError(f"point {p} is not in space {level}")
        return p

    def check_config(self, config: Sequence):
        return self.check_request(config)

    def check_anchors(self, anchors: Iterable, level: int) -> frozenset:
        pts = [self.metric.check(tuple(p)) for p in anchors]
        spaces = [p[0] for p in pts]
        if len(set(spaces)) != len(spaces):
            raise ValidationError(f"anchor set {sorted(pts)} has two points in one space")
        if any(s <= level for s in spaces):
            raise ValidationError(f"anchors must lie in spaces {level + 1}..{self.k}")
        return frozenset(pts)

    def satisfied(self, anchors, r) -> bool:
        return any((level, x) in anchors for level, x in enumerate(r, 1))

    def leaf_point(self, r):
        return (1, r[0])

    def leaf_demand(self, r) -> DemandVector:
        return DemandVector({(level, x): 1 for level, x in enumerate(r, 1)})

    def critical_set(self, v: DemandVector, level: int, size: int) -> tuple:
        space = self.metric.space(level)
        return top_d(v.project(lambda p: p[0] == level), size, space)

    def place(self, config: tuple, level: int, p) -> tuple:
        if p[0] != level:
            raise ValidationError(f"server {level} cannot move to {p}")
        return config[: level - 1] + (p[1],) + config[level:]

    def position(self, config: tuple, level: int):
        return (level, config[level - 1])

    def covers(self, config: Sequence, r) -> bool:
        return any(c == x for c, x in zip(config, r))

    def anchors_held(self, anchors, config: Sequence, level: int) -> bool:
        return all(s > level and config[s - 1] == i for s, i in anchors)

    def serving_moves(self, config: tuple, r):
        for i in range(self.k):
            yield i, config[:i] + (r[i],) + config[i + 1 :]

    def candidates(self, requests: Sequence, initial=None) -> list:
        out = []
        for i in range(self.k):
            pts = {r[i] for r in requests}
            if initial is not None:
                pts.add(initial[i])
            out.append(sorted(pts))
        return out

    def token(self, p) -> str:
        # the space is implied by the recursion level, so lifted runs share seeds
        return str(p[1])

    def default_point(self, level: int):
        return 0

    def format_request(self, r) -> str:
        return format_tuple(r)


def format_tuple(r) -> str:
    return "(" + ",".join(str(x) for x in r) + ")"


def parse_tuple(text: str) -> tuple:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ValidationError(f"tuple request must be parenthesised: {text!r}")
    try:
        return tuple(int(x) for x in text[1:-1].split(","))
    except ValueError:
        raise ValidationError(f"bad tuple request {text!r}") from None


def parse_tuple_requests(text: str) -> list:
    return [parse_tuple(tok) for tok in text.split()]


def format_tuple_requests(requests) -> str:
    return " ".join(format_tuple(r) for r in requests)


def gks_setting(sizes: Sequence[int], weights, d: Sequence[int] = ()) -> Setting:
    from .phase_model.constants import ConstantsProfile

    return Setting(GksModel(sizes), weights, ConstantsProfile(tuple(d)))


def projected_norms(v: DemandVector, k: int) -> list:
    """``|v|_l|`` for every space l."""
    return [sum(c for p, c in v.items() if p[0] == level) for level in range(1, k + 1)]


def lift_requests(requests: Iterable[int], k: int) -> list:
    """The copy embedding: weighted request p becomes (p, ..., p)."""
    return [(p,) * k for p in requests]


def lift_config(config: Sequence[int]) -> tuple:
    return tuple(config)


def lift_point(p: int, level: int) -> tuple:
    return (level, p)


def gks_parse_phase(setting, level, anchors, requests):
    return parse_phase(setting, level, anchors, requests)


def gks_parse_multiphase(setting, level, anchors, requests):
    return parse_multiphase(setting, level, anchors, requests)


def gks_split_phases(setting, requests):
    return split_phases(setting, requests)


def gks_run_phase(setting, level, anchors, config, stream, seed=0):
    return run_phase(setting, level, anchors, config, stream, seed)


def gks_run_multiphase(setting, level, anchors, config, stream, seed=0):
    return run_multiphase(setting, level, anchors, config, stream, seed)


def gks_serve_online(setting, config, stream, seed=0):
    return serve_online(setting, config, stream, seed)


def gks_opt_cost(setting, requests, initial=None, budget=None):
    if budget is None:
        return opt_cost(setting, requests, initial)
    return opt_cost(setting, requests, initial, budget)
