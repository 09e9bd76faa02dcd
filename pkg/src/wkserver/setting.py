"""Problem settings: the request model plus weights and constants profile.

The parser, the strategies and the offline DP only talk to a model through a
handful of hooks, so the generalized k-server variant in :mod:`wkserver.gks`
plugs in by providing the same methods with tuple semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import DemandVector, Metric, WeightVector, top_d
from .errors import ValidationError
from .phase_model.constants import ConstantsProfile


class UniformModel:
    """Weighted k-server requests: single points of one uniform metric."""

    def __init__(self, metric: Metric, k: int):
        self.metric = metric if isinstance(metric, Metric) else Metric(metric)
        self.k = k

    def __repr__(self):
        return f"UniformModel(n_points={self.metric.n_points}, k={self.k})"

    def check_request(self, r):
        return self.metric.check(r)

    def check_point(self, p, level=None):
        return self.metric.check(p)

    def check_config(self, config: Sequence):
        config = tuple(config)
        if len(config) != self.k:
            raise ValidationError(f"configuration {config} does not have k={self.k} entries")
        for p in config:
            self.metric.check(p)
        return config

    def check_anchors(self, anchors: Iterable, level: int) -> frozenset:
        anchors = frozenset(anchors)
        for p in anchors:
            self.metric.check(p)
        if len(anchors) > self.k - level:
            raise ValidationError(
                f"|H| = {len(anchors)} exceeds k - level = {self.k - level}"
            )
        return anchors

    def satisfied(self, anchors, r) -> bool:
        return r in anchors

    def leaf_point(self, r):
        return r

    def leaf_demand(self, r) -> DemandVector:
        return DemandVector.unit(r)

    def critical_set(self, v: DemandVector, level: int, size: int) -> tuple:
        return top_d(v, size, self.metric.points)

    def place(self, config: tuple, level: int, p) -> tuple:
        return config[: level - 1] + (p,) + config[level:]

    def position(self, config: tuple, level: int):
        """The point occupied by the ``level``'th server."""
        return config[level - 1]

    def covers(self, config: Sequence, r) -> bool:
        return r in config

    def anchors_held(self, anchors, config: Sequence, level: int) -> bool:
        return set(anchors) <= set(config[level:])

    def serving_moves(self, config: tuple, r):
        """Configurations reachable by moving exactly one server onto ``r``."""
        for i in range(self.k):
            yield i, config[:i] + (r,) + config[i + 1 :]

    def candidates(self, requests: Sequence, initial=None) -> list[list]:
        pts = set(requests)
        if initial is not None:
            pts |= set(initial)
        pts = sorted(pts)
        return [pts for _ in range(self.k)]

    def token(self, p) -> str:
        """Name of a critical point inside recursion paths (and so RNG seeds)."""
        return str(p)

    def default_point(self, level: int):
        return 0

    def format_request(self, r) -> str:
        return str(r)


@dataclass(frozen=True)
class Setting:
    """Everything a parse or a strategy run needs besides the requests."""

    model: object
    weights: WeightVector
    profile: ConstantsProfile = field(default_factory=ConstantsProfile)

    def __post_init__(self):
        w = self.weights if isinstance(self.weights, WeightVector) else WeightVector(self.weights)
        object.__setattr__(self, "weights", w)
        if self.model.k != w.k:
            raise ValidationError(f"model has k={self.model.k} but {w.k} weights were given")
        w.require_constrained()
        if not isinstance(self.profile, ConstantsProfile):
            object.__setattr__(self, "profile", ConstantsProfile(tuple(self.profile)))

    @classmethod
    def uniform(cls, n_points: int, weights, d: Sequence[int] = ()) -> "Setting":
        w = weights if isinstance(weights, WeightVector) else WeightVector(weights)
        return cls(UniformModel(Metric(n_points), w.k), w, ConstantsProfile(tuple(d)))

    @property
    def k(self) -> int:
        return self.weights.k

    def critical_size(self, level: int) -> int:
        return self.profile.d(level) - 1
