"""Domain values for weighted k-server on a uniform metric.

Points are dense integer indices ``0..n_points-1``; index order is the fixed
total order used for every tie-break. Weights are exact ``Fraction`` values.
Server positions inside a configuration are 0-based tuples, while levels
(``level``, ``l``) follow the 1-based numbering of the servers, so the
``l``'th lightest server lives at ``config[l - 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import MetricTooSmallError, ValidationError

Point = int
Configuration = tuple


@dataclass(frozen=True)
class Metric:
    """Uniform metric on ``n_points`` points; distances are implied."""

    n_points: int

    def __post_init__(self):
        if not isinstance(self.n_points, int) or self.n_points < 1:
            raise ValidationError(f"metric needs at least one point, got {self.n_points!r}")

    def __contains__(self, p) -> bool:
        return isinstance(p, int) and 0 <= p < self.n_points

    @property
    def points(self) -> range:
        return range(self.n_points)

    def check(self, p) -> Point:
        if p not in self:
            raise ValidationError(f"point {p!r} is outside the {self.n_points}-point metric")
        return p

    def distance(self, p: Point, q: Point) -> int:
        return 0 if p == q else 1


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise ValidationError("weights must be exact (int, Fraction or 'num/den'), not float")
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"not a rational weight: {x!r}") from exc


class WeightVector(Sequence):
    """Nondecreasing positive server weights ``w_1 <= ... <= w_k``.

    Indexing is 0-based like any sequence; use :meth:`w` for the 1-based
    accessor matching server levels.
    """

    __slots__ = ("_w",)

    def __init__(self, weights: Iterable):
        w = tuple(_as_fraction(x) for x in weights)
        if not w:
            raise ValidationError("at least one weight is required")
        if any(x <= 0 for x in w):
            raise ValidationError(f"weights must be positive: {format_weights(w)}")
        if any(a > b for a, b in zip(w, w[1:])):
            raise ValidationError(f"weights must be nondecreasing: {format_weights(w)}")
        self._w = w

    def __getitem__(self, i):
        return self._w[i]

    def __len__(self) -> int:
        return len(self._w)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self._w)

    def __eq__(self, other) -> bool:
        if isinstance(other, WeightVector):
            return self._w == other._w
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._w)

    def __repr__(self) -> str:
        return f"WeightVector({format_weights(self._w)})"

    @property
    def k(self) -> int:
        return len(self._w)

    def w(self, level: int) -> Fraction:
        return self._w[level - 1]

    @property
    def constrained(self) -> bool:
        """Each weight is an integer multiple of, and larger than, the previous one."""
        return all(b > a and (b / a).denominator == 1 for a, b in zip(self._w, self._w[1:]))

    def require_constrained(self) -> "WeightVector":
        if not self.constrained:
            raise ValidationError(
                f"weights {format_weights(self._w)} are not weight-constrained; "
                "use round_weights() first"
            )
        return self

    def ratio(self, level: int) -> int:
        """``w_{level+1} / w_level`` as an integer (phases per multiphase)."""
        q = self._w[level] / self._w[level - 1]
        if q.denominator != 1:
            raise ValidationError(f"w_{level + 1}/w_{level} = {q} is not an integer")
        return q.numerator

    def prefix_sum(self, level: int) -> Fraction:
        return sum(self._w[:level], Fraction(0))


def round_weights(w) -> WeightVector:
    """Round weights up into the weight-constrained regime.

    ``w'_1 = w_1`` and ``w'_i`` is the smallest multiple of ``w'_{i-1}`` that is
    at least ``max(2 w'_{i-1}, w_i)``; this keeps ``w_i <= w'_i <= 2**(i-1) w_i``.
    """
    w = w if isinstance(w, WeightVector) else WeightVector(w)
    out = [w[0]]
    for wi in w[1:]:
        prev = out[-1]
        target = max(2 * prev, wi)
        out.append(math.ceil(target / prev) * prev)
    return WeightVector(out)


class DemandVector(Mapping):
    """Sparse nonnegative integer vector over points.

    Missing keys read as zero and zero entries are never stored, so two
    vectors compare equal iff they agree on every point.
    """

    __slots__ = ("_e", "_hash")

    def __init__(self, entries: Mapping | Iterable = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        e = {}
        for p, c in items:
            if not isinstance(c, int) or c < 0:
                raise ValidationError(f"demand entries must be nonnegative integers, got {c!r}")
            if c:
                e[p] = e.get(p, 0) + c
        self._e = e
        self._hash = None

    @classmethod
    def unit(cls, p: Hashable) -> "DemandVector":
        return cls({p: 1})

    def __getitem__(self, p) -> int:
        return self._e.get(p, 0)

    def __contains__(self, p) -> bool:
        return p in self._e

    def __iter__(self):
        return iter(self._e)

    def __len__(self) -> int:
        return len(self._e)

    def __add__(self, other: "DemandVector") -> "DemandVector":
        if not isinstance(other, DemandVector):
            return NotImplemented
        out = dict(self._e)
        for p, c in other._e.items():
            out[p] = out.get(p, 0) + c
        v = DemandVector.__new__(DemandVector)
        v._e = out
        v._hash = None
        return v

    def __eq__(self, other) -> bool:
        if isinstance(other, DemandVector):
            return self._e == other._e
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._e.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{p!r}: {c}" for p, c in sorted(self._e.items()))
        return f"DemandVector({{{body}}})"

    @property
    def norm(self) -> int:
        return sum(self._e.values())

    def support(self) -> list:
        return sorted(self._e)

    def project(self, keep) -> "DemandVector":
        """Restriction to the points accepted by the predicate ``keep``."""
        return DemandVector({p: c for p, c in self._e.items() if keep(p)})


def sum_demands(vectors: Iterable[DemandVector]) -> DemandVector:
    total = DemandVector()
    for v in vectors:
        total = total + v
    return total


def top_d(v: DemandVector, d: int, universe: Sequence) -> tuple:
    """The ``d`` points of ``universe`` with the largest coordinates in ``v``.

    Ties go to the smaller point; the result is ordered by
    (coordinate descending, point ascending). Zero-coordinate points are
    taken from ``universe`` in order once positive ones run out.
    """
    if d < 0:
        raise ValidationError(f"d must be nonnegative, got {d}")
    if d > len(universe):
        raise MetricTooSmallError(
            f"need {d} points for a critical set but the metric has only {len(universe)}"
        )
    ranked = sorted((p for p in v if p in universe), key=lambda p: (-v[p], p))
    chosen = ranked[:d]
    if len(chosen) < d:
        taken = set(ranked)
        for p in universe:
            if p not in taken:
                chosen.append(p)
                if len(chosen) == d:
                    break
    return tuple(chosen)


def move_cost(before: Sequence, after: Sequence, w: Sequence) -> Fraction:
    if len(before) != len(after):
        raise ValidationError("configurations differ in length")
    return sum((w[i] for i, (a, b) in enumerate(zip(before, after)) if a != b), Fraction(0))


def moved_servers(before: Sequence, after: Sequence) -> tuple[int, ...]:
    """1-based levels of the servers that differ between two configurations."""
    return tuple(i + 1 for i, (a, b) in enumerate(zip(before, after)) if a != b)


@dataclass(frozen=True)
class Solution:
    """A sequence ``[C_0, ..., C_m]`` of configurations."""

    configs: tuple

    def __post_init__(self):
        configs = tuple(tuple(c) for c in self.configs)
        if not configs:
            raise ValidationError("a solution has at least the initial configuration")
        k = len(configs[0])
        if any(len(c) != k for c in configs):
            raise ValidationError("all configurations in a solution must have the same k")
        object.__setattr__(self, "configs", configs)

    def __len__(self) -> int:
        return len(self.configs)

    @property
    def k(self) -> int:
        return len(self.configs[0])

    @property
    def steps(self) -> int:
        return len(self.configs) - 1

    def covers(self, requests: Sequence) -> bool:
        if len(requests) != self.steps:
            return False
        return all(r in c for r, c in zip(requests, self.configs[1:]))

    def slice(self, i: int, j: int) -> "Solution":
        """``C[i, j] = [C_i, ..., C_j]``."""
        if not 0 <= i <= j <= self.steps:
            raise ValidationError(f"slice [{i}, {j}] outside a solution with {self.steps} steps")
        return Solution(self.configs[i : j + 1])


def solution_cost(sol: Solution, w: Sequence) -> Fraction:
    if len(w) != sol.k:
        raise ValidationError(f"{len(w)} weights for configurations of size {sol.k}")
    return sum(
        (move_cost(a, b, w) for a, b in zip(sol.configs, sol.configs[1:])), Fraction(0)
    )


def is_l_active(sol: Solution, level: int) -> bool:
    """True iff servers ``level+1..k`` never move."""
    first = sol.configs[0][level:]
    return all(c[level:] == first for c in sol.configs)


# -- canonical text encodings -------------------------------------------------


def parse_requests(text: str) -> tuple[Point, ...]:
    try:
        return tuple(int(tok) for tok in text.split())
    except ValueError as exc:
        raise ValidationError(f"bad request sequence: {exc}") from exc


def format_requests(requests: Iterable[Point]) -> str:
    return " ".join(str(r) for r in requests)


def parse_config(text: str) -> Configuration:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad configuration {text!r}") from exc


def format_config(config: Iterable) -> str:
    return ",".join(str(p) for p in config)


def parse_weights(text: str) -> WeightVector:
    parts = [t.strip() for t in text.split(",") if t.strip()]
    for t in parts:
        if "." in t or "e" in t.lower():
            raise ValidationError(f"weight {t!r} is not an integer or num/den rational")
    return WeightVector(_as_fraction(t) for t in parts)


def format_weights(w: Iterable[Fraction]) -> str:
    return ",".join(str(x) for x in w)
