"""Exact constants: d_l, c_l, F_{l,l'} and the harmonic numbers.

``d_l = 2**(5**(l-1) - 1)`` grows so fast that level-3 phases are already out
of reach for simulation, hence :class:`ConstantsProfile` lets experiments pin
smaller ``d_l`` values. Any profile with ``d_1 = 1`` keeps the structural
invariants of the grammar; only the competitive guarantees need the defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod
from typing import Sequence

from ..errors import ConstantTooLargeError, ValidationError

# Past this the exact rational for h(n) has millions of digits.
HARMONIC_LIMIT = 1 << 17


def default_d(level: int) -> int:
    if level < 1:
        raise ValidationError(f"levels start at 1, got {level}")
    return 2 ** (5 ** (level - 1) - 1)


@dataclass(frozen=True)
class ConstantsProfile:
    """``d_l`` per level: explicit overrides for the first levels, defaults after."""

    overrides: tuple = ()

    def __post_init__(self):
        ov = tuple(int(x) for x in self.overrides)
        if ov:
            if ov[0] != 1:
                raise ValidationError(f"d_1 must be 1 (got {ov[0]}); the norm identities depend on it")
            if any(x < 2 for x in ov[1:]):
                raise ValidationError(f"d_l must be at least 2 for l >= 2, got {ov}")
        object.__setattr__(self, "overrides", ov)

    @classmethod
    def parse(cls, text: str | None) -> "ConstantsProfile":
        if text is None or text.strip() in ("", "default"):
            return cls()
        return cls(tuple(int(t) for t in text.split(",") if t.strip()))

    def d(self, level: int) -> int:
        if 1 <= level <= len(self.overrides):
            return self.overrides[level - 1]
        return default_d(level)

    @property
    def theoretical(self) -> bool:
        """True when every overridden level equals the default."""
        return all(x == default_d(i) for i, x in enumerate(self.overrides, start=1))

    def d_product(self, level: int) -> int:
        return prod(self.d(i) for i in range(1, level + 1))

    def describe(self) -> str:
        if self.theoretical:
            return "default"
        return ",".join(str(x) for x in self.overrides) + " (non-theoretical)"


DEFAULT_PROFILE = ConstantsProfile()


def _harmonic_split(a: int, b: int) -> tuple[int, int]:
    # sum_{i=a}^{b-1} 1/i as an unreduced numerator/denominator pair
    if b - a == 1:
        return 1, a
    m = (a + b) // 2
    p1, q1 = _harmonic_split(a, m)
    p2, q2 = _harmonic_split(m, b)
    return p1 * q2 + p2 * q1, q1 * q2


def harmonic(n: int) -> Fraction:
    """``h(n) = 1 + 1/2 + ... + 1/n`` exactly; ``h(0) = 0``."""
    if n < 0:
        raise ValidationError(f"h(n) needs n >= 0, got {n}")
    if n == 0:
        return Fraction(0)
    if n > HARMONIC_LIMIT:
        raise ConstantTooLargeError(
            f"h({n}) is too large to compute exactly (limit {HARMONIC_LIMIT})"
        )
    p, q = _harmonic_split(1, n + 1)
    g = gcd(p, q)
    return Fraction(p // g, q // g)


def c_recurrence(hs: Sequence):
    """``c_l`` from the recurrence, given ``hs = [h(d_2-1), ..., h(d_l-1)]``.

    Works over any ring (Fractions, sympy symbols), which is how the
    closed-form identity is checked exactly even when ``h`` cannot be.
    """
    c = 1
    for h in hs:
        c = (1 + h) * c + 2 * h
    return c


def c_closed_form(hs: Sequence):
    return 3 * prod((1 + h for h in hs), start=1) - 2


def c_const(level: int, profile: ConstantsProfile = DEFAULT_PROFILE) -> Fraction:
    if level < 1:
        raise ValidationError(f"levels start at 1, got {level}")
    hs = [harmonic(profile.d(i) - 1) for i in range(2, level + 1)]
    return Fraction(c_recurrence(hs))


def F_const(level: int, upper: int, profile: ConstantsProfile = DEFAULT_PROFILE) -> int:
    """``F_{l,l'}``: 1 at ``l = 1``, else ``2**(l'-l+3) * d_{l-1} * F_{l-1,l'}``."""
    if not 1 <= level <= upper:
        raise ValidationError(f"F_{{l,l'}} needs 1 <= l <= l', got l={level}, l'={upper}")
    f = 1
    for i in range(2, level + 1):
        f = 2 ** (upper - i + 3) * profile.d(i - 1) * f
    return f


def phase_norm(level: int, weights, profile: ConstantsProfile) -> Fraction:
    """``|v|`` of every (level, H)-phase: ``(w_l / w_1) * prod_{i<=l} d_i``."""
    return weights.w(level) / weights.w(1) * profile.d_product(level)


def multiphase_norm(level: int, weights, profile: ConstantsProfile) -> Fraction:
    return weights.w(level + 1) / weights.w(1) * profile.d_product(level)
