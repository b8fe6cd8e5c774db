"""The limit law of W(n, p) as n grows: Mandelbrot's binomial measure.

The measure has no density unless ``p = 1/2``, so it is handled only through
exact evaluators at dyadic rationals: the distribution function, the masses
of dyadic intervals, and the two limit moments.  Non-dyadic points are
bracketed between neighbouring dyadics at a caller-chosen level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import as_prob, parse_rational, popcount
from .errors import DomainError, ResourceError

LEVEL_MAX = 4096
SAMPLE_MAX_LEVELS = 52


@dataclass(frozen=True)
class DyadicRational:
    """``numerator / 2**level`` in canonical form (odd numerator, or 0, or 1)."""

    numerator: int
    level: int

    def __post_init__(self):
        if self.level < 0 or self.numerator < 0:
            raise DomainError("dyadic rationals need a nonnegative numerator and level")
        if self.numerator > 1 << self.level:
            raise DomainError(f"{self.numerator}/2**{self.level} exceeds 1")
        k, m = self.numerator, self.level
        if k == 0:
            m = 0
        else:
            while m and k % 2 == 0:
                k //= 2
                m -= 1
        object.__setattr__(self, "numerator", k)
        object.__setattr__(self, "level", m)

    @classmethod
    def coerce(cls, x) -> "DyadicRational":
        if isinstance(x, DyadicRational):
            return x
        if isinstance(x, str):
            x = parse_rational(x)
        x = Fraction(x)
        if not 0 <= x <= 1:
            raise DomainError(f"x = {x} is outside [0, 1]")
        d = x.denominator
        if d & (d - 1):
            raise DomainError(f"x = {x} is not a dyadic rational; use hem_cdf_bracket")
        return cls(x.numerator, d.bit_length() - 1)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.level)

    def digits(self) -> list[int]:
        """Binary digits ``d_1 .. d_level`` after the point (``1`` itself has none)."""
        if self.numerator == 1 << self.level:
            return []
        return [int(c) for c in format(self.numerator, f"0{self.level}b")] if self.level else []


def _exact(p) -> Fraction:
    if isinstance(p, float):
        raise DomainError("hem evaluators are exact-only; pass p as a Fraction or 'a/b' string")
    return as_prob(p, "exact")[0]


def hem_cdf(p, x) -> Fraction:
    """Limit distribution function at a dyadic point.

    Reading ``x = 0.d1 d2 ... dm`` in binary, every digit ``d_i = 1`` adds the
    mass of the left half of the current cell, ``(1-p)`` times the product of
    the weights of the digits before it (``1-p`` for 0, ``p`` for 1).
    """
    p = _exact(p)
    x = DyadicRational.coerce(x)
    if x.level > LEVEL_MAX:
        raise ResourceError(f"dyadic level {x.level} exceeds {LEVEL_MAX}")
    if x.numerator == 1 << x.level:
        return Fraction(1)
    if x.numerator == 0:
        # only p = 0 puts an atom at the origin
        return Fraction(int(p == 0))
    q = 1 - p
    total = Fraction(0)
    weight = Fraction(1)
    for d in x.digits():
        if d:
            total += weight * q
            weight *= p
        else:
            weight *= q
    return total


def interval_mass(p, level: int, k: int) -> Fraction:
    """Mass of ``[k / 2**level, (k+1) / 2**level]``: one factor per binary digit of ``k``."""
    p = _exact(p)
    if level < 0 or not 0 <= k < 1 << level:
        raise DomainError(f"interval index k = {k} is outside [0, 2**{level} - 1]")
    j = popcount(k)
    return p**j * (1 - p) ** (level - j)


def interval_masses(p, level: int) -> list[Fraction]:
    if level > 20:
        raise ResourceError(f"level {level} exceeds the table cap of 20")
    return [interval_mass(p, level, k) for k in range(1 << level)]


def staircase(p, level: int) -> list[tuple[Fraction, Fraction]]:
    """``(x, F(x))`` at every dyadic ``k / 2**level``, ready for plotting."""
    if level > 20:
        raise ResourceError(f"level {level} exceeds the table cap of 20")
    p = _exact(p)
    out = []
    acc = Fraction(0)
    for k, m in enumerate(interval_masses(p, level)):
        out.append((Fraction(k, 1 << level), acc))
        acc += m
    out.append((Fraction(1), acc))
    return out


def hem_moments(p) -> tuple[Fraction, Fraction]:
    """Mean ``p`` and variance ``p (1 - p) / 3``."""
    p = _exact(p)
    return p, p * (1 - p) / 3


def hem_cdf_bracket(p, x, level: int) -> tuple[Fraction, Fraction]:
    """Lower and upper bounds on ``F(x)`` from the dyadics of ``level`` around ``x``."""
    x = Fraction(x) if not isinstance(x, str) else parse_rational(x)
    if not 0 <= x <= 1:
        raise DomainError(f"x = {x} is outside [0, 1]")
    if not 0 <= level <= LEVEL_MAX:
        raise DomainError(f"level {level} is outside [0, {LEVEL_MAX}]")
    lo = math.floor(x * (1 << level))
    hi = math.ceil(x * (1 << level))
    return (
        hem_cdf(p, Fraction(lo, 1 << level)),
        hem_cdf(p, Fraction(hi, 1 << level)),
    )


def density_diagnostic(n: int, p, j: int) -> float:
    """``log((2**n - 1) p**j (1-p)**(n-j))``, the height of the level-n histogram.

    For ``p = 1/2`` it tends to 0; otherwise the extreme cells diverge to
    ``+inf`` and ``-inf``, which is the finite-n trace of the missing density.
    """
    p = float(as_prob(p)[0])
    if p in (0.0, 1.0):
        raise DomainError("the density diagnostic needs 0 < p < 1")
    if n < 1:
        raise DomainError(f"n = {n} must be positive")
    if not 0 <= j <= n:
        raise DomainError(f"j = {j} is outside [0, {n}]")
    log_width = n * math.log(2) + math.log1p(-(2.0**-n))
    return log_width + j * math.log(p) + (n - j) * math.log1p(-p)


def hem_sample(p, levels: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draws truncated at ``levels`` cascade digits, returned as cell midpoints.

    Digit ``i`` is 1 with probability ``p``; the result is within
    ``2**-(levels + 1)`` of a draw from the exact measure.
    """
    if not 1 <= levels <= SAMPLE_MAX_LEVELS:
        raise DomainError(f"levels must lie in [1, {SAMPLE_MAX_LEVELS}]")
    p = float(as_prob(p)[0])
    digits = rng.random((size, levels)) < p
    weights = 0.5 ** np.arange(1, levels + 1)
    return digits @ weights + 0.5**(levels + 1)
