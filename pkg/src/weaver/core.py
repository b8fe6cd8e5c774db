"""Construction and evaluation of the weaver's distribution W(n, p).

A selection vector of ``n`` binary choices is packed into an integer ``k``
whose bit ``i - 1`` records the ``i``-th selection (least-significant bit =
first selection).  With that convention the conditional sum of the sample is
exactly ``k`` and the distribution puts mass ``p**popcount(k) *
(1 - p)**(n - popcount(k))`` on the support point ``k / (2**n - 1)``.

Two numeric modes are supported.  In *exact* mode probabilities are
:class:`fractions.Fraction` instances; in *float* mode they are binary64
(full vectors are numpy arrays).  The mode is inferred from the type of ``p``
unless given explicitly: ``int``, ``Fraction`` and ``str`` inputs are exact,
``float`` inputs are float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence, Union

import numpy as np

from .errors import DomainError, ResourceError

Mode = Literal["exact", "float"]
Method = Literal["direct", "weave", "cascade"]
ProbLike = Union[Fraction, int, float, str]
Prob = Union[Fraction, float]

EXACT_VECTOR_MAX_N = 20
FLOAT_VECTOR_MAX_N = 26
POINT_MAX_N = 62

METHODS = ("direct", "weave", "cascade")
MODES = ("exact", "float")


# ---------------------------------------------------------------------------
# numeric plumbing


def parse_rational(text: str) -> Fraction:
    """Parse ``"a/b"``, ``"0.3"`` or ``"3"`` into an exact fraction.

    Decimals expand exactly (``"0.3"`` is 3/10, not the nearest double).
    """
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse {text!r} as a rational number") from exc


def infer_mode(p: ProbLike) -> Mode:
    if isinstance(p, bool):
        raise DomainError("p must be a number, not a bool")
    if isinstance(p, (float, np.floating)):
        return "float"
    return "exact"


def as_prob(p: ProbLike, mode: Mode | None = None) -> tuple[Prob, Mode]:
    """Coerce ``p`` to the numeric type of ``mode`` and check ``0 <= p <= 1``."""
    if mode is None:
        mode = infer_mode(p)
    if mode not in MODES:
        raise DomainError(f"unknown numeric mode {mode!r}")
    if isinstance(p, str):
        p = parse_rational(p)
    if mode == "exact":
        value: Prob = Fraction(p)
    else:
        value = float(p)
        if math.isnan(value):
            raise DomainError("p is NaN")
    if not 0 <= value <= 1:
        raise DomainError(f"p = {p} is outside [0, 1]")
    return value, mode


def _complement(p: Prob) -> Prob:
    return 1 - p


def _check_n(n: int, cap: int, *, what: str, minimum: int = 1) -> None:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise DomainError(f"n must be an integer, got {n!r}")
    if n < minimum:
        raise DomainError(f"n = {n} is below the minimum {minimum}")
    if n > cap:
        raise ResourceError(f"n = {n} exceeds the {what} cap of {cap}")


def vector_cap(mode: Mode) -> int:
    return EXACT_VECTOR_MAX_N if mode == "exact" else FLOAT_VECTOR_MAX_N


def _check_index(n: int, k: int) -> None:
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise DomainError(f"k must be an integer, got {k!r}")
    if not 0 <= k <= (1 << n) - 1:
        raise DomainError(f"k = {k} is outside [0, 2**{n} - 1]")


def popcount(k: int) -> int:
    return int(k).bit_count()


def bit_reverse_permutation(n: int) -> np.ndarray:
    """Array ``r`` with ``r[k]`` = ``k`` with its ``n`` low bits reversed."""
    rev = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        rev = np.concatenate((2 * rev, 2 * rev + 1))
    return rev


def _bit_reverse(k: int, n: int) -> int:
    return int(format(k, f"0{n}b")[::-1], 2) if n else 0


# ---------------------------------------------------------------------------
# choice vectors


@dataclass(frozen=True)
class ChoiceVector:
    """The packed record of ``n`` selections; bit ``i - 1`` is selection ``i``."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n = {self.n} must be positive")
        _check_index(self.n, self.k)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "ChoiceVector":
        """Build from selections in chronological order (first selection first)."""
        k = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise DomainError(f"selection {i + 1} is {b!r}, expected 0 or 1")
            k |= b << i
        return cls(len(bits), k)

    @property
    def bits(self) -> tuple[int, ...]:
        """Selections in chronological order."""
        return tuple((self.k >> i) & 1 for i in range(self.n))

    @property
    def ones(self) -> int:
        return popcount(self.k)

    @property
    def zeros(self) -> int:
        return self.n - self.ones

    def as_string(self) -> str:
        """Binary numeral, most significant (last) selection first, like ``(k)_2``."""
        return format(self.k, f"0{self.n}b")


# ---------------------------------------------------------------------------
# point evaluations


def support_point(n: int, k: int) -> Fraction:
    """Support point ``k / (2**n - 1)`` of W(n, p), reduced."""
    _check_n(n, POINT_MAX_N, what="point evaluation")
    _check_index(n, k)
    return Fraction(k, (1 << n) - 1)


def _mass_table(n: int, p: Prob) -> list[Prob]:
    # h_j = p**j * (1-p)**(n-j), j = number of ones
    q = _complement(p)
    return [p**j * q ** (n - j) for j in range(n + 1)]


def pmf_point(n: int, p: ProbLike, k: int, mode: Mode | None = None) -> Prob:
    p, mode = as_prob(p, mode)
    _check_n(n, POINT_MAX_N, what="point evaluation")
    _check_index(n, k)
    j = popcount(k)
    return p**j * _complement(p) ** (n - j)


def fold_factor(p: ProbLike, mode: Mode | None = None) -> Prob:
    """Ratio ``p / (1 - p)`` between the masses of ``k + 1`` and ``k`` for even ``k``."""
    p, mode = as_prob(p, mode)
    if p == 1:
        raise DomainError("fold factor is undefined at p = 1; use pmf_point instead")
    return p / _complement(p)


# ---------------------------------------------------------------------------
# full vectors


@dataclass(frozen=True)
class WeaverDistribution:
    """The full probability vector of W(n, p), indexed by ``k``.

    ``probs`` is a tuple of fractions in exact mode and a read-only float64
    array in float mode.
    """

    n: int
    p: Prob
    probs: tuple | np.ndarray
    method: Method
    mode: Mode

    def __len__(self) -> int:
        return 1 << self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeaverDistribution):
            return NotImplemented
        if (self.n, self.mode) != (other.n, other.mode) or self.p != other.p:
            return False
        if self.mode == "exact":
            return self.probs == other.probs
        return bool(np.array_equal(self.probs, other.probs))

    __hash__ = None  # type: ignore[assignment]

    def support(self) -> list[Fraction]:
        d = (1 << self.n) - 1
        return [Fraction(k, d) for k in range(len(self))]

    def total(self) -> Prob:
        if self.mode == "exact":
            return sum(self.probs, Fraction(0))
        return float(np.sum(self.probs))

    def cdf(self, x) -> Prob:
        return cdf_eval(self.n, self.p, x, mode=self.mode)

    def mode_indices(self) -> list[int]:
        return mode_indices(self)


def _freeze(values, mode: Mode):
    if mode == "exact":
        return tuple(values)
    arr = np.asarray(values, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def _direct(n: int, p: Prob, mode: Mode):
    table = _mass_table(n, p)
    if mode == "exact":
        return [table[popcount(k)] for k in range(1 << n)]
    ones = np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.intp)
    return np.asarray(table, dtype=np.float64)[ones]


def _weave(n: int, p: Prob, mode: Mode):
    # global view: p_{m+1} = ((1-p) p_m, p p_m)
    q = _complement(p)
    if mode == "exact":
        v = [Fraction(1)]
        for _ in range(n):
            v = [q * x for x in v] + [p * x for x in v]
        return v
    v = np.ones(1)
    for _ in range(n):
        v = np.concatenate((q * v, p * v))
    return v


def _cascade(n: int, p: Prob, mode: Mode):
    # local view: every mass forks into an adjacent ((1-p) m, p m) pair; the
    # first fork ends up as the most significant position, so reverse bits
    q = _complement(p)
    if mode == "exact":
        v = [Fraction(1)]
        for _ in range(n):
            v = [c for x in v for c in (x * q, x * p)]
        return [v[_bit_reverse(k, n)] for k in range(1 << n)]
    v = np.ones(1)
    for _ in range(n):
        v = np.stack((v * q, v * p), axis=-1).ravel()
    return v[bit_reverse_permutation(n)]


_BUILDERS = {"direct": _direct, "weave": _weave, "cascade": _cascade}


def pmf_vector(
    n: int, p: ProbLike, method: Method = "direct", mode: Mode | None = None
) -> WeaverDistribution:
    """Build W(n, p) with one of three equivalent constructions.

    ``direct`` evaluates the closed form per index, ``weave`` concatenates
    ``((1-p) v, p v)`` starting from ``v = (1,)``, and ``cascade`` splits
    each mass into adjacent children and reindexes by bit reversal.  In
    exact mode all three agree bit for bit; in float mode ``weave`` and
    ``cascade`` multiply in the same order and also agree bit for bit, while
    ``direct`` may differ by rounding.
    """
    p, mode = as_prob(p, mode)
    if method not in _BUILDERS:
        raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")
    _check_n(n, vector_cap(mode), what=f"{mode} full-vector")
    probs = _BUILDERS[method](n, p, mode)
    return WeaverDistribution(n, p, _freeze(probs, mode), method, mode)


def fold_vector(n: int, p: ProbLike, mode: Mode | None = None) -> list[Prob]:
    """The geometric-triangle row ``f_n`` via ``f_0 = (1,)``, ``f_n = (f_{n-1}, f f_{n-1})``.

    ``pmf = (1-p)**n * f_n`` whenever ``p < 1``.
    """
    f = fold_factor(p, mode)
    _check_n(n, EXACT_VECTOR_MAX_N, what="triangle", minimum=0)
    row = [f**0]
    for _ in range(n):
        row = row + [f * x for x in row]
    return row


def reflect(dist: WeaverDistribution) -> WeaverDistribution:
    """Mirror image about ``y = 1/2``, which is W(n, 1 - p)."""
    if dist.mode == "exact":
        probs = tuple(reversed(dist.probs))
    else:
        probs = _freeze(dist.probs[::-1].copy(), "float")
    return WeaverDistribution(dist.n, _complement(dist.p), probs, dist.method, dist.mode)


def mode_indices(dist: WeaverDistribution) -> list[int]:
    """All indices attaining the maximal mass (every index ties when p = 1/2)."""
    top = max(dist.probs)
    return [k for k, v in enumerate(dist.probs) if v == top]


# ---------------------------------------------------------------------------
# geometric triangle


@dataclass(frozen=True)
class TriangleRow:
    n: int
    exponents: tuple[int, ...]
    row_sum: int


def triangle_row(n: int) -> TriangleRow:
    """Row ``n`` of the exponent triangle: ``popcount(k)`` for ``k < 2**n``."""
    _check_n(n, EXACT_VECTOR_MAX_N, what="triangle", minimum=0)
    exps = (0,)
    for _ in range(n):
        exps = exps + tuple(e + 1 for e in exps)
    return TriangleRow(n, exps, sum(exps))


def row_sums(n: int) -> list[int]:
    """``s_0 .. s_n`` from ``s_0 = 0``, ``s_{m+1} = 2 s_m + 2**m``."""
    s = [0]
    for m in range(n):
        s.append(2 * s[-1] + (1 << m))
    return s


# ---------------------------------------------------------------------------
# moments


def _class_power_sums(n: int, j: int) -> list[int]:
    # sum of k**j over all k < 2**n, grouped by popcount(k)
    sums = [0] * (n + 1)
    for k in range(1 << n):
        sums[k.bit_count()] += k**j
    return sums


def raw_moment(n: int, p: ProbLike, j: int, mode: Mode | None = None) -> Prob:
    """``E[Y_n**j] = sum_k p_k y_k**j``, summed over the support.

    Masses depend on ``k`` only through its popcount, so the integer powers
    are accumulated per class first and each class mass multiplies once.
    """
    p, mode = as_prob(p, mode)
    _check_n(n, vector_cap(mode), what=f"{mode} full-vector")
    if j < 1:
        raise DomainError(f"moment order j = {j} must be positive")
    d = (1 << n) - 1
    if mode == "exact":
        table = _mass_table(n, p)
        num = sum((h * s for h, s in zip(table, _class_power_sums(n, j))), Fraction(0))
        return num / d**j
    probs = _direct(n, p, mode)
    y = np.arange(1 << n, dtype=np.float64) / d
    return float(np.sum(probs * y**j))


def mean(n: int, p: ProbLike, mode: Mode | None = None) -> Prob:
    """``sum_k p_k y_k``, summed over the support rather than read off as ``p``."""
    return raw_moment(n, p, 1, mode)


def mean_decomposition(n: int, p: ProbLike, mode: Mode | None = None) -> list[Prob]:
    """Terms ``t_j = C(n-1, j) p**(n-j) (1-p)**j`` for ``j = 0 .. n-1``.

    ``j`` counts zeros; ``C(n-1, j)`` is the summed support of all vectors
    with exactly ``j`` zeros.  The terms add up to ``p``.
    """
    p, mode = as_prob(p, mode)
    _check_n(n, POINT_MAX_N, what="point evaluation")
    q = _complement(p)
    return [math.comb(n - 1, j) * p ** (n - j) * q**j for j in range(n)]


def variance_ratio(n: int) -> Fraction:
    """``sum_{i<n} 4**i / (2**n - 1)**2``, which decreases to 1/3."""
    _check_n(n, 10**6, what="ratio")
    return Fraction(((1 << 2 * n) - 1) // 3, ((1 << n) - 1) ** 2)


def variance(n: int, p: ProbLike, mode: Mode | None = None) -> Prob:
    p, mode = as_prob(p, mode)
    _check_n(n, POINT_MAX_N, what="point evaluation")
    ratio = variance_ratio(n)
    pq = p * _complement(p)
    return ratio * pq if mode == "exact" else float(ratio) * pq


def variance_per_bit(n: int, p: ProbLike, i: int, mode: Mode | None = None) -> Prob:
    """Share of the variance contributed by selection ``i + 1``: ``(2**i / (2**n-1))**2 p(1-p)``."""
    p, mode = as_prob(p, mode)
    _check_n(n, POINT_MAX_N, what="point evaluation")
    if not 0 <= i < n:
        raise DomainError(f"bit index i = {i} is outside [0, {n - 1}]")
    w = Fraction(1 << i, (1 << n) - 1) ** 2
    pq = p * _complement(p)
    return w * pq if mode == "exact" else float(w) * pq


# ---------------------------------------------------------------------------
# distribution function


def prefix_mass(n: int, p: Prob, count: int) -> Prob:
    """Total mass of indices ``0 .. count - 1`` in O(n).

    Walks the bits of ``count`` from the top: each set bit contributes the
    mass of the block below it, whose free low bits sum to one.
    """
    if count <= 0:
        return p * 0
    if count >= 1 << n:
        return p * 0 + 1
    q = _complement(p)
    weight = p * 0 + 1
    terms = []
    for i in range(n - 1, -1, -1):
        if (count >> i) & 1:
            terms.append(weight * q)
            weight = weight * p
        else:
            weight = weight * q
    if isinstance(p, float):
        return math.fsum(terms)
    return sum(terms, Fraction(0))


def cdf_eval(n: int, p: ProbLike, x, mode: Mode | None = None) -> Prob:
    """Right-continuous distribution function ``F_n(x) = sum_{y_k <= x} p_k``.

    ``x`` may be any rational (or float, converted exactly) in ``[0, 1]``.
    """
    p, mode = as_prob(p, mode)
    _check_n(n, POINT_MAX_N, what="point evaluation")
    x = Fraction(x) if not isinstance(x, str) else parse_rational(x)
    if not 0 <= x <= 1:
        raise DomainError(f"x = {x} is outside [0, 1]")
    last = math.floor(x * ((1 << n) - 1))
    return prefix_mass(n, p, last + 1)


def jump_histogram(n: int, p: ProbLike, mode: Mode | None = None) -> list[tuple[Prob, int]]:
    """Distinct jump sizes of ``F_n`` with multiplicities, smallest number of ones first.

    Generically the sizes are ``p**j (1-p)**(n-j)`` with count ``C(n, j)``;
    coinciding sizes (``p`` in ``{0, 1/2, 1}``) are merged.
    """
    p, mode = as_prob(p, mode)
    _check_n(n, POINT_MAX_N, what="point evaluation")
    merged: dict = {}
    for j, h in enumerate(_mass_table(n, p)):
        merged[h] = merged.get(h, 0) + math.comb(n, j)
    return list(merged.items())
