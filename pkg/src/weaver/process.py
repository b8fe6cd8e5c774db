"""Progressive sampling from two populations, and Monte Carlo checks of it.

A sample of size ``2**n - 1`` is split into ``n`` sub-samples of sizes
``1, 2, 4, ...``; an independent Bernoulli(p) selection decides which
population fills each sub-sample.  Three per-path statistics are simulated:

``conditional_mean``
    ``k / (2**n - 1)``, the mean of the path given the selections.
``path_mean``
    The arithmetic mean of all ``2**n - 1`` observations.
``mixture_draw``
    Pick population 1 with probability equal to its share of the sample
    and return the sample mean of that stratum.

The last two agree in mean but not in variance; see
:func:`theoretical_variance_pathmean` and :func:`theoretical_variance_nominal`.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.stats import binom

from . import streams
from .core import ChoiceVector, as_prob, parse_rational, variance as weaver_variance
from .errors import DomainError, ResourceError, ValidationError

PATH_MAX_N = 30
CONDITIONAL_MAX_N = 62
DEFAULT_MAX_OBS = 1 << 32
DEFAULT_CHUNK = 4096
PROCESSES = ("path_mean", "mixture_draw", "conditional_mean")
PROCESS_ALIASES = {"pathmean": "path_mean", "mixdraw": "mixture_draw", "condmean": "conditional_mean"}


def _number(x):
    if isinstance(x, str):
        try:
            return parse_rational(x)
        except DomainError as exc:
            raise ValidationError(str(exc)) from None
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, float) and math.isfinite(x):
        return x
    raise ValidationError(f"expected a finite number, got {x!r}")


# ---------------------------------------------------------------------------
# component populations


@dataclass(frozen=True)
class ComponentSpec:
    """A population with closed-form mean and variance.

    ``point(c)``: always ``c``.  ``twopoint(x0, x1, q)``: ``x1`` with
    probability ``q``, else ``x0``.  ``uniform_interval(a, b)``: uniform on
    ``[a, b]``.  Passing ``mean``/``variance`` explicitly checks them against
    the parameters.
    """

    kind: str
    params: tuple
    mean: Fraction | float = None
    variance: Fraction | float = None

    def __post_init__(self):
        params = tuple(_number(v) for v in self.params)
        object.__setattr__(self, "params", params)
        expected = {"point": 1, "twopoint": 3, "uniform_interval": 2}
        if self.kind not in expected:
            raise ValidationError(f"unknown component kind {self.kind!r}")
        if len(params) != expected[self.kind]:
            raise ValidationError(f"{self.kind} takes {expected[self.kind]} parameters, got {len(params)}")
        if self.kind == "point":
            (c,) = params
            mu, var = c, c * 0
        elif self.kind == "twopoint":
            x0, x1, q = params
            if not 0 <= q <= 1:
                raise ValidationError(f"twopoint weight q = {q} is outside [0, 1]")
            mu, var = x0 + q * (x1 - x0), q * (1 - q) * (x1 - x0) ** 2
        else:
            a, b = params
            if not a <= b:
                raise ValidationError(f"uniform interval needs a <= b, got ({a}, {b})")
            mu, var = (a + b) / 2, (b - a) ** 2 / 12
        for name, declared, actual in (("mean", self.mean, mu), ("variance", self.variance, var)):
            if declared is not None and not math.isclose(declared, actual, rel_tol=1e-12, abs_tol=1e-15):
                raise ValidationError(f"declared {name} {declared} does not match {actual}")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "variance", var)

    @property
    def float_params(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.params)

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Inverse-CDF transform of uniforms in (0, 1)."""
        fp = self.float_params
        if self.kind == "point":
            return np.full(np.shape(u), fp[0])
        if self.kind == "twopoint":
            x0, x1, q = fp
            return np.where(u < q, x1, x0)
        a, b = fp
        return a + (b - a) * u

    @property
    def has_stratum_sum(self) -> bool:
        return self.kind in ("point", "twopoint")

    def stratum_sum(self, size: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Sum of ``size`` independent draws from one uniform each, exact in distribution."""
        size = np.asarray(size, dtype=np.float64)
        if self.kind == "point":
            return size * self.float_params[0]
        if self.kind != "twopoint":
            raise ValidationError("stratum sums are only available for point and twopoint components")
        x0, x1, q = self.float_params
        if q in (0.0, 1.0):
            hits = size * q
        else:
            hits = np.where(size > 0, binom.ppf(u, size, q), 0.0)
        return size * x0 + (x1 - x0) * hits

    def affine(self, shift, scale) -> "ComponentSpec":
        """Distribution of ``(X - shift) * scale``."""
        if scale == 0:
            raise ValidationError("affine scale must be nonzero")
        if self.kind == "point":
            return point((self.params[0] - shift) * scale)
        if self.kind == "twopoint":
            x0, x1, q = self.params
            return twopoint((x0 - shift) * scale, (x1 - shift) * scale, q)
        a, b = ((v - shift) * scale for v in self.params)
        return uniform_interval(min(a, b), max(a, b))

    def describe(self) -> str:
        name = "uniform" if self.kind == "uniform_interval" else self.kind
        return f"{name}:" + ",".join(str(v) for v in self.params)


def point(c) -> ComponentSpec:
    return ComponentSpec("point", (c,))


def twopoint(x0, x1, q) -> ComponentSpec:
    return ComponentSpec("twopoint", (x0, x1, q))


def uniform_interval(a, b) -> ComponentSpec:
    return ComponentSpec("uniform_interval", (a, b))


def parse_component(text: str) -> ComponentSpec:
    """Parse ``point:c``, ``twopoint:x0,x1,q`` or ``uniform:a,b``."""
    kind, sep, rest = text.partition(":")
    if not sep or not rest:
        raise ValidationError(f"malformed component spec {text!r}")
    kind = {"uniform": "uniform_interval"}.get(kind.strip(), kind.strip())
    return ComponentSpec(kind, tuple(v.strip() for v in rest.split(",")))


def standardize(h0: ComponentSpec, h1: ComponentSpec) -> tuple[ComponentSpec, ComponentSpec]:
    """Map a pair with means ``mu0 != mu1`` affinely onto means 0 and 1."""
    if h0.mean == h1.mean:
        raise ValidationError("cannot standardize components with equal means")
    scale = 1 / (h1.mean - h0.mean)
    return h0.affine(h0.mean, scale), h1.affine(h0.mean, scale)


def validate_pair(h0: ComponentSpec, h1: ComponentSpec) -> None:
    if h0.mean != 0:
        raise ValidationError(f"H0 must have mean 0, got {h0.mean}; see standardize()")
    if h1.mean != 1:
        raise ValidationError(f"H1 must have mean 1, got {h1.mean}; see standardize()")


# ---------------------------------------------------------------------------
# single paths


def subsample_index(size: int) -> np.ndarray:
    """For observation positions ``0 .. size-1``, the 0-based sub-sample they belong to."""
    n = size.bit_length()
    if size != (1 << n) - 1:
        raise DomainError(f"{size} is not of the form 2**n - 1")
    return np.repeat(np.arange(n, dtype=np.int64), 1 << np.arange(n, dtype=np.int64))


@dataclass(frozen=True)
class SamplePath:
    n: int
    choices: ChoiceVector
    observations: np.ndarray
    raw_sum: float
    path_mean: float

    def stratum_mask(self) -> np.ndarray:
        """True where the observation came from population 1."""
        bits = np.array(self.choices.bits, dtype=bool)
        return bits[subsample_index(len(self.observations))]

    @property
    def conditional_mean(self) -> float:
        return self.choices.k / ((1 << self.n) - 1)


def _selections(u: np.ndarray, p: float) -> np.ndarray:
    return u < p


def progressive_sample(n: int, p, h0: ComponentSpec, h1: ComponentSpec, rng) -> SamplePath:
    """Draw one path of ``2**n - 1`` observations.

    ``rng`` is anything with a numpy-style ``random(size)`` method.  It is
    consumed as ``n`` selection uniforms followed by one uniform per
    observation, in sample order.
    """
    validate_pair(h0, h1)
    if not 1 <= n <= PATH_MAX_N:
        raise DomainError(f"n = {n} is outside [1, {PATH_MAX_N}] for path materialization")
    pf = float(as_prob(p)[0])
    size = (1 << n) - 1
    bits = _selections(np.asarray(rng.random(n)), pf)
    choices = ChoiceVector.from_bits([int(b) for b in bits])
    u = np.asarray(rng.random(size))
    from_h1 = bits[subsample_index(size)]
    obs = np.where(from_h1, h1.quantile(u), h0.quantile(u))
    obs.flags.writeable = False
    raw = math.fsum(obs)
    return SamplePath(n, choices, obs, raw, raw / size)


def mixture_draw(path: SamplePath, rng) -> float:
    """Pick population 1 with probability ``k / (2**n - 1)``, return that stratum's mean.

    One uniform is consumed.  When a stratum is empty it is never picked.
    """
    size = len(path.observations)
    lam = path.choices.k / size
    mask = path.stratum_mask()
    pick_h1 = float(rng.random()) < lam
    chosen = path.observations[mask] if pick_h1 else path.observations[~mask]
    return math.fsum(chosen) / len(chosen)


# ---------------------------------------------------------------------------
# theory


def _theory_args(n, p, var0, var1):
    if n < 1:
        raise DomainError(f"n = {n} must be positive")
    p, _ = as_prob(p)
    var0, var1 = _number(var0), _number(var1)
    if var0 < 0 or var1 < 0:
        raise DomainError("variances must be nonnegative")
    return p, var0, var1, (1 << n) - 1


def theoretical_variance_nominal(n: int, p, var0, var1):
    """``p (1-p) + (var0 + var1) / (2**n - 1)``.

    This is the mixture-draw variance when both strata are always populated.
    :func:`mixture_draw` skips empty strata, so its exact variance is
    :func:`theoretical_variance_mixture`, which falls below this value by
    ``(var0 p**n + var1 (1-p)**n) / (2**n - 1)``.
    """
    p, var0, var1, d = _theory_args(n, p, var0, var1)
    return p * (1 - p) + (var0 + var1) / d


def theoretical_variance_pathmean(n: int, p, var0, var1):
    """Variance of the arithmetic mean: the weaver variance plus ``((1-p) var0 + p var1) / (2**n - 1)``."""
    p, var0, var1, d = _theory_args(n, p, var0, var1)
    return weaver_variance(n, p) + ((1 - p) * var0 + p * var1) / d


def theoretical_variance_mixture(n: int, p, var0, var1):
    """Exact variance of :func:`mixture_draw`, including the empty-stratum paths.

    A path with every selection equal to 0 (probability ``(1-p)**n``) never
    contributes population-1 sampling noise, and symmetrically for all ones,
    which removes those shares from the within-population term.
    """
    p, var0, var1, d = _theory_args(n, p, var0, var1)
    all_ones, all_zeros = p**n, (1 - p) ** n
    return p * (1 - p) + (var0 * (1 - all_ones) + var1 * (1 - all_zeros)) / d


class Decomposition(NamedTuple):
    between_weaving: Fraction | float
    mixing: Fraction | float
    within: Fraction | float

    @property
    def total(self):
        return self.between_weaving + self.mixing + self.within


def variance_decomposition(n: int, p, var0, var1) -> Decomposition:
    """Split the mixture variance into weaving, mixing and within-population parts."""
    p, var0, var1, d = _theory_args(n, p, var0, var1)
    weaving = sum(1 << (2 * i) for i in range(n))
    mixing = d * d - weaving  # sum_j 2**j (2**n - 1 - 2**j)
    pq = p * (1 - p)
    if isinstance(pq, Fraction):
        scale = Fraction(1, d * d)
    else:
        scale = 1.0 / (d * d)
    return Decomposition(weaving * scale * pq, mixing * scale * pq, (var0 + var1) / d)


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class SimulationConfig:
    process: str
    n: int
    p: Fraction | float
    h0: ComponentSpec = field(default_factory=lambda: point(0))
    h1: ComponentSpec = field(default_factory=lambda: point(1))
    reps: int = 10_000
    seed: int = 0
    epsilon: float = 0.05
    max_obs: int = DEFAULT_MAX_OBS
    sampler: str = "auto"

    def __post_init__(self):
        process = PROCESS_ALIASES.get(self.process, self.process)
        if process not in PROCESSES:
            raise ValidationError(f"unknown process {self.process!r}")
        object.__setattr__(self, "process", process)
        try:
            object.__setattr__(self, "p", as_prob(self.p)[0])
        except DomainError as exc:
            raise ValidationError(str(exc)) from None
        if self.reps < 1:
            raise ValidationError(f"reps = {self.reps} must be at least 1")
        if not 0 <= self.seed < 1 << 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if not self.epsilon >= 0:
            raise ValidationError("epsilon must be nonnegative")
        if self.sampler not in ("auto", "materialize", "aggregate"):
            raise ValidationError(f"unknown sampler {self.sampler!r}")
        cap = CONDITIONAL_MAX_N if process == "conditional_mean" else PATH_MAX_N
        if not 1 <= self.n <= cap:
            raise ValidationError(f"n = {self.n} is outside [1, {cap}] for {process}")
        validate_pair(self.h0, self.h1)
        if process != "conditional_mean":
            budget = self.reps * ((1 << self.n) - 1)
            if budget > self.max_obs:
                raise ResourceError(f"reps * (2**n - 1) = {budget} exceeds the observation budget {self.max_obs}")
        if self.resolved_sampler == "aggregate" and not (self.h0.has_stratum_sum and self.h1.has_stratum_sum):
            raise ValidationError("the aggregate sampler needs point or twopoint components")

    @property
    def resolved_sampler(self) -> str:
        if self.sampler != "auto":
            return self.sampler
        if self.h0.has_stratum_sum and self.h1.has_stratum_sum:
            return "aggregate"
        return "materialize"


@dataclass(frozen=True)
class SimulationReport:
    process: str
    n: int
    p: float
    reps: int
    seed: int
    mean: float
    variance: float
    se_mean: float
    se_variance: float
    frac_near_zero: float
    frac_near_one: float
    epsilon: float

    FIELDS = (
        "process", "n", "p", "reps", "seed", "mean", "variance",
        "se_mean", "se_variance", "frac_near_zero", "frac_near_one", "epsilon",
    )

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _chunk_values(cfg: SimulationConfig, lo: int, hi: int) -> np.ndarray:
    n = cfg.n
    size = (1 << n) - 1
    keys = streams.substream_keys(cfg.seed, np.arange(lo, hi, dtype=np.uint64))
    bits = _selections(streams.uniforms(keys, 0, n), float(cfg.p))
    k = (bits.astype(np.int64) << np.arange(n, dtype=np.int64)).sum(axis=1)
    if cfg.process == "conditional_mean":
        return k / size

    if cfg.resolved_sampler == "aggregate":
        u = streams.uniforms(keys, n, 3)
        n1 = k.astype(np.float64)
        n0 = size - n1
        s0 = cfg.h0.stratum_sum(n0, u[:, 0])
        s1 = cfg.h1.stratum_sum(n1, u[:, 1])
        if cfg.process == "path_mean":
            return (s0 + s1) / size
        pick = u[:, 2] < k / size
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(pick, s1 / n1, s0 / n0)

    # one uniform per observation, then one for the mixture pick: the same
    # consumption order as progressive_sample followed by mixture_draw
    u = streams.uniforms(keys, n, size + 1)
    from_h1 = bits[:, subsample_index(size)]
    obs = np.where(from_h1, cfg.h1.quantile(u[:, :size]), cfg.h0.quantile(u[:, :size]))
    out = np.empty(hi - lo)
    for r in range(hi - lo):
        if cfg.process == "path_mean":
            out[r] = math.fsum(obs[r]) / size
        else:
            pick_h1 = u[r, size] < k[r] / size
            chosen = obs[r][from_h1[r] if pick_h1 else ~from_h1[r]]
            out[r] = math.fsum(chosen) / len(chosen)
    return out


def _chunk_size(cfg: SimulationConfig) -> int:
    if cfg.process != "conditional_mean" and cfg.resolved_sampler == "materialize":
        return max(1, min(DEFAULT_CHUNK, (1 << 22) // (1 << cfg.n)))
    return DEFAULT_CHUNK


def simulate_values(cfg: SimulationConfig, workers: int = 1) -> np.ndarray:
    """Per-replication statistic; replication ``r`` depends only on ``(seed, r)``."""
    step = _chunk_size(cfg)
    bounds = [(lo, min(lo + step, cfg.reps)) for lo in range(0, cfg.reps, step)]
    out = np.empty(cfg.reps)

    def fill(b):
        lo, hi = b
        out[lo:hi] = _chunk_values(cfg, lo, hi)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, bounds))
    else:
        for b in bounds:
            fill(b)
    return out


def summarize(values: np.ndarray, cfg: SimulationConfig) -> SimulationReport:
    # fsum is correctly rounded, so the summary does not depend on how the
    # values were produced or in which order chunks finished
    r = len(values)
    mean = math.fsum(values) / r
    dev = values - mean
    var = math.fsum(dev * dev) / (r - 1) if r > 1 else 0.0
    m2 = math.fsum(dev * dev) / r
    m4 = math.fsum(dev**4) / r
    # Var(s^2) = mu4 / r - sigma^4 (r - 3) / (r (r - 1)), with plug-in central
    # moments; keeps its O(1/r^2) term for two-point laws where mu4 = sigma^4
    se_var = math.sqrt(max(m4 / r - m2 * m2 * (r - 3) / (r * (r - 1)), 0.0)) if r > 1 else 0.0
    eps = cfg.epsilon
    return SimulationReport(
        process=cfg.process,
        n=cfg.n,
        p=float(cfg.p),
        reps=r,
        seed=cfg.seed,
        mean=mean,
        variance=var,
        se_mean=math.sqrt(var / r),
        se_variance=se_var,
        frac_near_zero=int(np.count_nonzero(np.abs(values) <= eps)) / r,
        frac_near_one=int(np.count_nonzero(np.abs(values - 1.0) <= eps)) / r,
        epsilon=float(eps),
    )


def simulate(cfg: SimulationConfig, workers: int = 1) -> SimulationReport:
    return summarize(simulate_values(cfg, workers), cfg)
