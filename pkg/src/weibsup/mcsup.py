"""Monte Carlo estimation of expected suprema over finite point sets.

Each draw samples the driving vector, evaluates the exact maximum of the
linear process over the point list, and the estimate is the sample mean.
Sampling is chunked with one substream per chunk and a fixed merge order,
so estimates are bit-identical for any worker count.

Order-statistic probes evaluate P(Y*_k >= u) in closed form: the count of
magnitudes above u is Binomial(n, exp(-u^s)), so the tail is a binomial
survival function.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .core import PointSet, RandomStream
from .laws import abs_weibull, conjugate_exponent, symmetric_weibull

__all__ = [
    "CHUNK_SIZE",
    "NonFiniteSampleError",
    "Driver",
    "SupEstimate",
    "ProbeLevel",
    "ProbeSchedule",
    "ScheduleCheck",
    "LevelCheck",
    "esup_mc",
    "esup_rep_mc",
    "esup_permuted_weighted",
    "rearrange_nonincreasing",
    "order_stat_tail",
    "build_probe_schedule",
    "probe_schedule_check",
]

CHUNK_SIZE = 4096


class NonFiniteSampleError(RuntimeError):
    """A Monte Carlo draw produced a non-finite value."""


_DRIVER_KINDS = ("gaussian", "rademacher", "weibull", "cond_gaussian")


@dataclass(frozen=True)
class Driver:
    """Law of the independent driving vector (X_1, ..., X_n).

    ``cond_gaussian`` samples the rearrangement representation: per draw,
    n magnitudes with tail exp(-t^s) are sorted non-increasingly into Y*,
    and the coefficient of coordinate j is g_j * Y*_{pi^{-1}(j)} for fresh
    Gaussians g and a uniform permutation pi.
    """

    kind: str
    r: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _DRIVER_KINDS:
            raise ValueError(f"unknown driver kind {self.kind!r}")
        if self.kind == "weibull":
            if self.r is None or not 0.0 < self.r <= 2.0:
                raise ValueError("weibull driver needs r in (0, 2]")
        elif self.kind == "cond_gaussian":
            if self.r is None or not 0.0 < self.r < 2.0:
                raise ValueError("cond_gaussian driver needs r in (0, 2)")
        elif self.r is not None:
            raise ValueError(f"{self.kind} driver takes no r parameter")

    @staticmethod
    def gaussian() -> "Driver":
        return Driver("gaussian")

    @staticmethod
    def rademacher() -> "Driver":
        return Driver("rademacher")

    @staticmethod
    def weibull(r: float) -> "Driver":
        return Driver("weibull", r=float(r))

    @staticmethod
    def cond_gaussian(r: float) -> "Driver":
        return Driver("cond_gaussian", r=float(r))

    def coefficients(self, rng: np.random.Generator, count: int, n: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal((count, n))
        if self.kind == "rademacher":
            return rng.integers(0, 2, size=(count, n)).astype(np.float64) * 2.0 - 1.0
        if self.kind == "weibull":
            return symmetric_weibull(rng, self.r, (count, n))
        # cond_gaussian: magnitudes, rearrangement, fresh Gaussians, permutation
        s = conjugate_exponent(self.r)
        mags = abs_weibull(rng, s, (count, n))
        ystar = -np.sort(-mags, axis=1)
        g = rng.standard_normal((count, n))
        perm = rng.permuted(np.tile(np.arange(n), (count, 1)), axis=1)
        inv = np.argsort(perm, axis=1)
        return g * np.take_along_axis(ystar, inv, axis=1)

    def describe(self) -> str:
        return self.kind if self.r is None else f"{self.kind}(r={self.r:g})"


@dataclass(frozen=True)
class SupEstimate:
    """Monte Carlo estimate of an expected supremum."""

    mean: float
    stderr: float
    samples: int
    seed: int


def _chunk_plan(samples: int) -> list[tuple[int, int]]:
    plan = []
    start = 0
    while start < samples:
        size = min(CHUNK_SIZE, samples - start)
        plan.append((start, size))
        start += size
    return plan


def _mc_mean(
    sample_values: Callable[[np.random.Generator, int], np.ndarray],
    samples: int,
    stream: RandomStream,
    workers: int = 1,
) -> tuple[float, float]:
    """Chunked Monte Carlo mean and standard error of the mean.

    Chunk sizes and substreams depend only on ``samples`` and ``stream``,
    and partial sums are merged in chunk order, so the result does not
    depend on ``workers``.
    """
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    plan = _chunk_plan(samples)

    def run_chunk(item: tuple[int, tuple[int, int]]) -> tuple[float, float]:
        idx, (start, size) = item
        rng = stream.child(idx).generator()
        vals = np.asarray(sample_values(rng, size), dtype=np.float64)
        finite = np.isfinite(vals)
        if not finite.all():
            bad = int(np.argmin(finite))
            raise NonFiniteSampleError(f"draw {start + bad} produced a non-finite value")
        return float(vals.sum()), float(np.square(vals).sum())

    items = list(enumerate(plan))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run_chunk, items))
    else:
        partials = [run_chunk(item) for item in items]

    total = math.fsum(p[0] for p in partials)
    total_sq = math.fsum(p[1] for p in partials)
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    return mean, math.sqrt(var / samples)


def esup_mc(
    pset: PointSet,
    driver: Driver,
    samples: int,
    stream: RandomStream,
    workers: int = 1,
) -> SupEstimate:
    """E sup_{t in T} sum_k t_k X_k by Monte Carlo over independent draws."""
    points_t = np.ascontiguousarray(pset.points.T)
    n = pset.dim

    def values(rng: np.random.Generator, count: int) -> np.ndarray:
        coeff = driver.coefficients(rng, count, n)
        return (coeff @ points_t).max(axis=1)

    mean, stderr = _mc_mean(values, samples, stream, workers)
    return SupEstimate(mean=mean, stderr=stderr, samples=samples, seed=stream.seed)


def esup_rep_mc(
    pset: PointSet,
    r: float,
    samples: int,
    stream: RandomStream,
    workers: int = 1,
) -> SupEstimate:
    """Expected supremum of the rearrangement representation for this r."""
    return esup_mc(pset, Driver.cond_gaussian(r), samples, stream, workers)


def esup_permuted_weighted(
    pset: PointSet,
    weights: np.ndarray,
    prefix_len: int,
    samples: int,
    stream: RandomStream,
    workers: int = 1,
) -> SupEstimate:
    """E sup_t sum_{k <= prefix_len} t_{pi(k)} g_{pi(k)} a_k for fixed weights a.

    Draws (g, pi) identically for every prefix length, so estimates at
    different prefixes from the same stream share their randomness.
    """
    a = np.asarray(weights, dtype=np.float64)
    n = pset.dim
    if a.shape != (n,):
        raise ValueError(f"weights must have shape ({n},), got {a.shape}")
    if not 1 <= prefix_len <= n:
        raise ValueError(f"prefix length must lie in [1, {n}], got {prefix_len}")
    masked = np.where(np.arange(n) < prefix_len, a, 0.0)
    points_t = np.ascontiguousarray(pset.points.T)

    def values(rng: np.random.Generator, count: int) -> np.ndarray:
        g = rng.standard_normal((count, n))
        perm = rng.permuted(np.tile(np.arange(n), (count, 1)), axis=1)
        inv = np.argsort(perm, axis=1)
        coeff = g * masked[inv]
        return (coeff @ points_t).max(axis=1)

    mean, stderr = _mc_mean(values, samples, stream, workers)
    return SupEstimate(mean=mean, stderr=stderr, samples=samples, seed=stream.seed)


def rearrange_nonincreasing(values) -> np.ndarray:
    """Absolute values sorted non-increasingly; ties keep first-occurrence order."""
    arr = np.abs(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("expected a nonempty 1-D sequence")
    return -np.sort(-arr, kind="stable")


def order_stat_tail(n: int, s: float, k: int, u: float) -> float:
    """Exact P(Y*_k >= u) when the Y_i have tail exp(-t^s).

    The event is {at least k of n magnitudes exceed u}, a binomial tail
    with success probability q = exp(-u^s).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}")
    if not s > 0.0:
        raise ValueError(f"tail exponent must be positive, got {s}")
    if u < 0.0:
        raise ValueError(f"threshold must be nonnegative, got {u}")
    q = math.exp(-(u**s))
    return float(stats.binom.sf(k - 1, n, q))


@dataclass(frozen=True)
class ProbeLevel:
    j: int
    k: int
    theta: float | None
    u: float


@dataclass(frozen=True)
class ProbeSchedule:
    """Doubly exponential probe levels k_j = ceil(n / 2^(2^j)).

    The level count m satisfies 2^(2^m) < n <= 2^(2^(m+1)).  The lower
    flavor probes u_j = (log(theta_j n / k_j))^(1/s) with theta_j =
    2^(-2^(j-1)) for j = 0..m; the upper flavor probes u_j =
    (log(n / k_j))^(1/s) for j = 0..m+1 with k_{m+1} = 1.
    """

    n: int
    s: float
    flavor: str
    m: int
    levels: tuple[ProbeLevel, ...]


def _level_count(n: int) -> int:
    if n < 3:
        raise ValueError(f"schedules need n >= 3, got {n}")
    m = 0
    while n > 2 ** (2 ** (m + 1)):
        m += 1
    return m


def build_probe_schedule(n: int, s: float, flavor: str) -> ProbeSchedule:
    if flavor not in ("lower", "upper"):
        raise ValueError(f"flavor must be 'lower' or 'upper', got {flavor!r}")
    if not s > 0.0:
        raise ValueError(f"tail exponent must be positive, got {s}")
    if flavor == "lower" and n < 512:
        raise ValueError(f"lower-flavor schedules need n >= 512, got {n}")
    m = _level_count(n)
    levels: list[ProbeLevel] = []
    if flavor == "lower":
        for j in range(m + 1):
            k = -(-n // 2 ** (2**j))
            theta = 2.0 ** -(2.0 ** (j - 1))
            u = math.log(theta * n / k) ** (1.0 / s)
            levels.append(ProbeLevel(j=j, k=k, theta=theta, u=u))
    else:
        for j in range(m + 2):
            k = 1 if j == m + 1 else -(-n // 2 ** (2**j))
            # ceil pins k at 1 once 2^(2^j) >= n, so the appended k_{m+1} = 1
            # level can repeat the previous one; u coincides there, so dropping
            # the repeat keeps k strictly decreasing without losing a check
            if levels and k == levels[-1].k:
                continue
            u = math.log(n / k) ** (1.0 / s)
            levels.append(ProbeLevel(j=j, k=k, theta=None, u=u))
    ks = [lv.k for lv in levels]
    if any(later >= earlier for earlier, later in zip(ks, ks[1:])):
        raise ValueError(f"schedule construction failed: k levels not decreasing for n={n}")
    return ProbeSchedule(n=n, s=s, flavor=flavor, m=m, levels=tuple(levels))


@dataclass(frozen=True)
class LevelCheck:
    j: int
    k: int
    u: float
    probability: float
    bound: float
    ok: bool


@dataclass(frozen=True)
class ScheduleCheck:
    schedule: ProbeSchedule
    tau: float | None
    rows: tuple[LevelCheck, ...]
    z_sum: float | None
    ok: bool


def probe_schedule_check(n: int, s: float, flavor: str, tau: float = 2.0) -> ScheduleCheck:
    """Evaluate the exact order-statistic tails against the schedule bounds.

    Lower flavor: P(Y*_{k_j} >= u_j) >= 1 - z_j for every level, with
    z_j = 1/(sqrt(n)+1) + 2 theta_j n/(sqrt(n)+n) and sum_{j>=3} z_j < 1/2.
    Upper flavor: P(Y*_{k_j} >= tau u_j) <= (k_j/n)^(tau^s - 1) for
    tau >= 2^(1/s).
    """
    schedule = build_probe_schedule(n, s, flavor)
    rows: list[LevelCheck] = []
    if flavor == "lower":
        sqrt_n = math.sqrt(n)
        z_tail = 0.0
        for lv in schedule.levels:
            z = 1.0 / (sqrt_n + 1.0) + 2.0 * lv.theta * n / (sqrt_n + n)
            prob = order_stat_tail(n, s, lv.k, lv.u)
            rows.append(
                LevelCheck(j=lv.j, k=lv.k, u=lv.u, probability=prob, bound=1.0 - z,
                           ok=prob >= 1.0 - z)
            )
            if lv.j >= 3:
                z_tail += z
        ok = all(row.ok for row in rows) and z_tail < 0.5
        return ScheduleCheck(schedule=schedule, tau=None, rows=tuple(rows),
                             z_sum=z_tail, ok=ok)

    threshold = 2.0 ** (1.0 / s)
    if tau < threshold:
        raise ValueError(f"upper-flavor check needs tau >= 2^(1/s) = {threshold:.6g}")
    for lv in schedule.levels:
        prob = order_stat_tail(n, s, lv.k, tau * lv.u)
        bound = (lv.k / n) ** (tau**s - 1.0)
        rows.append(
            LevelCheck(j=lv.j, k=lv.k, u=lv.u, probability=prob, bound=bound,
                       ok=prob <= bound * (1.0 + 1e-12))
        )
    return ScheduleCheck(schedule=schedule, tau=tau, rows=tuple(rows), z_sum=None,
                         ok=all(row.ok for row in rows))
