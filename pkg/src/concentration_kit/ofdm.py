"""Crest factor of M-PSK OFDM symbols and its concentration bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import fft as sfft

from .montecarlo import dominates, map_blocks, wilson_interval
from .special_functions import DomainError
from .tail_bounds import MartingaleSpec, small_deviation_bound

DEFAULT_OVERSAMPLE = 16
MODULUS_TOL = 1e-9
MEAN_MEDIAN_GAP = 8.0 * math.sqrt(math.pi)
FFT_CHUNK = 2048


@dataclass(frozen=True)
class OfdmSpec:
    n: int
    M: int = 4
    oversample: int = DEFAULT_OVERSAMPLE
    trials: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("need at least one subcarrier")
        if self.M < 2:
            raise DomainError("PSK order must be at least 2")
        if self.oversample < 4:
            raise DomainError("oversampling factor must be at least 4")
        if self.trials < 1:
            raise DomainError("trials must be positive")


def psk_points(M: int) -> np.ndarray:
    """Unit-modulus constellation at angles (2l+1) pi / M."""
    return np.exp(1j * (2 * np.arange(M) + 1) * math.pi / M)


def _check_unit(x: np.ndarray):
    if np.any(np.abs(np.abs(x) - 1.0) > MODULUS_TOL):
        raise DomainError("OFDM symbols must have unit modulus")


def time_samples(x, oversample: int = DEFAULT_OVERSAMPLE, dtype=np.complex128) -> np.ndarray:
    """s(t) = n^{-1/2} sum_i x_i exp(j 2 pi i t / T) on oversample * n equally spaced points.

    Works along the last axis, so a batch of symbols may be passed as a 2-D array.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    size = oversample * n
    return sfft.ifft(x.astype(dtype), n=size, axis=-1, workers=-1) * (size / math.sqrt(n))


def crest_factor(x: Sequence[complex], oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """max_t |s(t)| over the oversampled grid.

    A grid maximum never exceeds the continuous-time maximum, so this slightly
    under-estimates the true crest factor.
    """
    if oversample < 1:
        raise DomainError("oversample must be positive")
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("expected a non-empty 1-D symbol vector")
    _check_unit(x)
    return float(np.abs(time_samples(x, oversample)).max())


def grid_power(x: Sequence[complex], oversample: int = DEFAULT_OVERSAMPLE) -> float:
    """Mean of |s(t)|^2 over the grid; equals 1 for unit-modulus symbols."""
    s = time_samples(np.asarray(x, dtype=complex), oversample)
    return float(np.mean(np.abs(s) ** 2))


def crest_factors(symbols: np.ndarray, oversample: int = DEFAULT_OVERSAMPLE,
                  dtype=np.complex64) -> np.ndarray:
    """Crest factor of every row of a (trials, n) symbol array."""
    out = np.empty(symbols.shape[0])
    for start in range(0, symbols.shape[0], FFT_CHUNK):
        block = time_samples(symbols[start:start + FFT_CHUNK], oversample, dtype)
        out[start:start + FFT_CHUNK] = np.abs(block).max(axis=-1)
    return out


class CfBounds(NamedTuple):
    azuma: float
    refined: float
    talagrand_median: float
    mcdiarmid: float


def cf_bounds(n: int, alpha: float) -> CfBounds:
    """Bounds on P(|CF - E CF| >= alpha) (median-centred for the Talagrand entry)."""
    if n < 1:
        raise DomainError("n must be positive")
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    # sqrt(n) * CF has martingale jumps <= 2 and conditional variance <= 2
    refined = small_deviation_bound(MartingaleSpec(n, 2.0, 2.0), alpha).bound
    return CfBounds(
        2.0 * math.exp(-alpha * alpha / 8.0),
        refined,
        4.0 * math.exp(-alpha * alpha / 16.0),
        2.0 * math.exp(-alpha * alpha / 2.0),
    )


def sample_crest_factors(spec: OfdmSpec, workers: int | None = None) -> np.ndarray:
    """Crest factors of `spec.trials` i.i.d. uniform M-PSK symbols, reproducible from the seed."""
    points = psk_points(spec.M).astype(np.complex64)

    def block(rng, size, _index):
        symbols = points[rng.integers(0, spec.M, size=(size, spec.n))]
        return crest_factors(symbols, spec.oversample)

    return np.concatenate(map_blocks(block, spec.trials, spec.seed, workers=workers))


BOUND_CENTRES = {"azuma": "mean", "refined": "mean", "talagrand_median": "median", "mcdiarmid": "mean"}


def tail_rows(samples: np.ndarray, n: int, alphas: Sequence[float]) -> list:
    """Per-alpha empirical two-sided exceedance with Wilson intervals, next to each bound."""
    mean = float(np.mean(samples))
    median = float(np.median(samples))
    dev_mean = np.sort(np.abs(samples - mean))
    dev_median = np.sort(np.abs(samples - median))
    trials = samples.size
    rows = []
    for alpha in sorted(float(a) for a in alphas):
        bounds = cf_bounds(n, alpha)._asdict()
        row = {"alpha": alpha}
        for name, value in bounds.items():
            devs = dev_median if BOUND_CENTRES[name] == "median" else dev_mean
            count = trials - int(np.searchsorted(devs, alpha, side="left"))
            interval = wilson_interval(count, trials)
            row[name] = {"bound": value, "empirical": interval.estimate,
                         "ci_lower": interval.lower, "ci_upper": interval.upper,
                         "dominates": dominates(value, interval)}
        rows.append(row)
    return rows


def cf_monte_carlo(spec: OfdmSpec, alphas: Sequence[float] = tuple(np.arange(0.0, 6.01, 0.25)),
                   workers: int | None = None) -> dict:
    """Empirical crest-factor distribution and tail comparison against the four bounds."""
    samples = sample_crest_factors(spec, workers)
    mean = float(np.mean(samples))
    median = float(np.median(samples))
    grid = np.quantile(samples, [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99])
    rows = tail_rows(samples, spec.n, alphas)
    return {
        "n": spec.n, "M": spec.M, "oversample": spec.oversample,
        "trials": spec.trials, "seed": spec.seed,
        "mean": mean, "median": median, "std": float(np.std(samples)),
        "sqrt_log_n": math.sqrt(math.log(spec.n)) if spec.n > 1 else 0.0,
        "quantiles": dict(zip(["q01", "q10", "q25", "q50", "q75", "q90", "q99"], grid.tolist())),
        "mean_median_gap": abs(mean - median),
        "mean_median_gap_bound": MEAN_MEDIAN_GAP,
        "median_centre": "sample median",
        "tails": rows,
        "all_dominate": all(r[k]["dominates"] for r in rows for k in BOUND_CENTRES),
    }


class MartingaleStepCheck(NamedTuple):
    max_increment: float
    increment_bound: float
    conditional_variance: float
    variance_bound: float
    relative_error: float

    @property
    def increment_ok(self) -> bool:
        return self.max_increment <= self.increment_bound * (1.0 + 1e-12)

    @property
    def variance_ok(self) -> bool:
        return self.conditional_variance <= self.variance_bound * (1.0 + 3.0 * self.relative_error)


def martingale_step_check(n: int, M: int = 4, seed: int = 0, realizations: int = 4,
                          positions: int = 8, inner: int = 512, batches: int = 16,
                          oversample: int = DEFAULT_OVERSAMPLE) -> MartingaleStepCheck:
    """Nested Monte Carlo estimate of the Doob martingale of the crest factor.

    For a revealed prefix X_1..X_{i-1}, every candidate X_i is combined with
    the same `inner` random suffixes (common random numbers), so differences
    between candidates are exact sample-wise and the estimated increments
    respect the 2/sqrt(n) bound deterministically. The conditional variance
    over X_i is compared with 2/n, with a batch-means relative standard error.
    """
    if inner % batches:
        raise DomainError("inner sample count must be a multiple of batches")
    points = psk_points(M)
    max_inc = 0.0
    worst_var, worst_rel = -1.0, 0.0
    counter = 0
    for r in range(realizations):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(r,))))
        base = points[rng.integers(0, M, size=n)]
        for i in rng.choice(n, size=min(positions, n), replace=False):
            counter += 1
            suffix = points[rng.integers(0, M, size=(inner, n - i - 1))]
            values = np.empty((M, inner))
            for c, point in enumerate(points):
                batch = np.empty((inner, n), dtype=complex)
                batch[:, :i] = base[:i]
                batch[:, i] = point
                batch[:, i + 1:] = suffix
                values[c] = crest_factors(batch, oversample, np.complex128)
            per_candidate = values.mean(axis=1)
            steps = per_candidate - per_candidate.mean()
            max_inc = max(max_inc, float(np.abs(steps).max()))
            variance = float(np.mean(steps ** 2))
            groups = values.reshape(M, batches, -1).mean(axis=2)
            group_var = np.mean((groups - groups.mean(axis=0)) ** 2, axis=0)
            rel = float(np.std(group_var, ddof=1) / math.sqrt(batches) / variance) if variance > 0 else 0.0
            if variance > worst_var:
                worst_var, worst_rel = variance, rel
    return MartingaleStepCheck(max_inc, 2.0 / math.sqrt(n), worst_var, 2.0 / n, worst_rel)
