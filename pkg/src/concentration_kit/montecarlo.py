"""Reproducible block-wise random streams and binomial confidence intervals."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

BLOCK_SIZE = 65536
CONFIDENCE = 0.99


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by (seed, block index)."""
    if seed is None:
        raise ValueError("an explicit seed is required")
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(sequence))


def block_sizes(trials: int, block_size: int = BLOCK_SIZE) -> list:
    full, rest = divmod(int(trials), block_size)
    return [block_size] * full + ([rest] if rest else [])


def map_blocks(fn: Callable, trials: int, seed: int, block_size: int = BLOCK_SIZE,
               workers: int | None = None) -> list:
    """Evaluate fn(rng, size, block) per block; results are ordered by block index.

    Each block draws from its own stream, so the output does not depend on the
    number of workers.
    """
    sizes = block_sizes(trials, block_size)

    def run(index):
        return fn(block_rng(seed, index), sizes[index], index)

    if workers is None or workers <= 1 or len(sizes) < 2:
        return [run(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))


class Interval(NamedTuple):
    estimate: float
    lower: float
    upper: float


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> Interval:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    p_hat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p_hat + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials)) / denom
    # Rounding can leave the estimate a hair outside at p_hat = 0 or 1.
    lower = min(max(0.0, centre - half), p_hat)
    upper = max(min(1.0, centre + half), p_hat)
    return Interval(p_hat, lower, upper)


def dominates(bound: float, interval: Interval) -> bool:
    """True unless the empirical rate exceeds the bound by more than the CI half-width above it."""
    slack = interval.upper - interval.estimate
    return interval.estimate <= bound + slack
