"""Monte Carlo checks that analytic tail bounds dominate empirical tails.

A scenario is a dict {scenario, params, alphas, trials, seed}. Each one is
sampled exactly (binomial draws stand in for sums of i.i.d. two-point steps),
its empirical exceedance probabilities are wrapped in Wilson 99% intervals,
and every registered bound is compared against them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import ofdm
from .montecarlo import dominates, map_blocks, wilson_interval
from .reports import CheckRecord
from .special_functions import DomainError, binary_divergence
from .tail_bounds import (MartingaleSpec, azuma_bound, gaussian_clt_limit, hoeffding_kearns_saul,
                          mcdiarmid_bound, refined_bound)


def _binomial_draws(n: int, p: float, trials: int, seed: int) -> np.ndarray:
    blocks = map_blocks(lambda rng, size, _i: rng.binomial(n, p, size=size), trials, seed)
    return np.concatenate(blocks)


def _exceedance(values: np.ndarray, thresholds: Sequence[float]) -> list:
    """Counts of values >= each threshold; monotone in the threshold by construction."""
    ordered = np.sort(values)
    return [int(values.size - np.searchsorted(ordered, t, side="left")) for t in thresholds]


def _threshold_tol(x: float) -> float:
    # keeps lattice points that sit exactly on a threshold from being lost to rounding
    return x - 1e-9 * max(1.0, abs(x))


@dataclass
class TailTable:
    """Empirical tails on an alpha grid with the matching analytic bounds."""

    scenario: str
    alphas: list
    counts: list
    trials: int
    bounds: dict = field(default_factory=dict)  # bound name -> list over alphas
    exact: list | None = None

    def intervals(self):
        return [wilson_interval(c, self.trials) for c in self.counts]

    def rows(self) -> list:
        out = []
        for i, (alpha, ci) in enumerate(zip(self.alphas, self.intervals())):
            row = {"alpha": alpha, "empirical": ci.estimate, "ci_lower": ci.lower, "ci_upper": ci.upper}
            if self.exact is not None:
                row["exact"] = self.exact[i]
            for name, values in self.bounds.items():
                row[name] = values[i]
            out.append(row)
        return out


def simulate_bernoulli_martingale(n: int, d: float, eps: float, trials: int, seed: int,
                                  x_grid: Sequence[float] = (0.05, 0.1, 0.2, 0.3, 0.5)) -> TailTable:
    """Upper tail P(X_n >= n x) of the martingale with steps +d (prob eps) and -eps d/(1-eps)."""
    if not 0.0 < eps <= 0.5:
        raise DomainError("eps must lie in (0, 1/2]")
    if d <= 0:
        raise DomainError("d must be positive")
    ups = _binomial_draws(n, eps, trials, seed)
    values = d * (ups - eps * n) / (1.0 - eps)
    xs = sorted(float(x) for x in x_grid)
    counts = _exceedance(values, [_threshold_tol(n * x) for x in xs])
    spec = MartingaleSpec(n, d, d * d * eps / (1.0 - eps))
    # X_n >= n x  <=>  ups >= eps n + n x (1 - eps) / d
    exact = [float(stats.binom.sf(math.ceil(_threshold_tol(eps * n + n * x * (1 - eps) / d)) - 1, n, eps))
             for x in xs]
    return TailTable(
        "epsilon_martingale", xs, counts, trials,
        {"azuma": [azuma_bound(n * x, [d] * n) / 2.0 for x in xs],
         "refined": [refined_bound(spec, x, "upper_tail") for x in xs],
         "refined_divergence_form": [
             math.exp(-n * binary_divergence(min(1.0, x * (1 - eps) / d + eps), eps)) for x in xs]},
        exact)


def _two_point_martingale(n: int, d: float, gamma: float, alphas, trials, seed, name) -> TailTable:
    """Two-sided P(|X_n| >= alpha sqrt(n)) for steps +d w.p. gamma/(1+gamma), -gamma d otherwise."""
    p_up = gamma / (1.0 + gamma)
    ups = _binomial_draws(n, p_up, trials, seed)
    values = np.abs(d * ups - gamma * d * (n - ups))
    alphas = sorted(float(a) for a in alphas)
    counts = _exceedance(values, [_threshold_tol(a * math.sqrt(n)) for a in alphas])
    spec = MartingaleSpec(n, d, gamma * d * d)
    # exact law of |X_n| through the binomial pmf
    k = np.arange(n + 1)
    pmf = stats.binom.pmf(k, n, p_up)
    lattice = np.abs(d * k - gamma * d * (n - k))
    exact = [float(pmf[lattice >= _threshold_tol(a * math.sqrt(n))].sum()) for a in alphas]
    return TailTable(
        name, alphas, counts, trials,
        {"azuma": [azuma_bound(a * math.sqrt(n), [d] * n) for a in alphas],
         "refined": [refined_bound(spec, a / math.sqrt(n)) for a in alphas],
         "clt_limit": [gaussian_clt_limit(a, d, gamma) for a in alphas]},
        exact)


def simulate_example_symmetric(n: int, d: float, alphas, trials: int, seed: int) -> TailTable:
    """Steps +-d with equal probability."""
    return _two_point_martingale(n, d, 1.0, alphas, trials, seed, "martingale_symmetric")


def simulate_example_asymmetric(n: int, d: float, gamma: float, alphas, trials: int, seed: int) -> TailTable:
    """Steps +d and -gamma d with zero mean, so the variance is gamma d^2."""
    if not 0.0 < gamma <= 1.0:
        raise DomainError("gamma must lie in (0, 1]")
    return _two_point_martingale(n, d, gamma, alphas, trials, seed, "martingale_asymmetric")


def simulate_kearns_saul(n: int, p: float, alphas, trials: int, seed: int) -> TailTable:
    """Sum of n Bernoulli(p) terms on [0, 1]; deviation r = alpha sqrt(n) around the mean."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    sums = _binomial_draws(n, p, trials, seed)
    devs = np.abs(sums - n * p)
    alphas = sorted(float(a) for a in alphas)
    radii = [a * math.sqrt(n) for a in alphas]
    counts = _exceedance(devs, [_threshold_tol(r) for r in radii])
    k = np.arange(n + 1)
    pmf = stats.binom.pmf(k, n, p)
    exact = [float(pmf[np.abs(k - n * p) >= _threshold_tol(r)].sum()) for r in radii]
    pairs = [hoeffding_kearns_saul(r, [(0.0, 1.0, p)] * n) for r in radii]
    return TailTable("kearns_saul", alphas, counts, trials,
                     {"hoeffding": [pr.hoeffding for pr in pairs],
                      "kearns_saul": [pr.kearns_saul for pr in pairs]}, exact)


def mcdiarmid_hamming(n: int, p: float, alphas) -> TailTable:
    """Normalized Hamming weight of n Bernoulli(p) bits: exact tail against McDiarmid."""
    alphas = sorted(float(a) for a in alphas)
    k = np.arange(n + 1)
    pmf = stats.binom.pmf(k, n, p)
    exact = [float(pmf[np.abs(k / n - p) >= _threshold_tol(r)].sum()) for r in alphas]
    return TailTable("mcdiarmid_hamming", alphas, [0] * len(alphas), 1,
                     {"mcdiarmid": [mcdiarmid_bound(r, [1.0 / n] * n) for r in alphas]}, exact)


def simulate_degenerate(n: int, alphas, trials: int, seed: int) -> TailTable:
    """Zero-jump martingale: X_n = X_0 always."""
    alphas = sorted(float(a) for a in alphas)
    values = np.zeros(trials)
    counts = _exceedance(values, alphas)
    return TailTable("degenerate", alphas, counts, trials,
                     {"azuma": [azuma_bound(a, [0.0] * n) for a in alphas]}, None)


# ---------------------------------------------------------------------------
# Dominance suite


def _records_from_table(table: TailTable, skip: Sequence[str] = ("clt_limit",),
                        use_exact: bool = False) -> list:
    records = []
    intervals = table.intervals()
    for i, alpha in enumerate(table.alphas):
        ci = intervals[i]
        for name, values in table.bounds.items():
            if name in skip:
                continue
            bound = values[i]
            instance = {"scenario": table.scenario, "alpha": alpha, "bound": name}
            if use_exact:
                lhs, ok = table.exact[i], table.exact[i] <= bound * (1 + 1e-12)
                detail = {"kind": "exact"}
            else:
                lhs, ok = ci.estimate, dominates(bound, ci)
                detail = {"ci_lower": ci.lower, "ci_upper": ci.upper, "trials": table.trials}
            records.append(CheckRecord(f"{table.scenario}:{name}", instance, lhs, bound,
                                       bound - lhs, ok, detail))
    return records


def _ofdm_records(params: dict, alphas, trials: int, seed: int, workers) -> list:
    spec = ofdm.OfdmSpec(int(params.get("n", 64)), int(params.get("M", 4)),
                         int(params.get("oversample", ofdm.DEFAULT_OVERSAMPLE)), trials, seed)
    samples = ofdm.sample_crest_factors(spec, workers)
    rows = ofdm.tail_rows(samples, spec.n, alphas)
    records = []
    for row in rows:
        for name in ofdm.BOUND_CENTRES:
            item = row[name]
            records.append(CheckRecord(
                f"ofdm_crest_factor:{name}", {"scenario": "ofdm", "n": spec.n, "alpha": row["alpha"], "bound": name},
                item["empirical"], item["bound"], item["bound"] - item["empirical"], item["dominates"],
                {"ci_lower": item["ci_lower"], "ci_upper": item["ci_upper"], "trials": trials}))
    mean, median = float(np.mean(samples)), float(np.median(samples))
    records.append(CheckRecord.inequality("ofdm_mean_median_gap", {"n": spec.n},
                                          abs(mean - median), ofdm.MEAN_MEDIAN_GAP))
    return records


SCENARIOS: dict[str, Callable] = {}


def _scenario(name):
    def register(fn):
        SCENARIOS[name] = fn
        return fn
    return register


@_scenario("martingale_symmetric")
def _run_symmetric(params, alphas, trials, seed, workers):
    table = simulate_example_symmetric(int(params.get("n", 100)), float(params.get("d", 1.0)),
                                       alphas, trials, seed)
    return _records_from_table(table)


@_scenario("martingale_asymmetric")
def _run_asymmetric(params, alphas, trials, seed, workers):
    table = simulate_example_asymmetric(int(params.get("n", 100)), float(params.get("d", 1.0)),
                                        float(params.get("gamma", 0.25)), alphas, trials, seed)
    return _records_from_table(table)


@_scenario("epsilon_martingale")
def _run_epsilon(params, alphas, trials, seed, workers):
    table = simulate_bernoulli_martingale(int(params.get("n", 100)), float(params.get("d", 1.0)),
                                          float(params.get("eps", 0.1)), trials, seed, alphas)
    return _records_from_table(table)


@_scenario("kearns_saul")
def _run_kearns_saul(params, alphas, trials, seed, workers):
    table = simulate_kearns_saul(int(params.get("n", 100)), float(params.get("p", 0.1)),
                                 alphas, trials, seed)
    records = _records_from_table(table)
    for i, alpha in enumerate(table.alphas):
        ks, hoeff = table.bounds["kearns_saul"][i], table.bounds["hoeffding"][i]
        records.append(CheckRecord.inequality("kearns_saul_beats_hoeffding",
                                              {"alpha": alpha}, ks, hoeff, tol=1e-12))
    return records


@_scenario("mcdiarmid_hamming")
def _run_mcdiarmid(params, alphas, trials, seed, workers):
    table = mcdiarmid_hamming(int(params.get("n", 100)), float(params.get("p", 0.5)), alphas)
    return _records_from_table(table, use_exact=True)


@_scenario("degenerate")
def _run_degenerate(params, alphas, trials, seed, workers):
    table = simulate_degenerate(int(params.get("n", 10)), alphas, trials, seed)
    records = _records_from_table(table)
    for alpha, count in zip(table.alphas, table.counts):
        if alpha > 0:
            records.append(CheckRecord.equality("degenerate_zero_tail", {"alpha": alpha}, count, 0, tol=0))
    return records


@_scenario("ofdm")
def _run_ofdm(params, alphas, trials, seed, workers):
    return _ofdm_records(params, alphas, trials, seed, workers)


@dataclass
class DominanceReport:
    records: list

    @property
    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"passed": self.passed, "total": len(self.records),
                "failures": [r.to_dict() for r in self.failures],
                "records": [r.to_dict() for r in self.records]}


def validate_scenario(config: dict) -> dict:
    required = {"scenario", "alphas", "trials", "seed"}
    missing = required - set(config)
    if missing:
        raise DomainError(f"scenario config missing {sorted(missing)}")
    if config["scenario"] not in SCENARIOS:
        raise DomainError(f"unknown scenario {config['scenario']!r}; known: {sorted(SCENARIOS)}")
    if int(config["trials"]) < 1:
        raise DomainError("trials must be positive")
    return {"scenario": config["scenario"], "params": dict(config.get("params", {})),
            "alphas": [float(a) for a in config["alphas"]], "trials": int(config["trials"]),
            "seed": int(config["seed"])}


def load_scenarios(text: str) -> list:
    data = json.loads(text)
    items = data if isinstance(data, list) else [data]
    return [validate_scenario(item) for item in items]


def bound_dominance_suite(configs: Sequence[dict], workers: int | None = None) -> DominanceReport:
    """Run every scenario and collect one record per (scenario, alpha, bound)."""
    records = []
    for raw in configs:
        cfg = validate_scenario(raw)
        records.extend(SCENARIOS[cfg["scenario"]](cfg["params"], cfg["alphas"], cfg["trials"],
                                                  cfg["seed"], workers))
    return DominanceReport(records)


def default_scenarios(trials: int = 1_000_000, seed: int = 2024) -> list:
    """Scenario set used by the acceptance run."""
    grid = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    return [
        {"scenario": "martingale_symmetric", "params": {"n": 100, "d": 1.0}, "alphas": grid,
         "trials": trials, "seed": seed},
        {"scenario": "martingale_asymmetric", "params": {"n": 100, "d": 1.0, "gamma": 0.25},
         "alphas": grid, "trials": trials, "seed": seed + 1},
        {"scenario": "epsilon_martingale", "params": {"n": 100, "d": 1.0, "eps": 0.1},
         "alphas": [0.02, 0.05, 0.1, 0.2, 0.3], "trials": trials, "seed": seed + 2},
        {"scenario": "kearns_saul", "params": {"n": 100, "p": 0.1}, "alphas": grid,
         "trials": trials, "seed": seed + 3},
        {"scenario": "mcdiarmid_hamming", "params": {"n": 100, "p": 0.5},
         "alphas": [0.0, 0.05, 0.1, 0.15, 0.2], "trials": 1, "seed": seed + 4},
        {"scenario": "degenerate", "params": {"n": 10}, "alphas": [0.0, 0.5, 1.0],
         "trials": 1000, "seed": seed + 5},
        {"scenario": "ofdm", "params": {"n": 64, "M": 4}, "alphas": [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0],
         "trials": trials, "seed": seed + 6},
        {"scenario": "ofdm", "params": {"n": 256, "M": 4}, "alphas": [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0],
         "trials": trials, "seed": seed + 7},
    ]
