"""End-to-end acceptance checks shared by the test suite and `verify-all`."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate

from . import channel_rates as cr
from . import coding_apps as ca
from . import entropy_method_lab as eml
from . import info_measures as im
from . import ofdm
from . import simulation_harness as sh
from . import tail_bounds as tb
from . import transport_concentration as tc
from .special_functions import ow_phi


@dataclass
class SubResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class CriterionResult:
    number: int
    name: str
    checks: list
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] criterion {self.number:2d} {self.name} ({self.seconds:.1f}s)"
        if not self.passed:
            text += " failing: " + ", ".join(self.failing())
        return text

    def to_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "pass": self.passed,
                "seconds": self.seconds,
                "checks": [{"name": c.name, "pass": c.passed, **c.detail} for c in self.checks]}


def _close(name, value, target, tol, **extra) -> SubResult:
    return SubResult(name, abs(value - target) <= tol,
                     {"value": value, "target": target, "tolerance": tol, **extra})


# 1 -------------------------------------------------------------------------

def bec_threshold_check() -> list:
    dd = ca.DegreeDistribution.regular(2, 20)
    start = time.perf_counter()
    result = ca.bec_bp_threshold(dd)
    elapsed = time.perf_counter() - start
    return [
        _close("bp_threshold", result.p_bp, 0.0531, 1e-4),
        _close("capacity", result.capacity, 0.9469, 1e-4),
        SubResult("runtime_below_1s", elapsed < 1.0, {"seconds": elapsed}),
    ]


# 2 -------------------------------------------------------------------------

def cond_entropy_check() -> list:
    dd = ca.DegreeDistribution.regular(2, 20)
    mbios = ca.cond_entropy_concentration(dd, 0.98, "MBIOS")
    bec = ca.cond_entropy_concentration(dd, 0.98, "BEC")
    return [
        _close("factor_mbios", mbios.factor, 5.134, 1e-3),
        _close("factor_bec", bec.factor, 9.051, 1e-3),
        _close("original_exponent", mbios.B_orig, 0.0113, 1e-4),
        _close("tightened_exponent_mbios", mbios.B_tight, 0.0580, 1e-4),
        _close("tightened_exponent_bec", bec.B_tight, 0.1023, 1e-4),
    ]


# 3 -------------------------------------------------------------------------

def biawgn_mutual_information(snr: float) -> float:
    """Independent reference: ln 2 - E ln(1 + e^{-L}) with L ~ N(2 snr, 4 snr)."""
    if snr == 0:
        return 0.0
    mean, sd = 2.0 * snr, 2.0 * math.sqrt(snr)

    def integrand(llr):
        return math.exp(-0.5 * ((llr - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi)) * np.logaddexp(0.0, -llr)

    value, _ = integrate.quad(integrand, mean - 40 * sd, mean + 40 * sd, epsabs=1e-14, epsrel=1e-13, limit=400)
    return math.log(2.0) - value


def biawgn_equivalence_check() -> list:
    checks = []
    snrs = np.logspace(-2, 2, 41)
    worst_r1 = worst_r2 = 0.0
    monotone = True
    for snr in snrs:
        target = cr.biawgn_rate(snr)
        params = cr.volterra_martingale_params(cr.memoryless_kernel(), math.sqrt(snr), 0.5, 64)
        r1 = cr.bennett_rate_closed_form(params, 1.0).value
        r2_by_m = [cr.achievable_rates(params, 1.0, m).R2 for m in range(2, 65, 2)]
        worst_r1 = max(worst_r1, abs(r1 - target))
        worst_r2 = max(worst_r2, abs(r2_by_m[-1] - target))
        monotone &= all(b >= a - 1e-12 for a, b in zip(r2_by_m, r2_by_m[1:]))
    checks.append(SubResult("R1_matches_closed_form", worst_r1 <= 1e-6, {"max_error": worst_r1}))
    checks.append(SubResult("R2_m64_matches_closed_form", worst_r2 <= 1e-6, {"max_error": worst_r2}))
    checks.append(SubResult("R2_nondecreasing_in_m", monotone))
    params = cr.volterra_martingale_params(cr.memoryless_kernel(), 100.0, 0.5, 64)
    rates = cr.achievable_rates(params, 1.0, 64)
    checks.append(_close("R1_high_snr", rates.R1, math.log(2), 1e-4))
    checks.append(_close("R2_high_snr", rates.R2, math.log(2), 1e-4))
    ratios, bounded = [], True
    for snr in (0.1, 1.0, 3.0, 10.0):
        reference = biawgn_mutual_information(snr)
        for n in (5, 10, 20, 40, 80):
            partial = cr.biawgn_capacity(snr, n)
            doubled = cr.biawgn_capacity(snr, 2 * n)
            rem, rem2 = abs(partial.value - reference), abs(doubled.value - reference)
            bounded &= rem <= partial.remainder_bound
            ratios.append(rem / rem2)
    in_band = all(4.0 <= r <= 16.0 for r in ratios)
    checks.append(SubResult("remainder_within_next_term", bool(bounded)))
    checks.append(SubResult("remainder_decays_like_inverse_cube", in_band,
                            {"min_ratio": min(ratios), "max_ratio": max(ratios), "target": 8.0}))
    return checks


# 4 -------------------------------------------------------------------------

def pinsker_check(pairs: int = 10_000, seed: int = 4) -> list:
    rng = np.random.default_rng(seed)
    tv_ok = ow_le = strict_ok = ow_valid = True
    for _ in range(pairs):
        k = int(rng.integers(2, 9))
        P = rng.dirichlet(np.full(k, 0.7))
        Q = rng.dirichlet(np.full(k, 0.7))
        rep = im.pinsker_suite(P, Q)
        tv_ok &= rep.tv <= rep.pinsker_rhs + 1e-12
        ow_le &= rep.ow_rhs <= rep.pinsker_rhs + 1e-15
        ow_valid &= rep.tv <= rep.ow_rhs + 1e-12
        if rep.balance < 0.5 - 1e-6 and rep.pinsker_rhs > 0:
            strict_ok &= rep.ow_rhs < rep.pinsker_rhs
    return [
        SubResult("tv_below_pinsker", bool(tv_ok)),
        SubResult("refined_below_pinsker", bool(ow_le)),
        SubResult("refined_strict_when_unbalanced", bool(strict_ok)),
        SubResult("tv_below_refined", bool(ow_valid)),
        SubResult("phi_at_half_is_two", ow_phi(0.5) == 2.0, {"value": ow_phi(0.5)}),
    ]


# 5 -------------------------------------------------------------------------

def _random_degree_distribution(rng) -> ca.DegreeDistribution:
    def profile(low, high):
        degrees = rng.choice(np.arange(low, high), size=int(rng.integers(1, 4)), replace=False)
        weights = [int(w) for w in rng.integers(1, 20, size=len(degrees))]
        total = sum(weights)
        return {int(d): Fraction(w, total) for d, w in zip(degrees, weights)}
    return ca.DegreeDistribution(profile(2, 8), profile(3, 25))


def identity_suite_check(instances: int = 100, seed: int = 5) -> list:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst = {"herbst": 0.0, "maurer": 0.0, "lmgf_derivative": 0.0, "degree": 0.0}
    for _ in range(instances):
        k = int(rng.integers(2, 7))
        fam = eml.TiltedFamily(rng.dirichlet(np.ones(k)), rng.uniform(-2, 2, size=k))
        lam = float(rng.uniform(0.1, 3.0))
        worst["herbst"] = max(worst["herbst"], eml.herbst_identity_check(fam, lam).gap)
        worst["maurer"] = max(worst["maurer"], eml.maurer_identity_check(fam, lam).gap)
        worst["lmgf_derivative"] = max(worst["lmgf_derivative"], eml.lmgf_derivative_check(fam, lam))
        worst["degree"] = max(worst["degree"], ca.degree_stats(_random_degree_distribution(rng)).identity_gap)
    elapsed = time.perf_counter() - start
    checks = [SubResult(f"{name}_identity", gap <= 1e-6, {"max_gap": gap}) for name, gap in worst.items()]
    checks.append(SubResult("runtime_below_30s", elapsed < 30.0, {"seconds": elapsed}))
    return checks


# 6 -------------------------------------------------------------------------

def _violates(ineq_lhs, ineq_rhs) -> bool:
    return ineq_lhs > ineq_rhs + 1e-12 * max(1.0, abs(ineq_rhs))


def lsi_suite_check(functions: int = 500, seed: int = 6) -> list:
    rng = np.random.default_rng(seed)
    counts = {"hamming_cube": 0, "bernoulli_cube": 0, "compound_poisson": 0}
    for lam in (0.5, 1.0, 2.0):
        counts[f"poisson_{lam:g}"] = 0
    worst_slack = 0.0
    compound = im.FiniteDistribution((1, 2, 3), np.array([0.5, 0.3, 0.2]))
    for _ in range(functions):
        n = int(rng.integers(1, 9))
        f = rng.uniform(-2.0, 2.0, size=2 ** n)
        res = eml.discrete_lsi_check(n, 0.5, f)
        counts["hamming_cube"] += _violates(res.lhs, res.rhs)
        p = float(rng.uniform(0.05, 0.95))
        res = eml.discrete_lsi_check(n, p, f)
        counts["bernoulli_cube"] += _violates(res.lhs, res.rhs)
        for lam in (0.5, 1.0, 2.0):
            g = rng.uniform(-1.5, 1.5, size=41)
            res = eml.poisson_lsi_check(lam, g, 40)
            worst_slack = max(worst_slack, res.truncation_slack)
            counts[f"poisson_{lam:g}"] += _violates(res.lhs, res.rhs)
        g = rng.uniform(-1.5, 1.5, size=81)
        res = eml.poisson_lsi_check(1.0, g, 80, compound=compound)
        worst_slack = max(worst_slack, res.truncation_slack)
        counts["compound_poisson"] += _violates(res.lhs, res.rhs)
    checks = [SubResult(f"{name}_no_violations", c == 0, {"violations": c}) for name, c in counts.items()]
    checks.append(SubResult("truncation_slack_below_1e-8", worst_slack < 1e-8, {"max_slack": worst_slack}))
    return checks


# 7 -------------------------------------------------------------------------

def transport_check(pairs: int = 1000, sets: int = 200, seed: int = 7) -> list:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        k = int(rng.integers(2, 11))
        P, Q = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
        space = im.FiniteMetricSpace.hamming(k)
        w1 = im.wasserstein_p(P, Q, space).value
        worst = max(worst, abs(w1 - im.total_variation(P, Q)))
    violations = 0
    for _ in range(sets):
        n = int(rng.integers(2, 13))
        p = float(rng.uniform(0.05, 0.95))
        members = rng.choice(2 ** n, size=int(rng.integers(1, min(2 ** n, 40) + 1)), replace=False)
        spec = tc.BlowupSpec.bernoulli(n, p, members)
        profile = tc.blowup_profile(spec)
        mass = float(profile[0])
        for r in range(n + 1):
            if profile[r] < tc.blowup_bound(mass, n, r).value - 1e-12:
                violations += 1
    return [SubResult("w1_equals_tv", worst <= 1e-9, {"max_error": worst}),
            SubResult("blowup_bound_holds", violations == 0, {"violations": violations})]


# 8 -------------------------------------------------------------------------

def concentration_exponent_check(points: int = 50) -> list:
    worst = -math.inf
    for p in np.linspace(0.01, 0.5, points):
        for delta in np.linspace(0.0, 1.0, points):
            res = tc.concentration_exponent_bernoulli(float(delta), float(p))
            worst = max(worst, res.brute - res.upper)
    worst_tail = 0.0
    for p in np.linspace(0.01, 0.5, points):
        res = tc.concentration_exponent_bernoulli(1.0 - float(p), float(p))
        worst_tail = max(worst_tail, abs(res.brute - math.log(p)))
    return [SubResult("brute_below_upper_bound", worst <= 1e-9, {"max_excess": worst}),
            SubResult("value_at_one_minus_p", worst_tail <= 1e-4, {"max_error": worst_tail})]


# 9 -------------------------------------------------------------------------

def monte_carlo_check(trials: int = 1_000_000, seed: int = 2024) -> list:
    start = time.perf_counter()
    report = sh.bound_dominance_suite(sh.default_scenarios(trials, seed))
    checks = [SubResult("bounds_dominate_empirical_tails", report.passed,
                        {"records": len(report.records),
                         "failures": [r.check for r in report.failures][:10]})]
    for n in (64, 256):
        step = ofdm.martingale_step_check(n, seed=seed + n)
        checks.append(SubResult(f"ofdm_increment_bound_n{n}", step.increment_ok,
                                {"max_increment": step.max_increment, "bound": step.increment_bound}))
        checks.append(SubResult(f"ofdm_conditional_variance_n{n}", step.variance_ok,
                                {"estimate": step.conditional_variance, "bound": step.variance_bound,
                                 "relative_error": step.relative_error}))
    elapsed = time.perf_counter() - start
    checks.append(SubResult("runtime_below_5min", elapsed < 300.0, {"seconds": elapsed}))
    return checks


# 10 ------------------------------------------------------------------------

def figure_property_check() -> list:
    from .cli import bounds_compare_rows, BOUNDS_COMPARE_COLUMNS

    rows = bounds_compare_rows([0.125, 0.25, 0.5], 200)
    schema_ok = all(set(r) == set(BOUNDS_COMPARE_COLUMNS) for r in rows)
    monotone = True
    for delta in np.linspace(0.0, 1.0, 201):
        exps = [tb.refined_exponent(g, float(delta)) for g in (0.125, 0.25, 0.5, 1.0)]
        monotone &= all(a >= b - 1e-15 for a, b in zip(exps, exps[1:]))
    kernel = cr.table_kernel()
    non_negative = decreasing = True
    for amplitude in (0.25, 0.5, 1.0, 1.5, 2.0):
        params = cr.volterra_martingale_params(kernel, amplitude, 0.5, 2)
        previous = None
        for noise in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0):
            rates = cr.achievable_rates(params, noise, 2)
            non_negative &= rates.R1 >= 0 and rates.R2 >= 0
            if previous is not None:
                decreasing &= rates.R1 <= previous.R1 + 1e-12 and rates.R2 <= previous.R2 + 1e-12
            previous = rates
    return [SubResult("bounds_compare_schema", schema_ok, {"rows": len(rows)}),
            SubResult("refined_exponent_monotone_in_gamma", bool(monotone)),
            SubResult("volterra_rates_non_negative", bool(non_negative)),
            SubResult("volterra_rates_decrease_with_noise", bool(decreasing))]


CRITERIA: list[tuple[int, str, Callable[[], list]]] = [
    (1, "bec_bp_threshold_2_20", bec_threshold_check),
    (2, "conditional_entropy_factors", cond_entropy_check),
    (3, "biawgn_rate_equivalence", biawgn_equivalence_check),
    (4, "pinsker_refinements", pinsker_check),
    (5, "entropy_method_identities", identity_suite_check),
    (6, "log_sobolev_suites", lsi_suite_check),
    (7, "transport_w1_and_blowup", transport_check),
    (8, "concentration_exponent_grid", concentration_exponent_check),
    (9, "monte_carlo_dominance", monte_carlo_check),
    (10, "figure_property_checks", figure_property_check),
]


def run_criterion(number: int, **kwargs) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            start = time.perf_counter()
            checks = fn(**kwargs)
            return CriterionResult(num, name, checks, time.perf_counter() - start)
    raise KeyError(number)


def run_all(trials: int = 1_000_000, only=None) -> list:
    results = []
    for num, _name, _fn in CRITERIA:
        if only and num not in only:
            continue
        kwargs = {"trials": trials} if num == 9 else {}
        results.append(run_criterion(num, **kwargs))
    return results
