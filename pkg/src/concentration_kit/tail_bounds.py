"""Closed-form tail and moment-generating-function bounds for martingales
with bounded jumps and for sums of bounded independent variables.

Every bound is returned unclamped, so algebraic identities between bounds
survive; presentation layers clip at 1 when asked to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .special_functions import DomainError, binary_divergence, binary_entropy, gaussian_q

DELTA_ONE_TOL = 1e-12


@dataclass(frozen=True)
class MartingaleSpec:
    """Jump bound d, conditional-variance bound sigma2 and length n."""

    n: int
    d: float
    sigma2: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not self.d > 0:
            raise DomainError("jump bound d must be positive")
        if not self.sigma2 > 0:
            raise DomainError("variance bound sigma2 must be positive")
        if self.sigma2 > self.d**2 * (1 + 1e-12):
            raise DomainError("sigma2 must not exceed d^2 (gamma <= 1)")

    @property
    def gamma(self) -> float:
        return self.sigma2 / self.d**2

    def delta(self, alpha: float) -> float:
        return alpha / self.d


@dataclass(frozen=True)
class MomentSequence:
    """Jump bound d and conditional moment bounds mu_2..mu_m (m even)."""

    d: float
    mu: tuple

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("d must be positive")
        if len(self.mu) < 1:
            raise DomainError("need at least mu_2")
        if (len(self.mu) + 1) % 2 != 0:
            raise DomainError("the moment order m must be even")
        if not self.mu[0] > 0:
            raise DomainError("mu_2 must be positive")

    @property
    def m(self) -> int:
        return len(self.mu) + 1

    @property
    def gammas(self) -> np.ndarray:
        """gamma_l = mu_l / d^l for l = 2..m."""
        orders = np.arange(2, self.m + 1)
        return np.asarray(self.mu, dtype=float) / self.d**orders

    @classmethod
    def from_gammas(cls, d: float, gammas: Sequence[float]) -> "MomentSequence":
        orders = np.arange(2, len(gammas) + 2)
        return cls(d, tuple(float(g) * d**o for g, o in zip(gammas, orders)))


def _two_sided_factor(side: str) -> float:
    if side == "two_sided":
        return 2.0
    if side == "upper_tail":
        return 1.0
    raise DomainError(f"side must be 'two_sided' or 'upper_tail', got {side!r}")


def azuma_bound(r: float, d_list: Sequence[float]) -> float:
    """2 exp(-r^2 / (2 sum d_k^2))."""
    if r < 0:
        raise DomainError("r must be non-negative")
    total = float(np.sum(np.square(np.asarray(d_list, dtype=float))))
    if total == 0.0:
        return 0.0 if r > 0 else 2.0
    return 2.0 * math.exp(-(r * r) / (2.0 * total))


def mcdiarmid_bound(r: float, c_list: Sequence[float]) -> float:
    """2 exp(-2 r^2 / sum c_k^2)."""
    if r < 0:
        raise DomainError("r must be non-negative")
    total = float(np.sum(np.square(np.asarray(c_list, dtype=float))))
    if total == 0.0:
        return 0.0 if r > 0 else 2.0
    return 2.0 * math.exp(-2.0 * r * r / total)


def kearns_saul_coefficient(p: float) -> float:
    """c(p) = (1-2p) / (4 ln((1-p)/p)); 1/8 at p = 1/2 and 0 at p in {0, 1}."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    if abs(p - 0.5) < 1e-7:
        # Second-order expansion around 1/2 avoids 0/0.
        u = 1.0 - 2.0 * p
        return 0.125 * (1.0 - u * u / 3.0)
    return (1.0 - 2.0 * p) / (4.0 * math.log((1.0 - p) / p))


class HoeffdingPair(NamedTuple):
    hoeffding: float
    kearns_saul: float
    degenerate_means: bool


def hoeffding_kearns_saul(r: float, intervals: Sequence[tuple]) -> HoeffdingPair:
    """Hoeffding and Kearns-Saul bounds for a sum of independent bounded terms.

    `intervals` holds (a_k, b_k, m_k) triples; the mean m_k is needed for the
    Kearns-Saul part.  A mean sitting on an endpoint makes that term
    deterministic, which is reported through `degenerate_means`.
    """
    if r < 0:
        raise DomainError("r must be non-negative")
    widths2 = []
    weighted = []
    degenerate = False
    for item in intervals:
        a, b = float(item[0]), float(item[1])
        if a > b:
            raise DomainError("each interval needs a <= b")
        width2 = (b - a) ** 2
        widths2.append(width2)
        if len(item) < 3:
            raise DomainError("Kearns-Saul needs the mean of every term")
        mean = float(item[2])
        if not a <= mean <= b:
            raise DomainError("mean outside its interval")
        p = 0.5 if b == a else (mean - a) / (b - a)
        if p in (0.0, 1.0) and b > a:
            degenerate = True
        weighted.append(kearns_saul_coefficient(p) * width2)
    hoeff_total = sum(widths2)
    ks_total = sum(weighted)
    if hoeff_total == 0.0:
        hoeff = 0.0 if r > 0 else 2.0
    else:
        hoeff = 2.0 * math.exp(-2.0 * r * r / hoeff_total)
    if ks_total == 0.0:
        ks = 0.0 if r > 0 else 2.0
    else:
        ks = 2.0 * math.exp(-r * r / (4.0 * ks_total))
    return HoeffdingPair(hoeff, ks, degenerate)


def refined_exponent(gamma: float, delta: float) -> float:
    """Per-step exponent d((delta+gamma)/(1+gamma) || gamma/(1+gamma)) in nats.

    Returns +inf for delta > 1; at delta = 1 the exact limit -ln(gamma/(1+gamma)).
    """
    if delta < 0:
        raise DomainError("delta must be non-negative")
    if delta > 1.0 + DELTA_ONE_TOL:
        return math.inf
    if abs(delta - 1.0) < DELTA_ONE_TOL:
        return -math.log(gamma / (1.0 + gamma))
    return binary_divergence((delta + gamma) / (1.0 + gamma), gamma / (1.0 + gamma))


def refined_bound(spec: MartingaleSpec, alpha: float, side: str = "two_sided") -> float:
    """Refined Azuma bound on P(|X_n - X_0| >= n alpha) (or the upper tail)."""
    factor = _two_sided_factor(side)
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    exponent = refined_exponent(spec.gamma, spec.delta(alpha))
    if math.isinf(exponent):
        return 0.0
    return factor * math.exp(-spec.n * exponent)


def refined_optimal_parameter(gamma: float, delta: float) -> float:
    """Optimal x = t d in the Chernoff step behind the refined bound (0 <= delta < 1)."""
    if not 0 <= delta < 1:
        raise DomainError("optimal x exists for 0 <= delta < 1 only")
    return math.log((gamma + delta) / (gamma * (1.0 - delta))) / (1.0 + gamma)


def f_delta(delta: float) -> float:
    """ln 2 [1 - h2((1-delta)/2)], the gamma = 1 refined exponent."""
    if delta < 0:
        raise DomainError("delta must be non-negative")
    if delta > 1:
        return math.inf
    return math.log(2.0) * (1.0 - binary_entropy((1.0 - delta) / 2.0))


class SmallDeviation(NamedTuple):
    bound: float
    leading_exponent: float


def small_deviation_bound(spec: MartingaleSpec, alpha: float) -> SmallDeviation:
    """Finite-n refined bound on P(|X_n - X_0| >= alpha sqrt(n)).

    The bound is evaluated exactly with delta_n = delta / sqrt(n); the leading
    exponent delta^2 / (2 gamma) is the n -> infinity value.
    """
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    gamma = spec.gamma
    delta = spec.delta(alpha)
    delta_n = delta / math.sqrt(spec.n)
    exponent = refined_exponent(gamma, delta_n)
    bound = 0.0 if math.isinf(exponent) else 2.0 * math.exp(-spec.n * exponent)
    return SmallDeviation(bound, delta * delta / (2.0 * gamma))


def bennett_mgf_bound(lam: float, xbar: float, b: float, sigma2: float) -> float:
    """Bennett's bound on E exp(lam X) for X <= b, mean xbar, variance <= sigma2."""
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    if xbar > b:
        raise DomainError("need xbar <= b")
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    gap = b - xbar
    if gap == 0.0:
        return math.exp(lam * xbar)
    num = gap * gap * math.exp(-lam * sigma2 / gap) + sigma2 * math.exp(lam * gap)
    return math.exp(lam * xbar) * num / (gap * gap + sigma2)


def bennett_extremal_law(lam: float, xbar: float, b: float, sigma2: float):
    """Two-point law of Y = lam (X - xbar) attaining equality in Bennett's bound.

    Returns (values, probabilities) for Y; E exp(Y) times exp(lam xbar) equals
    `bennett_mgf_bound` for lam > 0.
    """
    if lam <= 0:
        raise DomainError("extremal law defined for lambda > 0")
    b_y = lam * (b - xbar)
    s_y = lam * lam * sigma2
    values = np.array([-s_y / b_y, b_y])
    probs = np.array([b_y * b_y, s_y]) / (b_y * b_y + s_y)
    return values, probs


class MgfBounds(NamedTuple):
    gamma_bound: float
    moment_bound: float


def gamma_mgf_factor(x: float, gamma: float) -> float:
    """(e^{-gamma x} + gamma e^{x}) / (1 + gamma), the one-step factor at x = t d."""
    return (math.exp(-gamma * x) + gamma * math.exp(x)) / (1.0 + gamma)


def moment_mgf_factor(x: float, gammas: Sequence[float]) -> float:
    """One-step factor 1 + sum_{l=2}^{m-1} (g_l - g_m) x^l / l! + g_m (e^x - 1 - x)."""
    g = np.asarray(gammas, dtype=float)
    g_last = g[-1]
    total = 1.0
    term = x  # x^l / l! built incrementally
    for l in range(2, len(g) + 1):
        term = term * x / l
        total += (g[l - 2] - g_last) * term
    return total + g_last * (math.expm1(x) - x)


def mgf_moment_bounds(t: float, n: int, moments: MomentSequence) -> MgfBounds:
    """Both MGF bounds on E exp(t sum xi_k) for n martingale jumps."""
    if t < 0:
        raise DomainError("t must be non-negative")
    x = t * moments.d
    gammas = moments.gammas
    return MgfBounds(
        gamma_mgf_factor(x, float(gammas[0])) ** n,
        moment_mgf_factor(x, gammas) ** n,
    )


class MdpExponents(NamedTuple):
    azuma_exponent: float
    refined_exponent: float
    mdp_exponent: float


def mdp_compare(eta: float, alpha: float, d: float, sigma2: float) -> MdpExponents:
    """Moderate-deviation scaling exponents for deviations alpha n^eta.

    The exponents are the limits of n^{1-2 eta} ln P; eta only fixes the regime.
    """
    if not 0.5 < eta < 1.0:
        raise DomainError("eta must lie in (1/2, 1)")
    if d <= 0 or sigma2 <= 0:
        raise DomainError("d and sigma2 must be positive")
    azuma = -alpha * alpha / (2.0 * d * d)
    gaussian = -alpha * alpha / (2.0 * sigma2)
    return MdpExponents(azuma, gaussian, gaussian)


def gaussian_clt_limit(alpha: float, d: float, gamma: float = 1.0) -> float:
    """2 Q(alpha / (sqrt(gamma) d)), the CLT limit of the two-sided tail."""
    return 2.0 * gaussian_q(alpha / (math.sqrt(gamma) * d)).value
