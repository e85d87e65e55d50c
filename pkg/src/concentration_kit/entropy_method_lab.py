"""Exact finite-space and quadrature checks of entropy-method identities and
log-Sobolev inequalities.

All finite-space expectations are exact sums over at most ENUMERATION_CAP
states.  One-dimensional integrals use adaptive Gauss-Kronrod quadrature
from scipy; the reported error estimate is compared against QUAD_TOL.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, signal, special, stats

from .info_measures import (
    ENUMERATION_CAP,
    FiniteDistribution,
    _as_probs,
    erasure_divergence,
    joint_kl,
)
from .special_functions import DomainError, psi_exp, tau_exp

QUAD_TOL = 1e-8
SMALL_T_SERIES = 1e-3


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


# ---------------------------------------------------------------------------
# Tilted families on a finite set


class TiltedFamily:
    """A base law on finitely many atoms together with a real function f.

    The log-MGF is centred, lmgf(t) = ln E exp(t (f - E f)), so that
    lmgf(t)/t -> 0 as t -> 0.  Tilting is shift-invariant, so divergences
    and variances are unaffected by the centring.
    """

    def __init__(self, base, f: Sequence[float]):
        probs = _as_probs(base)
        values = np.asarray(f, dtype=float)
        if probs.shape != values.shape:
            raise DomainError("f must assign one value per atom")
        if not np.all(np.isfinite(values)):
            raise DomainError("f must be finite")
        keep = probs > 0
        self.probs = probs[keep]
        self.mean = float(np.dot(self.probs, values[keep]))
        self.centered = values[keep] - self.mean
        self.spread = float(np.ptp(self.centered)) if self.centered.size else 0.0
        self._log_probs = np.log(self.probs)
        c = self.centered
        p = self.probs
        # Central moments for the small-t series.
        self._k2 = float(np.dot(p, c**2))
        self._k3 = float(np.dot(p, c**3))
        self._k4 = float(np.dot(p, c**4)) - 3.0 * self._k2**2

    def lmgf(self, t: float) -> float:
        if abs(t) * self.spread < 1.0:
            s = float(np.dot(self.probs, np.expm1(t * self.centered)))
            return math.log1p(s)
        return float(special.logsumexp(self._log_probs + t * self.centered))

    def tilted(self, t: float) -> np.ndarray:
        w = self._log_probs + t * self.centered
        w = np.exp(w - w.max())
        return w / w.sum()

    def tilted_mean(self, t: float) -> float:
        """Lambda'(t), the mean of the centred f under the tilt."""
        return float(np.dot(self.tilted(t), self.centered))

    def tilted_variance(self, t: float) -> float:
        """Lambda''(t), computed from the tilted law directly."""
        q = self.tilted(t)
        m = float(np.dot(q, self.centered))
        return float(np.dot(q, (self.centered - m) ** 2))

    def divergence(self, t: float) -> float:
        """D(mu^(t f) || mu) computed straight from the tilted probabilities."""
        q = self.tilted(t)
        live = q > 0
        return max(float(np.sum(q[live] * (np.log(q[live]) - self._log_probs[live]))), 0.0)

    def divergence_via_lmgf(self, t: float) -> float:
        """t Lambda'(t) - Lambda(t), with the cumulant series near t = 0."""
        if abs(t) * self.spread < SMALL_T_SERIES:
            return self._series_divergence(t)
        if abs(t) * self.spread < 1.0:
            e = np.expm1(t * self.centered)
            s = float(np.dot(self.probs, e))
            mean_tilt = float(np.dot(self.probs, e * self.centered)) / (1.0 + s)
            return t * mean_tilt - math.log1p(s)
        return t * self.tilted_mean(t) - self.lmgf(t)

    def _series_divergence(self, t: float) -> float:
        # D = sum_k kappa_k t^k (k - 1) / k!
        return (self._k2 * t**2 / 2.0 + self._k3 * t**3 / 3.0
                + self._k4 * t**4 * 3.0 / 24.0)

    def divergence_over_t2(self, t: float) -> float:
        """D(t)/t^2 with its t -> 0 limit var/2 filled in."""
        if t == 0.0:
            return self._k2 / 2.0
        if abs(t) * self.spread < SMALL_T_SERIES:
            return self._k2 / 2.0 + self._k3 * t / 3.0 + self._k4 * t * t / 8.0
        return self.divergence_via_lmgf(t) / (t * t)

    @property
    def variance(self) -> float:
        return self._k2


class IdentityCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float
    quadrature_error: float
    quadrature_ok: bool


def _quad(fn, lo, hi, tol=QUAD_TOL):
    value, err = integrate.quad(fn, lo, hi, epsabs=tol * 1e-3, epsrel=1e-12, limit=200)
    return value, err, err <= tol


def herbst_identity_check(family: TiltedFamily, lam: float) -> IdentityCheck:
    """Lambda(lam) against lam * integral_0^lam D(t)/t^2 dt."""
    if not lam > 0:
        raise DomainError("lambda must be positive")
    lhs = family.lmgf(lam)
    if family.spread == 0.0:
        return IdentityCheck(0.0, 0.0, 0.0, 0.0, True)
    integral, err, ok = _quad(family.divergence_over_t2, 0.0, lam)
    rhs = lam * integral
    return IdentityCheck(lhs, rhs, abs(lhs - rhs), lam * err, ok)


def maurer_identity_check(family: TiltedFamily, lam: float) -> IdentityCheck:
    """D(mu^(lam f) || mu) against the double integral of tilted variances.

    The inner integral int_t^lam var(s) ds and the outer integral in t are
    both evaluated by adaptive quadrature.
    """
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    lhs = family.divergence(lam)
    if lam == 0.0 or family.spread == 0.0:
        return IdentityCheck(lhs, 0.0, lhs, 0.0, True)
    worst = [0.0]

    def inner(t):
        value, err = integrate.quad(family.tilted_variance, t, lam,
                                    epsabs=1e-13, epsrel=1e-12, limit=200)
        worst[0] = max(worst[0], err)
        return value

    rhs, err, ok = _quad(inner, 0.0, lam)
    total_err = err + lam * worst[0]
    return IdentityCheck(lhs, rhs, abs(lhs - rhs), total_err, total_err <= QUAD_TOL)


def lmgf_derivative_check(family: TiltedFamily, t: float) -> float:
    """|D(mu^(t f)||mu) - (t Lambda'(t) - Lambda(t))|."""
    return abs(family.divergence(t) - family.divergence_via_lmgf(t))


# ---------------------------------------------------------------------------
# Product spaces


def _check_cap(shape):
    size = int(np.prod(shape))
    if size > ENUMERATION_CAP:
        raise DomainError(f"{size} states exceed the enumeration cap {ENUMERATION_CAP}")


def product_law(marginals: Sequence[Sequence[float]]) -> np.ndarray:
    joint = np.ones(())
    for m in marginals:
        joint = np.multiply.outer(joint, np.asarray(m, dtype=float))
    _check_cap(joint.shape)
    return joint


def tilt_joint(joint: np.ndarray, f: np.ndarray, t: float = 1.0):
    """Tilted joint law and the (uncentred) log-MGF ln E exp(t f)."""
    live = joint > 0
    logw = np.full(joint.shape, -np.inf)
    logw[live] = np.log(joint[live]) + t * f[live]
    log_mgf = float(special.logsumexp(logw))
    q = np.exp(logw - log_mgf)
    return q / q.sum(), log_mgf


class Inequality(NamedTuple):
    lhs: float
    rhs: float


def tensorization_check(P: np.ndarray, Q: np.ndarray) -> Inequality:
    """D(Q||P) against the erasure divergence for a product law P."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    _check_cap(P.shape)
    marginals = [P.sum(axis=tuple(j for j in range(P.ndim) if j != i)) for i in range(P.ndim)]
    if not np.allclose(product_law(marginals), P, atol=1e-12):
        raise DomainError("P must be a product measure")
    return Inequality(joint_kl(Q, P), erasure_divergence(Q, P))


def bit_table(n: int) -> np.ndarray:
    """Rows are the points of {0,1}^n; point index x has bit i at position i."""
    idx = np.arange(2**n)
    return (idx[:, None] >> np.arange(n)) & 1


def hamming_gradient_sq(values: np.ndarray, n: int) -> np.ndarray:
    """(Gamma f)^2(x) = sum_i (f(x xor e_i) - f(x))^2 over the cube."""
    idx = np.arange(2**n)
    total = np.zeros(2**n)
    for i in range(n):
        total += (values[idx ^ (1 << i)] - values) ** 2
    return total


def max_bit_flip(values: np.ndarray, n: int) -> float:
    idx = np.arange(2**n)
    return float(max(np.max(np.abs(values[idx ^ (1 << i)] - values)) for i in range(n)))


def bernoulli_cube_law(n: int, p: float) -> np.ndarray:
    ones = bit_table(n).sum(axis=1)
    return p**ones * (1.0 - p) ** (n - ones)


def bernoulli_lsi_constant(p: float, c: float) -> float:
    """pq ((c-1) e^c + 1) / c^2, with its c -> 0 limit pq/2."""
    q = 1.0 - p
    if c < 1e-4:
        return p * q * (0.5 + c / 3.0 + c * c / 8.0)
    return p * q * ((c - 1.0) * math.exp(c) + 1.0) / (c * c)


def _tilted_divergence(base: np.ndarray, f: np.ndarray) -> tuple:
    q, log_mgf = tilt_joint(base, f)
    live = q > 0
    d = float(np.sum(q[live] * (np.log(q[live]) - np.log(base[live]))))
    return max(d, 0.0), q


def discrete_lsi_check(n: int, p: float, f, c_bound: float | None = None) -> Inequality:
    """Hamming-cube LSI: at p = 1/2 the constant 1/8, otherwise the
    Bernoulli(p) constant built from the maximal bit-flip difference."""
    if n < 1 or n > 12:
        raise DomainError("n must lie in 1..12")
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    values = np.asarray(f(bit_table(n)) if callable(f) else f, dtype=float)
    if values.shape != (2**n,):
        raise DomainError("f must have 2^n values")
    base = bernoulli_cube_law(n, p)
    lhs, q = _tilted_divergence(base, values)
    energy = float(np.dot(q, hamming_gradient_sq(values, n)))
    if p == 0.5:
        return Inequality(lhs, energy / 8.0)
    c = max_bit_flip(values, n)
    if c_bound is not None:
        if c_bound < c - 1e-12:
            raise DomainError(f"c_bound {c_bound} is below the actual bit-flip bound {c}")
        c = c_bound
    return Inequality(lhs, bernoulli_lsi_constant(p, c) * energy)


class PoincareCheck(NamedTuple):
    variance: float
    rhs: float
    small_t_ratio: float


def poincare_check(n: int, p: float, f, t_small: float = 1e-3) -> PoincareCheck:
    """var[f] <= c E[(Gamma f)^2] with the small-t constant of the cube LSI
    (c = 1/4 at p = 1/2, c = pq in general).  small_t_ratio is
    D(P^(tf)||P) / t^2 at t_small, which tends to var/2."""
    values = np.asarray(f(bit_table(n)) if callable(f) else f, dtype=float)
    base = bernoulli_cube_law(n, p)
    mean = float(np.dot(base, values))
    var = float(np.dot(base, (values - mean) ** 2))
    energy = float(np.dot(base, hamming_gradient_sq(values, n)))
    const = 0.25 if p == 0.5 else p * (1.0 - p)
    family = TiltedFamily(base, values)
    return PoincareCheck(var, const * energy, family.divergence_over_t2(t_small))


def binary_gross_check(g0: float, g1: float) -> Inequality:
    """(g(0)-g(1))^2 against (1/4) E_P[e^f (Gamma f)^2] for e^f = g^2, P uniform."""
    if g0 <= 0 or g1 <= 0:
        raise DomainError("g must be positive")
    f0, f1 = 2.0 * math.log(g0), 2.0 * math.log(g1)
    rhs = 0.25 * 0.5 * (math.exp(f0) + math.exp(f1)) * (f0 - f1) ** 2
    return Inequality((g0 - g1) ** 2, rhs)


# ---------------------------------------------------------------------------
# Poisson and compound Poisson


class PoissonLsi(NamedTuple):
    lhs: float
    rhs: float
    truncation_slack: float


def compound_poisson_pmf(lam: float, mu: dict, trunc: int) -> np.ndarray:
    """pmf of the compound Poisson law on 0..trunc by Panjer's recursion."""
    pmf = np.zeros(trunc + 1)
    pmf[0] = math.exp(-lam)
    for x in range(1, trunc + 1):
        acc = 0.0
        for k, w in mu.items():
            if k <= x:
                acc += k * w * pmf[x - k]
        pmf[x] = lam * acc / x
    return pmf


def poisson_lsi_check(lam: float, f, trunc: int, compound=None,
                      tail_tol: float = 1e-10) -> PoissonLsi:
    """Poisson (or compound Poisson) LSI with f extended as f(trunc) beyond trunc.

    With that extension every atom x >= trunc has the same f and zero
    gradient, so lumping them into one atom keeps both sides exact.  The
    reported slack is the lumped tail mass.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if trunc < 1:
        raise DomainError("trunc must be positive")
    xs = np.arange(trunc + 1)
    values = np.asarray(f(xs) if callable(f) else f, dtype=float)
    if values.shape != (trunc + 1,):
        raise DomainError("f must provide values on 0..trunc")
    if compound is None:
        weights = {1: 1.0}
    else:
        probs = _as_probs(compound)
        labels = compound.labels if isinstance(compound, FiniteDistribution) else range(1, len(probs) + 1)
        weights = {int(k): float(w) for k, w in zip(labels, probs) if w > 0}
        if min(weights) < 1:
            raise DomainError("the jump law must live on positive integers")
    pmf = compound_poisson_pmf(lam, weights, trunc)
    tail = max(1.0 - float(pmf[:-1].sum()) - float(pmf[-1]), 0.0)
    if tail > tail_tol:
        raise DomainError(f"tail mass {tail:.3g} beyond trunc exceeds {tail_tol:g}")
    base = pmf.copy()
    base[-1] = 1.0 - float(pmf[:-1].sum())
    lhs, q = _tilted_divergence(base, values)
    rhs = 0.0
    for k, w in weights.items():
        shifted = np.concatenate([values[k:], np.full(min(k, trunc + 1), values[-1])])[: trunc + 1]
        grad = np.abs(values - shifted)
        term = grad * np.exp(grad) - np.exp(grad) + 1.0
        rhs += w * float(np.dot(q, term))
    return PoissonLsi(lhs, lam * rhs, tail)


# ---------------------------------------------------------------------------
# Efron-Stein and the Massart comparison


class EfronStein(NamedTuple):
    variance: float
    ess_sum: float


def _joint_values(marginals, f) -> tuple:
    joint = product_law(marginals)
    if callable(f):
        grids = np.indices(joint.shape)
        values = np.asarray(f(*grids), dtype=float)
    else:
        values = np.asarray(f, dtype=float)
    if values.shape != joint.shape:
        raise DomainError("f must be a tensor over the product space")
    return joint, values


def efron_stein_check(marginals: Sequence[Sequence[float]], f) -> EfronStein:
    """var[f] and sum_i E[var(f | all coordinates but i)], exactly."""
    joint, values = _joint_values(marginals, f)
    mean = float(np.sum(joint * values))
    var = float(np.sum(joint * (values - mean) ** 2))
    total = 0.0
    for i, m in enumerate(marginals):
        m = np.asarray(m, dtype=float)
        shape = [1] * values.ndim
        shape[i] = -1
        w = m.reshape(shape)
        cond_mean = np.sum(values * w, axis=i, keepdims=True)
        cond_var = np.sum((values - cond_mean) ** 2 * w, axis=i, keepdims=True)
        rest = joint.sum(axis=i, keepdims=True)
        total += float(np.sum(rest * cond_var))
    return EfronStein(var, total)


class MassartComparison(NamedTuple):
    divergence: float
    maurer_rhs: float
    massart_rhs: float
    massart_upper_rhs: float
    massart_lower_rhs: float
    erasure: float
    tighter: str
    maurer_tail_exponent: float
    massart_tail_exponent: float


def massart_comparison(marginals: Sequence[Sequence[float]], f, t: float) -> MassartComparison:
    """Compare Maurer's variance route with the psi / tau bounds for D(P^(tf)||P).

    maurer_rhs = (t^2/8) E^(tf)[sum_i range_i^2], with range_i the spread of f
    over coordinate i given the rest.  The psi bound and its two tau variants
    are evaluated exactly with an independent copy of each coordinate.  The
    tail exponents are the r^2 coefficients the two routes give after the
    Herbst argument with global bounded differences c_i.
    """
    joint, values = _joint_values(marginals, f)
    q, log_mgf = tilt_joint(joint, values, t)
    live = q > 0
    divergence = max(float(np.sum(q[live] * (np.log(q[live]) - np.log(joint[live])))), 0.0)
    maurer = 0.0
    psi_total = upper_total = lower_total = 0.0
    c_sq = 0.0
    for i, m in enumerate(marginals):
        m = np.asarray(m, dtype=float)
        moved = np.moveaxis(values, i, -1)
        q_moved = np.moveaxis(q, i, -1)
        support = m > 0
        sub = moved[..., support]
        spread = sub.max(axis=-1) - sub.min(axis=-1)
        c_sq += float(spread.max()) ** 2
        # Range depends on the other coordinates only; average it under the tilt.
        maurer += float(np.sum(q_moved.sum(axis=-1) * spread**2))
        # diff[..., a, b] = f(x_i = a) - f(x_i = b)
        diff = moved[..., :, None] - moved[..., None, :]
        weight = q_moved[..., :, None] * m[None, :]
        arg = -t * diff
        psi_total += float(np.sum(weight * psi_exp(arg)))
        tau_vals = tau_exp(arg)
        upper_total += float(np.sum(weight * tau_vals * (diff > 0)))
        lower_total += float(np.sum(weight * tau_vals * (diff < 0)))
    maurer *= t * t / 8.0
    erasure = erasure_divergence(q, joint)
    candidates = {"maurer": maurer, "massart": min(psi_total, upper_total, lower_total)}
    tighter = min(candidates, key=candidates.get)
    if c_sq > 0:
        maurer_exp, massart_exp = 2.0 / c_sq, 1.0 / (4.0 * c_sq)
    else:
        maurer_exp = massart_exp = math.inf
    return MassartComparison(divergence, maurer, psi_total, upper_total, lower_total,
                             erasure, tighter, maurer_exp, massart_exp)


# ---------------------------------------------------------------------------
# Densities on a grid


@dataclass(frozen=True)
class DensityGrid:
    """Density values on an increasing uniform grid, integrated by Simpson's rule."""

    grid: np.ndarray
    density: np.ndarray
    rule: str = "simpson"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        if grid.ndim != 1 or grid.shape != dens.shape or grid.size < 5:
            raise DomainError("grid and density must be matching 1-D arrays")
        steps = np.diff(grid)
        if np.any(steps <= 0):
            raise DomainError("grid must be increasing")
        if np.any(dens < 0):
            raise DomainError("density must be non-negative")
        if self.rule not in ("simpson", "trapezoid"):
            raise DomainError("rule must be 'simpson' or 'trapezoid'")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", dens)
        mass = self.integrate(dens)
        if abs(mass - 1.0) > 1e-6:
            raise DomainError(f"density integrates to {mass!r}")

    def integrate(self, values: np.ndarray) -> float:
        if self.rule == "simpson":
            return float(integrate.simpson(values, x=self.grid))
        return float(integrate.trapezoid(values, x=self.grid))

    @classmethod
    def from_function(cls, pdf: Callable, lo: float = -12.0, hi: float = 12.0,
                      points: int = 24001, rule: str = "simpson") -> "DensityGrid":
        grid = np.linspace(lo, hi, points)
        return cls(grid, pdf(grid), rule)

    @classmethod
    def gaussian_mixture(cls, means, stds, weights, lo=-12.0, hi=12.0, points=24001):
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()

        def pdf(x):
            return sum(w * stats.norm.pdf(x, m, s) for m, s, w in zip(means, stds, weights))

        return cls.from_function(pdf, lo, hi, points)

    def score(self) -> np.ndarray:
        """d/dx ln p on the grid (zero where p vanishes)."""
        out = np.zeros_like(self.density)
        live = self.density > 0
        logp = np.full_like(self.density, -np.inf)
        logp[live] = np.log(self.density[live])
        if np.all(live):
            return np.gradient(logp, self.grid, edge_order=2)
        finite = np.where(live, logp, 0.0)
        grad = np.gradient(finite, self.grid, edge_order=2)
        # Points next to a zero have unreliable differences; drop them.
        neighbours = live & np.roll(live, 1) & np.roll(live, -1)
        out[neighbours] = grad[neighbours]
        return out

    def moments(self) -> tuple:
        mean = self.integrate(self.grid * self.density)
        var = self.integrate((self.grid - mean) ** 2 * self.density)
        return mean, var


def _log_gauss(x):
    return -0.5 * x * x - 0.5 * math.log(2.0 * math.pi)


def differential_entropy(dens: DensityGrid) -> float:
    p = dens.density
    return -dens.integrate(special.xlogy(p, p))


def fisher_information(dens: DensityGrid) -> float:
    return dens.integrate(dens.density * dens.score() ** 2)


def mmse(dens: DensityGrid, snr: float, z_points: int = 1601, chunk: int = 128) -> float:
    """mmse of X ~ dens from sqrt(snr) X + N, N standard Gaussian, by quadrature."""
    x = dens.grid
    p = dens.density
    second = dens.integrate(x * x * p)
    if snr == 0:
        mean = dens.integrate(x * p)
        return second - mean * mean
    root = math.sqrt(snr)
    z = np.linspace(root * x[0] - 10.0, root * x[-1] + 10.0, z_points)
    cond_sq = np.empty_like(z)
    pz = np.empty_like(z)
    for start in range(0, z.size, chunk):
        zc = z[start:start + chunk, None]
        kernel = np.exp(_log_gauss(zc - root * x[None, :])) * p[None, :]
        if dens.rule == "simpson":
            marg = integrate.simpson(kernel, x=x, axis=1)
            first = integrate.simpson(kernel * x[None, :], x=x, axis=1)
        else:
            marg = integrate.trapezoid(kernel, x=x, axis=1)
            first = integrate.trapezoid(kernel * x[None, :], x=x, axis=1)
        pz[start:start + chunk] = marg
        with np.errstate(divide="ignore", invalid="ignore"):
            cond_sq[start:start + chunk] = np.where(marg > 0, first * first / marg, 0.0)
    return second - float(integrate.simpson(cond_sq, x=z))


def w2_to_gaussian(dens: DensityGrid) -> float:
    """W2(P, G) via the monotone (quantile) coupling x -> Phi^{-1}(F_P(x))."""
    p = dens.density
    cdf = integrate.cumulative_trapezoid(p, dens.grid, initial=0.0)
    total = cdf[-1]
    cdf = cdf / total
    surv = 1.0 - cdf
    # Use the survival function on the right half to keep precision in the tail.
    target = np.where(cdf < 0.5, special.ndtri(np.clip(cdf, 1e-300, None)),
                      -special.ndtri(np.clip(surv, 1e-300, None)))
    return math.sqrt(max(dens.integrate((dens.grid - target) ** 2 * p), 0.0))


def divergence_to_gaussian(dens: DensityGrid) -> float:
    p = dens.density
    live = p > 0
    integrand = np.zeros_like(p)
    integrand[live] = p[live] * (np.log(p[live]) - _log_gauss(dens.grid[live]))
    return dens.integrate(integrand)


def relative_fisher_to_gaussian(dens: DensityGrid) -> float:
    return dens.integrate(dens.density * (dens.score() + dens.grid) ** 2)


def renyi_to_gaussian(dens: DensityGrid, alpha: float) -> float:
    """D_alpha(P||G) for alpha > 1, computed in log space."""
    if alpha <= 1:
        raise DomainError("alpha must exceed 1")
    p = dens.density
    live = p > 0
    log_terms = np.full_like(p, -np.inf)
    log_terms[live] = alpha * np.log(p[live]) + (1.0 - alpha) * _log_gauss(dens.grid[live])
    peak = float(log_terms.max())
    return (peak + math.log(dens.integrate(np.exp(log_terms - peak)))) / (alpha - 1.0)


class SubCheck(NamedTuple):
    name: str
    lhs: float
    rhs: float
    passed: bool


@dataclass
class GaussianSuiteReport:
    entropy: float
    entropy_power: float
    fisher: float
    snrs: list
    mmse: list
    lmmse: list
    w2: float
    divergence: float
    relative_fisher: float
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def gaussian_quadrature_suite(dens: DensityGrid, snrs: Sequence[float] = (0.25, 1.0, 4.0),
                              tol: float = 1e-4) -> GaussianSuiteReport:
    """Stam, van Trees, LMMSE and weak-HWI inequalities for one density.

    Each sub-check passes when lhs <= rhs up to `tol` relative slack, which
    absorbs grid discretisation error.
    """
    h = differential_entropy(dens)
    power = math.exp(2.0 * h) / (2.0 * math.pi * math.e)
    fisher = fisher_information(dens)
    _, var = dens.moments()
    checks = [SubCheck("stam", 1.0, power * fisher, 1.0 <= power * fisher * (1 + tol))]
    mm, lm = [], []
    for s in snrs:
        value = mmse(dens, s)
        linear = var / (1.0 + s * var)
        mm.append(value)
        lm.append(linear)
        van_trees = 1.0 / (fisher + s)
        checks.append(SubCheck(f"van_trees@{s:g}", van_trees, value, van_trees <= value * (1 + tol)))
        checks.append(SubCheck(f"lmmse@{s:g}", value, linear, value <= linear * (1 + tol)))
    w2 = w2_to_gaussian(dens)
    div = divergence_to_gaussian(dens)
    rel_fisher = relative_fisher_to_gaussian(dens)
    hwi_rhs = w2 * math.sqrt(max(rel_fisher, 0.0))
    checks.append(SubCheck("weak_hwi", div, hwi_rhs, div <= hwi_rhs + tol))
    return GaussianSuiteReport(h, power, fisher, list(snrs), mm, lm, w2, div, rel_fisher, checks)


def ou_output(dens: DensityGrid, t: float) -> DensityGrid:
    """Density of e^{-t} X + sqrt(1 - e^{-2t}) Z on the input grid.

    e^{-t} X has density e^t p(e^t u); it is resampled on the (uniform) grid
    and convolved with the Gaussian kernel by FFT.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    x = dens.grid
    step = float(x[1] - x[0])
    if not np.allclose(np.diff(x), step, rtol=1e-9, atol=0):
        raise DomainError("the OU convolution needs a uniform grid")
    sigma = math.sqrt(-math.expm1(-2.0 * t))
    scaled = math.exp(t) * np.interp(math.exp(t) * x, x, dens.density, left=0.0, right=0.0)
    half = int(math.ceil(10.0 * sigma / step))
    offsets = step * np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
    out = signal.fftconvolve(scaled, kernel, mode="same") * step
    # FFT round-off leaves a ~1e-16 floor that Renyi integrands would amplify.
    out[out < 1e-13 * out.max()] = 0.0
    # Renormalise away the small mass the finite grid loses at the edges.
    out /= dens.integrate(out)
    return DensityGrid(x, out, dens.rule)


@dataclass
class OuReport:
    t: float
    divergence_in: float
    divergence_out: float
    kl_bound: float
    renyi: list
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def ou_contraction_check(dens: DensityGrid, t: float, alphas: Sequence[float] = (1.5, 2.0, 3.0),
                         tol: float = 1e-6) -> OuReport:
    """KL contraction by e^{-2t} and the Renyi hypercontractive bound under OU(t).

    Renyi pairs (alpha, beta) with beta < alpha are taken from `alphas`, and
    kept only when t >= (1/2) ln((alpha-1)/(beta-1)).
    """
    out = ou_output(dens, t)
    d_in = divergence_to_gaussian(dens)
    d_out = divergence_to_gaussian(out)
    kl_bound = math.exp(-2.0 * t) * d_in
    checks = [SubCheck("kl_contraction", d_out, kl_bound, d_out <= kl_bound + tol)]
    renyi = []
    ordered = sorted(float(a) for a in alphas)
    for j, alpha in enumerate(ordered):
        for beta in ordered[:j]:
            if beta <= 1.0 or t < 0.5 * math.log((alpha - 1.0) / (beta - 1.0)):
                continue
            lhs = renyi_to_gaussian(out, alpha)
            rhs = alpha * (beta - 1.0) / (beta * (alpha - 1.0)) * renyi_to_gaussian(dens, beta)
            renyi.append((alpha, beta, lhs, rhs))
            checks.append(SubCheck(f"renyi@{alpha:g},{beta:g}", lhs, rhs, lhs <= rhs + tol))
    return OuReport(t, d_in, d_out, kl_bound, renyi, checks)
