"""Hamming blow-ups of sets, Marton-type concentration from a T1 inequality,
and the rate function behind the converse concentration exponent."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp, xlogy

from .info_measures import ENUMERATION_CAP, _as_probs
from .special_functions import DomainError, binary_entropy_array, ow_phi

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ConcentrationProfile:
    """mu(A_r) >= 1 - K exp(-kappa (r - r0)^2) for r >= r0."""

    K: float
    kappa: float
    r0: float

    def __post_init__(self):
        if not (self.K > 0 and self.kappa > 0 and self.r0 >= 0):
            raise DomainError("need K > 0, kappa > 0, r0 >= 0")

    def lower_bound(self, r: float) -> float:
        if r < self.r0:
            return 0.0
        return max(1.0 - self.K * math.exp(-self.kappa * (r - self.r0) ** 2), 0.0)


@dataclass(frozen=True)
class BlowupSpec:
    """A set of points in X^n given by flat indices, under a product law.

    `base` is one probability vector shared by every coordinate, or a list of
    n vectors.  Points are indexed in mixed radix with coordinate 0 fastest.
    """

    n: int
    base: tuple
    members: tuple

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        base = np.asarray(self.base, dtype=float)
        if base.ndim == 1:
            base = np.tile(base, (self.n, 1))
        if base.shape[0] != self.n:
            raise DomainError("need one marginal per coordinate")
        if not np.allclose(base.sum(axis=1), 1.0, atol=1e-12) or np.any(base < 0):
            raise DomainError("each marginal must be a probability vector")
        size = base.shape[1] ** self.n
        if size > ENUMERATION_CAP:
            raise DomainError(f"{size} points exceed the enumeration cap {ENUMERATION_CAP}")
        members = np.unique(np.asarray(self.members, dtype=np.int64))
        if members.size and (members.min() < 0 or members.max() >= size):
            raise DomainError("member index out of range")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "members", members)

    @property
    def alphabet(self) -> int:
        return self.base.shape[1]

    @property
    def size(self) -> int:
        return self.alphabet ** self.n

    def digits(self) -> np.ndarray:
        k = self.alphabet
        idx = np.arange(self.size)
        return (idx[:, None] // k ** np.arange(self.n)) % k

    def point_masses(self) -> np.ndarray:
        digits = self.digits()
        return np.prod(self.base[np.arange(self.n), digits], axis=1)

    @classmethod
    def bernoulli(cls, n: int, p: float, members) -> "BlowupSpec":
        return cls(n, (1.0 - p, p), tuple(members))


def hamming_distance_to_set(spec: BlowupSpec) -> np.ndarray:
    """d(x, A) for every point, by multi-source breadth-first search."""
    k, n = spec.alphabet, spec.n
    dist = np.full(spec.size, np.iinfo(np.int64).max, dtype=np.int64)
    if spec.members.size == 0:
        return dist
    dist[spec.members] = 0
    frontier = spec.members
    weights = k ** np.arange(n)
    level = 0
    while frontier.size:
        level += 1
        digit = (frontier[:, None] // weights) % k
        neighbours = []
        for i in range(n):
            base_idx = frontier - digit[:, i] * weights[i]
            for value in range(k):
                neighbours.append(base_idx + value * weights[i])
        cand = np.unique(np.concatenate(neighbours))
        fresh = cand[dist[cand] > level]
        dist[fresh] = level
        frontier = fresh
    return dist


class BlowupMasses(NamedTuple):
    mass_A: float
    mass_Ar: float


def blowup(spec: BlowupSpec, r: int) -> BlowupMasses:
    """Masses of A and of its closed Hamming r-blowup {x : d(x, A) <= r}."""
    if r < 0:
        raise DomainError("radius must be non-negative")
    masses = spec.point_masses()
    dist = hamming_distance_to_set(spec)
    return BlowupMasses(float(masses[spec.members].sum()), float(masses[dist <= r].sum()))


def blowup_profile(spec: BlowupSpec) -> np.ndarray:
    """mass of A_r for r = 0..n in one pass."""
    masses = spec.point_masses()
    dist = hamming_distance_to_set(spec)
    return np.array([masses[dist <= r].sum() for r in range(spec.n + 1)])


class BlowupBound(NamedTuple):
    value: float
    vacuous: bool


def blowup_bound(mass_A: float, n: int, r: float) -> BlowupBound:
    """1 - exp(-(2/n)(r - sqrt((n/2) ln(1/P(A))))^2) above the threshold radius."""
    if not 0 < mass_A <= 1:
        raise DomainError("mass_A must lie in (0, 1]")
    threshold = math.sqrt(0.5 * n * -math.log(mass_A))
    if r <= threshold:
        return BlowupBound(0.0, True)
    return BlowupBound(-math.expm1(-(2.0 / n) * (r - threshold) ** 2), False)


def blowing_up_radius(eps_n: float, alpha: float, n: int) -> tuple:
    """delta_n = sqrt(eps_n/2) + sqrt(alpha ln n / n) and the miss bound n^{-2 alpha}.

    With P(A) >= exp(-n eps_n), the n delta_n blow-up misses mass at most
    exp(-2 n (delta_n - sqrt(eps_n/2))^2) = n^{-2 alpha}.
    """
    delta_n = math.sqrt(eps_n / 2.0) + math.sqrt(alpha * math.log(n) / n)
    miss = math.exp(-2.0 * n * (delta_n - math.sqrt(eps_n / 2.0)) ** 2)
    return delta_n, miss


class MartonBound(NamedTuple):
    profile: ConcentrationProfile
    value: float


def marton_bound(c: float, r: float, mass_A: float = 0.5) -> MartonBound:
    """Concentration implied by T1(c) for sets of measure at least mass_A.

    The default mass 1/2 gives r0 = sqrt(2 c ln 2).
    """
    if not c > 0:
        raise DomainError("c must be positive")
    if not 0 < mass_A <= 1:
        raise DomainError("mass_A must lie in (0, 1]")
    profile = ConcentrationProfile(1.0, 1.0 / (2.0 * c), math.sqrt(2.0 * c * -math.log(mass_A)))
    return MartonBound(profile, profile.lower_bound(r))


# ---------------------------------------------------------------------------
# Concentration exponent of a Bernoulli measure


def _cm_objective(a, b, p):
    """D(P_Y||P) + H(Y|X) for P_X = Bern(p), a = P(Y=1|X=0), b = P(Y=0|X=1)."""
    q = 1.0 - p
    y1 = q * a + p * (1.0 - b)
    y0 = 1.0 - y1
    div = xlogy(y1, y1) - y1 * math.log(p) + xlogy(y0, y0) - y0 * math.log(q)
    cond = q * binary_entropy_array(a, base=math.e) + p * binary_entropy_array(b, base=math.e)
    return div + cond


def _cm_scalar(a: float, b: float, p: float) -> float:
    q = 1.0 - p
    y1 = q * a + p * (1.0 - b)
    y0 = 1.0 - y1

    def xl(v):
        return v * math.log(v) if v > 0 else 0.0

    div = xl(y1) - y1 * math.log(p) + xl(y0) - y0 * math.log(q)
    return div - q * (xl(a) + xl(1.0 - a)) - p * (xl(b) + xl(1.0 - b))


def _golden_max(fn, lo, hi, tol=1e-10, iters=200):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        if hi - lo < tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = fn(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = fn(x1)
    x = 0.5 * (lo + hi)
    return x, fn(x)


class ConcentrationExponent(NamedTuple):
    upper: float
    exact_tail: float | None
    brute: float


def _brute_sup(delta: float, p: float, grid: int = 201, sweeps: int = 10) -> float:
    q = 1.0 - p
    axis = np.linspace(0.0, 1.0, grid)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    feasible = q * a + p * b <= delta + 1e-15
    values = np.where(feasible, _cm_objective(a, b, p), -np.inf)
    i, j = np.unravel_index(np.argmax(values), values.shape)
    best_a, best_b = float(axis[i]), float(axis[j])
    best = float(values[i, j])

    def b_cap(av):
        return min(1.0, max(0.0, (delta - q * av) / p)) if p > 0 else 1.0

    def a_cap(bv):
        return min(1.0, max(0.0, (delta - p * bv) / q))

    # Coordinate ascent: each step maximises over one conditional probability
    # within its feasible interval, then the pair is pushed onto the boundary.
    for _ in range(sweeps):
        prev = best
        best_a, _ = _golden_max(lambda av: _cm_scalar(av, min(best_b, b_cap(av)), p),
                                0.0, a_cap(0.0))
        best_b = min(best_b, b_cap(best_a))
        best_b, _ = _golden_max(lambda bv: _cm_scalar(best_a, bv, p), 0.0, b_cap(best_a))
        best = _cm_scalar(best_a, best_b, p)
        if abs(best - prev) < 1e-13:
            break
    # The optimum of a convex-plus-concave objective may sit on the boundary
    # q a + p b = delta; scan it explicitly as a safeguard.
    edge_a = np.linspace(0.0, min(1.0, delta / q), 4001)
    edge_b = np.minimum(1.0, np.maximum(0.0, (delta - q * edge_a) / p))
    edge_vals = _cm_objective(edge_a, edge_b, p)
    k = int(np.argmax(edge_vals))
    if edge_vals[k] > best:
        lo = edge_a[max(k - 1, 0)]
        hi = edge_a[min(k + 1, edge_a.size - 1)]
        _, val = _golden_max(lambda av: _cm_scalar(av, b_cap(av), p), lo, hi)
        best = max(best, val, float(edge_vals[k]))
    return best


def concentration_exponent_bernoulli(delta: float, p: float) -> ConcentrationExponent:
    """Closed-form upper bound, exact large-delta value, and a brute-force R_c.

    P is Bernoulli(p) with P(1) = p <= 1/2 and Hamming distortion.
    """
    if not 0 <= delta <= 1:
        raise DomainError("delta must lie in [0, 1]")
    if not 0 < p <= 0.5:
        raise DomainError("p must lie in (0, 1/2]")
    q = 1.0 - p
    if delta <= q:
        upper = -ow_phi(p) * delta**2 - q * float(binary_entropy_array(min(delta / q, 1.0), base=math.e))
    else:
        upper = math.log(p)
    exact = math.log(p) if delta >= q - 1e-15 else None
    brute = -_brute_sup(delta, p)
    return ConcentrationExponent(upper, exact, brute)


# ---------------------------------------------------------------------------
# Rate function R(delta; P, M)


class RateFunction(NamedTuple):
    value: float
    multiplier: float
    converged: bool
    boundary: bool


def _lagrangian(p, log_m, dist, s, tol=1e-13, max_iter=20000):
    """L(s) = min over couplings of I(X;Y) + E ln M(Y) + s E d(X,Y).

    Alternating minimisation over the output marginal q; returns (L, q, ok).
    """
    ky = log_m.size
    q = np.full(ky, 1.0 / ky)
    log_kernel = -s * dist - log_m[None, :]
    prev = math.inf
    for _ in range(max_iter):
        logq = np.log(np.maximum(q, 1e-300))
        row = logq[None, :] + log_kernel
        norm = logsumexp(row, axis=1)
        value = -float(np.dot(p, norm))
        w = np.exp(row - norm[:, None])
        q = p @ w
        if abs(prev - value) < tol:
            return value, q, True
        prev = value
    return value, q, False


def rate_function(P, M, delta: float, dist: np.ndarray | None = None,
                  s_grid: Sequence[float] | None = None) -> RateFunction:
    """R(delta; P, M) = inf I(X;Y) + E ln M(Y) subject to E d(X,Y) <= delta.

    Solved through the dual max_{s >= 0} L(s) - s delta: a log-spaced sweep of
    the multiplier followed by golden-section refinement (L is concave).
    """
    p = _as_probs(P)
    m = np.asarray(M, dtype=float)
    if p.size > 8 or m.size > 8:
        raise DomainError("alphabets are limited to 8 symbols")
    if np.any(m <= 0):
        raise DomainError("M must be positive")
    if dist is None:
        dist = 1.0 - np.eye(p.size, m.size)
    dist = np.asarray(dist, dtype=float)
    if delta < 0:
        raise DomainError("delta must be non-negative")
    live = p > 0
    p = p[live]
    dist = dist[live]
    log_m = np.log(m)
    grid = [0.0] + list(np.logspace(-3, 3, 31) if s_grid is None else s_grid)
    results = []
    all_ok = True
    for s in grid:
        val, _, ok = _lagrangian(p, log_m, dist, s)
        all_ok &= ok
        results.append(val - s * delta)
    k = int(np.argmax(results))
    best_s, best = grid[k], results[k]
    if 0 < k < len(grid) - 1:
        def dual(s):
            return _lagrangian(p, log_m, dist, s)[0] - s * delta

        s_ref, v_ref = _golden_max(dual, grid[k - 1], grid[k + 1], tol=1e-9)
        if v_ref > best:
            best_s, best = s_ref, v_ref
    boundary = k == len(grid) - 1
    return RateFunction(best, best_s, all_ok, boundary)


class ConverseCheck(NamedTuple):
    normalized_log_mass: float
    delta: float
    rate: float


def converse_check(spec: BlowupSpec, M=None) -> ConverseCheck:
    """(1/n) ln M^n(A) against R(delta) with delta = (1/n) E d_n(X^n, A).

    M defaults to the (common) coordinate marginal, giving the concentration
    exponent itself.
    """
    if spec.members.size == 0:
        raise DomainError("the set must be non-empty")
    base = spec.base[0]
    if not np.allclose(spec.base, base):
        raise DomainError("converse check needs i.i.d. coordinates")
    m = base if M is None else np.asarray(M, dtype=float)
    digits = spec.digits()[spec.members]
    log_mass = float(logsumexp(np.log(m)[digits].sum(axis=1)))
    dist = hamming_distance_to_set(spec)
    delta = float(np.dot(spec.point_masses(), dist)) / spec.n
    rate = rate_function(base, m, delta).value
    return ConverseCheck(log_mass / spec.n, delta, rate)
