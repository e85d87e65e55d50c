"""Concentration constants for LDPC ensembles, expander graphs and
message passing over ISI channels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Mapping, NamedTuple

from .special_functions import DomainError, binary_entropy, binary_entropy_inv

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _coerce(value):
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    return float(value)


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective degree distributions lambda(x) = sum lambda_i x^{i-1}
    and rho(x) = sum rho_i x^{i-1}.

    Coefficients given as ints, Fractions or decimal strings stay exact, so
    derived quantities are exact rationals; floats propagate as floats.
    """

    lambda_coeffs: Mapping[int, object]
    rho_coeffs: Mapping[int, object]

    def __post_init__(self):
        lam = {int(i): _coerce(v) for i, v in self.lambda_coeffs.items() if v != 0}
        rho = {int(i): _coerce(v) for i, v in self.rho_coeffs.items() if v != 0}
        for name, coeffs in (("lambda", lam), ("rho", rho)):
            if not coeffs:
                raise DomainError(f"{name} has no non-zero coefficients")
            if any(i < 1 for i in coeffs) or any(v < 0 for v in coeffs.values()):
                raise DomainError(f"{name} needs degrees >= 1 and non-negative weights")
            if abs(float(sum(coeffs.values())) - 1.0) > 1e-12:
                raise DomainError(f"{name} coefficients must sum to 1")
        object.__setattr__(self, "lambda_coeffs", dict(sorted(lam.items())))
        object.__setattr__(self, "rho_coeffs", dict(sorted(rho.items())))

    @classmethod
    def regular(cls, d_v: int, d_c: int) -> "DegreeDistribution":
        return cls({d_v: 1}, {d_c: 1})

    @classmethod
    def parse(cls, text: str) -> "DegreeDistribution":
        """Read lines 'v i lambda_i' and 'c i rho_i'; '#' starts a comment."""
        lam, rho = {}, {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3 or parts[0] not in ("v", "c"):
                raise DomainError(f"line {lineno}: expected 'v i value' or 'c i value'")
            target = lam if parts[0] == "v" else rho
            target[int(parts[1])] = Fraction(parts[2])
        return cls(lam, rho)

    @property
    def lambda_integral(self):
        return sum(v / i for i, v in self.lambda_coeffs.items())

    @property
    def rho_integral(self):
        return sum(v / i for i, v in self.rho_coeffs.items())

    @property
    def design_rate(self):
        return 1 - self.rho_integral / self.lambda_integral

    @property
    def avg_check_degree(self):
        """a_R = d_c^avg = 1 / int rho."""
        return 1 / self.rho_integral

    @property
    def max_check_degree(self) -> int:
        return max(self.rho_coeffs)

    @property
    def check_node_fractions(self) -> dict:
        """Gamma_i = (rho_i / i) / int rho, the node-perspective check degrees."""
        total = self.rho_integral
        return {i: (v / i) / total for i, v in self.rho_coeffs.items()}

    @property
    def rho_derivative_at_one(self):
        return sum(v * (i - 1) for i, v in self.rho_coeffs.items())

    def lam(self, x: float) -> float:
        return sum(float(v) * x ** (i - 1) for i, v in self.lambda_coeffs.items())

    def rho(self, x: float) -> float:
        return sum(float(v) * x ** (i - 1) for i, v in self.rho_coeffs.items())

    @property
    def is_regular(self) -> bool:
        return len(self.lambda_coeffs) == 1 and len(self.rho_coeffs) == 1


class DegreeStats(NamedTuple):
    design_rate: float
    avg_check_degree: float
    check_fractions: dict
    identity_gap: float


def degree_stats(dd: DegreeDistribution) -> DegreeStats:
    """Design rate, a_R, Gamma and |sum (i+1)^2 Gamma_i - ((rho'(1)+3) a_R + 1)|."""
    gamma = dd.check_node_fractions
    lhs = sum((i + 1) ** 2 * g for i, g in gamma.items())
    rhs = (dd.rho_derivative_at_one + 3) * dd.avg_check_degree + 1
    return DegreeStats(dd.design_rate, dd.avg_check_degree, gamma, abs(float(lhs - rhs)))


class DistanceInterval(NamedTuple):
    lo: float
    hi: float
    confidence: float
    vacuous: bool


def min_distance_interval(n: int, rate: float, alpha: float) -> DistanceInterval:
    """n h2^{-1}(1-R) +/- alpha sqrt(n), holding with probability >= 1 - 2 e^{-alpha^2/2}."""
    if n < 1:
        raise DomainError("n must be positive")
    if not 0 < rate < 1:
        raise DomainError("rate must lie in (0, 1)")
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    centre = n * binary_entropy_inv(1.0 - rate)
    half = alpha * math.sqrt(n)
    confidence = 1.0 - 2.0 * math.exp(-alpha * alpha / 2.0)
    return DistanceInterval(centre - half, centre + half, confidence, confidence <= 0)


class CyclesBound(NamedTuple):
    eta: float
    exponent_bits: float
    azuma_exponent_nats: float
    zero_probability: bool

    def bound(self, n: int) -> float:
        """2 * 2^{-n exponent}; 0 when eta > 1."""
        if self.zero_probability:
            return 0.0
        return 2.0 * 2.0 ** (-n * self.exponent_bits)

    def azuma_bound(self, n: int) -> float:
        return 2.0 * math.exp(-n * self.azuma_exponent_nats)


def cycles_bound(dd: DegreeDistribution, alpha: float) -> CyclesBound:
    """Concentration of the fundamental-cycle count at deviation alpha n.

    The per-n exponent is 1 - h2((1 - eta)/2) bits with
    eta = alpha / ((1 - R_d) a_R); for eta > 1 the event is impossible.
    """
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    eta = alpha / (float(1 - dd.design_rate) * float(dd.avg_check_degree))
    if eta > 1.0:
        return CyclesBound(eta, math.inf, eta * eta / 2.0, True)
    return CyclesBound(eta, 1.0 - binary_entropy((1.0 - eta) / 2.0), eta * eta / 2.0, False)


CHANNELS = ("MBIOS", "BSC", "BEC")


def _channel(name: str) -> str:
    key = name.upper()
    if key in ("BIAWGN", "BIAWGNC", "AWGN"):
        key = "MBIOS"
    if key not in CHANNELS:
        raise DomainError(f"channel must be one of {CHANNELS} (or BIAWGN)")
    return key


def parity_entropy_bound(r: int, capacity: float, channel: str = "MBIOS") -> float:
    """Upper bound (bits) on the entropy of a parity of r code bits given the output."""
    if r < 1:
        raise DomainError("r must be a positive integer")
    if not 0 < capacity <= 1:
        raise DomainError("capacity must lie in (0, 1] bits")
    kind = _channel(channel)
    if kind == "BEC":
        return 1.0 - capacity**r
    if kind == "BSC":
        crossover = binary_entropy_inv(1.0 - capacity)
        return binary_entropy((1.0 - (1.0 - 2.0 * crossover) ** r) / 2.0)
    return binary_entropy((1.0 - capacity ** (r / 2.0)) / 2.0)


class CondEntropyConstants(NamedTuple):
    B_orig: float
    B_tight: float
    factor: float
    weighted_sum: float
    orig_applicable: bool


def cond_entropy_concentration(dd: DegreeDistribution, capacity: float,
                               channel: str = "MBIOS") -> CondEntropyConstants:
    """Exponent coefficients B in P(|H(X|Y) - E H(X|Y)| >= xi sqrt(n)) <= 2 exp(-B xi^2).

    B_orig uses the maximal check degree; B_tight weights each check degree by
    Gamma_i and the squared parity-entropy bound for the channel.
    """
    one_minus_rate = float(1 - dd.design_rate)
    d_max = dd.max_check_degree
    b_orig = 1.0 / (2.0 * (d_max + 1) ** 2 * one_minus_rate)
    weighted = sum(float(g) * (i + 1) ** 2 * parity_entropy_bound(i, capacity, channel) ** 2
                   for i, g in dd.check_node_fractions.items())
    b_tight = math.inf if weighted == 0 else 1.0 / (2.0 * one_minus_rate * weighted)
    return CondEntropyConstants(b_orig, b_tight, b_tight / b_orig, weighted, True)


def tightened_weighted_sum(gammas: Mapping[int, float], capacity: float, channel: str = "MBIOS") -> float:
    """sum (i+1)^2 Gamma_i h_i^2 for a (possibly truncated) check-degree profile."""
    return sum(float(g) * (i + 1) ** 2 * parity_entropy_bound(i, capacity, channel) ** 2
               for i, g in gammas.items())


class BpThreshold(NamedTuple):
    p_bp: float
    capacity: float
    bracketed: bool


def _golden_min(fn, lo, hi, tol=1e-12):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > tol:
        if f1 > f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = fn(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = fn(x1)
    x = 0.5 * (lo + hi)
    return x, fn(x)


def _bp_ratio(dd: DegreeDistribution, x: float) -> float:
    """x / lambda(1 - rho(1 - x)); 1 - (1-x)^k via expm1/log1p keeps precision near 0."""
    if x >= 1.0:
        y = sum(float(v) for i, v in dd.rho_coeffs.items() if i > 1)
    else:
        y = sum(float(v) * -math.expm1((i - 1) * math.log1p(-x)) for i, v in dd.rho_coeffs.items())
    denom = dd.lam(y)
    return math.inf if denom <= 0 else x / denom


def bec_bp_threshold(dd: DegreeDistribution, scan_points: int = 20001) -> BpThreshold:
    """BP erasure threshold inf_{x in (0,1]} x / lambda(1 - rho(1 - x)).

    A log-spaced scan locates the minimiser (which may sit at the left edge
    x -> 0, as for degree-2 variable nodes), then golden-section search
    refines it inside the bracketing cell.
    """
    xs = [10.0 ** (-12 + 12.0 * k / (scan_points - 1)) for k in range(scan_points)]
    values = [_bp_ratio(dd, x) for x in xs]
    k = min(range(len(xs)), key=values.__getitem__)
    lo = xs[max(k - 1, 0)] if k > 0 else 0.0
    hi = xs[min(k + 1, len(xs) - 1)]
    bracketed = 0 < k < len(xs) - 1
    best = values[k]
    if lo > 0 or k > 0:
        _, refined = _golden_min(lambda x: _bp_ratio(dd, x), max(lo, 1e-300), hi)
        best = min(best, refined)
    return BpThreshold(best, 1.0 - best, bracketed)


class ExpanderBound(NamedTuple):
    value: float
    expected_neighbors: float
    vacuous: bool


def expander_bound(n: int, l: int, r: int, alpha: float, delta: float) -> ExpanderBound:
    """Lower bound on the neighbourhood size of alpha n left vertices.

    n [l (1 - (1-alpha)^r) / r - sqrt(2 l alpha (h(alpha) + delta))], h in nats.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if delta <= 0:
        raise DomainError("delta must be positive")
    if min(n, l, r) < 1:
        raise DomainError("n, l, r must be positive")
    expected = n * l * (1.0 - (1.0 - alpha) ** r) / r
    value = expected - n * math.sqrt(2.0 * l * alpha * (binary_entropy(alpha, math.e) + delta))
    return ExpanderBound(max(value, 0.0), expected, value <= 0)


@dataclass(frozen=True)
class IsiSpec:
    d_v: int
    d_c: int
    W: int
    I: int
    ell: int

    def __post_init__(self):
        if self.d_v < 2 or self.d_c < 2:
            raise DomainError("d_v and d_c must be at least 2")
        if self.W < 0 or self.I < 0:
            raise DomainError("W and I must be non-negative")
        if self.ell < 1:
            raise DomainError("ell must be at least 1")


class IsiParams(NamedTuple):
    alpha_growth: int
    N_e: int
    N_Y: int
    inv_beta: Fraction
    beta: Fraction
    gamma_opt: int | None
    previous_inv_beta: int

    @property
    def improvement(self) -> float:
        return float(self.previous_inv_beta / self.inv_beta)


def isi_params(spec: IsiSpec, tree_counts: tuple | None = None) -> IsiParams:
    """Edge and output counts in the depth-ell neighbourhood and the resulting beta.

    The channel memory I does not enter these counts.  gamma is computed only
    when the tree counts (N_v, N_c) are supplied.
    """
    d_v, d_c, w = spec.d_v, spec.d_c, spec.W
    branch = d_v - 1 + 2 * w * d_v
    growth = branch * (d_c - 1)
    series = sum(growth**i for i in range(spec.ell))
    n_e = 1 + d_c * branch * series
    n_y = (2 * w + 1) * d_v * series
    inv_beta = Fraction(8 * (4 * d_v * n_e**2 + n_y**2), d_v**2)
    gamma = None
    if tree_counts is not None:
        n_v, n_c = tree_counts
        gamma = Fraction(n_v) ** 2 + (Fraction(d_c, d_v) * n_c) ** 2
    previous = 544 * d_v ** (2 * spec.ell - 1) * d_c ** (2 * spec.ell)
    return IsiParams(growth, n_e, n_y, inv_beta, 1 / inv_beta, gamma, previous)
