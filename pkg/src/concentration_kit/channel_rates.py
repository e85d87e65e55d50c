"""Achievable rates and converse bounds for binary-input channels.

Covers the binary-input AWGN closed forms, Volterra channels with memory
(martingale parameters by exhaustive enumeration of input windows), the two
martingale-based achievable rates, Blahut-Arimoto capacity of a DMC and the
two output-distribution converse bounds for good codes.

All rates are in nats.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .info_measures import FiniteDistribution
from .special_functions import DomainError, binary_divergence, log_gaussian_q

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MAX_MEMORY = 4
DEFAULT_MOMENT_ORDER = 64
RHO_PROBE_POINTS = 201
RHO_DENSE_STEP = 1e-4
RHO_TOL = 1e-10


# ---------------------------------------------------------------------------
# Binary-input AWGN


def biawgn_rate(snr: float) -> float:
    """Common martingale achievable rate snr/4 - ln cosh(snr/4) for symmetric inputs."""
    if snr < 0 or not math.isfinite(snr):
        raise DomainError("snr must be finite and non-negative")
    x = snr / 4.0
    # ln cosh x = x + log1p(e^{-2x}) - ln 2, stable for large x
    return math.log(2.0) - math.log1p(math.exp(-2.0 * x))


class SeriesValue(NamedTuple):
    value: float
    remainder_bound: float


def _capacity_term_log(i: np.ndarray, snr: float) -> np.ndarray:
    """log of |term i| = exp(2i(i+1)snr) Q((1+2i)sqrt(snr)) / (i(i+1))."""
    from scipy import special

    root = math.sqrt(snr)
    return (2.0 * i * (i + 1.0) * snr + special.log_ndtr(-(1.0 + 2.0 * i) * root)
            - np.log(i * (i + 1.0)))


def biawgn_capacity(snr: float, terms: int = 2000) -> SeriesValue:
    """Symmetric-input mutual information of the BIAWGN channel by its alternating series.

    The partial sum stops after `terms` series terms; `remainder_bound` is the
    magnitude of the next term, which bounds the truncation error.
    """
    if snr < 0 or not math.isfinite(snr):
        raise DomainError("snr must be finite and non-negative")
    if terms < 1:
        raise DomainError("terms must be at least 1")
    root = math.sqrt(snr)
    head = (math.log(2.0) + (2.0 * snr - 1.0) * math.exp(log_gaussian_q(root))
            - math.sqrt(2.0 * snr / math.pi) * math.exp(-snr / 2.0))
    idx = np.arange(1, terms + 2, dtype=float)
    magnitudes = np.exp(_capacity_term_log(idx, snr))
    signs = np.where(idx % 2 == 1, -1.0, 1.0)
    # Sum smallest terms first to limit rounding
    body = float(np.sum((signs[:-1] * magnitudes[:-1])[::-1]))
    return SeriesValue(head + body, float(magnitudes[-1]))


# ---------------------------------------------------------------------------
# Volterra channels


@dataclass
class VolterraKernel:
    """Kernels of a Volterra system of order at most 3 and memory q."""

    memory: int
    h0: float = 0.0
    h1: dict = field(default_factory=dict)
    h2: dict = field(default_factory=dict)
    h3: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.memory < 0:
            raise DomainError("memory must be non-negative")
        self.h1 = {(k if isinstance(k, tuple) else (k,)): float(v) for k, v in self.h1.items()}
        self.h2 = {tuple(k): float(v) for k, v in self.h2.items()}
        self.h3 = {tuple(k): float(v) for k, v in self.h3.items()}
        for arity, table in ((1, self.h1), (2, self.h2), (3, self.h3)):
            for key in table:
                if len(key) != arity:
                    raise DomainError(f"order-{arity} kernel key {key} has wrong length")
                if any(i < 0 or i > self.memory for i in key):
                    raise DomainError(f"kernel index {key} outside [0, {self.memory}]")

    @property
    def order(self) -> int:
        for level, table in ((3, self.h3), (2, self.h2), (1, self.h1)):
            if any(v != 0.0 for v in table.values()):
                return level
        return 0

    def terms(self):
        """Yield (lag tuple, coefficient) for every non-constant kernel entry."""
        for table in (self.h1, self.h2, self.h3):
            yield from table.items()

    @classmethod
    def parse(cls, text: str, memory: int | None = None) -> "VolterraKernel":
        """Read lines of the form 'h1 i v', 'h2 i j v', 'h3 i j k v' (and optionally 'h0 v')."""
        h0 = 0.0
        tables = {1: {}, 2: {}, 3: {}}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            tag = parts[0].lower()
            if tag not in ("h0", "h1", "h2", "h3"):
                raise DomainError(f"line {lineno}: unknown kernel tag {parts[0]!r}")
            arity = int(tag[1])
            if len(parts) != arity + 2:
                raise DomainError(f"line {lineno}: expected {arity} indices and a value")
            try:
                value = float(parts[-1])
                lags = tuple(int(p) for p in parts[1:-1])
            except ValueError as exc:
                raise DomainError(f"line {lineno}: {exc}") from None
            if arity == 0:
                h0 = value
            else:
                tables[arity][lags] = value
        if memory is None:
            memory = max((max(k) for t in tables.values() for k in t), default=0)
        return cls(memory, h0, tables[1], tables[2], tables[3])

    def to_text(self) -> str:
        lines = [f"h0 {self.h0!r}"] if self.h0 else []
        for arity, table in ((1, self.h1), (2, self.h2), (3, self.h3)):
            for key, value in table.items():
                lines.append(f"h{arity} " + " ".join(map(str, key)) + f" {value!r}")
        return "\n".join(lines) + "\n"


def table_kernel() -> VolterraKernel:
    """Third-order Volterra system with memory 2 used for the rate curves."""
    return VolterraKernel(
        memory=2,
        h1={(0,): 1.0, (1,): 0.5, (2,): -0.8},
        h2={(0, 0): 1.0, (1, 1): -0.3, (0, 1): 0.6},
        h3={(0, 0, 0): 1.0, (1, 1, 1): -0.5, (0, 0, 1): 1.2, (0, 1, 1): 0.8, (0, 1, 2): 0.6},
    )


def memoryless_kernel() -> VolterraKernel:
    """Identity map: the binary-input AWGN channel as a Volterra system."""
    return VolterraKernel(memory=0, h1={(0,): 1.0})


def volterra_apply(kernel: VolterraKernel, u: Sequence[float]) -> np.ndarray:
    """Noise-free output [Du]_i; inputs before the first sample are taken as zero."""
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("input must be finite")
    n = u.size
    padded = np.concatenate([np.zeros(kernel.memory), u])

    def lagged(lag):
        start = kernel.memory - lag
        return padded[start:start + n]

    out = np.full(n, kernel.h0)
    for lags, coeff in kernel.terms():
        product = np.ones(n)
        for lag in lags:
            product = product * lagged(lag)
        out += coeff * product
    return out


def _window_outputs(kernel: VolterraKernel, window: np.ndarray, shift: int) -> np.ndarray:
    """[Du] at time k+shift from a window holding u_{k-q}..u_{k+q} on the last axis."""
    q = kernel.memory
    out = np.zeros(window.shape[:-1])
    for lags, coeff in kernel.terms():
        product = coeff
        for lag in lags:
            product = product * window[..., q + shift - lag]
        out = out + product
    return out


def _bit_grid(nbits: int, alpha: float):
    """All 0/1 patterns of length nbits with their i.i.d. probabilities (bit 1 w.p. alpha)."""
    if nbits == 0:
        return np.zeros((1, 0)), np.ones(1)
    bits = np.array(list(itertools.product((0, 1), repeat=nbits)), dtype=float)
    weights = np.prod(np.where(bits == 1, alpha, 1.0 - alpha), axis=1)
    return bits, weights


@dataclass
class WindowMoments:
    d: float
    sigma2: float
    moments: np.ndarray  # max conditional E[Z^l | past] for l = 2..m


def _window_moments(kernel: VolterraKernel, amplitude: float, alpha: float,
                    zero_positions: int, max_order: int, absolute: bool) -> WindowMoments:
    """Extremes of the martingale jump Z_k for one boundary configuration.

    `zero_positions` leading window slots hold the zero padding that precedes
    the first transmitted symbol.
    """
    q = kernel.memory
    width = 2 * q + 1
    past = q - zero_positions
    past_bits, past_w = _bit_grid(2 * past, alpha)
    now_bits, now_w = _bit_grid(2, alpha)
    next_bits, next_w = _bit_grid(2 * q, alpha)
    n_past, n_now, n_next = len(past_w), len(now_w), len(next_w)

    def symbols(bits):
        return amplitude * (2.0 * bits - 1.0)

    shape = (n_past, n_now, n_next, width)
    first = np.zeros(shape)
    second = np.zeros(shape)
    if past:
        ps = symbols(past_bits)
        first[..., zero_positions:q] = ps[:, None, None, :past]
        second[..., zero_positions:q] = ps[:, None, None, past:]
    ns = symbols(now_bits)
    first[..., q] = ns[None, :, None, 0]
    second[..., q] = ns[None, :, None, 1]
    if q:
        fs = symbols(next_bits)
        first[..., q + 1:] = fs[None, None, :, :q]
        second[..., q + 1:] = fs[None, None, :, q:]

    energy = np.zeros(shape[:-1])
    for shift in range(q + 1):
        diff = _window_outputs(kernel, first, shift) - _window_outputs(kernel, second, shift)
        energy += diff * diff
    given_now = energy @ next_w                      # E[G | F_k]
    given_past = given_now @ now_w                   # E[G | F_{k-1}]
    jumps = given_past[:, None] - given_now          # Z_k per (past, current)
    powers = np.stack([jumps ** l for l in range(2, max_order + 1)])
    cond = powers @ now_w                            # (orders, n_past)
    moments = cond.max(axis=1)
    reach = np.abs(jumps).max() if absolute else jumps.max()
    return WindowMoments(float(reach), float(moments[0]), moments)


@dataclass
class VolterraParams:
    """Martingale parameters of the codeword-distance martingale.

    `d`, `sigma2` and `moments` are maxima over every window including the
    start-up windows; the `steady_*` fields exclude them.
    """

    D_v: float
    d: float
    sigma2: float
    gammas: np.ndarray  # gamma_l for l = 2..m
    moments: np.ndarray
    steady_d: float
    steady_sigma2: float
    edge_variances: tuple

    @property
    def gamma2(self) -> float:
        return float(self.gammas[0])

    def gamma(self, order: int) -> float:
        return float(self.gammas[order - 2])


def _output_variance(kernel: VolterraKernel, amplitude: float, alpha: float,
                     zero_positions: int) -> float:
    q = kernel.memory
    bits, weights = _bit_grid(q + 1 - zero_positions, alpha)
    window = np.zeros((len(weights), 2 * q + 1))
    window[:, zero_positions:q + 1] = amplitude * (2.0 * bits - 1.0)
    out = _window_outputs(kernel, window, 0)
    mean = out @ weights
    return float(((out - mean) ** 2) @ weights)


def volterra_martingale_params(kernel: VolterraKernel, A: float, alpha: float = 0.5,
                               max_order: int = DEFAULT_MOMENT_ORDER,
                               jump_bound: str = "absolute") -> VolterraParams:
    """Exact martingale parameters for i.i.d. inputs +-A with P(+A) = alpha.

    With jump_bound="absolute", d bounds |Z_k| and sigma2 <= d^2 holds by
    construction. With "upper", d only bounds Z_k from above, which is all the
    one-sided rate bounds need; for asymmetric inputs gamma_2 may then exceed 1.
    """
    if jump_bound not in ("absolute", "upper"):
        raise DomainError("jump_bound must be 'absolute' or 'upper'")
    if kernel.memory > MAX_MEMORY:
        raise DomainError(f"enumeration capped at memory {MAX_MEMORY}")
    if not A > 0:
        raise DomainError("amplitude A must be positive")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie strictly between 0 and 1")
    if max_order < 2:
        raise DomainError("max_order must be at least 2")
    q = kernel.memory
    per_edge = [_window_moments(kernel, A, alpha, zeros, max_order, jump_bound == "absolute")
                for zeros in range(q + 1)]
    steady = per_edge[0]
    d = max(w.d for w in per_edge)
    if d <= 0.0:
        raise DomainError("channel output does not depend on the input")
    moments = np.max(np.stack([w.moments for w in per_edge]), axis=0)
    orders = np.arange(2, max_order + 1)
    gammas = moments / d ** orders
    edges = tuple(_output_variance(kernel, A, alpha, q - k + 1) for k in range(1, q + 1))
    return VolterraParams(
        D_v=_output_variance(kernel, A, alpha, 0),
        d=d,
        sigma2=float(moments[0]),
        gammas=gammas,
        moments=moments,
        steady_d=steady.d,
        steady_sigma2=steady.sigma2,
        edge_variances=edges,
    )


def biawgn_params(A: float, alpha: float = 0.5, max_order: int = DEFAULT_MOMENT_ORDER) -> VolterraParams:
    """Closed-form martingale parameters of the memoryless channel (upper jump bound)."""
    a = alpha * (1.0 - alpha)
    d = 8.0 * a * A * A
    orders = np.arange(2, max_order + 1)
    ratio = (1.0 - 2.0 * a) / (2.0 * a)
    gammas = (1.0 - 2.0 * a) * (1.0 + (-1.0) ** orders * ratio ** (orders - 1))
    moments = gammas * d ** orders
    D_v = 4.0 * a * A * A
    return VolterraParams(D_v, d, float(moments[0]), gammas, moments, d, float(moments[0]), ())


# ---------------------------------------------------------------------------
# Achievable rates


def _log_gamma_factor(s: float, gamma: float) -> float:
    """ln((e^{-gamma s} + gamma e^{s}) / (1 + gamma))."""
    return s + math.log(gamma + math.exp(-(1.0 + gamma) * s)) - math.log1p(gamma)


def _log_moment_factor(x: float, gammas: Sequence[float]) -> float:
    """ln of 1 + sum_{l<m} (g_l - g_m) x^l / l! + g_m (e^x - 1 - x) for g_2..g_m."""
    g = np.asarray(gammas, dtype=float)
    g_last = g[-1]
    if x <= 30.0:
        total, term = 1.0, x
        for l in range(2, len(g) + 1):
            term = term * x / l
            total += (g[l - 2] - g_last) * term
        total += g_last * (math.expm1(x) - x)
        return math.log(total) if total > 0 else -math.inf
    # Factor out e^x so nothing overflows
    scaled = g_last * (-math.expm1(-x) - x * math.exp(-x)) + math.exp(-x)
    log_x = math.log(x)
    for l in range(2, len(g) + 1):
        coeff = g[l - 2] - g_last
        if coeff:
            scaled += coeff * math.exp(l * log_x - math.lgamma(l + 1) - x)
    return x + math.log(scaled) if scaled > 0 else -math.inf


class RhoMax(NamedTuple):
    value: float
    rho: float
    unimodal: bool


def maximize_over_rho(objective, probe: int = RHO_PROBE_POINTS) -> RhoMax:
    """Maximize a function of rho on [0, 1].

    A coarse probe checks for a single peak; golden-section search then
    refines the bracket to 1e-10. Otherwise a dense 1e-4 grid is used.
    """
    grid = np.linspace(0.0, 1.0, probe)
    values = np.array([objective(r) for r in grid])
    best = int(np.argmax(values))
    steps = np.diff(values)
    scale = max(1.0, float(np.max(np.abs(values))))
    rising = steps > 1e-14 * scale
    falling = steps < -1e-14 * scale
    # unimodal if no rise follows a fall
    first_fall = np.argmax(falling) if falling.any() else len(steps)
    unimodal = not rising[first_fall:].any()
    if not unimodal:
        dense = np.arange(0.0, 1.0 + RHO_DENSE_STEP / 2, RHO_DENSE_STEP)
        dense_values = np.array([objective(r) for r in dense])
        i = int(np.argmax(dense_values))
        return RhoMax(float(dense_values[i]), float(dense[i]), False)
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, probe - 1)]
    a, b = lo + (1 - GOLDEN) * (hi - lo), lo + GOLDEN * (hi - lo)
    fa, fb = objective(a), objective(b)
    while hi - lo > RHO_TOL:
        if fa < fb:
            lo, a, fa = a, b, fb
            b = lo + GOLDEN * (hi - lo)
            fb = objective(b)
        else:
            hi, b, fb = b, a, fa
            a = lo + (1 - GOLDEN) * (hi - lo)
            fa = objective(a)
    candidates = [(values[best], grid[best]), (fa, a), (fb, b)]
    value, rho = max(candidates)
    return RhoMax(float(value), float(rho), True)


def bennett_rate_objective(params: VolterraParams, sigma_nu2: float):
    gamma = params.gamma2
    slope = params.D_v / (4.0 * sigma_nu2)
    scale = params.d / (8.0 * sigma_nu2)
    return lambda rho: rho * slope - _log_gamma_factor(rho * scale, gamma)


def moment_rate_objective(params: VolterraParams, sigma_nu2: float, m: int):
    gammas = params.gammas[: m - 1]
    slope = params.D_v / (4.0 * sigma_nu2)
    scale = params.d / (8.0 * sigma_nu2)
    return lambda rho: rho * slope - _log_moment_factor(rho * scale, gammas)


class BennettRate(NamedTuple):
    value: float
    interior: bool  # True when the unconstrained optimum has rho < 1


def bennett_rate_closed_form(params: VolterraParams, sigma_nu2: float) -> BennettRate:
    gamma = params.gamma2
    x1 = params.d * (1.0 + gamma) / (8.0 * sigma_nu2)
    # threshold on D_v below which the optimal rho is interior
    if x1 > 700:
        threshold = params.d / 2.0
    else:
        grow = math.exp(x1)
        threshold = gamma * params.d * (grow - 1.0) / (2.0 * (1.0 + gamma * grow))
    if params.D_v < threshold:
        base = gamma / (1.0 + gamma)
        shifted = base + 2.0 * params.D_v / (params.d * (1.0 + gamma))
        return BennettRate(binary_divergence(shifted, base), True)
    value = params.D_v / (4.0 * sigma_nu2) - _log_gamma_factor(params.d / (8.0 * sigma_nu2), gamma)
    return BennettRate(value, False)


class AchievableRates(NamedTuple):
    R1: float
    R2: float
    rho2: float
    unimodal: bool
    gamma2_above_one: bool


def achievable_rates(params: VolterraParams, sigma_nu2: float, m: int = 2) -> AchievableRates:
    """Bennett-type rate R1 (closed form) and moment-sequence rate R2 of order m."""
    if not sigma_nu2 > 0:
        raise DomainError("noise variance must be positive")
    if m < 2 or m % 2:
        raise DomainError("m must be an even integer >= 2")
    if m - 1 > len(params.gammas):
        raise DomainError(f"parameters only carry moments up to order {len(params.gammas) + 1}")
    if not params.gamma2 > 0:
        raise DomainError("gamma_2 must be positive")
    r1 = bennett_rate_closed_form(params, sigma_nu2).value
    r2 = maximize_over_rho(moment_rate_objective(params, sigma_nu2, m))
    return AchievableRates(r1, r2.value, r2.rho, r2.unimodal, params.gamma2 > 1.0)


# ---------------------------------------------------------------------------
# Discrete memoryless channels


class ChannelMatrix:
    """Row-stochastic transition matrix T(y|x), rows indexed by inputs."""

    def __init__(self, matrix, tol: float = 1e-12):
        mat = np.asarray(matrix, dtype=float)
        if mat.ndim != 2 or mat.size == 0:
            raise DomainError("channel matrix must be a non-empty 2-D array")
        if np.any(mat < 0) or not np.all(np.isfinite(mat)):
            raise DomainError("channel entries must be finite and non-negative")
        if np.any(np.abs(mat.sum(axis=1) - 1.0) > tol):
            raise DomainError("channel rows must sum to one")
        self.matrix = mat

    @property
    def inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def outputs(self) -> int:
        return self.matrix.shape[1]

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.matrix > 0))

    def log_ratio_constant(self) -> float:
        """c(T) = 2 max_x max_{y,y'} |ln T(y|x) / T(y'|x)|; infinite with zero entries."""
        if not self.strictly_positive:
            return math.inf
        logs = np.log(self.matrix)
        return float(2.0 * np.max(logs.max(axis=1) - logs.min(axis=1)))

    @classmethod
    def bsc(cls, p: float) -> "ChannelMatrix":
        return cls([[1 - p, p], [p, 1 - p]])


class DmcCapacity(NamedTuple):
    capacity: float
    caod: FiniteDistribution
    input_distribution: np.ndarray
    iterations: int
    converged: bool


def _row_divergences(T: np.ndarray, output: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(T > 0, T * np.log(T / output), 0.0)
    return terms.sum(axis=1)


def dmc_capacity(channel, tol: float = 1e-10, max_iter: int = 500000) -> DmcCapacity:
    """Blahut-Arimoto iterations until the capacity sandwich is narrower than tol."""
    if not isinstance(channel, ChannelMatrix):
        channel = ChannelMatrix(channel)
    T = channel.matrix
    p = np.full(channel.inputs, 1.0 / channel.inputs)
    converged = False
    lower = upper = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        output = p @ T
        div = _row_divergences(T, output)
        weights = p * np.exp(div - div.max())
        lower = math.log(weights.sum()) + float(div.max())
        upper = float(div.max())
        if upper - lower < tol:
            converged = True
            break
        p = weights / weights.sum()
    output = p @ T
    labels = tuple(range(channel.outputs))
    return DmcCapacity(0.5 * (lower + upper), FiniteDistribution(labels, tuple(output / output.sum())),
                       p, iterations, converged)


class ConverseBounds(NamedTuple):
    pv1: float  # nan when the channel has zero entries or eps >= 1/2
    pv2: float  # nan when n < 2
    c_T: float
    capacity: float
    good_code_constant: float


def good_code_constant(c_T: float, eps: float) -> float:
    """a = c(T) sqrt(ln(1/(1-2 eps)) / 2)."""
    if not 0.0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 1/2)")
    return c_T * math.sqrt(0.5 * -math.log1p(-2.0 * eps))


def converse_output_bounds(n: int, M: int | None = None, eps: float = 0.1, T=None,
                           log_M: float | None = None, capacity: float | None = None) -> ConverseBounds:
    """Upper bounds on D(P_{Y^n} || P*_{Y^n}) for any (n, M, eps) code.

    Pass either the code size `M` or its logarithm `log_M`.
    """
    if T is None:
        raise DomainError("a channel matrix is required")
    channel = T if isinstance(T, ChannelMatrix) else ChannelMatrix(T)
    if n < 1:
        raise DomainError("n must be positive")
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if log_M is None:
        if M is None or M < 1:
            raise DomainError("code size M must be a positive integer")
        log_M = math.log(M)
    if capacity is None:
        capacity = dmc_capacity(channel).capacity
    c_T = channel.log_ratio_constant()
    base = n * capacity - log_M
    if channel.strictly_positive and eps < 0.5:
        pv1 = (base - math.log(eps)
               + c_T * math.sqrt(0.5 * n * -math.log1p(-2.0 * eps)))
        a = good_code_constant(c_T, eps)
    else:
        pv1 = math.nan
        a = math.nan
    if n >= 2:
        ln_n = math.log(n)
        pv2 = (base
               + math.sqrt(2.0 * n) * ln_n ** 1.5
               * (1.0 + math.sqrt(-math.log1p(-eps) / ln_n))
               * (1.0 + math.log(channel.outputs) / ln_n)
               + 3.0 * ln_n + math.log(2.0 * channel.inputs * channel.outputs ** 2))
    else:
        pv2 = math.nan
    return ConverseBounds(pv1, pv2, c_T, capacity, a)
