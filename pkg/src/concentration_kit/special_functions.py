"""Scalar special functions shared by the bound formulas.

Entropies and divergences are evaluated in nats internally; base-2 values
are produced by a single division by ln 2.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import special

LN2 = math.log(2.0)
INF = math.inf


class DomainError(ValueError):
    """Raised when an argument lies outside the documented domain."""


def _check_prob(x: float, name: str = "x") -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise DomainError(f"{name}={x!r} is not in [0, 1]")
    return x


def xlogx(x: float) -> float:
    """x ln x with the convention 0 ln 0 = 0."""
    return 0.0 if x == 0.0 else x * math.log(x)


def binary_entropy(x: float, base: float = 2) -> float:
    """Binary entropy h(x) in the requested base (2 or e)."""
    x = _check_prob(x)
    # Rounding can push the sum a hair past ln 2 near x = 1/2.
    nats = min(-xlogx(x) - xlogx(1.0 - x), LN2)
    if base == 2:
        return nats / LN2
    if base == math.e or base == "e":
        return nats
    raise DomainError(f"unsupported base {base!r}; use 2 or e")


def binary_entropy_nats(x: float) -> float:
    return binary_entropy(x, base=math.e)


def binary_entropy_array(x: np.ndarray, base: float = 2) -> np.ndarray:
    """Vectorised binary entropy, used inside grid searches."""
    x = np.asarray(x, dtype=float)
    nats = -special.xlogy(x, x) - special.xlogy(1.0 - x, 1.0 - x)
    return nats / LN2 if base == 2 else nats


def binary_entropy_inv(y: float, tol: float = 1e-12) -> float:
    """Inverse of the base-2 binary entropy restricted to [0, 1/2].

    Plain bisection: h2 is increasing on [0, 1/2], so the bracket never breaks,
    including near zero where Newton steps misbehave.
    """
    y = _check_prob(y, "y")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binary_divergence(p: float, q: float) -> float:
    """d(p||q) between Bernoulli(p) and Bernoulli(q), in nats; may be +inf."""
    p = _check_prob(p, "p")
    q = _check_prob(q, "q")
    total = 0.0
    for a, b in ((p, q), (1.0 - p, 1.0 - q)):
        if a == 0.0:
            continue
        if b == 0.0:
            return INF
        total += a * (math.log(a) - math.log(b))
    # Rounding can push a true zero slightly negative.
    return max(total, 0.0)


class GaussianTail(NamedTuple):
    value: float
    lower: float
    upper: float


def gaussian_q(x: float) -> GaussianTail:
    """Gaussian tail Q(x) together with the classical exponential sandwich.

    For x <= 0 the sandwich is undefined; the trivially valid bounds 0 and 1
    are returned instead so callers never see NaN.
    """
    x = float(x)
    value = float(special.ndtr(-x))
    if x <= 0.0:
        return GaussianTail(value, 0.0, 1.0)
    density = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return GaussianTail(value, x / (1.0 + x * x) * density, density / x)


def log_gaussian_q(x: float) -> float:
    """ln Q(x), accurate far into the tail."""
    return float(special.log_ndtr(-float(x)))


def ow_phi(p: float) -> float:
    """Ordentlich-Weinberger constant phi(p) for p in [0, 1/2].

    phi(p) = ln((1-p)/p) / (1-2p), with the continuous value 2 at p = 1/2 and
    +inf at p = 0.
    """
    p = _check_prob(p, "p")
    if p > 0.5:
        raise DomainError("ow_phi expects p <= 1/2; pass the balance coefficient")
    if p == 0.0:
        return INF
    gap = 0.5 - p
    if gap < 1e-5:
        # ln((1-p)/p) = 2 artanh(1-2p); series of artanh(u)/u about u = 0.
        u = 2.0 * gap
        return 2.0 * (1.0 + u * u / 3.0 + u**4 / 5.0)
    return math.log((1.0 - p) / p) / (1.0 - 2.0 * p)


def psi_exp(u):
    """psi(u) = e^u - u - 1, computed without cancellation for small |u|."""
    u = np.asarray(u, dtype=float)
    return np.expm1(u) - u


def tau_exp(u):
    """tau(u) = u (e^u - 1)."""
    u = np.asarray(u, dtype=float)
    return u * np.expm1(u)
