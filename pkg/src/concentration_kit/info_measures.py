"""Divergences, total variation, Wasserstein distances and Pinsker-type
inequalities for distributions on finite sets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp, xlogy

from .special_functions import DomainError, ow_phi

PROB_SUM_TOL = 1e-12
DEFAULT_TRANSPORT_CAP = 64
EXACT_BALANCE_CAP = 20


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability vector on a labelled finite set."""

    labels: tuple
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or len(probs) != len(self.labels):
            raise DomainError("labels and probs must be 1-D and of equal length")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise DomainError("probabilities must be finite and non-negative")
        if abs(probs.sum() - 1.0) > PROB_SUM_TOL * max(1, len(probs)):
            raise DomainError(f"probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_probs(cls, probs: Sequence[float], labels: Sequence | None = None):
        probs = np.asarray(probs, dtype=float)
        if labels is None:
            labels = tuple(range(len(probs)))
        return cls(tuple(labels), probs)

    @classmethod
    def normalized(cls, weights: Sequence[float], labels: Sequence | None = None):
        weights = np.asarray(weights, dtype=float)
        return cls.from_probs(weights / weights.sum(), labels)

    @classmethod
    def from_json(cls, text: str):
        """Accepts {"labels": [...], "probs": [...]} or a bare list of probabilities."""
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid distribution JSON: {exc}") from None
        if isinstance(payload, list):
            return cls.from_probs(payload)
        if not isinstance(payload, dict) or "probs" not in payload:
            raise DomainError("distribution JSON needs a 'probs' list")
        probs = np.asarray(payload["probs"], dtype=float)
        labels = payload.get("labels", range(len(probs)))
        return cls(tuple(labels), probs)

    def to_json(self) -> str:
        return json.dumps({"labels": list(self.labels), "probs": self.probs.tolist()})

    def __len__(self):
        return len(self.probs)


@dataclass(frozen=True)
class FiniteMetricSpace:
    dist: np.ndarray

    def __post_init__(self):
        dist = np.asarray(self.dist, dtype=float)
        k = dist.shape[0]
        if dist.shape != (k, k):
            raise DomainError("distance matrix must be square")
        if np.any(dist < 0) or np.any(np.abs(np.diag(dist)) > 0):
            raise DomainError("distances must be non-negative with zero diagonal")
        if not np.allclose(dist, dist.T, atol=1e-12):
            raise DomainError("distance matrix must be symmetric")
        # Triangle inequality: d(i,j) <= d(i,l) + d(l,j) for all l.
        via = (dist[:, :, None] + dist[None, :, :]).min(axis=1)
        if np.any(dist > via + 1e-12):
            raise DomainError("distance matrix violates the triangle inequality")
        object.__setattr__(self, "dist", dist)

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    @classmethod
    def hamming(cls, k: int) -> "FiniteMetricSpace":
        return cls(1.0 - np.eye(k))

    @classmethod
    def real_line(cls, points: Sequence[float]) -> "FiniteMetricSpace":
        pts = np.asarray(points, dtype=float)
        return cls(np.abs(pts[:, None] - pts[None, :]))


def _as_probs(dist) -> np.ndarray:
    if isinstance(dist, FiniteDistribution):
        return dist.probs
    return np.asarray(dist, dtype=float)


def _same_support_size(p, q):
    if p.shape != q.shape:
        raise DomainError("distributions live on different label sets")


class Tilted(NamedTuple):
    distribution: FiniteDistribution
    log_mgf: float


def tilt(mu: FiniteDistribution, f: Sequence[float], t: float) -> Tilted:
    """Exponentially tilted law mu^(t f) and ln E_mu[exp(t f)]."""
    probs = _as_probs(mu)
    f = np.asarray(f, dtype=float)
    support = probs > 0
    log_weights = np.full(probs.shape, -np.inf)
    log_weights[support] = np.log(probs[support]) + t * f[support]
    log_mgf = float(logsumexp(log_weights))
    tilted = np.exp(log_weights - log_mgf)
    tilted /= tilted.sum()
    labels = mu.labels if isinstance(mu, FiniteDistribution) else None
    return Tilted(FiniteDistribution.from_probs(tilted, labels), log_mgf)


def kl_divergence(P, Q) -> float:
    """D(P||Q) in nats; +inf when P is not absolutely continuous w.r.t. Q."""
    p, q = _as_probs(P), _as_probs(Q)
    _same_support_size(p, q)
    support = p > 0
    if np.any(q[support] == 0):
        return math.inf
    value = float(np.sum(p[support] * (np.log(p[support]) - np.log(q[support]))))
    return max(value, 0.0)


def renyi_divergence(P, Q, alpha: float) -> float:
    """Renyi divergence of order alpha (alpha > 0, alpha != 1), in nats.

    Zero masses follow the dominating-measure convention: 0^a 0^(1-a) = 0 and
    for alpha > 1 any atom with P > 0 = Q gives +inf.
    """
    if alpha <= 0 or alpha == 1:
        raise DomainError("alpha must be positive and different from 1")
    p, q = _as_probs(P), _as_probs(Q)
    _same_support_size(p, q)
    both = (p > 0) & (q > 0)
    if alpha > 1 and np.any((p > 0) & (q == 0)):
        return math.inf
    if not np.any(both):
        return math.inf
    logs = alpha * np.log(p[both]) + (1.0 - alpha) * np.log(q[both])
    return float(logsumexp(logs) / (alpha - 1.0))


def total_variation(P, Q) -> float:
    p, q = _as_probs(P), _as_probs(Q)
    _same_support_size(p, q)
    return 0.5 * float(np.abs(p - q).sum())


class TvCoupling(NamedTuple):
    tv: float
    coupling: np.ndarray


def tv_and_w1_hamming(P, Q) -> TvCoupling:
    """Total variation and the explicit maximal coupling.

    The coupling keeps min(P, Q) on the diagonal and spreads the surplus of P
    over the deficit of Q proportionally, so Pr(X != Y) equals the TV distance.
    """
    p, q = _as_probs(P), _as_probs(Q)
    _same_support_size(p, q)
    common = np.minimum(p, q)
    coupling = np.diag(common)
    surplus = np.clip(p - q, 0.0, None)
    deficit = np.clip(q - p, 0.0, None)
    tv = 0.5 * float(np.abs(p - q).sum())
    mass = surplus.sum()
    if mass > 0:
        coupling = coupling + np.outer(surplus, deficit) / mass
    return TvCoupling(tv, coupling)


class Transport(NamedTuple):
    value: float
    coupling: np.ndarray
    cost: float
    iterations: int


def _northwest_corner(supply, demand):
    """Initial basic feasible solution with exactly m+n-1 basic cells."""
    m, n = len(supply), len(demand)
    a, b = supply.copy(), demand.copy()
    flow = np.zeros((m, n))
    basis = []
    i = j = 0
    while True:
        amount = min(a[i], b[j])
        flow[i, j] = amount
        basis.append((i, j))
        a[i] -= amount
        b[j] -= amount
        if i == m - 1 and j == n - 1:
            break
        # Advance exactly one index per step; a tie leaves a degenerate zero cell.
        if (a[i] <= b[j] and i < m - 1) or j == n - 1:
            i += 1
        else:
            j += 1
    return flow, basis


def _tree_potentials(cost, basis, m, n):
    """Solve u_i + v_j = c_ij on the basic spanning tree."""
    rows_adj = [[] for _ in range(m)]
    cols_adj = [[] for _ in range(n)]
    for i, j in basis:
        rows_adj[i].append(j)
        cols_adj[j].append(i)
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    stack = [("r", 0)]
    while stack:
        kind, idx = stack.pop()
        if kind == "r":
            for j in rows_adj[idx]:
                if np.isnan(v[j]):
                    v[j] = cost[idx, j] - u[idx]
                    stack.append(("c", j))
        else:
            for i in cols_adj[idx]:
                if np.isnan(u[i]):
                    u[i] = cost[i, idx] - v[idx]
                    stack.append(("r", i))
    if np.isnan(u).any() or np.isnan(v).any():
        raise RuntimeError("transport basis is not a spanning tree")
    return u, v, rows_adj, cols_adj


def _tree_path(rows_adj, cols_adj, start_row, target_col):
    """Alternating row/column path in the basis tree from a row to a column."""
    parent = {("r", start_row): None}
    queue = [("r", start_row)]
    target = ("c", target_col)
    head = 0
    while head < len(queue):
        node = queue[head]
        head += 1
        if node == target:
            break
        kind, idx = node
        nbrs = [("c", j) for j in rows_adj[idx]] if kind == "r" else [("r", i) for i in cols_adj[idx]]
        for nb in nbrs:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    path = []
    node = target
    while node is not None:
        path.append(node)
        node = parent[node]
    path.reverse()
    cells = []
    for a, b in zip(path[:-1], path[1:]):
        cells.append((a[1], b[1]) if a[0] == "r" else (b[1], a[1]))
    return cells


def transport_simplex(supply, demand, cost, tol: float = 1e-12, max_iter: int = 100000):
    """Exact minimum-cost transportation by the tree-based primal simplex.

    Uses the u-v potential method on a spanning-tree basis.  Dantzig pricing
    is used until a run of degenerate pivots, after which Bland's smallest
    index rule guarantees termination.
    """
    supply = np.asarray(supply, dtype=float)
    demand = np.asarray(demand, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = len(supply), len(demand)
    if cost.shape != (m, n):
        raise DomainError("cost matrix shape mismatch")
    # Remove rounding drift so that both sides carry identical mass.
    demand = demand * (supply.sum() / demand.sum())
    flow, basis = _northwest_corner(supply, demand)
    basis_set = set(basis)
    scale = max(1.0, float(np.abs(cost).max()))
    degenerate_run = 0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        u, v, rows_adj, cols_adj = _tree_potentials(cost, basis, m, n)
        reduced = cost - u[:, None] - v[None, :]
        for i, j in basis:
            reduced[i, j] = 0.0
        if reduced.min() >= -tol * scale:
            break
        if degenerate_run > 2 * (m + n):
            candidates = np.argwhere(reduced < -tol * scale)
            ei, ej = map(int, candidates[0])
        else:
            ei, ej = map(int, np.unravel_index(np.argmin(reduced), reduced.shape))
        # Cycle: entering cell (ei, ej), then the tree path from column ej back to row ei.
        path = _tree_path(rows_adj, cols_adj, ei, ej)
        # path runs row ei -> ... -> column ej; cells alternate -, +, -, ... starting
        # with the cell adjacent to row ei, which must shrink.
        minus = path[0::2]
        plus = path[1::2]
        theta = min(flow[c] for c in minus)
        leaving = min((c for c in minus if flow[c] <= theta), key=lambda c: (c[0], c[1]))
        for c in minus:
            flow[c] -= theta
        for c in plus:
            flow[c] += theta
        flow[ei, ej] += theta
        flow[leaving] = 0.0
        basis_set.discard(leaving)
        basis_set.add((ei, ej))
        basis = sorted(basis_set)
        degenerate_run = degenerate_run + 1 if theta <= 0 else 0
    else:
        raise RuntimeError("transport simplex did not converge")
    flow = np.clip(flow, 0.0, None)
    return flow, float(np.sum(flow * cost)), iterations


def wasserstein_p(P, Q, space: FiniteMetricSpace, p: float = 1.0,
                  cap: int = DEFAULT_TRANSPORT_CAP) -> Transport:
    """W_p(P, Q) on a finite metric space with the optimal coupling."""
    if p < 1:
        raise DomainError("p must be at least 1")
    mu, nu = _as_probs(P), _as_probs(Q)
    _same_support_size(mu, nu)
    k = len(mu)
    if space.size != k:
        raise DomainError("metric space size does not match the distributions")
    if k > cap:
        raise DomainError(f"support size {k} exceeds the transport cap {cap}")
    cost = space.dist**p
    rows = np.flatnonzero(mu > 0)
    cols = np.flatnonzero(nu > 0)
    sub_flow, total, iters = transport_simplex(mu[rows], nu[cols], cost[np.ix_(rows, cols)])
    coupling = np.zeros((k, k))
    coupling[np.ix_(rows, cols)] = sub_flow
    total = max(total, 0.0)
    return Transport(total ** (1.0 / p), coupling, total, iters)


def balance_coefficient(P, exact_cap: int = EXACT_BALANCE_CAP):
    """pi_P = max over events A of min(P(A), 1 - P(A)).

    Exhaustive over all subsets up to `exact_cap` atoms; beyond that a greedy
    largest-first fill is used and flagged as approximate.
    Returns (value, exact_flag).
    """
    p = np.sort(_as_probs(P))[::-1]
    k = len(p)
    if k <= exact_cap:
        sums = np.zeros(1)
        for w in p:
            sums = np.concatenate([sums, sums + w])
        return float(np.max(np.minimum(sums, 1.0 - sums))), True
    acc = 0.0
    for w in p:
        if acc + w <= 0.5:
            acc += w
    return float(min(acc, 1.0 - acc)), False


class PinskerReport(NamedTuple):
    tv: float
    pinsker_rhs: float
    ow_rhs: float
    balance: float
    balance_exact: bool


def pinsker_suite(P, Q) -> PinskerReport:
    """TV(P,Q) against sqrt(D(Q||P)/2) and the refinement sqrt(D(Q||P)/phi(pi_P))."""
    tv = total_variation(P, Q)
    div = kl_divergence(Q, P)
    balance, exact = balance_coefficient(P)
    pinsker = math.sqrt(div / 2.0)
    phi = ow_phi(min(balance, 0.5))
    ow = 0.0 if math.isinf(phi) else math.sqrt(div / phi)
    if math.isinf(div):
        ow = math.inf
    return PinskerReport(tv, pinsker, ow, balance, exact)


def product_joint(marginals: Sequence[Sequence[float]]) -> np.ndarray:
    """Joint probability tensor of independent coordinates."""
    joint = np.ones(())
    for m in marginals:
        joint = np.multiply.outer(joint, np.asarray(m, dtype=float))
    return joint


ENUMERATION_CAP = 4096


def _check_joint(joint: np.ndarray, cap: int = ENUMERATION_CAP):
    if joint.size > cap:
        raise DomainError(f"{joint.size} states exceed the enumeration cap {cap}")


def conditional_divergence_terms(Q: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Per-coordinate D(Q_{X_i|rest} || P_{X_i|rest} | Q_rest) for joint tensors."""
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    if Q.shape != P.shape:
        raise DomainError("joint tensors must share a shape")
    _check_joint(Q)
    terms = np.zeros(Q.ndim)
    for i in range(Q.ndim):
        q_rest = Q.sum(axis=i, keepdims=True)
        p_rest = P.sum(axis=i, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            q_cond = Q / q_rest
            p_cond = P / p_rest
        live = Q > 0
        if np.any(~(p_cond[live] > 0)):
            terms[i] = math.inf
            continue
        log_ratio = np.zeros_like(Q)
        log_ratio[live] = np.log(q_cond[live]) - np.log(p_cond[live])
        terms[i] = float(np.sum(Q * log_ratio))
    return terms


def erasure_divergence(Q: np.ndarray, P: np.ndarray) -> float:
    """Erasure divergence: sum over coordinates of conditional divergences."""
    return float(conditional_divergence_terms(Q, P).sum())


def joint_kl(Q: np.ndarray, P: np.ndarray) -> float:
    return kl_divergence(np.ravel(Q), np.ravel(P))


def fano_list_bound(pe: float, list_cap: int, alphabet: int) -> float:
    """h(pe) + (1 - pe) ln N + pe ln |X|, in nats."""
    if not 0 <= pe <= 1:
        raise DomainError("pe must be a probability")
    if list_cap < 1 or alphabet < 2:
        raise DomainError("need list size >= 1 and alphabet >= 2")
    h = -float(xlogy(pe, pe) + xlogy(1 - pe, 1 - pe))
    return h + (1.0 - pe) * math.log(list_cap) + pe * math.log(alphabet)
