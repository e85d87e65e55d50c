import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize, special, stats

from concentration_kit import info_measures as im
from concentration_kit.special_functions import DomainError


def simplex(k):
    return st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k).map(lambda w: np.array(w) / sum(w))


pairs = st.integers(2, 6).flatmap(lambda k: st.tuples(simplex(k), simplex(k)))


def linprog_transport(p, q, cost):
    k = len(p)
    rows = np.kron(np.eye(k), np.ones(k))
    cols = np.kron(np.ones(k), np.eye(k))
    res = optimize.linprog(cost.ravel(), A_eq=np.vstack([rows, cols]), b_eq=np.concatenate([p, q]),
                           bounds=(0, None), method="highs")
    return res.fun


@given(pairs)
def test_kl_matches_scipy(pq):
    p, q = pq
    assert im.kl_divergence(p, q) == pytest.approx(float(special.rel_entr(p, q).sum()), abs=1e-12)
    assert im.kl_divergence(p, q) == pytest.approx(stats.entropy(p, q), abs=1e-12)


def test_kl_infinite_off_support():
    assert math.isinf(im.kl_divergence([0.5, 0.5], [1.0, 0.0]))
    assert im.kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))
    with pytest.raises(DomainError):
        im.kl_divergence([1.0], [0.5, 0.5])


@settings(max_examples=50)
@given(pairs, st.floats(0.1, 5.0).filter(lambda a: abs(a - 1) > 1e-3))
def test_renyi_formula_and_limits(pq, alpha):
    p, q = pq
    direct = math.log(float(np.sum(p**alpha * q ** (1 - alpha)))) / (alpha - 1)
    assert im.renyi_divergence(p, q, alpha) == pytest.approx(direct, rel=1e-9, abs=1e-12)
    near_one = im.renyi_divergence(p, q, 1 + 1e-6)
    assert near_one == pytest.approx(im.kl_divergence(p, q), rel=1e-4, abs=1e-8)


@given(pairs, st.floats(0.1, 0.9), st.floats(1.1, 4.0))
def test_renyi_nondecreasing_in_order(pq, a, b):
    p, q = pq
    assert im.renyi_divergence(p, q, a) <= im.renyi_divergence(p, q, b) + 1e-12


@given(pairs)
def test_maximal_coupling(pq):
    p, q = pq
    tv, coupling = im.tv_and_w1_hamming(p, q)
    assert np.allclose(coupling.sum(axis=1), p)
    assert np.allclose(coupling.sum(axis=0), q)
    assert 1 - np.trace(coupling) == pytest.approx(tv, abs=1e-12)
    assert tv == pytest.approx(im.total_variation(p, q))


@settings(max_examples=40)
@given(st.integers(2, 7).flatmap(lambda k: st.tuples(simplex(k), simplex(k),
                                                     st.lists(st.floats(-5, 5), min_size=k, max_size=k, unique=True))))
def test_w1_on_real_line_matches_scipy(data):
    p, q, points = data
    space = im.FiniteMetricSpace.real_line(points)
    got = im.wasserstein_p(p, q, space).value
    assert got == pytest.approx(stats.wasserstein_distance(points, points, p, q), abs=1e-9)


@settings(max_examples=40)
@given(st.integers(2, 6).flatmap(lambda k: st.tuples(simplex(k), simplex(k),
                                                     st.lists(st.floats(-5, 5), min_size=k, max_size=k))),
       st.sampled_from([1.0, 2.0]))
def test_wasserstein_matches_linprog(data, order):
    p, q, points = data
    space = im.FiniteMetricSpace.real_line(points)
    result = im.wasserstein_p(p, q, space, order)
    reference = linprog_transport(p, q, space.dist**order)
    assert result.cost == pytest.approx(reference, abs=1e-9)
    assert np.allclose(result.coupling.sum(axis=1), p, atol=1e-12)
    assert np.allclose(result.coupling.sum(axis=0), q, atol=1e-12)


@given(pairs)
def test_hamming_w1_is_total_variation(pq):
    p, q = pq
    space = im.FiniteMetricSpace.hamming(len(p))
    assert im.wasserstein_p(p, q, space).value == pytest.approx(im.total_variation(p, q), abs=1e-10)


@given(st.integers(1, 8).flatmap(simplex))
def test_balance_coefficient_brute_force(p):
    best = 0.0
    for mask in itertools.product((0, 1), repeat=len(p)):
        mass = float(np.dot(mask, p))
        best = max(best, min(mass, 1 - mass))
    value, exact = im.balance_coefficient(p)
    assert exact
    assert value == pytest.approx(best, abs=1e-12)


def test_balance_greedy_beyond_cap():
    value, exact = im.balance_coefficient(np.full(30, 1 / 30))
    assert not exact
    assert value == pytest.approx(0.5)


@given(pairs)
def test_pinsker_chain(pq):
    p, q = pq
    rep = im.pinsker_suite(p, q)
    assert rep.tv <= rep.ow_rhs + 1e-12
    assert rep.ow_rhs <= rep.pinsker_rhs + 1e-12


def test_distribution_json_round_trip_and_validation():
    dist = im.FiniteDistribution.normalized([1, 2, 3], labels=["a", "b", "c"])
    back = im.FiniteDistribution.from_json(dist.to_json())
    assert list(back.labels) == ["a", "b", "c"]
    assert np.allclose(back.probs, [1 / 6, 2 / 6, 3 / 6])
    with pytest.raises(DomainError):
        im.FiniteDistribution.from_probs([0.5, 0.6])
    with pytest.raises(DomainError):
        im.FiniteDistribution.from_probs([1.2, -0.2])


@given(simplex(4), st.floats(-3, 3))
def test_tilt_normalisation(p, t):
    f = np.array([0.0, 1.0, -1.0, 2.0])
    res = im.tilt(im.FiniteDistribution.from_probs(p), f, t)
    assert res.log_mgf == pytest.approx(math.log(float(np.sum(p * np.exp(t * f)))), rel=1e-12, abs=1e-12)
    assert res.distribution.probs.sum() == pytest.approx(1.0)


@settings(max_examples=30)
@given(st.lists(st.floats(0.05, 0.95), min_size=2, max_size=4), st.integers(0, 2**31))
def test_erasure_divergence_dominates_joint_for_product_reference(margs, seed):
    """For a product reference law the erasure divergence upper-bounds D(Q||P)."""
    P = im.product_joint([[m, 1 - m] for m in margs])
    Q = np.random.default_rng(seed).dirichlet(np.ones(2 ** len(margs))).reshape(P.shape)
    assert im.joint_kl(Q, P) <= im.erasure_divergence(Q, P) + 1e-12


def test_erasure_divergence_of_products_equals_joint():
    P = im.product_joint([[0.3, 0.7], [0.6, 0.4], [0.1, 0.9]])
    Q = im.product_joint([[0.5, 0.5], [0.2, 0.8], [0.4, 0.6]])
    assert im.erasure_divergence(Q, P) == pytest.approx(im.joint_kl(Q, P), abs=1e-12)


def test_fano_list_bound():
    assert im.fano_list_bound(0.0, 4, 16) == pytest.approx(math.log(4))
    assert im.fano_list_bound(1.0, 4, 16) == pytest.approx(math.log(16))
    pe = 0.2
    h = -(pe * math.log(pe) + (1 - pe) * math.log(1 - pe))
    assert im.fano_list_bound(pe, 3, 10) == pytest.approx(h + 0.8 * math.log(3) + 0.2 * math.log(10))
    with pytest.raises(DomainError):
        im.fano_list_bound(0.1, 0, 4)
