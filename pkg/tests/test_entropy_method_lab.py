import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from concentration_kit import entropy_method_lab as eml
from concentration_kit.info_measures import FiniteDistribution, product_joint
from concentration_kit.special_functions import DomainError

small_laws = st.integers(2, 6).flatmap(
    lambda k: st.tuples(st.lists(st.floats(0.02, 1.0), min_size=k, max_size=k),
                        st.lists(st.floats(-2.0, 2.0), min_size=k, max_size=k)))


def family_from(data):
    weights, f = data
    return eml.TiltedFamily(np.array(weights) / sum(weights), f)


@given(small_laws, st.floats(-4, 4))
def test_centred_lmgf_matches_direct_sum(data, t):
    fam = family_from(data)
    p = np.array(data[0]) / sum(data[0])
    f = np.array(data[1])
    direct = math.log(float(np.sum(p * np.exp(t * (f - p @ f)))))
    assert fam.lmgf(t) == pytest.approx(direct, rel=1e-10, abs=1e-13)


@settings(max_examples=40)
@given(small_laws, st.floats(1e-5, 4))
def test_divergence_two_routes_agree(data, t):
    fam = family_from(data)
    assert eml.lmgf_derivative_check(fam, t) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(small_laws, st.floats(0.1, 3.0))
def test_herbst_and_double_integral_identities(data, lam):
    fam = family_from(data)
    herbst = eml.herbst_identity_check(fam, lam)
    assert herbst.quadrature_ok and herbst.gap <= 1e-7
    maurer = eml.maurer_identity_check(fam, lam)
    assert maurer.gap <= 1e-7


def test_constant_function_gives_trivial_identities():
    fam = eml.TiltedFamily([0.3, 0.7], [1.0, 1.0])
    assert eml.herbst_identity_check(fam, 1.0).gap == 0.0
    assert fam.divergence(2.0) == 0.0


def test_divergence_over_t2_limit_is_half_variance():
    fam = eml.TiltedFamily([0.2, 0.5, 0.3], [0.0, 1.0, 3.0])
    assert fam.divergence_over_t2(0.0) == pytest.approx(fam.variance / 2)
    assert fam.divergence_over_t2(1e-6) == pytest.approx(fam.variance / 2, rel=1e-5)


@settings(max_examples=40)
@given(st.integers(1, 6), st.floats(0.05, 0.95), st.integers(0, 2**31))
def test_cube_lsi_holds(n, p, seed):
    f = np.random.default_rng(seed).uniform(-2, 2, size=2**n)
    for prob in (0.5, p):
        res = eml.discrete_lsi_check(n, prob, f)
        assert res.lhs <= res.rhs + 1e-12


def test_cube_lsi_linear_function_is_nearly_tight_for_small_tilt():
    # f = eps * (number of ones): D ~ n eps^2/8 and E[(Gamma f)^2]/8 = n eps^2/8
    n, eps = 4, 1e-3
    f = eps * eml.bit_table(n).sum(axis=1)
    res = eml.discrete_lsi_check(n, 0.5, f)
    assert res.lhs / res.rhs == pytest.approx(1.0, rel=1e-2)


def test_cube_lsi_input_checks():
    with pytest.raises(DomainError):
        eml.discrete_lsi_check(13, 0.5, np.zeros(2**13))
    with pytest.raises(DomainError):
        eml.discrete_lsi_check(2, 0.5, np.zeros(3))
    with pytest.raises(DomainError):
        eml.discrete_lsi_check(2, 0.3, [0.0, 1.0, 2.0, 3.0], c_bound=0.5)


@given(st.integers(1, 6), st.floats(0.05, 0.95), st.integers(0, 2**31))
def test_poincare_and_small_tilt_ratio(n, p, seed):
    f = np.random.default_rng(seed).normal(size=2**n)
    res = eml.poincare_check(n, p, f)
    assert res.variance <= res.rhs + 1e-12
    assert res.small_t_ratio == pytest.approx(res.variance / 2, rel=1e-2, abs=1e-9)


@given(st.floats(0.01, 10), st.floats(0.01, 10))
def test_binary_gross(g0, g1):
    res = eml.binary_gross_check(g0, g1)
    assert res.lhs <= res.rhs * (1 + 1e-12) + 1e-15


def test_compound_pmf_matches_poisson_and_monte_carlo_free_reference():
    pmf = eml.compound_poisson_pmf(1.5, {1: 1.0}, 30)
    assert np.allclose(pmf, stats.poisson.pmf(np.arange(31), 1.5), atol=1e-15)
    # jumps of size 2 only: mass sits on even integers as a scaled Poisson
    even = eml.compound_poisson_pmf(0.8, {2: 1.0}, 20)
    assert np.allclose(even[::2], stats.poisson.pmf(np.arange(11), 0.8), atol=1e-15)
    assert np.allclose(even[1::2], 0.0)


@settings(max_examples=30)
@given(st.sampled_from([0.5, 1.0, 2.0]), st.integers(0, 2**31))
def test_poisson_lsi(lam, seed):
    g = np.random.default_rng(seed).uniform(-1.5, 1.5, size=41)
    res = eml.poisson_lsi_check(lam, g, 40)
    assert res.lhs <= res.rhs + 1e-12
    assert res.truncation_slack < 1e-10
    compound = FiniteDistribution((1, 2, 3), np.array([0.5, 0.3, 0.2]))
    g = np.random.default_rng(seed + 1).uniform(-1.5, 1.5, size=81)
    res = eml.poisson_lsi_check(1.0, g, 80, compound=compound)
    assert res.lhs <= res.rhs + 1e-12


def test_poisson_truncation_too_short_is_rejected():
    with pytest.raises(DomainError):
        eml.poisson_lsi_check(5.0, np.zeros(6), 5)


@settings(max_examples=30)
@given(st.integers(0, 2**31))
def test_efron_stein(seed):
    rng = np.random.default_rng(seed)
    margs = [rng.dirichlet(np.ones(k)) for k in rng.integers(2, 4, size=3)]
    values = rng.normal(size=tuple(len(m) for m in margs))
    res = eml.efron_stein_check(margs, values)
    assert res.variance <= res.ess_sum + 1e-12


def test_efron_stein_equality_for_additive_functions():
    margs = [[0.3, 0.7], [0.5, 0.25, 0.25]]
    res = eml.efron_stein_check(margs, lambda a, b: 2.0 * a + b**2)
    assert res.variance == pytest.approx(res.ess_sum, rel=1e-12)


@settings(max_examples=20)
@given(st.integers(0, 2**31), st.floats(0.1, 2.0))
def test_massart_bounds_dominate_divergence(seed, t):
    rng = np.random.default_rng(seed)
    margs = [rng.dirichlet(np.ones(2)) for _ in range(3)]
    values = rng.uniform(-1, 1, size=(2, 2, 2))
    res = eml.massart_comparison(margs, values, t)
    assert res.divergence <= res.erasure + 1e-12
    assert res.erasure <= res.maurer_rhs + 1e-12
    assert res.erasure <= res.massart_rhs + 1e-12
    assert res.maurer_tail_exponent == pytest.approx(8 * res.massart_tail_exponent)


@given(st.integers(0, 2**31))
def test_tensorization(seed):
    rng = np.random.default_rng(seed)
    P = product_joint([[0.2, 0.8], [0.5, 0.5], [0.6, 0.4]])
    Q = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
    res = eml.tensorization_check(P, Q)
    assert res.lhs <= res.rhs + 1e-12
    with pytest.raises(DomainError):
        eml.tensorization_check(Q, P)


GRID = dict(lo=-12.0, hi=12.0, points=6001)


def test_gaussian_is_extremal_in_the_quadrature_suite():
    dens = eml.DensityGrid.from_function(stats.norm.pdf, **GRID)
    rep = eml.gaussian_quadrature_suite(dens, snrs=(1.0,))
    assert rep.passed
    assert rep.entropy == pytest.approx(0.5 * math.log(2 * math.pi * math.e), abs=1e-8)
    assert rep.fisher == pytest.approx(1.0, abs=1e-5)
    assert rep.mmse[0] == pytest.approx(0.5, abs=1e-5)
    assert rep.divergence == pytest.approx(0.0, abs=1e-8)
    assert rep.w2 == pytest.approx(0.0, abs=1e-4)


def test_quadrature_suite_on_mixture_and_scaled_gaussian():
    mix = eml.DensityGrid.gaussian_mixture([-1.5, 1.0], [0.6, 0.8], [0.4, 0.6], **GRID)
    assert eml.gaussian_quadrature_suite(mix).passed
    scaled = eml.DensityGrid.from_function(lambda x: stats.norm.pdf(x, 0.5, 1.7), **GRID)
    rep = eml.gaussian_quadrature_suite(scaled, snrs=(1.0,))
    assert rep.passed
    exact_kl = math.log(1 / 1.7) + (1.7**2 + 0.25) / 2 - 0.5
    assert rep.divergence == pytest.approx(exact_kl, abs=1e-7)
    assert rep.w2 == pytest.approx(math.sqrt(0.25 + 0.7**2), abs=1e-4)
    assert eml.renyi_to_gaussian(scaled, 2.0) > rep.divergence


def test_ou_contraction():
    mix = eml.DensityGrid.gaussian_mixture([-1.5, 1.0], [0.6, 0.8], [0.4, 0.6], **GRID)
    rep = eml.ou_contraction_check(mix, 0.5)
    assert rep.passed
    assert rep.divergence_out < rep.divergence_in
    assert rep.renyi


def test_ou_keeps_gaussian_fixed():
    dens = eml.DensityGrid.from_function(stats.norm.pdf, **GRID)
    out = eml.ou_output(dens, 0.3)
    assert np.max(np.abs(out.density - dens.density)) < 1e-6


def test_density_grid_validation():
    x = np.linspace(-1, 1, 11)
    with pytest.raises(DomainError):
        eml.DensityGrid(x, np.ones(11))
    with pytest.raises(DomainError):
        eml.DensityGrid(x[::-1], np.full(11, 0.5))
