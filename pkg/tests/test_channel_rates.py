import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize, special, stats

from concentration_kit import channel_rates as cr
from concentration_kit.special_functions import DomainError, binary_entropy


def direct_volterra(kernel, u):
    u = list(u)
    out = []
    for i in range(len(u)):
        def at(lag):
            return u[i - lag] if i - lag >= 0 else 0.0
        total = kernel.h0
        for lags, coeff in kernel.terms():
            total += coeff * math.prod(at(lag) for lag in lags)
        out.append(total)
    return np.array(out)


def llr_mutual_information(snr):
    mean, sd = 2 * snr, 2 * math.sqrt(snr)
    expected, _ = integrate.quad(lambda l: stats.norm.pdf(l, mean, sd) * np.logaddexp(0, -l),
                                 mean - 40 * sd, mean + 40 * sd, epsabs=1e-14, limit=400)
    return math.log(2) - expected


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=12))
def test_volterra_apply_matches_direct_loop(u):
    kernel = cr.table_kernel()
    assert np.allclose(cr.volterra_apply(kernel, u), direct_volterra(kernel, u), atol=1e-12)


def test_identity_and_constant_kernels():
    u = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(cr.volterra_apply(cr.memoryless_kernel(), u), u)
    assert np.array_equal(cr.volterra_apply(cr.VolterraKernel(2, h0=0.7), u), np.full(3, 0.7))
    with pytest.raises(DomainError):
        cr.volterra_martingale_params(cr.VolterraKernel(1, h0=0.7), 1.0)


def test_kernel_text_round_trip_and_errors():
    kernel = cr.table_kernel()
    back = cr.VolterraKernel.parse(kernel.to_text())
    assert back.memory == 2 and back.h1 == kernel.h1 and back.h2 == kernel.h2 and back.h3 == kernel.h3
    assert back.order == 3
    parsed = cr.VolterraKernel.parse("# comment\nh0 0.5\nh1 0 1\nh2 0 1 0.25  # cross term\n")
    assert parsed.h0 == 0.5 and parsed.memory == 1 and parsed.order == 2
    for bad in ("h4 0 1", "h1 0", "h1 x 1"):
        with pytest.raises(DomainError):
            cr.VolterraKernel.parse(bad)
    with pytest.raises(DomainError):
        cr.VolterraKernel(1, h1={(3,): 1.0})


@pytest.mark.parametrize("alpha", [0.5, 0.3])
def test_output_variance_matches_brute_force(alpha):
    kernel = cr.table_kernel()
    amplitude = 0.5
    values, weights = [], []
    for bits in itertools.product((0, 1), repeat=3):
        u = [amplitude * (2 * b - 1) for b in bits]
        values.append(direct_volterra(kernel, u)[-1])
        weights.append(math.prod(alpha if b else 1 - alpha for b in bits))
    values, weights = np.array(values), np.array(weights)
    variance = float(weights @ (values - weights @ values) ** 2)
    params = cr.volterra_martingale_params(kernel, amplitude, alpha, 4)
    assert params.D_v == pytest.approx(variance, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.05, 0.95))
def test_memoryless_params_match_closed_form(amplitude, alpha):
    numeric = cr.volterra_martingale_params(cr.memoryless_kernel(), amplitude, alpha, 12, jump_bound="upper")
    closed = cr.biawgn_params(amplitude, alpha, 12)
    assert numeric.d == pytest.approx(closed.d, rel=1e-12)
    assert numeric.D_v == pytest.approx(closed.D_v, rel=1e-12)
    assert np.allclose(numeric.gammas, closed.gammas, rtol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.05, 0.95))
def test_absolute_jump_bound_keeps_gammas_at_most_one(amplitude, alpha):
    params = cr.volterra_martingale_params(cr.table_kernel(), amplitude, alpha, 8)
    assert params.sigma2 <= params.d**2 * (1 + 1e-12)
    assert np.all(params.gammas <= 1 + 1e-12)
    assert params.steady_d <= params.d and params.steady_sigma2 <= params.sigma2


def test_upper_jump_bound_can_push_gamma2_above_one():
    params = cr.biawgn_params(1.0, 0.2, 4)
    assert params.gamma2 > 1
    rates = cr.achievable_rates(params, 1.0, 2)
    assert rates.gamma2_above_one


@pytest.mark.parametrize("snr", [0.1, 0.5, 1.0, 3.0, 10.0])
def test_capacity_series_against_quadrature(snr):
    series = cr.biawgn_capacity(snr)
    assert series.value == pytest.approx(llr_mutual_information(snr), abs=1e-8)
    assert series.remainder_bound >= 0


def test_capacity_limits_and_rate_ordering():
    assert cr.biawgn_capacity(0.0).value == pytest.approx(0.0, abs=1e-6)
    assert cr.biawgn_capacity(50.0).value == pytest.approx(math.log(2), abs=1e-9)
    for snr in (0.1, 1.0, 5.0):
        assert cr.biawgn_rate(snr) <= cr.biawgn_capacity(snr).value
    assert cr.biawgn_rate(1e6) == pytest.approx(math.log(2))
    with pytest.raises(DomainError):
        cr.biawgn_rate(-1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 100.0))
def test_memoryless_rates_reduce_to_common_formula(snr):
    params = cr.volterra_martingale_params(cr.memoryless_kernel(), math.sqrt(snr), 0.5, 64)
    target = cr.biawgn_rate(snr)
    assert cr.bennett_rate_closed_form(params, 1.0).value == pytest.approx(target, abs=1e-9)
    assert cr.achievable_rates(params, 1.0, 64).R2 == pytest.approx(target, abs=1e-9)


@pytest.mark.parametrize("amplitude", [0.25, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("noise", [0.25, 1.0, 4.0])
def test_bennett_closed_form_equals_numeric_maximum(amplitude, noise):
    params = cr.volterra_martingale_params(cr.table_kernel(), amplitude, 0.5, 4)
    objective = cr.bennett_rate_objective(params, noise)
    res = optimize.minimize_scalar(lambda r: -objective(r), bounds=(0, 1), method="bounded",
                                   options={"xatol": 1e-12})
    numeric = max(-res.fun, objective(1.0), objective(0.0))
    assert cr.bennett_rate_closed_form(params, noise).value == pytest.approx(numeric, abs=1e-9)


def test_moment_rate_nondecreasing_in_order():
    params = cr.volterra_martingale_params(cr.table_kernel(), 1.0, 0.5, 16)
    rates = [cr.achievable_rates(params, 1.0, m).R2 for m in range(2, 17, 2)]
    assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))
    with pytest.raises(DomainError):
        cr.achievable_rates(params, 1.0, 3)
    with pytest.raises(DomainError):
        cr.achievable_rates(params, 1.0, 18)


def test_moment_factor_reduces_to_gamma_factor_for_two_point_laws():
    # gamma_l of the two-point law {d, -gamma d} makes the series sum to the gamma factor
    gamma = 0.3
    gammas = [(gamma + (-gamma) ** l) / (1 + gamma) for l in range(2, 80)]
    for x in (0.1, 1.0, 5.0, 40.0):
        assert cr._log_moment_factor(x, gammas) == pytest.approx(cr._log_gamma_factor(x, gamma), rel=1e-10)


def test_rho_maximiser_handles_boundary_and_interior():
    res = cr.maximize_over_rho(lambda r: -(r - 0.3) ** 2)
    assert res.rho == pytest.approx(0.3, abs=1e-8) and res.unimodal
    assert cr.maximize_over_rho(lambda r: r).rho == pytest.approx(1.0)
    bumpy = cr.maximize_over_rho(lambda r: math.sin(20 * r) + r)
    assert not bumpy.unimodal
    assert bumpy.value == pytest.approx(max(math.sin(20 * r) + r for r in np.linspace(0, 1, 100001)), abs=1e-6)


def brute_capacity(T, starts=20, seed=0):
    rng = np.random.default_rng(seed)

    def neg_info(theta):
        p = special.softmax(theta)
        out = p @ T
        return -float(np.sum(p[:, None] * special.rel_entr(T, out[None, :])))

    best = max(-optimize.minimize(neg_info, rng.normal(size=T.shape[0]), method="Nelder-Mead",
                                  options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000}).fun
               for _ in range(starts))
    return best


def test_blahut_arimoto_closed_forms():
    p = 0.11
    bsc = cr.dmc_capacity(cr.ChannelMatrix.bsc(p))
    assert bsc.converged
    assert bsc.capacity == pytest.approx(math.log(2) * (1 - binary_entropy(p)), abs=1e-9)
    assert np.allclose(bsc.caod.probs, [0.5, 0.5])
    bec = cr.dmc_capacity([[0.7, 0.3, 0.0], [0.0, 0.3, 0.7]])
    assert bec.capacity == pytest.approx(0.7 * math.log(2), abs=1e-9)
    assert cr.dmc_capacity(np.eye(3)).capacity == pytest.approx(math.log(3), abs=1e-9)
    # Z channel: C = ln(1 + (1-s) s^{s/(1-s)})
    s = 0.4
    z = cr.dmc_capacity([[1.0, 0.0], [s, 1 - s]])
    assert z.capacity == pytest.approx(math.log(1 + (1 - s) * s ** (s / (1 - s))), abs=1e-9)


def test_blahut_arimoto_random_channel_against_optimiser():
    T = np.random.default_rng(3).dirichlet(np.ones(4), size=3)
    assert cr.dmc_capacity(T).capacity == pytest.approx(brute_capacity(T), abs=1e-8)


def test_channel_matrix_validation_and_constant():
    with pytest.raises(DomainError):
        cr.ChannelMatrix([[0.5, 0.6]])
    with pytest.raises(DomainError):
        cr.ChannelMatrix([[-0.1, 1.1]])
    assert cr.ChannelMatrix.bsc(0.1).log_ratio_constant() == pytest.approx(2 * math.log(9))
    assert math.isinf(cr.ChannelMatrix([[1.0, 0.0], [0.5, 0.5]]).log_ratio_constant())


def repetition_output_divergence(n, p):
    """D(P_{Y^n} || uniform^n) for the two-word repetition code over BSC(p), exactly."""
    total = 0.0
    for y in itertools.product((0, 1), repeat=n):
        ones = sum(y)
        prob = 0.5 * (p**ones * (1 - p) ** (n - ones) + p ** (n - ones) * (1 - p) ** ones)
        total += prob * math.log(prob * 2**n)
    return total


@pytest.mark.parametrize("n", [1, 2, 3, 5, 7, 8])
def test_converse_bounds_dominate_repetition_codes(n):
    p = 0.1
    errors = sum(math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1) if 2 * k > n)
    errors += 0.5 * (math.comb(n, n // 2) * (p * (1 - p)) ** (n // 2) if n % 2 == 0 else 0.0)
    eps = max(errors, 1e-3)
    bounds = cr.converse_output_bounds(n, 2, eps, cr.ChannelMatrix.bsc(p))
    exact = repetition_output_divergence(n, p)
    assert bounds.pv1 >= exact
    if n >= 2:
        assert bounds.pv2 >= exact
    else:
        assert math.isnan(bounds.pv2)


def test_converse_first_bound_formula():
    T = cr.ChannelMatrix.bsc(0.1)
    n, M, eps = 100, 2**40, 0.1
    cap = math.log(2) * (1 - binary_entropy(0.1))
    c_T = 2 * math.log(9)
    expected = n * cap - math.log(M) - math.log(eps) + c_T * math.sqrt(0.5 * n * math.log(1 / 0.8))
    res = cr.converse_output_bounds(n, M, eps, T)
    assert res.pv1 == pytest.approx(expected, rel=1e-9)
    assert res.good_code_constant == pytest.approx(c_T * math.sqrt(0.5 * math.log(1 / 0.8)))
    assert cr.converse_output_bounds(n, log_M=math.log(M), eps=eps, T=T).pv1 == pytest.approx(res.pv1)
    assert math.isnan(cr.converse_output_bounds(n, M, 0.6, T).pv1)
    assert math.isnan(cr.converse_output_bounds(n, M, 0.1, [[1.0, 0.0], [0.5, 0.5]]).pv1)
    with pytest.raises(DomainError):
        cr.good_code_constant(1.0, 0.5)
