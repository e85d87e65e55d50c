import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from concentration_kit import ofdm
from concentration_kit.special_functions import DomainError


def direct_samples(x, oversample):
    n = len(x)
    t = np.arange(oversample * n) / (oversample * n)
    return np.exp(2j * np.pi * np.outer(t, np.arange(n))) @ x / math.sqrt(n)


symbol_vectors = st.integers(1, 32).flatmap(
    lambda n: st.lists(st.integers(0, 3), min_size=n, max_size=n)).map(lambda idx: ofdm.psk_points(4)[idx])


@settings(max_examples=40)
@given(symbol_vectors)
def test_fft_samples_match_direct_sum(x):
    assert np.allclose(ofdm.time_samples(x, 4), direct_samples(x, 4), atol=1e-10)


@given(symbol_vectors)
def test_parseval_on_grid(x):
    assert ofdm.grid_power(x, 8) == pytest.approx(1.0, rel=1e-12)


@given(symbol_vectors)
def test_crest_factor_range(x):
    cf = ofdm.crest_factor(x, 8)
    assert 1.0 - 1e-12 <= cf <= math.sqrt(len(x)) + 1e-12


def test_extreme_crest_factors():
    for n in (1, 4, 64):
        assert ofdm.crest_factor(np.ones(n)) == pytest.approx(math.sqrt(n))
    assert ofdm.crest_factor([1j]) == pytest.approx(1.0)


@settings(max_examples=30)
@given(symbol_vectors, st.floats(0, 2 * math.pi), st.integers(0, 64))
def test_phase_and_cyclic_shift_invariance(x, phase, shift):
    cf = ofdm.crest_factor(x, 8)
    assert ofdm.crest_factor(x * np.exp(1j * phase), 8) == pytest.approx(cf, rel=1e-10)
    # a time shift of one grid step multiplies subcarrier i by exp(j 2 pi i k / (8 n))
    n = len(x)
    ramp = np.exp(2j * np.pi * np.arange(n) * shift / (8 * n))
    assert ofdm.crest_factor(x * ramp, 8) == pytest.approx(cf, rel=1e-10)


def test_input_validation():
    with pytest.raises(DomainError):
        ofdm.crest_factor([1.0, 0.5])
    with pytest.raises(DomainError):
        ofdm.OfdmSpec(16, oversample=2)
    with pytest.raises(DomainError):
        ofdm.cf_bounds(16, -1.0)


def test_batched_crest_factors_agree_with_single():
    rng = np.random.default_rng(0)
    symbols = ofdm.psk_points(4)[rng.integers(0, 4, size=(50, 16))]
    batch = ofdm.crest_factors(symbols, 16)
    single = [ofdm.crest_factor(row, 16) for row in symbols]
    assert np.allclose(batch, single, rtol=1e-5)


def test_bounds_at_zero_and_monotone():
    b = ofdm.cf_bounds(64, 0.0)
    assert (b.azuma, b.refined, b.talagrand_median, b.mcdiarmid) == pytest.approx((2.0, 2.0, 4.0, 2.0))
    previous = b
    for alpha in np.linspace(0.1, 6.0, 30):
        now = ofdm.cf_bounds(64, float(alpha))
        for name in now._fields:
            assert getattr(now, name) <= getattr(previous, name) + 1e-15
        previous = now


def test_bound_formulas():
    b = ofdm.cf_bounds(256, 2.0)
    assert b.azuma == pytest.approx(2 * math.exp(-0.5))
    assert b.talagrand_median == pytest.approx(4 * math.exp(-0.25))
    assert b.mcdiarmid == pytest.approx(2 * math.exp(-2.0))
    # with jumps 2 and variance 2 the refined bound beats Azuma
    assert b.refined < b.azuma


def test_small_monte_carlo_run_is_reproducible_and_dominated():
    spec = ofdm.OfdmSpec(16, trials=4000, seed=11)
    first = ofdm.cf_monte_carlo(spec, alphas=[0.0, 0.5, 1.0])
    second = ofdm.cf_monte_carlo(spec, alphas=[0.0, 0.5, 1.0])
    assert first == second
    assert first["all_dominate"]
    assert 1.0 <= first["median"] <= 4.0
    assert first["mean_median_gap"] <= first["mean_median_gap_bound"]


def test_martingale_step_bounds():
    res = ofdm.martingale_step_check(16, seed=3, realizations=2, positions=4, inner=128, batches=8)
    assert res.increment_ok
    assert res.variance_ok
    assert res.increment_bound == pytest.approx(0.5)
