import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from concentration_kit import montecarlo as mc
from concentration_kit import simulation_harness as sh
from concentration_kit.special_functions import DomainError

ALPHAS = [0.0, 0.5, 1.0, 2.0, 3.0]


@given(st.integers(0, 500), st.integers(1, 500))
def test_wilson_interval_matches_scipy(successes, trials):
    successes = min(successes, trials)
    ours = mc.wilson_interval(successes, trials)
    ref = stats.binomtest(successes, trials).proportion_ci(0.99, method="wilson")
    assert ours.lower == pytest.approx(ref.low, abs=1e-12)
    assert ours.upper == pytest.approx(ref.high, abs=1e-12)
    assert ours.lower <= ours.estimate <= ours.upper


def test_block_streams_do_not_depend_on_workers():
    def draw(rng, size, _i):
        return rng.random(size)
    serial = np.concatenate(mc.map_blocks(draw, 10_000, 5, block_size=1000))
    threaded = np.concatenate(mc.map_blocks(draw, 10_000, 5, block_size=1000, workers=4))
    assert np.array_equal(serial, threaded)
    assert mc.block_sizes(2500, 1000) == [1000, 1000, 500]
    with pytest.raises(ValueError):
        mc.block_rng(None, 0)


def test_dominance_uses_upper_half_width():
    ci = mc.wilson_interval(30, 1000)
    assert mc.dominates(ci.estimate, ci)
    assert not mc.dominates(ci.estimate - 2 * (ci.upper - ci.estimate), ci)


def test_reproducible_with_seed():
    a = sh.simulate_example_symmetric(50, 1.0, ALPHAS, 5000, 7)
    b = sh.simulate_example_symmetric(50, 1.0, ALPHAS, 5000, 7)
    c = sh.simulate_example_symmetric(50, 1.0, ALPHAS, 5000, 8)
    assert a.counts == b.counts
    assert a.counts != c.counts


@pytest.mark.parametrize("gamma", [0.1, 0.25, 1.0])
def test_two_point_tails_are_monotone_and_bounded(gamma):
    table = sh.simulate_example_asymmetric(100, 1.0, gamma, ALPHAS, 20000, 1)
    assert all(x >= y for x, y in zip(table.counts, table.counts[1:]))
    assert table.counts[0] == table.trials
    for i, exact in enumerate(table.exact):
        assert exact <= table.bounds["refined"][i] + 1e-12
        assert exact <= table.bounds["azuma"][i] + 1e-12
        assert table.bounds["refined"][i] <= table.bounds["azuma"][i] + 1e-12


def test_empirical_tail_agrees_with_exact_law():
    table = sh.simulate_example_symmetric(100, 1.0, ALPHAS, 200_000, 3)
    for ci, exact in zip(table.intervals(), table.exact):
        assert ci.lower - 1e-3 <= exact <= ci.upper + 1e-3


def test_epsilon_martingale_exact_and_bounds():
    table = sh.simulate_bernoulli_martingale(100, 1.0, 0.1, 20000, 2, (0.05, 0.1, 0.2))
    for i in range(3):
        for name in ("azuma", "refined", "refined_divergence_form"):
            assert table.exact[i] <= table.bounds[name][i] + 1e-12
    with pytest.raises(DomainError):
        sh.simulate_bernoulli_martingale(10, 1.0, 0.7, 10, 0)


def test_kearns_saul_beats_hoeffding_and_dominates():
    table = sh.simulate_kearns_saul(100, 0.1, [0.5, 1.0, 2.0], 20000, 4)
    for i in range(3):
        assert table.bounds["kearns_saul"][i] < table.bounds["hoeffding"][i]
        assert table.exact[i] <= table.bounds["kearns_saul"][i]


def test_mcdiarmid_exact_tail():
    table = sh.mcdiarmid_hamming(100, 0.5, [0.05, 0.1, 0.2])
    for exact, bound in zip(table.exact, table.bounds["mcdiarmid"]):
        assert exact <= bound


def test_degenerate_scenario():
    report = sh.bound_dominance_suite([{"scenario": "degenerate", "params": {"n": 5},
                                        "alphas": [0.0, 1.0], "trials": 100, "seed": 0}])
    assert report.passed
    names = {r.check for r in report.records}
    assert "degenerate_zero_tail" in names


def test_small_default_suite_passes():
    report = sh.bound_dominance_suite(sh.default_scenarios(trials=20000, seed=99))
    assert report.passed, [r.to_dict() for r in report.failures][:3]
    assert json.loads(json.dumps(report.to_dict()))["total"] == len(report.records)


def test_scenario_validation():
    with pytest.raises(DomainError):
        sh.validate_scenario({"scenario": "martingale_symmetric", "alphas": [1.0], "trials": 10})
    with pytest.raises(DomainError):
        sh.validate_scenario({"scenario": "nope", "alphas": [1.0], "trials": 10, "seed": 0})
    with pytest.raises(DomainError):
        sh.validate_scenario({"scenario": "degenerate", "alphas": [1.0], "trials": 0, "seed": 0})
    loaded = sh.load_scenarios(json.dumps({"scenario": "degenerate", "alphas": [1], "trials": 3, "seed": 1}))
    assert loaded[0]["params"] == {} and loaded[0]["alphas"] == [1.0]
