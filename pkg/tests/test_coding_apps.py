import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from concentration_kit import coding_apps as ca
from concentration_kit.special_functions import DomainError, binary_entropy


def density_evolution_threshold(dd, iterations=20000, tol=1e-9):
    """Bisection on the erasure probability using the BP fixed-point recursion."""
    def converges(p):
        x = p
        for _ in range(iterations):
            x = p * dd.lam(1.0 - dd.rho(1.0 - x))
            if x < 1e-10:
                return True
        return False

    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if converges(mid) else (lo, mid)
    return 0.5 * (lo + hi)


def test_regular_design_rate_is_exact():
    dd = ca.DegreeDistribution.regular(3, 6)
    assert dd.design_rate == Fraction(1, 2)
    assert dd.avg_check_degree == 6
    assert dd.is_regular


def test_parse_round_trip_and_errors():
    dd = ca.DegreeDistribution.parse("# irregular\nv 2 0.5\nv 3 0.5\nc 6 1\n")
    assert dd.lambda_coeffs == {2: Fraction(1, 2), 3: Fraction(1, 2)}
    assert dd.design_rate == 1 - Fraction(1, 6) / (Fraction(1, 4) + Fraction(1, 6))
    with pytest.raises(DomainError):
        ca.DegreeDistribution.parse("v 2 0.5\nc 6 1\n")
    with pytest.raises(DomainError):
        ca.DegreeDistribution.parse("x 2 1\nc 6 1\n")


@given(st.dictionaries(st.integers(2, 8), st.integers(1, 9), min_size=1, max_size=4),
       st.dictionaries(st.integers(2, 30), st.integers(1, 9), min_size=1, max_size=4))
def test_degree_identity_is_exact(lam_w, rho_w):
    lam = {i: Fraction(w, sum(lam_w.values())) for i, w in lam_w.items()}
    rho = {i: Fraction(w, sum(rho_w.values())) for i, w in rho_w.items()}
    stats = ca.degree_stats(ca.DegreeDistribution(lam, rho))
    assert stats.identity_gap == 0.0
    assert sum(stats.check_fractions.values()) == 1


# Degree-2 ensembles sit on the stability limit where the recursion converges too
# slowly for bisection; they are covered by the closed-form test below.
@pytest.mark.parametrize("dv,dc", [(3, 6), (4, 8), (3, 4), (5, 10)])
def test_bp_threshold_matches_density_evolution(dv, dc):
    dd = ca.DegreeDistribution.regular(dv, dc)
    assert ca.bec_bp_threshold(dd).p_bp == pytest.approx(density_evolution_threshold(dd), abs=1e-6)


def test_degree_two_threshold_is_the_stability_limit():
    res = ca.bec_bp_threshold(ca.DegreeDistribution.regular(2, 20))
    assert res.p_bp == pytest.approx(1 / 19, abs=1e-10)
    assert res.capacity == pytest.approx(1 - 1 / 19, abs=1e-10)


@given(st.floats(0.01, 0.99), st.integers(1, 30))
def test_parity_entropy_bound_properties(capacity, r):
    for channel in ("MBIOS", "BSC", "BEC", "BIAWGN"):
        value = ca.parity_entropy_bound(r, capacity, channel)
        assert 0.0 <= value <= 1.0
        assert ca.parity_entropy_bound(r + 1, capacity, channel) >= value - 1e-12
    assert ca.parity_entropy_bound(1, capacity, "BEC") == pytest.approx(1 - capacity)
    assert ca.parity_entropy_bound(1, capacity, "BSC") == pytest.approx(1 - capacity, abs=1e-9)
    # the MBIOS bound covers every symmetric channel, in particular the BEC and BSC
    assert ca.parity_entropy_bound(r, capacity, "MBIOS") >= ca.parity_entropy_bound(r, capacity, "BEC") - 1e-12


def test_cond_entropy_constants_for_2_20():
    dd = ca.DegreeDistribution.regular(2, 20)
    res = ca.cond_entropy_concentration(dd, 0.98, "MBIOS")
    assert res.B_orig == pytest.approx(1 / (2 * 21**2 * 0.1))
    h = binary_entropy((1 - 0.98**10) / 2)
    assert res.weighted_sum == pytest.approx(441 * h * h)
    assert res.B_tight == pytest.approx(1 / (2 * 0.1 * 441 * h * h))
    bec = ca.cond_entropy_concentration(dd, 0.98, "BEC")
    assert bec.B_tight == pytest.approx(1 / (2 * 0.1 * 441 * (1 - 0.98**20) ** 2))
    assert bec.factor > res.factor > 1
    with pytest.raises(DomainError):
        ca.cond_entropy_concentration(dd, 0.98, "Z")


def test_min_distance_and_cycles():
    res = ca.min_distance_interval(1000, 0.5, 2.0)
    centre = 1000 * 0.11002786443835955
    assert (res.lo + res.hi) / 2 == pytest.approx(centre, rel=1e-6)
    assert res.confidence == pytest.approx(1 - 2 * math.exp(-2))
    assert ca.min_distance_interval(100, 0.5, 1.0).vacuous
    dd = ca.DegreeDistribution.regular(3, 6)
    cyc = ca.cycles_bound(dd, 1.0)
    assert cyc.eta == pytest.approx(1 / 3)
    assert cyc.exponent_bits == pytest.approx(1 - binary_entropy(1 / 3))
    assert cyc.bound(10) == pytest.approx(2 * 2 ** (-10 * cyc.exponent_bits))
    # the entropy exponent beats the Azuma exponent
    assert cyc.exponent_bits * math.log(2) >= cyc.azuma_exponent_nats
    assert ca.cycles_bound(dd, 4.0).bound(5) == 0.0


def test_expander_bound():
    res = ca.expander_bound(1000, 5, 10, 0.01, 0.01)
    assert res.expected_neighbors == pytest.approx(1000 * 5 * (1 - 0.99**10) / 10)
    assert res.value <= res.expected_neighbors
    assert ca.expander_bound(1000, 5, 10, 0.5, 1.0).vacuous


def test_isi_counts_small_case():
    params = ca.isi_params(ca.IsiSpec(3, 6, 0, 1, 1))
    assert params.alpha_growth == 10
    assert params.N_e == 13
    assert params.N_Y == 3
    assert params.inv_beta == Fraction(8 * (12 * 169 + 9), 9)
    assert params.previous_inv_beta == 544 * 3 * 36
    assert params.gamma_opt is None
    assert ca.isi_params(ca.IsiSpec(3, 6, 1, 1, 2), (4, 2)).gamma_opt == 16 + 16
    with pytest.raises(DomainError):
        ca.IsiSpec(1, 6, 0, 0, 1)
