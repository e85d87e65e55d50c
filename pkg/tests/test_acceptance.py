"""One test per acceptance criterion; each prints a single pass/fail line."""

import pytest

from concentration_kit.acceptance import CRITERIA, run_criterion


def _check(number, capsys, **kwargs):
    result = run_criterion(number, **kwargs)
    with capsys.disabled():
        print("\n" + result.line())
    details = {c.name: c.detail for c in result.checks if not c.passed}
    assert result.passed, details


def test_criterion_01_bec_bp_threshold(capsys):
    _check(1, capsys)


def test_criterion_02_conditional_entropy_factors(capsys):
    _check(2, capsys)


def test_criterion_03_biawgn_rate_equivalence(capsys):
    _check(3, capsys)


def test_criterion_04_pinsker_refinements(capsys):
    _check(4, capsys)


def test_criterion_05_identity_suites(capsys):
    _check(5, capsys)


def test_criterion_06_log_sobolev_suites(capsys):
    _check(6, capsys)


def test_criterion_07_transport_and_blowup(capsys):
    _check(7, capsys)


def test_criterion_08_concentration_exponent(capsys):
    _check(8, capsys)


@pytest.mark.slow
def test_criterion_09_monte_carlo_dominance(capsys):
    _check(9, capsys, trials=1_000_000)


def test_criterion_10_figure_property_checks(capsys):
    _check(10, capsys)


def test_every_criterion_has_a_test():
    assert [num for num, _name, _fn in CRITERIA] == list(range(1, 11))
