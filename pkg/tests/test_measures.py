#!/usr/bin/env python3
"""Tests for the dependence measures and the baseline estimators."""
import logging
import os
import sys
import types

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from limitset.config import default_grid
from limitset.errors import ConfigValidationError, DataValidationError
from limitset.margins import BivariateSample
from limitset.measures import (
    alpha_from_boundary,
    baseline_measures,
    beta_fit,
    boundary_summary,
    conditional_extremes_mle,
    consistency_violations,
    draisma_eta,
    eta_from_boundary,
    hill_eta,
    hill_lambda,
    hill_tau,
    is_nondecreasing,
    joint_exceedance_counts,
    lambda_from_boundary,
    peng_eta,
    tau_from_boundary,
)

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler()]
)
_LOGGER = logging.getLogger(__name__)

HAND_BOUNDARY = np.array([[1.0, 0.25], [0.75, 0.75], [0.25, 1.0]])


def _independent(n, seed):
    return BivariateSample(np.random.default_rng(seed).exponential(size=(n, 2)))


def test_hand_boundary_measures():
    """Check every geometric measure on a three-point boundary."""
    assert eta_from_boundary(HAND_BOUNDARY) == 0.75
    assert alpha_from_boundary(HAND_BOUNDARY, 1) == 0.25
    assert alpha_from_boundary(HAND_BOUNDARY, 2) == 0.25
    assert abs(lambda_from_boundary(HAND_BOUNDARY, 0.5) - 2.0 / 3.0) < 1e-12
    assert tau_from_boundary(HAND_BOUNDARY, 0.25, 1) == 1.0
    assert tau_from_boundary(HAND_BOUNDARY, 0.2, 1) is None
    assert tau_from_boundary(HAND_BOUNDARY, 0.25, 2) == 1.0
    assert tau_from_boundary(HAND_BOUNDARY, 1.0, 1) == 1.0


def test_lambda_endpoints_and_bounds():
    """Check the lambda convention at the ends and its lower bound."""
    omega = np.array([0.0, 0.1, 0.5, 0.9, 1.0])
    values = lambda_from_boundary(HAND_BOUNDARY, omega)
    assert values[0] == 1.0 and values[-1] == 1.0
    assert np.all(values >= np.maximum(omega, 1.0 - omega) - 1e-15)
    assert np.all(values <= 1.0)


def test_tau_grid_marks_missing_values():
    """Check NaN cells on a grid where nothing qualifies."""
    values = tau_from_boundary(HAND_BOUNDARY, np.array([0.1, 0.3, 0.9]), 1)
    assert np.isnan(values[0])
    assert values[1] == 1.0


def test_alpha_needs_a_unit_coordinate():
    """Check that alpha needs the boundary to reach one."""
    try:
        alpha_from_boundary(HAND_BOUNDARY * 0.9, 1)
    except DataValidationError:
        pass
    else:
        raise AssertionError("boundary below one was accepted")


def test_alpha_tolerance_relaxes_the_reach_only():
    """Check that a tolerance accepts a peak just below one but keeps the argmax."""
    grid_boundary = np.array([[0.99995, 0.3], [0.9999, 0.31], [0.5, 1.0]])
    assert alpha_from_boundary(grid_boundary, 1, tol=1e-4) == 0.3
    try:
        alpha_from_boundary(grid_boundary, 1, tol=1e-5)
    except DataValidationError:
        pass
    else:
        raise AssertionError("peak below the tolerance was accepted")


def test_summary_is_consistent():
    """Check the self-consistency properties on the hand boundary."""
    summary = boundary_summary(HAND_BOUNDARY, default_grid(), default_grid())
    assert summary.eta == 0.75
    assert consistency_violations(HAND_BOUNDARY, summary) == []
    summary.eta = 0.2
    assert "eta_below_alpha" in consistency_violations(HAND_BOUNDARY, summary)
    data = summary.as_dict()
    assert data["tau1"][0] is None
    assert data["tau1"][-1] == 1.0


def test_is_nondecreasing_skips_nan():
    """Check that unestimable cells are ignored."""
    assert is_nondecreasing(np.array([0.1, np.nan, 0.2, 0.3]))
    assert not is_nondecreasing(np.array([0.3, np.nan, 0.2]))


def test_hill_eta_small_samples():
    """Check the Hill estimate on small structure variables."""
    rows = np.column_stack([[0.1, 0.3, 1.0, 1.2, 1.4, 1.6], [1.1, 1.3, 2.0, 2.2, 2.4, 2.6]])
    assert abs(hill_eta(types.SimpleNamespace(rows=rows), 3) - 0.4) < 1e-12
    rows = np.column_stack([[0.0, 1.0, 2.3], [5.0, 5.0, 5.0]])
    assert hill_eta(types.SimpleNamespace(rows=rows), 1) == 1.0
    try:
        hill_eta(types.SimpleNamespace(rows=rows), 3)
    except ConfigValidationError:
        pass
    else:
        raise AssertionError("n exceedances were accepted")


def test_hill_eta_independence():
    """Check the Hill estimate under independence."""
    assert abs(hill_eta(_independent(100000, 1), 5000) - 0.5) < 0.05


def test_joint_counts_match_brute_force():
    """Check s(j) against a direct count."""
    sample = BivariateSample(np.array([[1.0, 2.0], [2.0, 1.0], [3.0, 5.0], [4.0, 3.0], [5.0, 4.0]]))
    counts = joint_exceedance_counts(sample, 5)
    x1, x2 = sample.x1, sample.x2
    for j in range(6):
        t1 = np.sort(x1)[::-1][j - 1] if j else np.inf
        t2 = np.sort(x2)[::-1][j - 1] if j else np.inf
        expected = sum(1 for a, b in zip(x1, x2) if a >= t1 and b >= t2)
        assert counts[j] == expected, (j, counts[j], expected)


def test_peng_and_draisma_comonotone():
    """Check that complete dependence gives eta = 1."""
    values = np.arange(1.0, 21.0)
    sample = BivariateSample(np.column_stack([values, values]))
    assert np.array_equal(joint_exceedance_counts(sample, 10), np.arange(11))
    assert abs(peng_eta(sample, 5) - 1.0) < 1e-12
    assert draisma_eta(sample, 5) == 1.0


def test_peng_independence():
    """Check Peng's estimate under independence."""
    sample = _independent(20000, 2)
    assert abs(peng_eta(sample, 2000) - 0.5) < 0.1
    assert abs(draisma_eta(sample, 2000) - 0.5) < 0.1


def test_hill_lambda_and_tau_independence():
    """Check the Hill-type lambda and tau under independence."""
    sample = _independent(100000, 3)
    assert abs(hill_lambda(sample, 0.5) - 1.0) < 0.05
    sample = _independent(10000, 4)
    assert abs(hill_tau(sample, 1.0, 1) - 1.0) < 0.1
    assert hill_tau(sample, 0.0, 1) is None


def test_beta_fit_recovers_exponent():
    """Check beta and alpha on data with a known normalization."""
    rng = np.random.default_rng(5)
    x = rng.exponential(size=200000)
    y = 0.5 * x + x ** 0.3 * rng.normal(size=x.size)
    data = types.SimpleNamespace(rows=np.column_stack([x, y]))
    assert abs(beta_fit(data, 0.5).beta - 0.3) < 0.1
    fit = conditional_extremes_mle(data)
    assert abs(fit.alpha - 0.5) < 0.1
    assert abs(fit.beta - 0.3) < 0.1


def test_beta_fit_degenerate():
    """Check the degenerate fit of perfectly dependent data."""
    x = np.random.default_rng(6).exponential(size=1000)
    result = beta_fit(BivariateSample(np.column_stack([x, x])), 1.0)
    assert result.degenerate
    assert result.sigma == 0.0


def test_baseline_selection():
    """Check that only the requested baselines are computed."""
    sample = _independent(3000, 7)
    grid = default_grid()
    assert set(baseline_measures(sample, grid, grid, include=["peng"])) == {"eta_P"}
    everything = baseline_measures(sample, grid, grid)
    assert {"eta_H", "eta_P", "eta_D", "lambda_H", "tau1_H", "tau2_H",
            "alpha1_CE", "alpha2_CE", "beta1_CE", "beta2_CE"} == set(everything)
    assert everything["lambda_H"].shape == grid.shape
    try:
        baseline_measures(sample, grid, grid, include=["madogram"])
    except ConfigValidationError:
        pass
    else:
        raise AssertionError("unknown baseline was accepted")


def main():
    """Main function."""
    tests = [value for name, value in sorted(globals().items()) if name.startswith("test_")]
    failed = 0
    for test in tests:
        try:
            test()
            _LOGGER.info("✅ %s", test.__name__)
        except Exception as err:  # pylint: disable=broad-except
            failed += 1
            _LOGGER.error("❌ %s: %s", test.__name__, err)
    if failed:
        _LOGGER.error("\n❌ %s of %s tests failed", failed, len(tests))
        sys.exit(1)
    _LOGGER.info("\n✅ All tests completed successfully!")


if __name__ == "__main__":
    main()
