#!/usr/bin/env python3
"""Tests for the generalized Pareto threshold model."""
import logging
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from limitset.errors import DataValidationError, GpdFitError, NotEstimableError
from limitset.gpd import (
    GpdFit,
    fit_gpd_mle,
    fit_tail,
    gpd_cdf,
    gpd_loglik,
    radial_quantile,
    tail_quantile,
    xi_from_unconstrained,
    xi_to_unconstrained,
)

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler()]
)
_LOGGER = logging.getLogger(__name__)


def test_cdf_values():
    """Check the distribution function in both shape branches."""
    assert abs(gpd_cdf(GpdFit(u=0.0, sigma=1.0, xi=0.0, zeta=0.5), np.log(2.0)) - 0.5) < 1e-12
    assert abs(gpd_cdf(GpdFit(u=1.0, sigma=2.0, xi=0.5, zeta=0.5), 3.0) - (1 - 1.5 ** -2)) < 1e-12
    assert gpd_cdf(GpdFit(u=0.0, sigma=1.0, xi=-0.5, zeta=0.5), 2.0) == 1.0
    try:
        gpd_cdf(GpdFit(u=1.0, sigma=1.0, xi=0.0, zeta=0.5), 1.0)
    except DataValidationError:
        pass
    else:
        raise AssertionError("r = u was accepted")


def test_quantile_values():
    """Check the extrapolated quantiles."""
    exponential = GpdFit(u=0.0, sigma=1.0, xi=0.0, zeta=0.5)
    assert abs(radial_quantile(exponential, 0.999) - np.log(500.0)) < 1e-9
    assert abs(radial_quantile(exponential, 0.5)) < 1e-12
    heavy = GpdFit(u=2.0, sigma=1.0, xi=0.5, zeta=0.5)
    assert abs(radial_quantile(heavy, 0.999) - (2.0 + 2.0 * (np.sqrt(500.0) - 1.0))) < 1e-9


def test_quantile_below_threshold_is_not_estimable():
    """Check that a level below the threshold is refused."""
    try:
        radial_quantile(GpdFit(u=0.0, sigma=1.0, xi=0.0, zeta=0.5), 0.4)
    except NotEstimableError:
        pass
    else:
        raise AssertionError("quantile below the threshold was returned")


def test_shape_branch_continuity():
    """Check that the two shape branches agree near zero."""
    near = tail_quantile(0.0, 1.0, 1e-7, 0.5, 0.999)
    exact = tail_quantile(0.0, 1.0, 0.0, 0.5, 0.999)
    assert abs(near - exact) < 1e-5


def test_quantile_inverts_cdf():
    """Check that the conditional distribution function inverts the quantile."""
    fit = GpdFit(u=1.0, sigma=1.5, xi=0.2, zeta=0.3)
    for q in (0.8, 0.99, 0.9999):
        r = radial_quantile(fit, q)
        assert abs(1.0 - fit.zeta * (1.0 - gpd_cdf(fit, r)) - q) < 1e-10


def test_loglik_values():
    """Check the log-likelihood against closed forms and outside the support."""
    y = np.array([0.5, 1.0, 2.5])
    assert abs(gpd_loglik(y, 2.0, 0.0) - (-3 * np.log(2.0) - 2.0)) < 1e-12
    expected = -3 * np.log(2.0) - 3.0 * np.log1p(0.5 * y / 2.0).sum()
    assert abs(gpd_loglik(y, 2.0, 0.5) - expected) < 1e-12
    assert gpd_loglik(y, 1.0, -0.5) == -np.inf
    assert gpd_loglik(y, 0.0, 0.1) == -np.inf


def test_fit_parameters_are_checked():
    """Check that a tail model outside the admissible parameters is refused."""
    for sigma, xi in ((0.0, 0.1), (-1.0, 0.1), (1.0, -0.95), (1.0, 1.0), (1.0, np.nan)):
        try:
            GpdFit(u=0.0, sigma=sigma, xi=xi, zeta=0.5)
        except GpdFitError:
            continue
        raise AssertionError(f"sigma={sigma}, xi={xi} was accepted")


def test_shape_reparameterization():
    """Check the logistic map onto the shape interval."""
    for xi in (-0.9, 0.0, 0.5, 0.99):
        assert abs(xi_from_unconstrained(xi_to_unconstrained(xi)) - xi) < 1e-12
    assert -0.95 < xi_from_unconstrained(-20.0) < xi_from_unconstrained(20.0) <= 1.0


def test_exponential_excesses():
    """Check that exponential excesses give a zero shape and unit scale."""
    excesses = np.random.default_rng(1).exponential(size=100000)
    mle = fit_gpd_mle(excesses)
    assert abs(mle.xi) < 0.02, mle
    assert abs(mle.sigma - 1.0) < 0.02, mle


def test_scale_equivariance():
    """Check that rescaling the excesses rescales the scale only."""
    excesses = np.random.default_rng(2).exponential(size=500) * 0.7
    base = fit_gpd_mle(excesses)
    scaled = fit_gpd_mle(excesses * 4.0)
    assert abs(scaled.sigma - 4.0 * base.sigma) < 1e-6 * scaled.sigma
    assert abs(scaled.xi - base.xi) < 1e-6


def test_rejected_excesses():
    """Check the floor on excesses and degenerate samples."""
    for excesses in (np.ones(50), np.arange(1.0, 6.0), np.array([1.0] * 20 + [-1.0])):
        try:
            fit_gpd_mle(excesses)
        except GpdFitError:
            continue
        raise AssertionError(f"excesses {excesses} were accepted")


def test_fit_tail_uses_threshold_level():
    """Check the threshold and exceedance rate of a tail fit."""
    radii = np.random.default_rng(4).exponential(size=2000)
    fit = fit_tail(radii, 0.5)
    assert fit.u == float(np.quantile(radii, 0.5))
    assert fit.zeta == 0.5


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
