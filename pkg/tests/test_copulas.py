#!/usr/bin/env python3
"""Tests for the copula simulators and the closed-form dependence oracles."""
import logging
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from limitset.config import default_grid
from limitset.copulas import (
    CopulaSpec,
    _positive_stable,
    boundary_measures,
    empirical_chi,
    gauge,
    sample,
    true_boundary,
    true_chi,
    true_measures,
)
from limitset.measures import alpha_from_boundary

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler()]
)
_LOGGER = logging.getLogger(__name__)

MODELS = [
    {"family": "gaussian", "rho": 0.0},
    {"family": "gaussian", "rho": 0.25},
    {"family": "gaussian", "rho": 0.5},
    {"family": "gaussian", "rho": 0.75},
    {"family": "logistic", "gamma": 0.25},
    {"family": "logistic", "gamma": 0.5},
    {"family": "logistic", "gamma": 0.75},
    {"family": "inverted_logistic", "gamma": 0.25},
    {"family": "inverted_logistic", "gamma": 0.5},
    {"family": "inverted_logistic", "gamma": 0.75},
    {"family": "asymmetric_logistic", "gamma": 0.5, "theta1": 0.5, "theta2": 0.5},
]


def _specs():
    return [CopulaSpec.from_dict(model) for model in MODELS]


def test_gauge_is_one_on_the_boundary():
    """Check that r(w) places every boundary point on the unit level set."""
    for spec in _specs():
        boundary = true_boundary(spec, 101)
        points = boundary.points
        values = gauge(spec, points[:, 0], points[:, 1])
        assert np.allclose(values, 1.0, atol=1e-12), spec.label
        assert 0.5 in boundary.w


def test_gauge_is_homogeneous():
    """Check gauge(c x) = c gauge(x)."""
    x1, x2 = np.array([0.3, 1.2, 2.0]), np.array([0.9, 0.4, 2.0])
    for spec in _specs():
        assert np.allclose(gauge(spec, 3.0 * x1, 3.0 * x2), 3.0 * gauge(spec, x1, x2)), spec.label


def test_boundary_measures_match_closed_forms():
    """Check measures computed from a dense analytic boundary against their closed forms."""
    omega = default_grid()
    delta = default_grid()
    for spec in _specs():
        truth = true_measures(spec, omega, delta)
        estimate = boundary_measures(spec, 10000, omega, delta)
        assert abs(estimate.eta - truth.eta) < 1e-3, (spec.label, estimate.eta, truth.eta)
        assert abs(estimate.alpha1 - truth.alpha1) < 2e-3, (spec.label, estimate.alpha1)
        assert abs(estimate.alpha2 - truth.alpha2) < 2e-3, (spec.label, estimate.alpha2)
        allowed = np.full(omega.shape, 1e-3)
        if spec.family == "gaussian" and spec.rho > 0:
            switch = spec.rho**2 / (1.0 + spec.rho**2)
            near = (np.abs(omega - switch) < 0.02) | (np.abs(omega - (1.0 - switch)) < 0.02)
            allowed[near] = 1e-2
        error = np.abs(estimate.lambda_values - truth.lambda_values)
        assert np.all(error < allowed), (spec.label, error.max())
        for component in (1, 2):
            error = np.abs(estimate.tau(component) - truth.tau(component))
            assert np.all(error < 1e-3), (spec.label, component, np.nanmax(error))


def test_inverted_logistic_alpha_is_zero():
    """Check alpha on the exact boundary of the inverted logistic model."""
    spec = CopulaSpec.from_dict({"family": "inverted_logistic", "gamma": 0.5})
    assert alpha_from_boundary(true_boundary(spec, 1001), 1) == 0.0


def test_strong_gaussian_alpha_from_one_call():
    """Check alpha at rho = 0.75 where the peak falls between grid angles."""
    spec = CopulaSpec(family="gaussian", rho=0.75)
    estimate = boundary_measures(spec, 10000)
    assert abs(estimate.alpha1 - 0.5625) < 2e-3, estimate.alpha1
    assert abs(estimate.alpha2 - 0.5625) < 2e-3, estimate.alpha2


def test_positive_stable_laplace_transform():
    """Check E exp(-t S) = exp(-t**gamma) for the stable mixing variable."""
    rng = np.random.default_rng(12)
    for gamma in (0.25, 0.5, 0.75):
        s = _positive_stable(rng, gamma, 200000)
        assert np.all(s > 0)
        for t in (0.5, 1.0, 2.0):
            assert abs(np.exp(-t * s).mean() - np.exp(-t**gamma)) < 0.01, (gamma, t)


def test_closed_form_values():
    """Check a few closed-form constants."""
    gaussian = true_measures(CopulaSpec(family="gaussian", rho=0.5))
    assert gaussian.eta == 0.75 and gaussian.alpha1 == 0.25 and gaussian.beta1 == 0.5
    inverted = true_measures(CopulaSpec(family="inverted_logistic", gamma=0.5))
    assert abs(inverted.eta - 2 ** -0.5) < 1e-15 and inverted.beta2 == 0.5
    assert abs(true_chi(CopulaSpec(family="logistic", gamma=0.5)) - (2 - np.sqrt(2))) < 1e-15
    assert true_chi(CopulaSpec(family="gaussian", rho=0.5)) == 0.0


def test_margins_are_exponential():
    """Check the marginal means of every simulator."""
    for index, spec in enumerate(_specs()):
        simulated = sample(spec, 100000, index)
        assert np.all(simulated.rows >= 0)
        assert np.allclose(simulated.rows.mean(axis=0), 1.0, atol=0.02), spec.label


def test_extremal_dependence_of_samples():
    """Check the empirical chi of the asymptotically dependent models."""
    logistic = CopulaSpec(family="logistic", gamma=0.5)
    chi = empirical_chi(sample(logistic, 100000, 1), 0.99)
    assert abs(chi - (2 - np.sqrt(2))) < 0.06, chi
    asymmetric = CopulaSpec(family="asymmetric_logistic", gamma=0.5, theta1=0.5, theta2=0.5)
    chi = empirical_chi(sample(asymmetric, 100000, 2), 0.99)
    assert abs(chi - (1 - np.sqrt(0.5))) < 0.06, chi


def test_same_seed_same_sample():
    """Check that sampling is reproducible from the seed."""
    spec = CopulaSpec(family="asymmetric_logistic", gamma=0.3, theta1=0.2, theta2=0.7)
    assert np.array_equal(sample(spec, 500, 9).rows, sample(spec, 500, 9).rows)
    assert not np.array_equal(sample(spec, 500, 9).rows, sample(spec, 500, 10).rows)


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
