#!/usr/bin/env python3
"""Tests for the smoothed boundary estimates and spline-degree selection."""
import logging
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from limitset.config import FitConfig
from limitset.copulas import CopulaSpec, sample
from limitset.errors import NumericalError
from limitset.local import LocalQuantiles
from limitset.margins import RawSample, to_exponential_margins
from limitset.smooth import SmoothCandidate, absolute_error, estimate, select_degree

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler()]
)
_LOGGER = logging.getLogger(__name__)

SMALL_CONFIG = FitConfig(k=51, m=100, kappa=7)


def _local(r_hat):
    r_hat = np.asarray(r_hat, dtype=float)
    zeros = np.zeros(r_hat.size)
    return LocalQuantiles(
        angles=np.linspace(0.1, 0.9, r_hat.size),
        epsilon=zeros,
        u=zeros,
        sigma=zeros + 1.0,
        xi=zeros,
        r_hat=r_hat,
        m=10,
        q_u=0.5,
        q=0.999,
    )


def _candidate(degree, r_hat):
    r_hat = np.asarray(r_hat, dtype=float)
    return SmoothCandidate(
        degree=degree, boundary=None, surface=None, r_hat=r_hat, mask=np.ones(r_hat.size, bool)
    )


def test_absolute_error_is_a_sum():
    """Check the summed absolute difference."""
    local = _local([1.0, 2.0, 3.0])
    assert absolute_error(local, _candidate(1, [1.5, 2.0, 2.0])) == 1.5


def test_exact_candidate_wins():
    """Check that a candidate equal to the local quantiles is chosen with zero error."""
    local = _local([5.0, 6.0, 7.0])
    candidates = {
        1: _candidate(1, [4.0, 6.0, 7.0]),
        2: _candidate(2, [5.0, 6.0, 7.0]),
        3: _candidate(3, [5.0, 6.5, 7.0]),
    }
    degree, chosen, errors = select_degree(local, candidates)
    assert degree == 2
    assert chosen is candidates[2]
    assert errors == {1: 1.0, 2: 0.0, 3: 0.5}


def test_ties_go_to_the_lower_degree():
    """Check the tie-break between equal errors."""
    local = _local([5.0, 6.0])
    candidates = {3: _candidate(3, [5.0, 7.0]), 2: _candidate(2, [6.0, 6.0])}
    degree, _, _ = select_degree(local, candidates)
    assert degree == 2


def test_masked_angles_are_skipped():
    """Check that dropped grid angles do not count towards the error."""
    local = _local([1.0, 100.0, 3.0])
    candidate = SmoothCandidate(
        degree=1, boundary=None, surface=None, r_hat=np.array([1.0, 3.0]),
        mask=np.array([True, False, True]),
    )
    assert absolute_error(local, candidate) == 0.0


def test_no_candidates():
    """Check that selection needs a candidate."""
    try:
        select_degree(_local([1.0]), {})
    except NumericalError:
        pass
    else:
        raise AssertionError("empty candidate set was accepted")


def test_estimate_end_to_end():
    """Check the full estimator on simulated logistic data."""
    spec = CopulaSpec.from_dict({"family": "logistic", "gamma": 0.5})
    ranked = to_exponential_margins(RawSample(sample(spec, 3000, 42).rows))
    fit = estimate(ranked, SMALL_CONFIG)
    assert fit.degree in (1, 2, 3)
    assert fit.mae and set(fit.mae) | set(fit.failures) == {1, 2, 3}
    assert fit.mae[fit.degree] == min(fit.mae.values())
    for candidate in fit.candidates.values():
        points = candidate.boundary.points
        assert points[:, 0].max() == 1.0 and points[:, 1].max() == 1.0
        assert np.all((points >= 0) & (points <= 1))
    assert fit.boundary.source == f"smooth-degree-{fit.degree}"
    assert 0.5 in fit.boundary.angles
    assert fit.local_boundary.source == "local"
    report = fit.report()
    assert report["degree"] == fit.degree
    assert len(report["local_fits"]) == SMALL_CONFIG.k
    assert report["config"]["k"] == SMALL_CONFIG.k
    again = estimate(ranked, SMALL_CONFIG)
    assert np.array_equal(again.boundary.points, fit.boundary.points)


def test_single_degree_configuration():
    """Check that a single configured degree is always selected."""
    spec = CopulaSpec.from_dict({"family": "inverted_logistic", "gamma": 0.5})
    ranked = to_exponential_margins(RawSample(sample(spec, 3000, 43).rows))
    fit = estimate(ranked, SMALL_CONFIG.replace(degrees=[3]))
    assert fit.degree == 3
    assert list(fit.surfaces) == [3]


def test_exchanging_the_margins_mirrors_the_estimate():
    """Check that swapping the two columns reflects every boundary about the diagonal."""
    spec = CopulaSpec.from_dict({"family": "logistic", "gamma": 0.5})
    ranked = to_exponential_margins(RawSample(sample(spec, 3000, 44).rows))
    config = FitConfig(k=21, m=150, degrees=(1, 2))
    fit = estimate(ranked, config)
    mirrored = estimate(ranked.swapped(), config)
    assert np.allclose(mirrored.local_boundary.angles, 1.0 - fit.local_boundary.angles[::-1],
                       atol=1e-12)
    assert np.allclose(mirrored.local_boundary.points, fit.local_boundary.points[::-1, ::-1],
                       atol=1e-6)
    assert set(mirrored.candidates) == set(fit.candidates)
    for degree, candidate in fit.candidates.items():
        reflected = mirrored.candidates[degree].boundary
        assert np.allclose(reflected.points, candidate.boundary.points[::-1, ::-1], atol=2e-3), degree
        assert abs(mirrored.mae[degree] - fit.mae[degree]) < 1e-2 * max(fit.mae[degree], 1.0)
    assert abs(mirrored.eta_h - fit.eta_h) < 1e-9


def test_worker_processes_give_the_same_fit():
    """Check that fitting the degrees in worker processes changes nothing."""
    spec = CopulaSpec.from_dict({"family": "gaussian", "rho": 0.5})
    ranked = to_exponential_margins(RawSample(sample(spec, 2000, 45).rows))
    config = FitConfig(k=21, m=150, degrees=(1, 2, 3))
    serial = estimate(ranked, config)
    pooled = estimate(ranked, config, threads=3)
    assert pooled.degree == serial.degree
    assert pooled.mae == serial.mae
    assert pooled.failures == serial.failures
    assert np.array_equal(pooled.boundary.points, serial.boundary.points)


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
