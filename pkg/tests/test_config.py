#!/usr/bin/env python3
"""Tests for configuration validation."""
import logging
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from limitset.config import (
    FitConfig,
    default_grid,
    grid_or_default,
    merge_settings,
    parse_grid,
)
from limitset.copulas import CopulaSpec
from limitset.errors import ConfigValidationError

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler()]
)
_LOGGER = logging.getLogger(__name__)


def _rejected(factory, data):
    try:
        factory(data)
    except ConfigValidationError:
        return True
    return False


def test_fit_defaults():
    """Check the default tuning parameters."""
    config = FitConfig.from_dict({})
    assert (config.k, config.m, config.q_u, config.q, config.kappa) == (199, 100, 0.5, 0.999, 7)
    assert config.degrees == (1, 2, 3)
    assert config.scaling == "truncate"
    assert config == FitConfig()


def test_fit_none_values_fall_back_to_defaults():
    """Check that unset flags do not override defaults."""
    config = FitConfig.from_dict({"k": None, "m": 50})
    assert config.k == 199
    assert config.m == 50


def test_fit_rejections():
    """Check that invalid tuning parameters are refused."""
    assert _rejected(FitConfig.from_dict, {"k": 198})
    assert _rejected(FitConfig.from_dict, {"q_u": 0.99, "q": 0.9})
    assert _rejected(FitConfig.from_dict, {"q": 1.0})
    assert _rejected(FitConfig.from_dict, {"degrees": [4]})
    assert _rejected(FitConfig.from_dict, {"scaling": "stretch"})
    assert _rejected(FitConfig.from_dict, {"unknown": 1})


def test_fit_replace_validates():
    """Check that replace keeps validation."""
    config = FitConfig().replace(kappa=9, degrees=[3, 1])
    assert config.kappa == 9
    assert config.degrees == (1, 3)
    try:
        FitConfig().replace(k=4)
    except ConfigValidationError:
        pass
    else:
        raise AssertionError("even k was accepted")


def test_copula_specs():
    """Check family normalization and parameter requirements."""
    spec = CopulaSpec.from_dict({"family": "Inverted-Logistic", "gamma": 0.5})
    assert spec.family == "inverted_logistic"
    assert spec.label == "inverted_logistic(gamma=0.5)"
    assert _rejected(CopulaSpec.from_dict, {"family": "logistic", "gamma": 1.0})
    assert _rejected(CopulaSpec.from_dict, {"family": "logistic"})
    assert _rejected(CopulaSpec.from_dict, {"family": "gaussian", "rho": 1.0})
    assert _rejected(CopulaSpec.from_dict, {"family": "asymmetric_logistic", "gamma": 0.5})
    assert _rejected(CopulaSpec.from_dict, {"family": "clayton", "gamma": 0.5})


def test_grids():
    """Check grid parsing."""
    grid = parse_grid("0.1:0.5:0.1")
    assert np.allclose(grid, [0.1, 0.2, 0.3, 0.4, 0.5])
    default = default_grid()
    assert default.size == 99
    assert default[0] == 0.01 and default[-1] == 0.99
    assert default[24] == 0.25
    assert np.array_equal(grid_or_default(None), default)
    assert np.array_equal(grid_or_default("0.1:0.5:0.1"), grid)
    assert np.array_equal(grid_or_default([0.2, 0.4]), np.array([0.2, 0.4]))
    for text in ("0.5:0.1:0.1", "0:2:0.5", "a:b:c", "0:1:0"):
        try:
            parse_grid(text)
        except ConfigValidationError:
            continue
        raise AssertionError(f"grid {text} was accepted")


def test_merge_settings():
    """Check that later layers win and None is skipped."""
    merged = merge_settings({"k": 3, "m": 10}, None, {"k": 5, "m": None})
    assert merged == {"k": 5, "m": 10}


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
