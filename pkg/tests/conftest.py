"""Shared fixtures: the two reference resonator setups used across tests."""

import math

import pytest

from cavity_qopt import (
    AdmissibleFamily,
    BoundaryParams,
    Interval,
    ResonatorConfig,
    StepFunction,
    validate_family,
)


@pytest.fixture(scope="session")
def band_cfg() -> ResonatorConfig:
    """Unit cavity on [-1, 0], soft left end (nu1=1), hard right end."""
    return ResonatorConfig(Interval(-1.0, 0.0),
                           BoundaryParams(1.0, math.inf))


@pytest.fixture(scope="session")
def band_family(band_cfg) -> AdmissibleFamily:
    """Constraints 90 <= B <= 110 on the unit cavity."""
    b1 = StepFunction((-1.0, 0.0), (90.0,))
    b2 = StepFunction((-1.0, 0.0), (110.0,))
    return validate_family(AdmissibleFamily(b1, b2))


@pytest.fixture(scope="session")
def tie_cfg() -> ResonatorConfig:
    """Unit cavity with matched ends nu1 = nu2 = sqrt(3)."""
    nu = math.sqrt(3.0)
    return ResonatorConfig(Interval(0.0, 1.0), BoundaryParams(nu, nu))


@pytest.fixture(scope="session")
def tie_family(tie_cfg) -> AdmissibleFamily:
    """Constraints 1 <= B <= 4; its zero-frequency optimum is degenerate."""
    b1 = StepFunction((0.0, 1.0), (1.0,))
    b2 = StepFunction((0.0, 1.0), (4.0,))
    return validate_family(AdmissibleFamily(b1, b2))
