import pytest

from freefall.acceptance import Acceptance
from freefall.heatflow import SolverConfig


@pytest.fixture(scope="session")
def suite():
    """Acceptance harness at the default configuration; sweeps are cached across tests."""
    return Acceptance(cfg=SolverConfig(), seed=0, jobs=1)


@pytest.fixture(scope="session")
def small_cfg():
    return SolverConfig(theta_samples=72)
