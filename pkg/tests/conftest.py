import numpy as np
import pytest

from muelleratom.grid import build_log_grid, default_grid
from muelleratom.solver import SolverConfig, minimize_mueller


@pytest.fixture(scope="session")
def grid_fine():
    """Accuracy grid for quadrature and closed-form checks."""
    return build_log_grid(1e-6, 60.0, 1200)


@pytest.fixture(scope="session")
def grid_coarse():
    """Small grid for randomized suites."""
    return build_log_grid(1e-4, 60.0, 400)


@pytest.fixture(scope="session")
def hydrogen_default_grid():
    return default_grid(1.0)


@pytest.fixture(scope="session")
def carbon_result():
    """Converged neutral Z = N = 6 minimizer, shared by the harness tests."""
    return minimize_mueller(6.0, 6.0, SolverConfig())


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
