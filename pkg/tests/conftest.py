import numpy as np
import pytest

from sisgf import QuadraticProblemConfig, generate_problem


@pytest.fixture(scope="session")
def quad16():
    """Small benchmark instance shared by read-only tests."""
    return generate_problem(QuadraticProblemConfig(dim=16, seed=3), calibration_samples=4000)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
