import math
import pathlib

import pytest

from dcone import analytic_solutions, fd_solver
from dcone.obstacle_model import CANONICAL_PAIR, NormalizedPair

FIXTURES_DIR = pathlib.Path(__file__).parent.resolve() / "fixtures"

HALF_PI = 0.5 * math.pi


@pytest.fixture
def canonical_pair():
    return CANONICAL_PAIR


@pytest.fixture
def case2_pair():
    return NormalizedPair(-1.0, -1.0, 2.0, 0.0)


@pytest.fixture
def case3_pair():
    return NormalizedPair(-1.0, -1.0, 2.0, 2.0)


@pytest.fixture
def small_grid():
    return fd_solver.GridSpec(65)


@pytest.fixture
def mu_right():
    return analytic_solutions.build_mu(HALF_PI, HALF_PI)


@pytest.fixture
def mu_field(canonical_pair, mu_right):
    """μ_{π/2,π/2} sampled exactly on a 129-node grid."""
    return fd_solver.sample_field(canonical_pair, fd_solver.GridSpec(129), mu_right)


@pytest.fixture
def solved_mu_field(canonical_pair, mu_right):
    """PSOR solution with μ_{π/2,π/2} boundary data on a 65-node grid."""
    cfg = fd_solver.SolveConfig(omega=1.9, tol=1e-11)
    return fd_solver.solve(canonical_pair, fd_solver.GridSpec(65), mu_right, cfg)
