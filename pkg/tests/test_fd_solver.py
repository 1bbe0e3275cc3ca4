import numba
import numpy as np
import pytest

from dcone import fd_solver
from dcone.exception import BoundaryViolationError, SolverNotConvergedWarning
from dcone.fd_solver import GridSpec, ScalarField, SolveConfig


@pytest.mark.parametrize("n, L", [(31, 1.0), (34, 1.0), (33, 0.0), (33, -1.0)])
def test_grid_validation(n, L):
    with pytest.raises(ValueError):
        GridSpec(n, L)


def test_grid_geometry():
    grid = GridSpec(33, 2.0)
    assert grid.h == 0.125
    assert grid.origin_index == 16
    x1, x2 = grid.mesh()
    assert x1[grid.origin_index, 0] == 0.0
    assert x2[0, grid.origin_index] == 0.0
    assert x1[0, 5] == -2.0


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"omega": 1.0}, "omega"),
        ({"omega": 2.5}, "omega"),
        ({"sweep": "diagonal"}, "sweep"),
        ({"tol": 0.0}, "tol"),
        ({"max_iters": 0}, "max_iters"),
    ],
)
def test_solve_config_validation(kwargs, message):
    with pytest.raises(ValueError, match=message):
        SolveConfig(**kwargs)


def test_solve_config_defaults(canonical_pair):
    resolved = SolveConfig().resolved(canonical_pair, GridSpec(65))
    assert resolved.tol == pytest.approx(4e-10)
    assert resolved.max_iters == 13000


def test_scalar_field_is_read_only():
    grid = GridSpec(33)
    zeros = np.zeros((33, 33))
    field = ScalarField(grid, zeros, zeros - 1, zeros + 1, -4.0, 4.0)
    assert not field.lower.any()
    with pytest.raises(ValueError):
        field.u[0, 0] = 1.0
    with pytest.raises(ValueError, match="shape"):
        ScalarField(grid, np.zeros((3, 3)), zeros, zeros, -4.0, 4.0)


def test_boundary_violation(canonical_pair):
    with pytest.raises(BoundaryViolationError):
        fd_solver.solve(canonical_pair, GridSpec(33), lambda x1, x2: 2.0 * (x1 * x1 + x2 * x2))


def test_boundary_must_be_callable(canonical_pair):
    with pytest.raises(TypeError):
        fd_solver.solve(canonical_pair, GridSpec(33), 0.5)


@pytest.mark.parametrize("sweep", fd_solver.SWEEPS)
def test_harmonic_data_is_reproduced(canonical_pair, sweep):
    def harmonic(x1, x2):
        return 0.5 * (x1 * x1 - x2 * x2)

    grid = GridSpec(33)
    field = fd_solver.solve(canonical_pair, grid, harmonic, SolveConfig(tol=1e-13, sweep=sweep))
    assert field.meta["converged"]
    assert field.meta["sweep"] == sweep
    assert np.max(np.abs(field.u - harmonic(*grid.mesh()))) < 1e-9
    # only the origin, where both obstacles meet, is within the mask threshold
    assert field.lower.sum() == field.upper.sum() == 1
    assert field.upper[grid.origin_index, grid.origin_index]


def test_lower_obstacle_data_stays_on_obstacle(canonical_pair):
    field = fd_solver.solve(canonical_pair, GridSpec(33), canonical_pair.lower)
    assert np.array_equal(field.u, field.psi1)
    assert field.lower.all()


def test_sweeps_agree(canonical_pair, mu_right):
    grid = GridSpec(33)
    fields = [
        fd_solver.solve(canonical_pair, grid, mu_right, SolveConfig(tol=1e-12, sweep=sweep))
        for sweep in fd_solver.SWEEPS
    ]
    assert np.max(np.abs(fields[0].u - fields[1].u)) < 1e-8


def test_solved_field_is_close_to_exact(solved_mu_field, mu_right):
    field = solved_mu_field
    assert field.meta["converged"]
    assert field.meta["residual_nonincreasing"] or field.meta["largest_increase"] < 1e-6
    x1, x2 = field.grid.mesh()
    assert np.max(np.abs(field.u - mu_right.value(x1, x2))) < 2e-2
    assert np.all(field.u >= field.psi1) and np.all(field.u <= field.psi2)


def test_residual_report(solved_mu_field):
    report = fd_solver.residual_report(solved_mu_field)
    assert report.nodes_checked > 0
    assert report.max_deviation < 1e-5
    assert report.lower_sign > -1e-5
    assert report.max_deviation >= report.lower


def test_not_converged_warns(canonical_pair, mu_right):
    with pytest.warns(SolverNotConvergedWarning):
        field = fd_solver.solve(canonical_pair, GridSpec(33), mu_right, SolveConfig(max_iters=2))
    assert field.meta["iterations"] == 2
    assert not field.meta["converged"]


def test_verbose_solve_prints(canonical_pair, capsys):
    fd_solver.solve(canonical_pair, GridSpec(33), canonical_pair.upper, verbose=True)
    assert "PSOR on n=33" in capsys.readouterr().out


def test_discrete_laplacian_is_exact_on_quadratics():
    grid = GridSpec(33)
    x1, x2 = grid.mesh()
    lap = fd_solver.discrete_laplacian(3.0 * x1 * x1 - x1 * x2 + x2 * x2, grid.h)
    assert lap[1:-1, 1:-1] == pytest.approx(np.full((31, 31), 8.0))
    assert lap[0, 0] == 0.0


def test_sample_field(mu_field, mu_right):
    assert mu_field.meta["source"] == "sample"
    x1, x2 = mu_field.grid.mesh()
    assert mu_field.u == pytest.approx(mu_right.value(x1, x2), abs=1e-14)
    origin = mu_field.grid.origin_index
    # x1 > |x2| lies on p², x1 < -|x2| on p¹
    assert mu_field.upper[-1, origin]
    assert mu_field.lower[0, origin]
    assert not mu_field.lower[-1, origin]


def test_coincidence_masks_threshold(mu_field):
    loose = fd_solver.coincidence_masks(mu_field, tol=10.0)
    assert loose.lower.sum() >= mu_field.lower.sum()
    assert loose.upper.sum() >= mu_field.upper.sum()


def test_refinement_order_on_small_grids(canonical_pair, mu_right):
    cfg = SolveConfig(omega=1.9, tol=1e-12)
    errors = []
    for n in (33, 65):
        grid = GridSpec(n)
        field = fd_solver.solve(canonical_pair, grid, mu_right, cfg)
        exact = fd_solver.sample_field(canonical_pair, grid, mu_right)
        errors.append(float(np.max(np.abs(field.u - exact.u))))
    # second order gives 4; the coarse pair only brackets it
    assert 2.0 <= errors[0] / errors[1] <= 8.0


def test_solve_restores_numba_threads(canonical_pair, monkeypatch, mocker):
    monkeypatch.setenv("DCONE_THREADS", "1")
    before = numba.get_num_threads()
    spy = mocker.spy(fd_solver.numba, "set_num_threads")
    cfg = SolveConfig(sweep="red_black")
    fd_solver.solve(canonical_pair, GridSpec(33), canonical_pair.upper, cfg)
    assert spy.call_args_list == [mocker.call(1), mocker.call(before)]
    assert numba.get_num_threads() == before


def test_failed_solve_restores_numba_threads(canonical_pair, monkeypatch, mocker):
    monkeypatch.setenv("DCONE_THREADS", "1")
    before = numba.get_num_threads()
    mocker.patch.object(fd_solver, "_sweep_red_black", side_effect=RuntimeError("sweep"))
    cfg = SolveConfig(sweep="red_black")
    with pytest.raises(RuntimeError, match="sweep"):
        fd_solver.solve(canonical_pair, GridSpec(33), canonical_pair.upper, cfg)
    assert numba.get_num_threads() == before
