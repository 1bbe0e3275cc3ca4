"""
Projected successive over-relaxation for the double obstacle problem on [-L, L]².

The 5-point Laplacian is relaxed toward Δu = 0 node by node and every update is
clamped into [ψ¹, ψ²]. The fixed point is the discrete solution of the variational
inequality, which has Δ_h u = λ1 on {u = ψ¹} and λ2 on {u = ψ²}.
"""

from __future__ import annotations

import dataclasses
import warnings
from collections import namedtuple
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange
from scipy import ndimage

from dcone import config
from dcone.exception import BoundaryViolationError, SolverNotConvergedWarning

SWEEPS = ("lexicographic", "red_black")
BOUNDARY_TOL = 1e-12
MONOTONE_SLACK = 1e-14


@dataclass(frozen=True)
class GridSpec:
    """Uniform (n × n) node grid on [-L, L]², with n odd so the origin is a node."""

    n: int = 257
    L: float = 1.0

    def __post_init__(self):
        if self.n < 33 or self.n % 2 == 0:
            raise ValueError("Grid size must be odd and at least 33, got {!r}.".format(self.n))
        if not self.L > 0:
            raise ValueError("Half-width L must be positive, got {!r}.".format(self.L))

    @property
    def h(self):
        return 2.0 * self.L / (self.n - 1)

    @property
    def origin_index(self):
        return (self.n - 1) // 2

    def coords(self):
        return np.linspace(-self.L, self.L, self.n)

    def mesh(self):
        """Node coordinates with u[i, j] at (x1[i], x2[j])."""
        coords = self.coords()
        return np.meshgrid(coords, coords, indexing="ij")

    def as_dict(self):
        return {"n": self.n, "L": self.L, "h": self.h}


def _frozen(array, dtype=float):
    array = np.array(array, dtype=dtype)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class ScalarField:
    """
    Node values of a solution with its obstacles and coincidence masks.
    """

    grid: GridSpec
    u: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    lambda1: float
    lambda2: float
    lower: np.ndarray = None
    upper: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.grid.n, self.grid.n)
        for name in ("u", "psi1", "psi2"):
            value = getattr(self, name)
            if value.shape != shape:
                raise ValueError("{} must have shape {}, got {}.".format(name, shape, value.shape))
            object.__setattr__(self, name, _frozen(value))
        for name in ("lower", "upper"):
            value = getattr(self, name)
            value = np.zeros(shape, dtype=bool) if value is None else value
            object.__setattr__(self, name, _frozen(value, bool))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def h(self):
        return self.grid.h


SolveInfo = namedtuple(
    "SolveInfo",
    ["iterations", "residual", "converged", "residual_nonincreasing", "largest_increase"],
)


@dataclass(frozen=True)
class SolveConfig:
    """
    :param float omega: Relaxation factor in (1, 2).
    :param float tol: Projected residual threshold; defaults to 1e-10·λ2.
    :param int max_iters: Sweep cap; defaults to 200·n.
    :param str sweep: 'lexicographic' or 'red_black'.
    :param float mask_tol: Coincidence threshold in units of |λ| h².
    """

    omega: float = 1.8
    tol: float = None
    max_iters: int = None
    sweep: str = "lexicographic"
    mask_tol: float = 0.1

    def __post_init__(self):
        if not 1.0 < self.omega < 2.0:
            raise ValueError("omega must lie in (1, 2), got {!r}.".format(self.omega))
        if self.sweep not in SWEEPS:
            raise ValueError("sweep must be one of {}, got {!r}.".format(SWEEPS, self.sweep))
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive, got {!r}.".format(self.tol))
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be positive, got {!r}.".format(self.max_iters))

    def resolved(self, pair, grid):
        tol = self.tol if self.tol is not None else 1e-10 * pair.lambda2
        max_iters = self.max_iters if self.max_iters is not None else 200 * grid.n
        return dataclasses.replace(self, tol=tol, max_iters=max_iters)


@njit(cache=True, nogil=True)
def _sweep_lexicographic(u, psi1, psi2, omega):
    n = u.shape[0]
    residual = 0.0
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            gs = 0.25 * (u[i - 1, j] + u[i + 1, j] + u[i, j - 1] + u[i, j + 1])
            lo = psi1[i, j]
            hi = psi2[i, j]
            diff = abs(min(max(gs, lo), hi) - u[i, j])
            if diff > residual:
                residual = diff
            u[i, j] = min(max(u[i, j] + omega * (gs - u[i, j]), lo), hi)
    return residual


@njit(cache=True, parallel=True)
def _sweep_red_black(u, psi1, psi2, omega):
    n = u.shape[0]
    row_residual = np.zeros(n)
    for color in range(2):
        # Nodes of one color only read the other color, so rows run in any order.
        for i in prange(1, n - 1):
            start = 1 + (i + 1 + color) % 2
            for j in range(start, n - 1, 2):
                gs = 0.25 * (u[i - 1, j] + u[i + 1, j] + u[i, j - 1] + u[i, j + 1])
                lo = psi1[i, j]
                hi = psi2[i, j]
                diff = abs(min(max(gs, lo), hi) - u[i, j])
                if diff > row_residual[i]:
                    row_residual[i] = diff
                u[i, j] = min(max(u[i, j] + omega * (gs - u[i, j]), lo), hi)
    return row_residual.max()


def _boundary_values(boundary):
    if hasattr(boundary, "value"):
        return boundary.value
    if callable(boundary):
        return boundary
    raise TypeError("Boundary data must be callable or a blow-up solution.")


def _edge_mask(n):
    edge = np.zeros((n, n), dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    return edge


class PsorSolver(object):
    """
    Runs projected SOR sweeps until the projected residual falls below tolerance.
    """

    def __init__(self, cfg=None, verbose=False):
        self.cfg = cfg or SolveConfig()
        self.verbose = verbose

    def _print(self, msg):
        if self.verbose:
            print(msg)

    def solve(self, pair, grid, boundary):
        cfg = self.cfg.resolved(pair, grid)
        x1, x2 = grid.mesh()
        psi1 = np.ascontiguousarray(pair.lower(x1, x2), dtype=float)
        psi2 = np.ascontiguousarray(pair.upper(x1, x2), dtype=float)
        data = np.asarray(_boundary_values(boundary)(x1, x2), dtype=float)

        edge = _edge_mask(grid.n)
        violation = max(
            float(np.max((psi1 - data)[edge])), float(np.max((data - psi2)[edge])), 0.0
        )
        if violation > BOUNDARY_TOL * max(1.0, float(np.max(np.abs(data[edge])))):
            raise BoundaryViolationError(violation)

        u = np.ascontiguousarray(np.clip(data, psi1, psi2))
        threads = numba.get_num_threads()
        if cfg.sweep == "red_black":
            numba.set_num_threads(min(config.thread_limit(), numba.config.NUMBA_NUM_THREADS))
            sweep = _sweep_red_black
        else:
            sweep = _sweep_lexicographic

        self._print(
            "PSOR on n={} ({} sweep), omega={}, tol={:.3e}, at most {} sweeps".format(
                grid.n, cfg.sweep, cfg.omega, cfg.tol, cfg.max_iters
            )
        )
        history = []
        converged = False
        try:
            for iteration in range(1, cfg.max_iters + 1):
                residual = float(sweep(u, psi1, psi2, cfg.omega))
                history.append(residual)
                if residual < cfg.tol:
                    converged = True
                    break
                if iteration % 1000 == 0:
                    self._print("  sweep {}: residual {:.3e}".format(iteration, residual))
        finally:
            numba.set_num_threads(threads)

        increases = np.diff(history) if len(history) > 1 else np.zeros(1)
        info = SolveInfo(
            iterations=len(history),
            residual=history[-1],
            converged=converged,
            residual_nonincreasing=bool(np.all(increases <= MONOTONE_SLACK)),
            largest_increase=float(max(np.max(increases), 0.0)),
        )
        if not converged:
            warnings.warn(
                "PSOR stopped after {} sweeps with residual {:.3e} > tol {:.3e}.".format(
                    info.iterations, info.residual, cfg.tol
                ),
                SolverNotConvergedWarning,
            )
        self._print("Finished after {} sweeps, residual {:.3e}".format(info.iterations, residual))

        np.clip(u, psi1, psi2, out=u)
        meta = dict(info._asdict())
        meta.update(omega=cfg.omega, tol=cfg.tol, max_iters=cfg.max_iters, sweep=cfg.sweep)
        solved = ScalarField(grid, u, psi1, psi2, pair.lambda1, pair.lambda2, meta=meta)
        return coincidence_masks(solved, cfg.mask_tol)


def solve(pair, grid, boundary, cfg=None, verbose=False):
    """
    Solve the discrete double obstacle problem with Dirichlet data.

    The iteration starts from the boundary data on the whole grid, clamped between
    the obstacles.

    :param pair: ObstaclePair or NormalizedPair.
    :param GridSpec grid: Grid.
    :param boundary: Callable g(x1, x2) or a BlowupSolution.
    :param SolveConfig cfg: Solver settings.
    :param bool verbose: Print progress.
    :return: Solved field with coincidence masks.
    :rtype: ScalarField
    :raises BoundaryViolationError: If g leaves [ψ¹, ψ²] on the domain boundary.
    """
    return PsorSolver(cfg, verbose).solve(pair, grid, boundary)


def coincidence_masks(field, tol=0.1):
    """
    Mark nodes within tol·|λ|·h² of each obstacle.

    :param ScalarField field: Field to mask.
    :param float tol: Threshold in units of |λ| h².
    :rtype: ScalarField
    """
    h2 = field.h * field.h
    lower = field.u - field.psi1 <= tol * abs(field.lambda1) * h2
    upper = field.psi2 - field.u <= tol * abs(field.lambda2) * h2
    return field.replace(lower=lower, upper=upper)


def discrete_laplacian(u, h):
    """5-point Laplacian on interior nodes; boundary entries are zero."""
    lap = np.zeros_like(u)
    lap[1:-1, 1:-1] = (
        u[:-2, 1:-1] + u[2:, 1:-1] + u[1:-1, :-2] + u[1:-1, 2:] - 4.0 * u[1:-1, 1:-1]
    ) / (h * h)
    return lap


ResidualReport = namedtuple(
    "ResidualReport",
    ["max_deviation", "lower", "upper", "noncoincidence", "nodes_checked", "lower_sign"],
)
ResidualReport.__doc__ = """
Deviation of Δ_h u from λ1·χ_lower + λ2·χ_upper, away from mask boundaries.

`lower_sign` is min(Δ_h u) - λ1 on the lower mask; it is >= -O(h) for solutions.
"""


def residual_report(field, margin=2):
    """
    :param ScalarField field: Solved field.
    :param int margin: Nodes closer than margin·h to a mask boundary are skipped.
    :rtype: ResidualReport
    """
    lap = discrete_laplacian(np.asarray(field.u), field.h)
    expected = np.where(field.lower, field.lambda1, np.where(field.upper, field.lambda2, 0.0))

    changes = np.zeros_like(field.lower)
    for mask in (field.lower, field.upper):
        changes[:-1, :] |= mask[:-1, :] != mask[1:, :]
        changes[1:, :] |= mask[:-1, :] != mask[1:, :]
        changes[:, :-1] |= mask[:, :-1] != mask[:, 1:]
        changes[:, 1:] |= mask[:, :-1] != mask[:, 1:]
    near = ndimage.binary_dilation(changes, iterations=margin) if changes.any() else changes
    keep = ~near & ~_edge_mask(field.grid.n)

    deviation = np.abs(lap - expected)

    def _max(mask):
        selected = deviation[keep & mask]
        return float(selected.max()) if selected.size else 0.0

    lower_laplacian = lap[keep & field.lower]
    lower_sign = float(lower_laplacian.min() - field.lambda1) if lower_laplacian.size else 0.0
    return ResidualReport(
        max_deviation=_max(np.ones_like(keep)),
        lower=_max(field.lower),
        upper=_max(field.upper & ~field.lower),
        noncoincidence=_max(~field.lower & ~field.upper),
        nodes_checked=int(keep.sum()),
        lower_sign=lower_sign,
    )


def sample_field(pair, grid, solution, mask_tol=0.1):
    """
    Exact node values of a closed-form solution, as a field.

    :param pair: The obstacle pair the solution belongs to.
    :param GridSpec grid: Grid to sample on.
    :param solution: BlowupSolution or callable.
    :rtype: ScalarField
    """
    x1, x2 = grid.mesh()
    psi1 = pair.lower(x1, x2)
    psi2 = pair.upper(x1, x2)
    u = np.clip(_boundary_values(solution)(x1, x2), psi1, psi2)
    name = getattr(solution, "label", "") or type(solution).__name__
    meta = {"source": "sample", "solution": name}
    sampled = ScalarField(grid, u, psi1, psi2, pair.lambda1, pair.lambda2, meta=meta)
    return coincidence_masks(sampled, mask_tol)
