"""
Minimal fits of closed-form solutions to a rescaled field on the unit ball.

At a minimal double cone the distance is stationary in φ1 and φ2, which gives the
orthogonality integrals ∫ (u - μ) r² sin(φi - 2θ) over the i-th sector. Both integrals
are reported with each Case 1 fit.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from dcone import analysis, analytic_solutions, classifier
from dcone.exception import (
    DegenerateFitError,
    InadmissibleHalfspaceError,
    NoHalfspaceFamilyError,
    NonCanonicalPairError,
    NotCase1Or2Error,
)

COARSE_STEPS = 16
HALFSPACE_SCAN = 33
FIT_TOL = 1e-6
MAX_SWEEPS = 20
ANGLE_MARGIN = 1e-9


@dataclass(frozen=True)
class FitResult:
    """
    :param solution: The fitted BlowupSolution.
    :param float distance: L²(B1) distance to the rescaled field.
    :param list orthogonality: Absolute orthogonality integrals at the optimum.
    :param dict diagnostics: Optimizer details.
    """

    solution: object
    distance: float
    orthogonality: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def family(self):
        return self.solution.family

    def as_dict(self):
        return {
            "family": self.family,
            "params": self.solution.params,
            "distance": self.distance,
            "orthogonality": list(self.orthogonality),
            "diagnostics": self.diagnostics,
        }


def _squared_distance(rescaled, solution):
    ball = rescaled.ball
    diff = rescaled.values - solution.value(ball.x1, ball.x2)
    return float(np.sum(ball.weights * diff * diff))


def _mu_orthogonality(rescaled, phi1, phi2, arrangement):
    """
    Orthogonality integrals of μ_{φ1,φ2}, measured in the arrangement's own frame.

    Pieces 1 and 3 of the unrotated μ are the sectors moved by φ1 and φ2.
    """
    ball = rescaled.ball
    matrix = analytic_solutions.ARRANGEMENTS[arrangement]
    local = matrix.T @ np.vstack([ball.x1, ball.x2])
    base = analytic_solutions.build_mu(phi1, phi2)
    index = base.piece_index(local[0], local[1])
    theta = np.arctan2(local[1], local[0])
    diff = rescaled.values - base.value(local[0], local[1])
    weighted = ball.weights * ball.r**2 * diff
    first = np.sum(np.where(index == 1, weighted * np.sin(phi1 - 2.0 * theta), 0.0))
    second = np.sum(np.where(index == 3, weighted * np.sin(phi2 + 2.0 * theta), 0.0))
    return [abs(float(first)), abs(float(second))]


def _fit_case1(rescaled, tol):
    evaluations = 0

    def objective(phi1, phi2, arrangement):
        nonlocal evaluations
        evaluations += 1
        return _squared_distance(rescaled, analytic_solutions.build_mu(phi1, phi2, arrangement))

    coarse = (np.arange(COARSE_STEPS) + 0.5) * (math.pi / COARSE_STEPS)
    best = None
    for phi1 in coarse:
        for phi2 in coarse:
            for arrangement in analytic_solutions.ROTATIONS:
                value = objective(phi1, phi2, arrangement)
                if best is None or value < best[0]:
                    best = (value, float(phi1), float(phi2), arrangement)
    coarse_best = best
    _, phi1, phi2, arrangement = best

    step = math.pi / COARSE_STEPS
    lo_limit, hi_limit = ANGLE_MARGIN, math.pi - ANGLE_MARGIN
    sweeps = 0
    for sweeps in range(1, MAX_SWEEPS + 1):
        previous = (phi1, phi2)
        result = minimize_scalar(
            lambda x: objective(x, phi2, arrangement),
            bounds=(max(lo_limit, phi1 - step), min(hi_limit, phi1 + step)),
            method="bounded",
            options={"xatol": 0.1 * tol},
        )
        phi1 = float(result.x)
        result = minimize_scalar(
            lambda x: objective(phi1, x, arrangement),
            bounds=(max(lo_limit, phi2 - step), min(hi_limit, phi2 + step)),
            method="bounded",
            options={"xatol": 0.1 * tol},
        )
        phi2 = float(result.x)
        if max(abs(phi1 - previous[0]), abs(phi2 - previous[1])) < tol:
            break

    mu = analytic_solutions.build_mu(phi1, phi2, arrangement)
    diagnostics = {
        "method": "coarse grid, then bounded Brent per coordinate",
        "coarse": {
            "phi1": coarse_best[1],
            "phi2": coarse_best[2],
            "arrangement": coarse_best[3],
            "distance": math.sqrt(coarse_best[0]),
        },
        "sweeps": sweeps,
        "evaluations": evaluations,
        "tol": tol,
    }
    return FitResult(
        mu,
        analysis.l2_distance(rescaled, mu),
        _mu_orthogonality(rescaled, phi1, phi2, arrangement),
        diagnostics,
    )


def fit_minimal_double_cone(rescaled, pair, tol=FIT_TOL):
    """
    The double cone closest to u_r in L²(B1).

    Case 1 searches φ1, φ2 and the four rotations of μ on the canonical pair. Case 2 has
    four candidates and picks the nearest, the first one on ties.

    :param Rescaled rescaled: Samples of u_r on the unit ball.
    :param NormalizedPair pair: Case 1 canonical or Case 2 pair.
    :param float tol: Angle tolerance of the Case 1 refinement.
    :rtype: FitResult
    :raises NotCase1Or2Error: For Case 3 pairs.
    :raises NonCanonicalPairError: For Case 1 pairs other than (-1,-1,1,1).
    """
    label = classifier.classify(pair)
    if label.tag == classifier.CASE3:
        raise NotCase1Or2Error(str(label))
    if label.tag == classifier.CASE1:
        if not pair.is_canonical:
            raise NonCanonicalPairError("fit_minimal_double_cone")
        return _fit_case1(rescaled, tol)

    candidates = classifier.enumerate_double_cones(pair)
    distances = [analysis.l2_distance(rescaled, cone) for cone in candidates]
    index = int(np.argmin(distances))
    diagnostics = {
        "method": "discrete candidates",
        "candidates": [cone.label for cone in candidates],
        "distances": distances,
    }
    return FitResult(candidates[index], distances[index], [], diagnostics)


def _halfspace_orthogonality(rescaled, solution):
    ball = rescaled.ball
    e1, e2 = solution.direction
    theta_e = math.atan2(e2, e1)
    diff = rescaled.values - solution.value(ball.x1, ball.x2)
    inside = ball.x1 * e1 + ball.x2 * e2 > 0
    density = ball.weights * diff * ball.r**2 * np.sin(2.0 * (ball.theta - theta_e))
    return [abs(float(np.sum(np.where(inside, density, 0.0))))]


def _fit_halfspace_family(rescaled, pair, which, branch, side, interval, tol):
    evaluations = 0

    def objective(alpha):
        nonlocal evaluations
        evaluations += 1
        try:
            solution = analytic_solutions.build_halfspace(pair, which, alpha, branch, side)
        except InadmissibleHalfspaceError:
            return math.inf
        return _squared_distance(rescaled, solution)

    lo, hi = interval
    if hi - lo <= classifier.ALGEBRA_TOL:
        return objective(lo), lo, evaluations

    grid = np.linspace(lo, hi, HALFSPACE_SCAN)
    values = [objective(alpha) for alpha in grid]
    index = int(np.argmin(values))
    best_value, best_alpha = values[index], float(grid[index])
    bracket = (float(grid[max(index - 1, 0)]), float(grid[min(index + 1, len(grid) - 1)]))
    result = minimize_scalar(objective, bounds=bracket, method="bounded", options={"xatol": tol})
    if result.fun < best_value:
        best_value, best_alpha = float(result.fun), float(result.x)
    return best_value, best_alpha, evaluations


def fit_halfspace(rescaled, pair, which, tol=FIT_TOL):
    """
    The halfspace solution of one obstacle closest to u_r in L²(B1).

    α ranges over the admissible part of the classifier's window; every branch of β and
    both sides of the free boundary are searched. Window endpoints are always evaluated.

    :param Rescaled rescaled: Samples of u_r on the unit ball.
    :param NormalizedPair pair: Validated normalized pair.
    :param str which: 'lower' or 'upper'.
    :rtype: FitResult
    :raises NoHalfspaceFamilyError: If no α is admissible for `which`.
    """
    interval = classifier.halfspace_alpha_interval(pair, which)
    if interval is None:
        raise NoHalfspaceFamilyError(which)

    best = None
    evaluations = 0
    for branch in ("+", "-"):
        for side in (1, -1):
            value, alpha, count = _fit_halfspace_family(
                rescaled, pair, which, branch, side, interval, tol
            )
            evaluations += count
            if best is None or value < best[0]:
                best = (value, alpha, branch, side)
    if not math.isfinite(best[0]):
        raise NoHalfspaceFamilyError(which)

    _, alpha, branch, side = best
    solution = analytic_solutions.build_halfspace(pair, which, alpha, branch, side)
    sector = classifier.sector_from_alpha(pair, alpha, branch, which)
    slope = sector.m if which == "lower" else sector.k
    bound = classifier.halfspace_direction_bounds(pair, which)
    diagnostics = {
        "method": "scan of {} points, then bounded Brent".format(HALFSPACE_SCAN),
        "interval": list(interval),
        "branch": branch,
        "side": side,
        "slope": slope,
        "bound": bound.as_dict(),
        "evaluations": evaluations,
        "tol": tol,
    }
    return FitResult(
        solution,
        analysis.l2_distance(rescaled, solution),
        _halfspace_orthogonality(rescaled, solution),
        diagnostics,
    )


UniquenessSignature = namedtuple(
    "UniquenessSignature", ["fit", "radii", "distances", "decreasing", "rate"]
)
UniquenessSignature.__doc__ = """
Distances ‖u_r - μ_fit‖ at decreasing radii for the double cone fitted at the smallest
radius. `rate` is None when the field is exactly homogeneous.
"""


def uniqueness_signature(field, pair, radii, order=3):
    """
    :param ScalarField field: Solved field.
    :param NormalizedPair pair: Case 1 canonical or Case 2 pair.
    :param radii: At most L/2 each; at least five must lie in `analysis.rate_window`.
    :rtype: UniquenessSignature
    """
    radii = sorted((float(r) for r in radii), reverse=True)
    fit = fit_minimal_double_cone(analysis.rescale(field, radii[-1], order), pair)
    distances = [
        analysis.l2_distance(analysis.rescale(field, r, order), fit.solution) for r in radii
    ]
    decreasing = all(later <= earlier for earlier, later in zip(distances, distances[1:]))
    try:
        rate = analysis.convergence_rate(field, fit.solution, radii, order)
    except DegenerateFitError:
        rate = None
    return UniquenessSignature(fit, radii, distances, decreasing, rate)
