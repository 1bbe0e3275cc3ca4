"""
Blow-up analysis of solved fields: rescaling, Weiss energy and its trace, energy
classes and convergence rates.

All integrals over the unit ball use a fixed polar midpoint rule, so sector-piecewise
integrands are integrated without corner artifacts. Values between grid nodes come
from a cubic interpolating spline; `order=1` gives bilinear interpolation.
"""

from __future__ import annotations

import math
from collections import namedtuple

import numpy as np
from scipy.interpolate import RectBivariateSpline

from dcone import analytic_solutions, classifier
from dcone.exception import (
    AmbiguousEnergyError,
    DegenerateFitError,
    InadmissibleHalfspaceError,
    RadiusTooLargeError,
    RadiusTooSmallError,
)
from dcone.fd_solver import GridSpec, ScalarField, coincidence_masks, discrete_laplacian

BALL_ANGLES = 128
BALL_RADII = 64
CIRCLE_POINTS = 512
DISC_SUBSAMPLES = 16
TRACE_SLACK = 5e-3
AMBIGUITY = 0.1
DEGENERATE_DISTANCE = 1e-12
MIN_RATE_RADII = 5
TRACE_MIN_CELLS = 20
RATE_MIN_CELLS = 8
RATE_MAX_FRACTION = 0.25
WINDOW_SLACK = 1e-9

POLYNOMIAL_HARMONIC = "polynomial-harmonic"
HALFSPACE_OR_DOUBLE_CONE = "halfspace-or-double-cone"
COINCIDENCE_POLYNOMIAL = "coincidence-polynomial"
ENERGY_CLASSES = (POLYNOMIAL_HARMONIC, HALFSPACE_OR_DOUBLE_CONE, COINCIDENCE_POLYNOMIAL)


Ball = namedtuple("Ball", ["x1", "x2", "r", "theta", "weights"])


def _unit_ball():
    radii = (np.arange(BALL_RADII) + 0.5) / BALL_RADII
    angles = (np.arange(BALL_ANGLES) + 0.5) * (2.0 * math.pi / BALL_ANGLES)
    r, theta = np.meshgrid(radii, angles, indexing="ij")
    weights = r * (1.0 / BALL_RADII) * (2.0 * math.pi / BALL_ANGLES)
    return Ball(
        (r * np.cos(theta)).ravel(),
        (r * np.sin(theta)).ravel(),
        r.ravel(),
        theta.ravel(),
        weights.ravel(),
    )


# Quadrature nodes of B1: 128 angular × 64 radial midpoints.
BALL = _unit_ball()


Rescaled = namedtuple("Rescaled", ["r", "values", "ball"])
Rescaled.__doc__ = "u_r(x) = u(rx)/r² at the nodes of BALL."


def _values(solution, x1, x2):
    if hasattr(solution, "value"):
        return solution.value(x1, x2)
    return solution(x1, x2)


def _check_radius(field, r):
    if not r > 0:
        raise ValueError("Radius must be positive, got {!r}.".format(r))
    limit = 0.5 * field.grid.L
    if r > limit * (1.0 + 1e-12):
        raise RadiusTooLargeError(r, limit)


def field_interpolator(field, order=3, values=None):
    """
    Spline through the node values of a field, evaluated with `.ev(x1, x2)`.

    :param ScalarField field: Field providing the grid.
    :param int order: 3 for cubic, 1 for bilinear.
    :param numpy.ndarray values: Node values to interpolate instead of u.
    :rtype: scipy.interpolate.RectBivariateSpline
    """
    coords = field.grid.coords()
    data = np.asarray(field.u if values is None else values)
    return RectBivariateSpline(coords, coords, data, kx=order, ky=order)


def rescale(field, r, order=3):
    """
    Sample u_r on the unit ball.

    :param ScalarField field: Solved field.
    :param float r: Radius, at most L/2.
    :param int order: Interpolation order.
    :rtype: Rescaled
    :raises RadiusTooLargeError: If r > L/2.
    """
    _check_radius(field, r)
    spline = field_interpolator(field, order)
    values = spline.ev(r * BALL.x1, r * BALL.x2) / (r * r)
    return Rescaled(r, values, BALL)


def sample_ball(solution):
    """A closed-form solution at the nodes of BALL, shaped like `rescale` output."""
    return Rescaled(1.0, np.asarray(_values(solution, BALL.x1, BALL.x2), dtype=float), BALL)


def l2_distance(rescaled, solution):
    """
    ‖u_r - solution‖ in L²(B1).

    :param Rescaled rescaled: Samples from `rescale` or `sample_ball`.
    :param solution: BlowupSolution or callable.
    :rtype: float
    """
    ball = rescaled.ball
    diff = rescaled.values - _values(solution, ball.x1, ball.x2)
    return float(math.sqrt(np.sum(ball.weights * diff * diff)))


def rescale_field(field, r, order=3):
    """
    u_r as a field on [-2, 2]² with the resolution of the input.

    By the scaling identity W(u, r) = W(u_r, 1).

    :rtype: ScalarField
    :raises RadiusTooLargeError: If r > L/2.
    """
    _check_radius(field, r)
    grid = GridSpec(field.grid.n, 2.0)
    x1, x2 = grid.mesh()
    scale = 1.0 / (r * r)
    arrays = [
        field_interpolator(field, order, values).ev(r * x1, r * x2) * scale
        for values in (field.u, field.psi1, field.psi2)
    ]
    u, psi1, psi2 = arrays
    meta = dict(field.meta, rescaled_by=r)
    scaled = ScalarField(
        grid, np.clip(u, psi1, psi2), psi1, psi2, field.lambda1, field.lambda2, meta=meta
    )
    return coincidence_masks(scaled)


def disc_weights(grid, r, subsamples=DISC_SUBSAMPLES):
    """
    Node weights for ∫ over B_r: h² times the fraction of each node's cell inside the disc.

    :rtype: numpy.ndarray
    """
    x1, x2 = grid.mesh()
    h = grid.h
    dist = np.hypot(x1, x2)
    reach = h / math.sqrt(2.0)
    weights = np.where(dist + reach <= r, 1.0, 0.0)
    partial = np.abs(dist - r) < reach
    offsets = ((np.arange(subsamples) + 0.5) / subsamples - 0.5) * h
    o1, o2 = np.meshgrid(offsets, offsets, indexing="ij")
    s1 = x1[partial][:, None, None] + o1
    s2 = x2[partial][:, None, None] + o2
    weights[partial] = np.mean(s1 * s1 + s2 * s2 <= r * r, axis=(1, 2))
    return weights * h * h


def weiss_energy(field, r, order=3):
    """
    W(u, r, 0) = r⁻⁴ ∫_{B_r} (|∇u|² + 2u Δ_h u) - 2 r⁻⁵ ∮_{∂B_r} u².

    On a solution Δ_h u equals λ1 on {u = ψ¹} and λ2 on {u = ψ²}, so the bulk term
    matches 2λ1 u χ1 + 2λ2 u χ2 without thresholding the contact sets.

    :param ScalarField field: Solved field.
    :param float r: Radius, at most L/2.
    :param int order: Interpolation order on the circle.
    :rtype: float
    :raises RadiusTooLargeError: If r > L/2.
    """
    _check_radius(field, r)
    h = field.h
    u = np.asarray(field.u)
    g1, g2 = np.gradient(u, h)
    density = g1 * g1 + g2 * g2 + 2.0 * u * discrete_laplacian(u, h)
    bulk = float(np.sum(disc_weights(field.grid, r) * density))

    angles = np.linspace(0.0, 2.0 * math.pi, CIRCLE_POINTS, endpoint=False)
    circle = field_interpolator(field, order).ev(r * np.cos(angles), r * np.sin(angles))
    boundary = 2.0 * math.pi * r * float(np.mean(circle * circle))
    return bulk / r**4 - 2.0 * boundary / r**5


WeissTrace = namedtuple(
    "WeissTrace", ["radii", "values", "differences", "min_difference", "monotone", "slack"]
)
WeissTrace.__doc__ = """
W at decreasing radii. differences[i] = W(r_i) - W(r_{i+1}) must be >= -slack.
"""


def weiss_trace(field, radii, slack=TRACE_SLACK, order=3):
    """
    :param ScalarField field: Solved field.
    :param radii: Strictly decreasing radii in (20h, L/2].
    :param float slack: Quadrature slack for the monotonicity flag.
    :rtype: WeissTrace
    :raises RadiusTooSmallError: If the smallest radius is at most 20h.
    """
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("At least one radius is needed.")
    if any(later >= earlier for earlier, later in zip(radii, radii[1:])):
        raise ValueError("Radii must be strictly decreasing, got {}.".format(radii))
    limit = TRACE_MIN_CELLS * field.h
    if radii[-1] <= limit:
        raise RadiusTooSmallError(radii[-1], limit)
    values = [weiss_energy(field, r, order) for r in radii]
    differences = [earlier - later for earlier, later in zip(values, values[1:])]
    minimum = min(differences) if differences else 0.0
    return WeissTrace(radii, values, differences, minimum, minimum >= -slack, slack)


def _halfspace_samples(pair, samples=5):
    for which in ("lower", "upper"):
        interval = classifier.halfspace_alpha_interval(pair, which)
        if interval is None:
            continue
        for alpha in np.linspace(interval[0], interval[1], samples):
            for branch in ("+", "-"):
                for side in (1, -1):
                    try:
                        yield analytic_solutions.build_halfspace(pair, which, alpha, branch, side)
                    except InadmissibleHalfspaceError:
                        continue


def _double_cone_samples(pair, samples=5):
    label = classifier.classify(pair)
    if label.tag == classifier.CASE2:
        yield from classifier.enumerate_double_cones(pair)
    elif label.tag == classifier.CASE1:
        alphas = classifier.double_cone_alphas(pair)
        for alpha1 in np.linspace(alphas.lo, alphas.hi, samples):
            for alpha2 in np.linspace(alphas.lo, alphas.hi, samples):
                yield from classifier.enumerate_double_cones(pair, alpha1, alpha2)


def energy_levels(pair):
    """
    Closed-form Weiss energies of the blow-up families of a pair.

    On the canonical pair these are exactly 0, π and 2π. For other pairs the energy of
    halfspace and double-cone solutions depends on their parameters, so each class
    carries every level met on a sample of its family.

    :param NormalizedPair pair: Validated normalized pair.
    :return: Class name to sorted list of levels; classes without members are omitted.
    :rtype: dict
    """
    cones = list(_halfspace_samples(pair)) + list(_double_cone_samples(pair))
    polynomials = [
        analytic_solutions.build_polynomial(pair, kind="lower"),
        analytic_solutions.build_polynomial(pair, kind="upper"),
    ]
    levels = {POLYNOMIAL_HARMONIC: [0.0]}
    for name, members in ((HALFSPACE_OR_DOUBLE_CONE, cones), (COINCIDENCE_POLYNOMIAL, polynomials)):
        values = {round(analytic_solutions.weiss_of_blowup(s, pair), 12) for s in members}
        if values:
            levels[name] = sorted(values)
    return levels


EnergyClass = namedtuple(
    "EnergyClass", ["name", "level", "distance", "runner_up", "runner_up_distance"]
)


def classify_blowup_energy(w_limit, pair):
    """
    Match a limiting Weiss energy to the nearest blow-up class.

    :param float w_limit: W at the smallest radius of a trace.
    :param NormalizedPair pair: Validated normalized pair.
    :rtype: EnergyClass
    :raises AmbiguousEnergyError: If two classes have a level within 0.1 of w_limit.
    """
    nearest = []
    for name, levels in energy_levels(pair).items():
        level = min(levels, key=lambda value: abs(value - w_limit))
        nearest.append((abs(level - w_limit), ENERGY_CLASSES.index(name), name, level))
    nearest.sort()
    distance, _, name, level = nearest[0]
    runner_up = nearest[1] if len(nearest) > 1 else (math.inf, None, None, None)
    if runner_up[0] <= AMBIGUITY:
        raise AmbiguousEnergyError(w_limit, name, runner_up[2])
    return EnergyClass(name, level, distance, runner_up[2], runner_up[0])


RateEstimate = namedtuple(
    "RateEstimate", ["gamma", "C", "residual", "r_range", "distances", "radii"]
)
RateEstimate.__doc__ = """
Least-squares fit ‖u_r - u0‖ ≈ C r^γ. `distances` belong to `radii`, the given radii
that fall in the fit window.
"""


def rate_window(field):
    """
    Radii between 8h and L/4, clear of both the grid scale and the domain boundary.

    :rtype: tuple[float, float]
    """
    return RATE_MIN_CELLS * field.h, RATE_MAX_FRACTION * field.grid.L


def convergence_rate(field, u0, radii, order=3):
    """
    :param ScalarField field: Solved field.
    :param u0: The blow-up limit, a BlowupSolution.
    :param radii: At least five radii; only those in `rate_window` are fitted.
    :rtype: RateEstimate
    :raises DegenerateFitError: If fewer than five radii lie in the window with a distance
        of at least 1e-12.
    """
    radii = [float(r) for r in radii]
    if len(radii) < MIN_RATE_RADII:
        raise ValueError(
            "A rate fit needs at least {} radii, got {}.".format(MIN_RATE_RADII, len(radii))
        )
    lo, hi = rate_window(field)
    fitted_radii = [
        r for r in radii if lo * (1.0 - WINDOW_SLACK) <= r <= hi * (1.0 + WINDOW_SLACK)
    ]
    distances = [l2_distance(rescale(field, r, order), u0) for r in fitted_radii]
    keep = [(r, d) for r, d in zip(fitted_radii, distances) if d >= DEGENERATE_DISTANCE]
    if len(keep) < MIN_RATE_RADII:
        raise DegenerateFitError(len(keep), MIN_RATE_RADII, max(distances, default=0.0))

    log_r = np.log([r for r, _ in keep])
    log_d = np.log([d for _, d in keep])
    gamma, log_c = np.polyfit(log_r, log_d, 1)
    fitted = gamma * log_r + log_c
    residual = float(np.sqrt(np.mean((log_d - fitted) ** 2)))
    r_range = (min(r for r, _ in keep), max(r for r, _ in keep))
    return RateEstimate(
        float(gamma), float(math.exp(log_c)), residual, r_range, distances, fitted_radii
    )
