"""
Closed-form global solutions in the plane: polynomial, halfspace and double-cone
families, their evaluation, a sampling verifier and the closed-form Weiss energy.
"""

from __future__ import annotations

import math
from collections import namedtuple

import numpy as np

from dcone import classifier
from dcone.blowup import (
    LOWER,
    SECTOR,
    TWO_PI,
    UPPER,
    DoubleConeSolution,
    HalfspaceSolution,
    Piece,
    PolynomialSolution,
    Quadratic,
)
from dcone.exception import AngleOutOfRangeError, InadmissibleHalfspaceError
from dcone.obstacle_model import CANONICAL_PAIR, NormalizedPair, ObstaclePair

HARMONIC_TOL = 1e-12
C1_TOL = 1e-10
ORDER_TOL = 1e-10


def _rotation_matrix(angle):
    cos, sin = math.cos(angle), math.sin(angle)
    return np.array([[cos, -sin], [sin, cos]])


ARRANGEMENTS = {
    "id": np.eye(2),
    "rot90": _rotation_matrix(0.5 * math.pi),
    "rot180": _rotation_matrix(math.pi),
    "rot270": _rotation_matrix(1.5 * math.pi),
    "flip_x1": np.array([[1.0, 0.0], [0.0, -1.0]]),
    "flip_x2": np.array([[-1.0, 0.0], [0.0, 1.0]]),
    "flip_diag": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "flip_antidiag": np.array([[0.0, -1.0], [-1.0, 0.0]]),
}
# Reflections only exchange φ1 and φ2, so fits search the rotations.
ROTATIONS = ("id", "rot90", "rot180", "rot270")


def obstacle_quadratics(pair):
    """
    :param pair: ObstaclePair or NormalizedPair.
    :return: (p¹, p²) as Quadratic forms.
    """
    if not isinstance(pair, ObstaclePair):
        pair = pair.as_pair()
    return Quadratic(pair.a1, pair.b1, pair.c1), Quadratic(pair.a2, pair.b2, pair.c2)


def evaluate(solution, x):
    """
    Value and analytic gradient of a blow-up solution.

    :param BlowupSolution solution: Solution to evaluate.
    :param x: A point (x1, x2) or an array of points with last axis of length 2.
    :return: (value, gradient) with gradient stacked on the last axis.
    """
    x = np.asarray(x, dtype=float)
    value, g1, g2 = solution.evaluate(x[..., 0], x[..., 1])
    return value, np.stack([g1, g2], axis=-1)


def transformed(solution, matrix):
    """x ↦ solution(Gᵀ x) for an orthogonal G, or for an arrangement tag."""
    if isinstance(matrix, str):
        matrix = ARRANGEMENTS[matrix]
    return solution.transformed(matrix)


def build_mu(phi1, phi2, arrangement="id"):
    """
    The four-piece double cone on the canonical pair (-1,-1,1,1).

    In polar coordinates μ equals r² for -φ2 <= 2θ <= φ1, r² cos(2θ-φ1) on the next
    quarter turn, -r² on the opposite cone and r² cos(2θ+φ2) on the remaining sector.

    :param float phi1: Angle in (0, π).
    :param float phi2: Angle in (0, π).
    :param str arrangement: Element of the square's symmetry group applied afterwards.
    :rtype: DoubleConeSolution
    :raises AngleOutOfRangeError: If an angle is outside (0, π).
    """
    for name, value in (("phi1", phi1), ("phi2", phi2)):
        if not 0.0 < value < math.pi:
            raise AngleOutOfRangeError(name, value)
    if arrangement not in ARRANGEMENTS:
        raise ValueError(
            "Unknown arrangement '{}', expected one of {}.".format(
                arrangement, sorted(ARRANGEMENTS)
            )
        )

    lo = -0.5 * phi2
    p1 = Quadratic(-1.0, 0.0, -1.0)
    p2 = Quadratic(1.0, 0.0, 1.0)
    q1 = Quadratic(math.cos(phi1), math.sin(phi1), -math.cos(phi1))
    q2 = Quadratic(math.cos(phi2), -math.sin(phi2), -math.cos(phi2))
    pieces = [
        Piece(lo, 0.5 * phi1, UPPER, p2),
        Piece(0.5 * phi1, 0.5 * math.pi + 0.5 * phi1, SECTOR, q1),
        Piece(0.5 * math.pi + 0.5 * phi1, 1.5 * math.pi - 0.5 * phi2, LOWER, p1),
        Piece(1.5 * math.pi - 0.5 * phi2, lo + TWO_PI, SECTOR, q2),
    ]
    extra = {"phi1": phi1, "phi2": phi2, "arrangement": arrangement}
    label = "mu:{!r},{!r},{}".format(phi1, phi2, arrangement)
    mu = DoubleConeSolution(pieces, label=label, extra=extra)
    if arrangement != "id":
        mu = transformed(mu, arrangement)
    return mu


def build_john():
    """x1² sgn(x1) + x2² sgn(x2): μ_{π/2,π/2} turned by π/4."""
    mu = build_mu(0.5 * math.pi, 0.5 * math.pi)
    turned = transformed(mu, _rotation_matrix(0.25 * math.pi))
    return DoubleConeSolution(turned.pieces, label="john")


def build_halfspace(pair, which, alpha, branch="+", side=1):
    """
    Glue q(α) to one obstacle along its contact line.

    The coincidence halfplane is x·e <= 0 where e is the unit normal of the line,
    turned counterclockwise from its direction and multiplied by `side`.

    :param NormalizedPair pair: Validated normalized pair.
    :param str which: 'lower' or 'upper'.
    :param float alpha: Coefficient of q.
    :param str branch: Sign of β.
    :param int side: +1 or -1, the side of the line carrying q.
    :rtype: HalfspaceSolution
    :raises InadmissibleHalfspaceError: If δ(α) > 0 or α is outside the window.
    """
    admissibility = classifier.halfspace_admissible(pair, which, alpha)
    if not admissibility.admissible:
        raise InadmissibleHalfspaceError(which, alpha, admissibility.delta)
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1, got {!r}.".format(side))

    sector = classifier.sector_from_alpha(pair, alpha, branch, which)
    d0, d1 = sector.m_direction if which == "lower" else sector.k_direction
    direction = (-side * d1, side * d0)
    p1, p2 = obstacle_quadratics(pair)
    obstacle = p1 if which == "lower" else p2
    return HalfspaceSolution(
        which, direction, sector.alpha, sector.beta, obstacle, sector.quadratic
    )


def build_polynomial(pair, q=None, kind="harmonic"):
    """
    A global polynomial solution: q harmonic between the obstacles, or one obstacle.

    :param pair: Validated pair.
    :param q: (a, b, c) of a harmonic quadratic, required for kind 'harmonic'.
    :param str kind: 'harmonic', 'lower' or 'upper'.
    :rtype: PolynomialSolution
    """
    p1, p2 = obstacle_quadratics(pair)
    if kind == "lower":
        return PolynomialSolution(p1, LOWER)
    if kind == "upper":
        return PolynomialSolution(p2, UPPER)
    if kind != "harmonic":
        raise ValueError("kind must be 'harmonic', 'lower' or 'upper', got {!r}.".format(kind))

    q = Quadratic(*q)
    if abs(q.a + q.c) > HARMONIC_TOL:
        raise ValueError("q must be harmonic, got a + c = {!r}.".format(q.a + q.c))
    below = np.linalg.eigvalsh(q.matrix() - p1.matrix()).min()
    above = np.linalg.eigvalsh(p2.matrix() - q.matrix()).min()
    if below < -ORDER_TOL or above < -ORDER_TOL:
        raise ValueError("q must satisfy p¹ <= q <= p² everywhere.")
    return PolynomialSolution(q, SECTOR)


def upper_contact_ray(solution, pair):
    """
    The ray where a halfspace solution touches the opposite obstacle.

    For Case 1 pairs this is a halfline perpendicular to the free boundary.

    :param HalfspaceSolution solution: Halfspace solution.
    :param pair: The pair it was built for.
    :return: Unit direction of the ray, or None if q never touches the other obstacle.
    """
    p1, p2 = obstacle_quadratics(pair)
    q = solution.sector_quadratic
    other = p2.matrix() - q.matrix() if solution.which == "lower" else q.matrix() - p1.matrix()
    eigenvalues = np.linalg.eigvalsh(other)
    if abs(eigenvalues[0]) > ORDER_TOL * max(1.0, abs(eigenvalues[1])):
        return None
    direction = np.array(
        classifier.null_direction(other[0, 0], 0.5 * (other[0, 1] + other[1, 0]), other[1, 1])
    )
    if np.dot(direction, solution.direction) < 0:
        direction = -direction
    return float(direction[0]), float(direction[1])


Check = namedtuple("Check", ["name", "value", "tolerance", "passed"])


class VerificationReport(object):
    """Named numerical checks, passing when every check does."""

    def __init__(self, subject):
        self.subject = subject
        self.checks = []

    def add(self, name, value, tolerance, passed=None):
        value = float(value)
        if passed is None:
            passed = value <= tolerance
        self.checks.append(Check(name, value, tolerance, bool(passed)))
        return self

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def failures(self):
        return [check for check in self.checks if not check.passed]

    def __getitem__(self, name):
        return next(check for check in self.checks if check.name == name)

    def as_dict(self):
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [check._asdict() for check in self.checks],
        }


SamplerConfig = namedtuple(
    "SamplerConfig", ["n_angles", "n_radii", "radius", "c1_tol", "order_tol"]
)
SamplerConfig.__new__.__defaults__ = (720, 16, 1.0, C1_TOL, ORDER_TOL)


def verify_solution(solution, pair, config=None, rng=None):
    """
    Check that a piecewise solution solves the double obstacle problem.

    Ordering is sampled on a polar grid that includes every piece endpoint, plus as many
    random angles when `rng` is given. Harmonicity and coincidence are checked on the
    coefficients, C¹ matching on each boundary ray.

    :param BlowupSolution solution: Solution to check.
    :param pair: The obstacle pair.
    :param SamplerConfig config: Sampling density and tolerances.
    :param numpy.random.Generator rng: Source of extra sample angles.
    :rtype: VerificationReport
    """
    config = config or SamplerConfig()
    p1, p2 = obstacle_quadratics(pair)
    report = VerificationReport(getattr(solution, "label", "") or solution.family)

    endpoints = [piece.theta_lo for piece in solution.pieces]
    angles = [np.linspace(0.0, TWO_PI, config.n_angles, endpoint=False), endpoints]
    if rng is not None:
        angles.append(rng.uniform(0.0, TWO_PI, config.n_angles))
    angles = np.concatenate(angles)
    radii = np.linspace(config.radius / config.n_radii, config.radius, config.n_radii)
    rr, tt = np.meshgrid(radii, angles, indexing="ij")
    x1, x2 = rr * np.cos(tt), rr * np.sin(tt)
    u = solution.value(x1, x2)
    ordering = max(float(np.max(p1.value(x1, x2) - u)), float(np.max(u - p2.value(x1, x2))), 0.0)
    report.add("ordering", ordering, config.order_tol)

    harmonic = [abs(piece.quadratic.laplacian) for piece in solution.pieces if piece.tag == SECTOR]
    report.add("sector_harmonicity", max(harmonic, default=0.0), HARMONIC_TOL)

    mismatch = 0.0
    for theta, before, after in solution.boundary_rays():
        y1, y2 = config.radius * math.cos(theta), config.radius * math.sin(theta)
        value = abs(before.quadratic.value(y1, y2) - after.quadratic.value(y1, y2))
        grad_before = before.quadratic.gradient(y1, y2)
        grad_after = after.quadratic.gradient(y1, y2)
        gradient = math.hypot(grad_before[0] - grad_after[0], grad_before[1] - grad_after[1])
        mismatch = max(mismatch, value, gradient)
    report.add("c1_mismatch", mismatch, config.c1_tol)

    coincidence = 0.0
    for piece in solution.pieces:
        if piece.tag == SECTOR:
            continue
        obstacle = p1 if piece.tag == LOWER else p2
        coincidence = max(
            coincidence, max(abs(x - y) for x, y in zip(piece.quadratic, obstacle))
        )
    report.add("complementarity", coincidence, HARMONIC_TOL)
    return report


def weiss_of_blowup(solution, pair):
    """
    W(u0, 1, 0) = λ1 ∫_{B1 ∩ {u=p¹}} p¹ + λ2 ∫_{B1 ∩ {u=p²}} p², in closed form.

    The radial integral of r³ gives 1/4 and each angular integral is exact.

    :param BlowupSolution solution: Homogeneous solution.
    :param pair: The obstacle pair providing λ1 and λ2.
    :rtype: float
    """
    total = 0.0
    for piece in solution.pieces:
        if piece.tag == SECTOR:
            continue
        lam = pair.lambda1 if piece.tag == LOWER else pair.lambda2
        total += 0.25 * lam * piece.quadratic.angular_integral(piece.theta_lo, piece.theta_hi)
    return total


def gallery_solutions():
    """
    Named example sets of closed-form solutions.

    :return: Mapping of name to (pair, list of solutions).
    :rtype: dict
    """
    case2 = NormalizedPair(-1.0, -1.0, 2.0, 0.0)
    case3 = NormalizedPair(-1.0, -1.0, 2.0, 2.0)
    return {
        "halfspace_case1": (
            CANONICAL_PAIR,
            [build_halfspace(CANONICAL_PAIR, "lower", -1.0, "+", 1)],
        ),
        "john": (CANONICAL_PAIR, [build_john()]),
        "mu_right_angles": (CANONICAL_PAIR, [build_mu(0.5 * math.pi, 0.5 * math.pi)]),
        "case1_double_cones": (
            CANONICAL_PAIR,
            classifier.enumerate_double_cones(CANONICAL_PAIR, -0.6, -0.6)[:2],
        ),
        "halfspace_case3": (case3, [build_halfspace(case3, "lower", 0.0, "-", 1)]),
        "case2_double_cones": (case2, classifier.enumerate_double_cones(case2)),
    }
