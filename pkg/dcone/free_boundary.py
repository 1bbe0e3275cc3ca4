"""
Free-boundary branches through the origin and the angles between them.

The free boundary of each obstacle is traced as the h² level set of its gap, u - ψ¹ or
ψ² - u, with marching squares. The contour passing closest to the origin is split there
into two branches. The coincidence set {u = ψ¹} lies counterclockwise from Γ1⁻ to Γ1⁺,
and {u = ψ²} counterclockwise from Γ2⁺ to Γ2⁻.
"""

from __future__ import annotations

import itertools
import math
from collections import namedtuple

import numpy as np
from skimage import measure

from dcone import classifier
from dcone.exception import InsufficientCurvesError, NoCurveError

GAMMA1_PLUS = "Gamma1+"
GAMMA1_MINUS = "Gamma1-"
GAMMA2_PLUS = "Gamma2+"
GAMMA2_MINUS = "Gamma2-"
LABELS = (GAMMA1_PLUS, GAMMA1_MINUS, GAMMA2_PLUS, GAMMA2_MINUS)

NEAR_ORIGIN = 4.0
FIT_OUTER = 0.2
LABEL_RADIUS = 0.1
MIN_FIT_POINTS = 3
ANGLE_TOL_DEG = 3.0


Branch = namedtuple("Branch", ["label", "points", "tangent", "residual", "n_fit"])
Branch.__doc__ = """
One free-boundary branch: polyline from the origin outward, unit tangent at the origin,
RMS distance of the fitted points from the tangent line and the number of points fitted.
"""


class FreeBoundaryCurves(object):
    """Labeled branches of Γ1 and Γ2 extracted from one field."""

    def __init__(self, branches, h, L):
        self.branches = dict(branches)
        self.h = h
        self.L = L

    @property
    def labels(self):
        return [label for label in LABELS if label in self.branches]

    def __contains__(self, label):
        return label in self.branches

    def __getitem__(self, label):
        return self.branches[label]

    def __len__(self):
        return len(self.branches)

    def angle(self, label):
        tangent = self.branches[label].tangent
        return math.atan2(tangent[1], tangent[0]) % (2.0 * math.pi)

    def as_dict(self):
        return {
            label: {
                "tangent": [float(v) for v in self.branches[label].tangent],
                "angle_deg": math.degrees(self.angle(label)),
                "residual": self.branches[label].residual,
                "n_fit": self.branches[label].n_fit,
                "n_points": len(self.branches[label].points),
            }
            for label in self.labels
        }


def _outward_polyline(points):
    """Origin followed by the points whose distance to it strictly increases."""
    kept = [np.zeros(2)]
    last = 0.0
    for point in points:
        radius = math.hypot(point[0], point[1])
        if radius > last:
            kept.append(point)
            last = radius
    return np.array(kept)


def _tangent(points, inner, outer):
    """
    Total-least-squares line through the points with inner <= |x| <= outer.

    :return: (unit direction pointing away from the origin, residual, count), or None.
    """
    radius = np.hypot(points[:, 0], points[:, 1])
    selected = points[(radius >= inner) & (radius <= outer)]
    if len(selected) < MIN_FIT_POINTS:
        return None
    centroid = selected.mean(axis=0)
    _, singular, vt = np.linalg.svd(selected - centroid, full_matrices=False)
    direction = vt[0]
    if np.dot(centroid, direction) < 0:
        direction = -direction
    residual = float(singular[-1] / math.sqrt(len(selected)))
    return direction, residual, len(selected)


def _nearest_gap(gap, grid, point):
    n = grid.n
    i = min(max(int(round((point[0] + grid.L) / grid.h)), 0), n - 1)
    j = min(max(int(round((point[1] + grid.L) / grid.h)), 0), n - 1)
    return gap[i, j]


def _obstacle_branches(gap, grid):
    """
    Split the contour through the origin into two branches.

    :return: list of (polyline, tangent, residual, count).
    """
    h, L = grid.h, grid.L
    level = h * h
    if not (gap.min() < level < gap.max()):
        return []
    best = None
    for contour in measure.find_contours(gap, level):
        points = contour * h - L
        radius = np.hypot(points[:, 0], points[:, 1])
        index = int(np.argmin(radius))
        if radius[index] < NEAR_ORIGIN * h and (best is None or radius[index] < best[0]):
            best = (radius[index], points, index)
    if best is None:
        return []

    _, points, index = best
    branches = []
    for half in (points[index::-1], points[index:]):
        polyline = _outward_polyline(half)
        fit = _tangent(polyline[1:], NEAR_ORIGIN * h, FIT_OUTER * L)
        if fit is not None:
            branches.append((polyline,) + fit)
    return branches


def _label(branches, gap, grid, obstacle):
    """
    Name two branches of one obstacle by testing which sector between them is in contact.

    A single branch is named by the side its coincidence set lies on.
    """
    level = grid.h * grid.h
    radius = max(LABEL_RADIUS * grid.L, 6.0 * grid.h)
    angles = [math.atan2(b[1][1], b[1][0]) for b in branches]
    if len(branches) == 2:
        width = (angles[1] - angles[0]) % (2.0 * math.pi)
        sample_angle = angles[0] + 0.5 * width
    else:
        sample_angle = angles[0] + math.pi / 8.0
    point = (radius * math.cos(sample_angle), radius * math.sin(sample_angle))
    ccw_contact = _nearest_gap(gap, grid, point) <= level

    # Γ1 contact runs ccw from the minus to the plus branch, Γ2 contact the other way.
    if obstacle == 1:
        first, second = (GAMMA1_MINUS, GAMMA1_PLUS) if ccw_contact else (GAMMA1_PLUS, GAMMA1_MINUS)
    else:
        first, second = (GAMMA2_PLUS, GAMMA2_MINUS) if ccw_contact else (GAMMA2_MINUS, GAMMA2_PLUS)
    names = (first, second)
    return {
        names[index]: Branch(names[index], polyline, tangent, residual, count)
        for index, (polyline, tangent, residual, count) in enumerate(branches)
    }


def extract_free_boundary(field):
    """
    Trace Γ1 and Γ2 near the origin.

    :param ScalarField field: Solved field.
    :rtype: FreeBoundaryCurves
    :raises NoCurveError: If neither obstacle has a contour through the origin.
    """
    u = np.asarray(field.u)
    branches = {}
    for obstacle, gap in ((1, u - field.psi1), (2, field.psi2 - u)):
        found = _obstacle_branches(gap, field.grid)
        if found:
            branches.update(_label(found, gap, field.grid, obstacle))
    if not branches:
        raise NoCurveError()
    return FreeBoundaryCurves(branches, field.h, field.grid.L)


AngleCheck = namedtuple("AngleCheck", ["name", "measured", "predicted", "deviation", "passed"])


class AngleReport(object):
    """Angles in degrees between branch tangents, with the checks predicted for the case."""

    def __init__(self, case, angles, openings, checks, tolerance):
        self.case = case
        self.angles = angles
        self.openings = openings
        self.checks = checks
        self.tolerance = tolerance

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def as_dict(self):
        return {
            "case": self.case,
            "angles": self.angles,
            "openings": self.openings,
            "checks": [check._asdict() for check in self.checks],
            "tolerance_deg": self.tolerance,
            "passed": self.passed,
        }


def _between(curves, first, second):
    dot = float(np.dot(curves[first].tangent, curves[second].tangent))
    return math.degrees(math.acos(min(max(dot, -1.0), 1.0)))


def _ccw_opening(curves, start, end):
    return math.degrees((curves.angle(end) - curves.angle(start)) % (2.0 * math.pi))


def measure_angles(curves, pair, tolerance=ANGLE_TOL_DEG):
    """
    Compare branch angles with the predictions for the pair's case.

    Case 1: Γ1⁺ and Γ2⁺ cross at a right angle, as do Γ2⁻ and Γ1⁻.
    Case 2: the noncoincidence sectors S (Γ1⁺ to Γ2⁺) and S' (Γ2⁻ to Γ1⁻) both open by
    ϑ, or both by π - ϑ, whichever is nearer to their mean.

    :param FreeBoundaryCurves curves: Extracted branches.
    :param NormalizedPair pair: The pair of the field.
    :param float tolerance: Allowed deviation in degrees.
    :rtype: AngleReport
    :raises InsufficientCurvesError: If fewer than two branches were extracted.
    """
    if len(curves) < 2:
        raise InsufficientCurvesError(len(curves))
    labels = curves.labels
    angles = {
        "{}|{}".format(a, b): _between(curves, a, b) for a, b in itertools.combinations(labels, 2)
    }
    openings = {}
    for name, start, end in (("S", GAMMA1_PLUS, GAMMA2_PLUS), ("S'", GAMMA2_MINUS, GAMMA1_MINUS)):
        if start in curves and end in curves:
            openings[name] = _ccw_opening(curves, start, end)

    case = classifier.classify(pair)
    checks = []

    def check(name, measured, predicted):
        deviation = abs(measured - predicted)
        checks.append(AngleCheck(name, measured, predicted, deviation, deviation <= tolerance))

    if case.tag == classifier.CASE1:
        for first, second in ((GAMMA1_PLUS, GAMMA2_PLUS), (GAMMA2_MINUS, GAMMA1_MINUS)):
            if first in curves and second in curves:
                check("{}|{}".format(first, second), _between(curves, first, second), 90.0)
    elif case.tag == classifier.CASE2 and openings:
        theta = math.degrees(classifier.opening_angle(pair))
        # Both sectors of one double cone open by the same angle.
        mean = sum(openings.values()) / len(openings)
        predicted = min((theta, 180.0 - theta), key=lambda value: abs(value - mean))
        for name, measured in openings.items():
            check(name, measured, predicted)
    return AngleReport(str(case), angles, openings, checks, tolerance)
