"""
Closed-form classification of homogeneous blow-ups from the obstacle coefficients.

Everything here works on a NormalizedPair (b1 = b2 = 0). The sign pattern of
P(x) = (a1+c2) x1² + (a2+c1) x2² decides between:

* Case 1, P ≡ 0: a one-parameter interval of sector polynomials q, infinitely many
  double cones and rotation-invariant halfspace solutions.
* Case 2, P changes sign: one α, four double cones, halfspace directions in a cone.
* Case 3, P semi-definite: no double cones, and halfspace solutions for one obstacle only.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field

from dcone.blowup import LOWER, SECTOR, TWO_PI, UPPER, DoubleConeSolution, Piece, Quadratic
from dcone.exception import AlphaOutOfWindowError, NoDoubleConesError
from dcone.obstacle_model import CASE_TOL, signature

CASE1 = "Case1"
CASE2 = "Case2"
CASE3 = "Case3"

NON_NEGATIVE = "NonNegative"
NON_POSITIVE = "NonPositive"

# Tolerance on β² and δ(α): the quantities are products of user-supplied floats.
ALGEBRA_TOL = 1e-12
# Smallest coincidence-cone gap accepted when assembling double cones.
GAP_TOL = 1e-9


@dataclass(frozen=True)
class CaseLabel:
    tag: str
    sign: str = None
    a_zero: bool = False
    c_zero: bool = False

    @property
    def is_boundary(self):
        return self.tag == CASE3 and (self.a_zero or self.c_zero)

    @property
    def favored(self):
        """
        The obstacle whose halfspace solutions exist in every direction.

        :return: 'lower', 'upper', or None when both are treated alike.
        """
        if self.tag != CASE3:
            return None
        return "lower" if self.sign == NON_NEGATIVE else "upper"

    def as_dict(self):
        return {
            "tag": self.tag,
            "sign": self.sign,
            "boundary": self.is_boundary,
            "a_zero": self.a_zero,
            "c_zero": self.c_zero,
        }

    def __str__(self):
        if self.tag != CASE3:
            return self.tag
        return "{}({}{})".format(self.tag, self.sign, ", boundary" if self.is_boundary else "")


@dataclass(frozen=True)
class AlphaSet:
    """
    The admissible α of double-cone sector polynomials.

    `kind` is 'interval', 'single' or 'empty'. A single α on the Case 3 boundary
    only produces halfspace solutions.
    """

    kind: str
    lo: float = None
    hi: float = None
    halfspace_only: bool = False

    @property
    def is_empty(self):
        return self.kind == "empty"

    def contains(self, alpha, tol=ALGEBRA_TOL):
        if self.is_empty:
            return False
        return self.lo - tol <= alpha <= self.hi + tol

    def values(self):
        if self.kind == "single":
            return [self.lo]
        if self.kind == "interval":
            return [self.lo, self.hi]
        return []

    def as_dict(self):
        result = {"kind": self.kind, "halfspace_only": self.halfspace_only}
        if self.kind == "interval":
            result.update(lo=self.lo, hi=self.hi)
        elif self.kind == "single":
            result["value"] = self.lo
        return result


def _slope(direction):
    dx, dy = direction
    if dx == 0.0:
        return math.inf if dy > 0 else -math.inf
    return dy / dx


def _canonical_direction(v0, v1):
    norm = math.hypot(v0, v1)
    v0, v1 = v0 / norm, v1 / norm
    if v1 < 0 or (v1 == 0 and v0 < 0):
        v0, v1 = -v0, -v1
    return (v0 + 0.0, v1 + 0.0)


def null_direction(a, b, c):
    """
    Unit direction spanning the kernel of the rank-one form a x1² + 2b x1 x2 + c x2².

    Returned with angle in [0, π).
    """
    first = (-b, a)
    second = (c, -b)
    if math.hypot(*first) >= math.hypot(*second):
        return _canonical_direction(*first)
    return _canonical_direction(*second)


@dataclass(frozen=True)
class SectorSolution:
    """
    q = α x1² + 2β x1 x2 − α x2² with its contact lines.

    `m_direction` spans the line where q touches p¹ and `k_direction` the line where
    it touches p². Either can be vertical, so the slope view allows ±inf.
    """

    alpha: float
    beta: float
    m_direction: tuple
    k_direction: tuple

    @property
    def m(self):
        return _slope(self.m_direction)

    @property
    def k(self):
        return _slope(self.k_direction)

    @property
    def quadratic(self):
        return Quadratic(self.alpha, self.beta, -self.alpha)

    def as_dict(self):
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "m": _json_slope(self.m),
            "k": _json_slope(self.k),
            "m_direction": list(self.m_direction),
            "k_direction": list(self.k_direction),
        }


def _json_slope(value):
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def alpha_window(pair):
    """
    :return: (max(a1, -c2), min(a2, -c1))
    :rtype: tuple[float, float]
    """
    return max(pair.a1, -pair.c2), min(pair.a2, -pair.c1)


def classify(pair):
    """
    :param NormalizedPair pair: Validated normalized pair.
    :rtype: CaseLabel
    """
    sig = signature(pair)
    a_zero = abs(sig.A) <= CASE_TOL
    c_zero = abs(sig.C) <= CASE_TOL
    if a_zero and c_zero:
        return CaseLabel(CASE1)
    if not a_zero and not c_zero and sig.A * sig.C < 0:
        return CaseLabel(CASE2)

    non_negative = (a_zero or sig.A > 0) and (c_zero or sig.C > 0)
    sign = NON_NEGATIVE if non_negative else NON_POSITIVE
    return CaseLabel(CASE3, sign, a_zero, c_zero)


def double_cone_alphas(pair):
    """
    α values for which q = α x1² + 2β x1 x2 − α x2² can touch both obstacles.

    :param NormalizedPair pair: Validated normalized pair.
    :rtype: AlphaSet
    """
    label = classify(pair)
    if label.tag == CASE1:
        return AlphaSet("interval", pair.a1, pair.a2)
    if label.tag == CASE2:
        alpha = (pair.a2 * pair.c2 - pair.a1 * pair.c1) / (
            pair.c2 + pair.a1 - pair.a2 - pair.c1
        )
        return AlphaSet("single", alpha, alpha)
    if label.a_zero:
        return AlphaSet("single", pair.a1, pair.a1, halfspace_only=True)
    if label.c_zero:
        return AlphaSet("single", pair.a2, pair.a2, halfspace_only=True)
    return AlphaSet("empty")


def sector_from_alpha(pair, alpha, branch="+", which="lower"):
    """
    Build the sector polynomial for α and its contact lines with both obstacles.

    β is taken from the factorization of the obstacle named by `which`; for double
    cones both factorizations agree.

    :param NormalizedPair pair: Validated normalized pair.
    :param float alpha: Coefficient α.
    :param str branch: '+' or '-', the sign of β.
    :param str which: 'lower' or 'upper', which obstacle q must touch.
    :rtype: SectorSolution
    :raises AlphaOutOfWindowError: If α is outside [max(a1,-c2), min(a2,-c1)].
    """
    lo, hi = alpha_window(pair)
    if not lo - ALGEBRA_TOL <= alpha <= hi + ALGEBRA_TOL:
        raise AlphaOutOfWindowError(alpha, lo, hi)
    if which == "lower":
        beta_sq = -(alpha - pair.a1) * (alpha + pair.c1)
    else:
        beta_sq = -(alpha - pair.a2) * (alpha + pair.c2)
    beta = math.sqrt(max(beta_sq, 0.0))
    if branch == "-":
        beta = -beta
    elif branch != "+":
        raise ValueError("branch must be '+' or '-', got {!r}.".format(branch))

    m_direction = null_direction(alpha - pair.a1, beta, -alpha - pair.c1)
    k_direction = null_direction(pair.a2 - alpha, -beta, pair.c2 + alpha)
    return SectorSolution(alpha, beta + 0.0, m_direction, k_direction)


def opening_angle_cos2(pair):
    sig = signature(pair)
    return sig.A * sig.C / ((pair.a1 + pair.c1) * (pair.a2 + pair.c2))


def opening_angle(pair):
    """
    Angle between the two free-boundary lines of a double cone.

    :param NormalizedPair pair: Case 1 or Case 2 pair.
    :return: π/2 in Case 1, the acute solution of the cos² formula in Case 2.
    :rtype: float
    :raises NoDoubleConesError: For Case 3 pairs.
    """
    label = classify(pair)
    if label.tag == CASE1:
        return 0.5 * math.pi
    if label.tag == CASE2:
        return math.acos(math.sqrt(min(max(opening_angle_cos2(pair), 0.0), 1.0)))
    raise NoDoubleConesError(str(label))


def _line_rays(direction):
    angle = math.atan2(direction[1], direction[0]) % TWO_PI
    return angle, (angle + math.pi) % TWO_PI


def _sectors(start_direction, end_direction):
    """Yield (start, width) for each sector running ccw from a start ray to the next end ray."""
    ends = _line_rays(end_direction)
    for start in _line_rays(start_direction):
        width = min((end - start) % TWO_PI for end in ends)
        yield start, width


def _quadrant(angle):
    return int((angle % TWO_PI) // (0.5 * math.pi)) + 1


def _arrangements(pair, alpha1, alpha2):
    """
    Every disjoint placement of a p²-bound sector (α2, from an m-ray to a k-ray) and a
    p¹-bound sector (α1, from a k-ray to an m-ray).
    """
    p1 = Quadratic(pair.a1, 0.0, pair.c1)
    p2 = Quadratic(pair.a2, 0.0, pair.c2)
    for sign1 in ("+", "-"):
        first = sector_from_alpha(pair, alpha2, sign1)
        for start1, width1 in _sectors(first.m_direction, first.k_direction):
            for sign2 in ("+", "-"):
                second = sector_from_alpha(pair, alpha1, sign2)
                for start2, width2 in _sectors(second.k_direction, second.m_direction):
                    offset = (start2 - start1) % TWO_PI
                    if offset - width1 <= GAP_TOL or TWO_PI - offset - width2 <= GAP_TOL:
                        continue
                    pieces = [
                        Piece(start1, start1 + width1, SECTOR, first.quadratic),
                        Piece(start1 + width1, start1 + offset, UPPER, p2),
                        Piece(start1 + offset, start1 + offset + width2, SECTOR, second.quadratic),
                        Piece(start1 + offset + width2, start1 + TWO_PI, LOWER, p1),
                    ]
                    label = "S1{}Q{}/S2{}Q{}".format(
                        sign1,
                        _quadrant(start1 + 0.5 * width1),
                        sign2,
                        _quadrant(start1 + offset + 0.5 * width2),
                    )
                    key = (
                        round((start1 + 0.5 * width1) % TWO_PI, 9),
                        round((start1 + offset + 0.5 * width2) % TWO_PI, 9),
                    )
                    yield key, DoubleConeSolution(pieces, (alpha1, alpha2), label)


def enumerate_double_cones(pair, alpha1=None, alpha2=None):
    """
    All double-cone solutions built from the sector polynomials of α1 and α2.

    α1 fills the sector from p² back to p¹ and α2 the sector from p¹ to p². Case 2 pairs
    have one α, and the arguments are ignored.

    :param NormalizedPair pair: Case 1 or Case 2 pair.
    :param float alpha1: α of the sector running ccw from a k-ray to an m-ray.
    :param float alpha2: α of the sector running ccw from an m-ray to a k-ray.
    :return: Solutions ordered by the bisector angles of their two sectors.
    :rtype: list[DoubleConeSolution]
    :raises NoDoubleConesError: For Case 3 pairs.
    :raises AlphaOutOfWindowError: If a Case 1 α lies outside [a1, a2].
    """
    label = classify(pair)
    alphas = double_cone_alphas(pair)
    if label.tag == CASE3:
        raise NoDoubleConesError(str(label))
    if label.tag == CASE2:
        alpha1 = alpha2 = alphas.lo
    else:
        if alpha2 is None:
            alpha2 = alpha1
        for alpha in (alpha1, alpha2):
            if alpha is None or not alphas.contains(alpha):
                raise AlphaOutOfWindowError(alpha, alphas.lo, alphas.hi)

    unique = {}
    for key, solution in _arrangements(pair, alpha1, alpha2):
        unique.setdefault(key, solution)
    return [unique[key] for key in sorted(unique)]


@dataclass(frozen=True)
class DirectionBound:
    """
    Constraint on the directions of halfspace free boundaries.

    `kind` is 'all', 'cone' or 'count'. A cone bound limits |slope| of the free boundary
    (m for lower, k for upper) from above ('at_most') or below ('at_least').
    """

    kind: str
    value: float = None
    orientation: str = None
    count: int = None

    def allows(self, slope, tol=1e-9):
        if self.kind == "all":
            return True
        if self.kind == "count":
            return self.count > 0
        if self.orientation == "at_most":
            return abs(slope) <= self.value + tol
        return abs(slope) >= self.value - tol

    def as_dict(self):
        if self.kind == "all":
            return {"kind": "all"}
        if self.kind == "count":
            return {"kind": "count", "count": self.count}
        return {"kind": "cone", "value": self.value, "orientation": self.orientation}


def halfspace_direction_bounds(pair, which):
    """
    :param NormalizedPair pair: Validated normalized pair.
    :param str which: 'lower' or 'upper'.
    :rtype: DirectionBound
    """
    label = classify(pair)
    if label.tag == CASE1:
        return DirectionBound("all")
    if label.tag == CASE3:
        if label.favored == which:
            return DirectionBound("all")
        return DirectionBound("count", count=2 if label.is_boundary else 0)

    sig = signature(pair)
    da, dc = pair.a2 - pair.a1, pair.c2 - pair.c1
    if which == "lower":
        value = math.sqrt(-da * sig.A / (dc * sig.C))
    else:
        value = math.sqrt(-da * sig.C / (dc * sig.A))
    return DirectionBound("cone", value, "at_most" if sig.A > 0 else "at_least")


def halfspace_delta(pair, which, alpha):
    delta1 = pair.a1 * pair.c1 - pair.a2 * pair.c2 + alpha * (
        pair.a1 - pair.c1 - pair.a2 + pair.c2
    )
    return delta1 if which == "lower" else -delta1


def halfspace_alpha_interval(pair, which):
    """
    The part of the α window where δ(α) <= 0.

    :return: (lo, hi), or None when no α is admissible.
    """
    lo, hi = alpha_window(pair)
    if lo > hi + ALGEBRA_TOL:
        return None
    sign = 1.0 if which == "lower" else -1.0
    slope = sign * (pair.a1 - pair.c1 - pair.a2 + pair.c2)
    intercept = sign * (pair.a1 * pair.c1 - pair.a2 * pair.c2)
    if abs(slope) <= ALGEBRA_TOL:
        return (lo, hi) if intercept <= ALGEBRA_TOL else None
    root = -intercept / slope
    if slope > 0:
        hi = min(hi, root)
    else:
        lo = max(lo, root)
    if lo > hi + ALGEBRA_TOL:
        return None
    return lo, max(lo, hi)


@dataclass(frozen=True)
class HalfspaceAdmissibility:
    which: str
    alpha: float
    window: tuple
    delta: float
    admissible: bool
    bound: DirectionBound
    sector: SectorSolution = None
    notes: list = field(default_factory=list)

    @property
    def slope(self):
        """Slope of the free boundary: m for the lower obstacle, k for the upper."""
        if self.sector is None:
            return None
        return self.sector.m if self.which == "lower" else self.sector.k

    def as_dict(self):
        return {
            "which": self.which,
            "alpha": self.alpha,
            "window": list(self.window),
            "delta": self.delta,
            "admissible": self.admissible,
            "bound": self.bound.as_dict(),
            "beta": None if self.sector is None else self.sector.beta,
            "slope": None if self.sector is None else _json_slope(self.slope),
        }


def halfspace_admissible(pair, which, alpha):
    """
    Decide whether q(α) glued to one obstacle along a line is a global solution.

    :param NormalizedPair pair: Validated normalized pair.
    :param str which: 'lower' or 'upper', the obstacle forming the coincidence halfplane.
    :param float alpha: Coefficient α of q.
    :rtype: HalfspaceAdmissibility
    """
    if which not in ("lower", "upper"):
        raise ValueError("which must be 'lower' or 'upper', got {!r}.".format(which))
    window = alpha_window(pair)
    delta = halfspace_delta(pair, which, alpha)
    bound = halfspace_direction_bounds(pair, which)
    in_window = window[0] - ALGEBRA_TOL <= alpha <= window[1] + ALGEBRA_TOL
    sector = sector_from_alpha(pair, alpha, "+", which) if in_window else None
    notes = []
    if not in_window:
        notes.append("alpha outside window")
    if delta > ALGEBRA_TOL:
        notes.append("delta > 0")
    return HalfspaceAdmissibility(
        which, alpha, window, delta, in_window and delta <= ALGEBRA_TOL, bound, sector, notes
    )


def double_cone_count(pair):
    """
    :return: 'infinite' for Case 1, 4 for Case 2, 0 for Case 3.
    """
    tag = classify(pair).tag
    return {CASE1: "infinite", CASE2: 4, CASE3: 0}[tag]


ClassificationSummary = namedtuple(
    "ClassificationSummary", ["label", "alphas", "opening_angle", "count", "lower", "upper"]
)


def summarize(pair):
    """
    Everything `dcone classify` reports for one normalized pair.

    :rtype: ClassificationSummary
    """
    label = classify(pair)
    angle = opening_angle(pair) if label.tag != CASE3 else None
    return ClassificationSummary(
        label,
        double_cone_alphas(pair),
        angle,
        double_cone_count(pair),
        halfspace_direction_bounds(pair, "lower"),
        halfspace_direction_bounds(pair, "upper"),
    )
