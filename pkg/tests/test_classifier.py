import itertools
import math

import numpy as np
import pytest

from dcone import classifier
from dcone.blowup import SECTOR
from dcone.exception import AlphaOutOfWindowError, NoDoubleConesError
from dcone.obstacle_model import NormalizedPair

CASE3_BOUNDARY_PAIR = NormalizedPair(-1.0, -2.0, 1.0, 1.0)


@pytest.mark.parametrize(
    "pair, tag",
    [
        (NormalizedPair(-1.0, -1.0, 1.0, 1.0), classifier.CASE1),
        (NormalizedPair(-2.0, -1.0, 1.0, 2.0), classifier.CASE1),
        (NormalizedPair(-1.0, -1.0, 2.0, 0.0), classifier.CASE2),
        (NormalizedPair(-1.5, -0.5, 1.5, 0.5), classifier.CASE2),
        (NormalizedPair(-1.0, -1.0, 2.0, 2.0), classifier.CASE3),
        (CASE3_BOUNDARY_PAIR, classifier.CASE3),
    ],
)
def test_classify(pair, tag):
    assert classifier.classify(pair).tag == tag


def test_case3_labels(case3_pair):
    label = classifier.classify(case3_pair)
    assert label.sign == classifier.NON_NEGATIVE
    assert label.favored == "lower"
    assert not label.is_boundary
    assert str(label) == "Case3(NonNegative)"

    boundary = classifier.classify(CASE3_BOUNDARY_PAIR)
    assert boundary.a_zero and not boundary.c_zero
    assert boundary.sign == classifier.NON_POSITIVE
    assert boundary.is_boundary
    assert boundary.favored == "upper"
    assert str(boundary) == "Case3(NonPositive, boundary)"


def test_double_cone_alphas(canonical_pair, case2_pair, case3_pair):
    interval = classifier.double_cone_alphas(canonical_pair)
    assert (interval.kind, interval.lo, interval.hi) == ("interval", -1.0, 1.0)

    single = classifier.double_cone_alphas(case2_pair)
    assert single.kind == "single"
    assert single.lo == pytest.approx(0.5, abs=1e-12)

    assert classifier.double_cone_alphas(case3_pair).is_empty

    edge = classifier.double_cone_alphas(CASE3_BOUNDARY_PAIR)
    assert edge.kind == "single" and edge.halfspace_only
    assert edge.lo == -1.0


def test_case2_exact_values(case2_pair):
    sector = classifier.sector_from_alpha(case2_pair, 0.5, "+")
    assert sector.beta == pytest.approx(0.5 * math.sqrt(3.0), abs=1e-12)
    assert classifier.opening_angle_cos2(case2_pair) == pytest.approx(0.25, abs=1e-12)
    assert classifier.opening_angle(case2_pair) == pytest.approx(math.pi / 3.0, abs=1e-12)


def test_opening_angle_case1(canonical_pair):
    assert classifier.opening_angle(canonical_pair) == 0.5 * math.pi


def test_opening_angle_case3(case3_pair):
    with pytest.raises(NoDoubleConesError):
        classifier.opening_angle(case3_pair)


@pytest.mark.parametrize("alpha", [-1.0, -0.6, 0.0, 0.3, 1.0])
@pytest.mark.parametrize("branch", ["+", "-"])
def test_sector_touches_both_obstacles(canonical_pair, alpha, branch):
    sector = classifier.sector_from_alpha(canonical_pair, alpha, branch)
    q = sector.quadratic
    assert q.laplacian == 0.0
    # q - p¹ and p² - q vanish along their contact lines
    m1, m2 = sector.m_direction
    k1, k2 = sector.k_direction
    assert q.value(m1, m2) - canonical_pair.lower(m1, m2) == pytest.approx(0.0, abs=1e-12)
    assert canonical_pair.upper(k1, k2) - q.value(k1, k2) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "pair", [NormalizedPair(-1.0, -1.0, 1.0, 1.0), NormalizedPair(-2.0, -1.0, 1.0, 2.0)]
)
@pytest.mark.parametrize("fraction", [0.0, 0.2, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("branch", ["+", "-"])
def test_case1_contact_lines_are_perpendicular(pair, fraction, branch):
    lo, hi = classifier.alpha_window(pair)
    sector = classifier.sector_from_alpha(pair, lo + fraction * (hi - lo), branch)
    assert np.dot(sector.m_direction, sector.k_direction) == pytest.approx(0.0, abs=1e-12)
    if not (math.isinf(sector.m) or math.isinf(sector.k) or sector.m == 0.0):
        assert sector.m * sector.k == pytest.approx(-1.0)


@pytest.mark.parametrize(
    "pair",
    [
        NormalizedPair(-1.0, -1.0, 1.0, 1.0),
        NormalizedPair(-1.0, -1.0, 2.0, 0.0),
        NormalizedPair(-1.5, -0.5, 1.5, 0.5),
        NormalizedPair(-1.0, -1.0, 2.0, 2.0),
        CASE3_BOUNDARY_PAIR,
    ],
)
@pytest.mark.parametrize("scale", [0.25, 3.0, 10.0])
def test_classify_is_scale_invariant(pair, scale):
    scaled = NormalizedPair(*(scale * value for value in (pair.a1, pair.c1, pair.a2, pair.c2)))
    assert classifier.classify(scaled) == classifier.classify(pair)


def test_sector_vertical_contact_line(canonical_pair):
    # α = 1 makes q - p¹ = 2x1², which vanishes on the x2 axis
    sector = classifier.sector_from_alpha(canonical_pair, 1.0)
    assert sector.m_direction == pytest.approx((0.0, 1.0))
    assert math.isinf(sector.m)
    assert sector.as_dict()["m"] == "inf"


def test_sector_outside_window(canonical_pair):
    with pytest.raises(AlphaOutOfWindowError):
        classifier.sector_from_alpha(canonical_pair, 1.5)


def test_sector_bad_branch(canonical_pair):
    with pytest.raises(ValueError, match="branch"):
        classifier.sector_from_alpha(canonical_pair, 0.0, "x")


def test_null_direction_is_kernel():
    # (x1 - 2x2)² = x1² - 4 x1 x2 + 4 x2²
    d1, d2 = classifier.null_direction(1.0, -2.0, 4.0)
    assert d1 - 2.0 * d2 == pytest.approx(0.0, abs=1e-15)
    assert math.hypot(d1, d2) == pytest.approx(1.0)
    assert d2 >= 0.0


def test_case2_has_four_double_cones(case2_pair):
    cones = classifier.enumerate_double_cones(case2_pair)
    assert len(cones) == 4
    assert classifier.double_cone_count(case2_pair) == 4
    third = math.pi / 3.0
    for cone in cones:
        openings = sorted(cone.sector_openings())
        assert any(
            openings == pytest.approx(expected, abs=1e-12)
            for expected in ([third, third], [third, 2 * third], [2 * third, 2 * third])
        )


@pytest.mark.parametrize("alphas", [(-1.0, 1.0), (-0.6, -0.6), (0.0, 0.5), (0.2, 0.2)])
def test_case1_double_cones_partition_the_circle(canonical_pair, alphas):
    cones = classifier.enumerate_double_cones(canonical_pair, *alphas)
    assert cones
    for cone in cones:
        assert sum(piece.width for piece in cone.pieces) == pytest.approx(2 * math.pi)
        assert [piece.tag for piece in cone.pieces].count(SECTOR) == 2
        assert cone.alphas == alphas


def test_case1_alpha_out_of_window(canonical_pair):
    with pytest.raises(AlphaOutOfWindowError):
        classifier.enumerate_double_cones(canonical_pair, 0.0, 1.5)
    with pytest.raises(AlphaOutOfWindowError):
        classifier.enumerate_double_cones(canonical_pair)


def test_case3_has_no_double_cones(case3_pair):
    assert classifier.double_cone_count(case3_pair) == 0
    with pytest.raises(NoDoubleConesError):
        classifier.enumerate_double_cones(case3_pair)


def test_double_cone_count_case1(canonical_pair):
    assert classifier.double_cone_count(canonical_pair) == "infinite"


def test_halfspace_bounds_case2(case2_pair):
    for which in ("lower", "upper"):
        bound = classifier.halfspace_direction_bounds(case2_pair, which)
        assert bound.kind == "cone"
        assert bound.value == pytest.approx(math.sqrt(3.0))
        assert bound.orientation == "at_least"
        assert bound.allows(2.0)
        assert not bound.allows(1.0)


def test_halfspace_bounds_case1_and_case3(canonical_pair, case3_pair):
    assert classifier.halfspace_direction_bounds(canonical_pair, "upper").kind == "all"
    assert classifier.halfspace_direction_bounds(case3_pair, "lower").kind == "all"
    upper = classifier.halfspace_direction_bounds(case3_pair, "upper")
    assert (upper.kind, upper.count) == ("count", 0)
    assert not upper.allows(0.0)
    boundary = classifier.halfspace_direction_bounds(CASE3_BOUNDARY_PAIR, "lower")
    assert (boundary.kind, boundary.count) == ("count", 2)


def test_halfspace_alpha_interval(canonical_pair, case2_pair, case3_pair):
    assert classifier.halfspace_alpha_interval(canonical_pair, "lower") == (-1.0, 1.0)
    assert classifier.halfspace_alpha_interval(case2_pair, "lower") == pytest.approx((0.5, 1.0))
    assert classifier.halfspace_alpha_interval(case2_pair, "upper") == pytest.approx((0.0, 0.5))
    assert classifier.halfspace_alpha_interval(case3_pair, "upper") is None
    assert classifier.halfspace_alpha_interval(case3_pair, "lower") is not None


def test_halfspace_admissible(case2_pair):
    good = classifier.halfspace_admissible(case2_pair, "lower", 0.75)
    assert good.admissible
    assert good.delta <= 0.0
    bad = classifier.halfspace_admissible(case2_pair, "lower", 0.25)
    assert not bad.admissible
    assert "delta > 0" in bad.notes
    outside = classifier.halfspace_admissible(case2_pair, "lower", 3.0)
    assert not outside.admissible
    assert outside.sector is None
    assert outside.as_dict()["slope"] is None


def test_halfspace_admissible_bad_which(case2_pair):
    with pytest.raises(ValueError, match="which"):
        classifier.halfspace_admissible(case2_pair, "middle", 0.5)


def test_double_cones_exist_exactly_in_case2():
    """Where q touching p¹ also touches p², β² >= 0 holds for Case 2 pairs only."""
    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(200):
        a1, c1 = -rng.uniform(0.2, 2.0, 2)
        a2, c2 = rng.uniform(-0.5, 2.0, 2)
        if a2 + c2 <= 0.1 or a2 <= a1 or c2 <= c1:
            continue
        pair = NormalizedPair(float(a1), float(c1), float(a2), float(c2))
        tag = classifier.classify(pair).tag
        slope = (c2 - a2) - (c1 - a1)
        if tag == classifier.CASE1 or abs(slope) < 1e-6:
            continue
        alpha = (a2 * c2 - a1 * c1) / slope
        beta_sq = -(alpha - a1) * (alpha + c1)
        if abs(beta_sq) < 1e-9:
            continue
        checked += 1
        assert (beta_sq > 0) == (tag == classifier.CASE2)
        if tag == classifier.CASE2:
            assert classifier.double_cone_alphas(pair).lo == pytest.approx(alpha)
    assert checked > 20


def test_summary(case2_pair):
    summary = classifier.summarize(case2_pair)
    assert summary.label.tag == classifier.CASE2
    assert summary.count == 4
    assert summary.opening_angle == pytest.approx(math.pi / 3.0)
    assert summary.lower.kind == summary.upper.kind == "cone"


def test_summary_case3_has_no_angle(case3_pair):
    assert classifier.summarize(case3_pair).opening_angle is None


def test_arrangement_labels_are_distinct(canonical_pair):
    cones = classifier.enumerate_double_cones(canonical_pair, 0.0)
    for first, second in itertools.combinations(cones, 2):
        assert first.pieces != second.pieces
