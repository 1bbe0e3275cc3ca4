import math

import numpy as np
import pytest

from dcone import analytic_solutions, classifier
from dcone.analytic_solutions import (
    ARRANGEMENTS,
    build_halfspace,
    build_john,
    build_mu,
    build_polynomial,
    upper_contact_ray,
    verify_solution,
    weiss_of_blowup,
)
from dcone.blowup import SECTOR, PolynomialSolution
from dcone.exception import AngleOutOfRangeError, InadmissibleHalfspaceError
from dcone.obstacle_model import NormalizedPair

POINTS = np.random.default_rng(11).uniform(-1.0, 1.0, (200, 2))


def test_mu_values(mu_right):
    value, gradient = analytic_solutions.evaluate(mu_right, [[1.0, 0.0], [0.5, 1.0], [-1.0, 0.0]])
    assert value == pytest.approx([1.0, 1.0, -1.0])
    assert gradient.shape == (3, 2)
    assert gradient[0] == pytest.approx([2.0, 0.0])


def test_john_is_signed_squares():
    john = build_john()
    x1, x2 = POINTS[:, 0], POINTS[:, 1]
    expected = x1 * x1 * np.sign(x1) + x2 * x2 * np.sign(x2)
    assert john.value(x1, x2) == pytest.approx(expected, abs=1e-12)


def test_halfspace_on_canonical_pair(canonical_pair):
    solution = build_halfspace(canonical_pair, "lower", -1.0)
    assert solution.direction == pytest.approx((0.0, 1.0))
    x1, x2 = POINTS[:, 0], POINTS[:, 1]
    expected = -x1 * x1 + np.sign(x2) * x2 * x2
    assert solution.value(x1, x2) == pytest.approx(expected, abs=1e-12)


GALLERY = analytic_solutions.gallery_solutions()


@pytest.mark.parametrize(
    "name, index",
    [(name, index) for name, (_, solutions) in GALLERY.items() for index in range(len(solutions))],
)
def test_gallery_solutions_are_homogeneous(name, index):
    solution = GALLERY[name][1][index]
    rng = np.random.default_rng(index)
    x = rng.uniform(-1.0, 1.0, (100, 2))
    s = rng.uniform(0.05, 20.0, 100)
    scaled = solution.value(s * x[:, 0], s * x[:, 1])
    assert scaled == pytest.approx(s * s * solution.value(x[:, 0], x[:, 1]), rel=1e-12, abs=1e-12)


HALFSPACE_FAMILIES = [
    (pair, which)
    for pair in (
        NormalizedPair(-1.0, -1.0, 1.0, 1.0),
        NormalizedPair(-1.0, -1.0, 2.0, 0.0),
        NormalizedPair(-1.0, -1.0, 2.0, 2.0),
    )
    for which in ("lower", "upper")
    if classifier.halfspace_alpha_interval(pair, which) is not None
]


@pytest.mark.parametrize("pair, which", HALFSPACE_FAMILIES)
def test_halfspace_identity(pair, which):
    """u - p = -(λ/2) (x·e)₊² for the obstacle p the solution touches."""
    lo, hi = classifier.halfspace_alpha_interval(pair, which)
    p1, p2 = analytic_solutions.obstacle_quadratics(pair)
    obstacle = p1 if which == "lower" else p2
    laplacian = obstacle.laplacian
    x1, x2 = POINTS[:, 0], POINTS[:, 1]
    built = 0
    for alpha in np.linspace(lo, hi, 7):
        for branch in ("+", "-"):
            for side in (1, -1):
                try:
                    solution = build_halfspace(pair, which, alpha, branch, side)
                except InadmissibleHalfspaceError:
                    continue
                built += 1
                e = np.array(solution.direction) / np.hypot(*solution.direction)
                along = np.maximum(x1 * e[0] + x2 * e[1], 0.0)
                expected = obstacle.value(x1, x2) - 0.5 * laplacian * along**2
                assert solution.value(x1, x2) == pytest.approx(expected, abs=1e-9)
    assert built >= 2


def test_halfspace_inadmissible(case2_pair):
    with pytest.raises(InadmissibleHalfspaceError):
        build_halfspace(case2_pair, "lower", 0.25)


def test_halfspace_bad_side(canonical_pair):
    with pytest.raises(ValueError, match="side"):
        build_halfspace(canonical_pair, "lower", -1.0, side=0)


def test_upper_contact_ray_is_perpendicular(canonical_pair):
    solution = build_halfspace(canonical_pair, "lower", -1.0)
    ray = upper_contact_ray(solution, canonical_pair)
    assert ray == pytest.approx((0.0, 1.0))
    # the free boundary of this solution is the x1 axis
    assert np.dot(ray, (1.0, 0.0)) == pytest.approx(0.0)


def test_upper_contact_ray_absent(case2_pair):
    solution = build_halfspace(case2_pair, "lower", 0.75)
    assert upper_contact_ray(solution, case2_pair) is None


def test_build_polynomial(canonical_pair):
    assert build_polynomial(canonical_pair, kind="lower").params["kind"] == "lower"
    assert build_polynomial(canonical_pair, kind="upper").quadratic == (1.0, 0.0, 1.0)
    harmonic = build_polynomial(canonical_pair, (0.0, 0.5, 0.0))
    assert harmonic.params == {"kind": "harmonic", "a": 0.0, "b": 0.5, "c": 0.0}


@pytest.mark.parametrize(
    "q, message",
    [((1.0, 0.0, 0.0), "harmonic"), ((0.0, 2.0, 0.0), "p¹ <= q <= p²")],
)
def test_build_polynomial_rejects(canonical_pair, q, message):
    with pytest.raises(ValueError, match=message):
        build_polynomial(canonical_pair, q)


def test_build_polynomial_bad_kind(canonical_pair):
    with pytest.raises(ValueError, match="kind"):
        build_polynomial(canonical_pair, kind="middle")


@pytest.mark.parametrize("phi1, phi2", [(0.0, 1.0), (1.0, math.pi)])
def test_build_mu_angle_range(phi1, phi2):
    with pytest.raises(AngleOutOfRangeError):
        build_mu(phi1, phi2)


def test_build_mu_unknown_arrangement():
    with pytest.raises(ValueError, match="arrangement"):
        build_mu(1.0, 1.0, "twist")


@pytest.mark.parametrize("arrangement", sorted(ARRANGEMENTS))
@pytest.mark.parametrize("phis", [(0.5 * math.pi, 0.5 * math.pi), (0.4, 2.5)])
def test_mu_arrangements_verify(canonical_pair, arrangement, phis):
    mu = build_mu(*phis, arrangement=arrangement)
    report = verify_solution(mu, canonical_pair, rng=np.random.default_rng(0))
    assert report.passed, report.failures()
    assert weiss_of_blowup(mu, canonical_pair) == pytest.approx(math.pi)


@pytest.mark.parametrize("name", sorted(analytic_solutions.gallery_solutions()))
def test_gallery_verifies(name):
    pair, solutions = analytic_solutions.gallery_solutions()[name]
    assert solutions
    for solution in solutions:
        report = verify_solution(solution, pair)
        assert report.passed, (name, report.failures())


def test_verify_flags_ordering(canonical_pair):
    report = verify_solution(PolynomialSolution((0.0, 2.0, 0.0), SECTOR), canonical_pair)
    assert not report.passed
    assert not report["ordering"].passed
    assert report["sector_harmonicity"].passed
    assert [check.name for check in report.failures()] == ["ordering"]
    assert report.as_dict()["passed"] is False


def test_weiss_levels(canonical_pair):
    assert weiss_of_blowup(build_polynomial(canonical_pair, kind="lower"), canonical_pair) == (
        pytest.approx(2 * math.pi)
    )
    assert weiss_of_blowup(build_polynomial(canonical_pair, kind="upper"), canonical_pair) == (
        pytest.approx(2 * math.pi)
    )
    harmonic = build_polynomial(canonical_pair, (0.3, 0.1, -0.3))
    assert weiss_of_blowup(harmonic, canonical_pair) == 0.0
    assert weiss_of_blowup(build_john(), canonical_pair) == pytest.approx(math.pi)
    halfspace = build_halfspace(canonical_pair, "lower", -1.0)
    assert weiss_of_blowup(halfspace, canonical_pair) == pytest.approx(math.pi)
