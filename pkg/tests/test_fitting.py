import math

import pytest

from dcone import analysis, classifier, fitting
from dcone.analytic_solutions import build_halfspace, build_mu
from dcone.exception import NoHalfspaceFamilyError, NonCanonicalPairError, NotCase1Or2Error
from dcone.obstacle_model import NormalizedPair


def test_minimal_double_cone_recovers_mu(canonical_pair):
    exact = build_mu(math.pi / 3.0, 0.5 * math.pi)
    fit = fitting.fit_minimal_double_cone(analysis.sample_ball(exact), canonical_pair)
    params = fit.solution.params
    assert params["arrangement"] == "id"
    assert params["phi1"] == pytest.approx(math.pi / 3.0, abs=1e-4)
    assert params["phi2"] == pytest.approx(0.5 * math.pi, abs=1e-4)
    assert fit.distance < 1e-4
    assert max(fit.orthogonality) < 1e-5
    assert fit.diagnostics["evaluations"] > fitting.COARSE_STEPS**2


def test_minimal_double_cone_recovers_rotation(canonical_pair):
    exact = build_mu(0.8, 2.0, "rot90")
    fit = fitting.fit_minimal_double_cone(analysis.sample_ball(exact), canonical_pair)
    assert fit.solution.params["arrangement"] == "rot90"
    assert fit.distance < 1e-4


def test_minimal_double_cone_case2(case2_pair):
    cones = classifier.enumerate_double_cones(case2_pair)
    fit = fitting.fit_minimal_double_cone(analysis.sample_ball(cones[2]), case2_pair)
    assert fit.solution.label == cones[2].label
    assert fit.distance == 0.0
    assert len(fit.diagnostics["distances"]) == 4


def test_minimal_double_cone_rejects(case3_pair, mu_right):
    samples = analysis.sample_ball(mu_right)
    with pytest.raises(NotCase1Or2Error):
        fitting.fit_minimal_double_cone(samples, case3_pair)
    with pytest.raises(NonCanonicalPairError):
        fitting.fit_minimal_double_cone(samples, NormalizedPair(-2.0, -1.0, 1.0, 2.0))


def test_halfspace_fit_recovers_exact_solution(canonical_pair):
    exact = build_halfspace(canonical_pair, "lower", -1.0)
    fit = fitting.fit_halfspace(analysis.sample_ball(exact), canonical_pair, "lower")
    assert fit.family == "halfspace"
    assert fit.solution.alpha == pytest.approx(-1.0, abs=1e-6)
    assert fit.solution.direction == pytest.approx((0.0, 1.0), abs=1e-6)
    assert fit.distance < 1e-6
    assert fit.as_dict()["diagnostics"]["interval"] == [-1.0, 1.0]


def test_halfspace_fit_respects_direction_bound(case2_pair):
    exact = build_halfspace(case2_pair, "lower", 0.75)
    fit = fitting.fit_halfspace(analysis.sample_ball(exact), case2_pair, "lower")
    bound = classifier.halfspace_direction_bounds(case2_pair, "lower")
    lo, hi = fit.diagnostics["interval"]
    assert lo <= fit.solution.alpha <= hi
    assert bound.allows(fit.diagnostics["slope"])
    assert fit.distance < 1e-4


def test_halfspace_fit_without_family(case3_pair, mu_right):
    with pytest.raises(NoHalfspaceFamilyError):
        fitting.fit_halfspace(analysis.sample_ball(mu_right), case3_pair, "upper")


def test_uniqueness_signature(mu_field, canonical_pair):
    signature = fitting.uniqueness_signature(mu_field, canonical_pair, [0.2, 0.5, 0.4, 0.3, 0.25])
    assert signature.radii == [0.5, 0.4, 0.3, 0.25, 0.2]
    assert len(signature.distances) == 5
    assert signature.fit.solution.params["phi1"] == pytest.approx(0.5 * math.pi, abs=1e-2)
    assert max(signature.distances) < 1e-2
    # only 0.25 and 0.2 lie in the rate window [8h, L/4] = [0.125, 0.25]
    assert signature.rate is None
