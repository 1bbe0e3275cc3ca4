import math

import numpy as np
import pytest

from dcone import double_cone_3d
from dcone.double_cone_3d import build_3d, eval_3d, eval_3d_cartesian, find_t0, verify_3d
from dcone.exception import DomainError


def test_t0_is_root_of_g_prime():
    t0 = find_t0()
    assert 0.60 < t0 < 0.65
    assert double_cone_3d.g_prime(t0) == pytest.approx(0.0, abs=1e-12)
    assert double_cone_3d.g_eval(t0) > 0


def test_g_is_odd():
    t = np.linspace(-0.9, 0.9, 19)
    assert double_cone_3d.g_eval(-t) == pytest.approx(-double_cone_3d.g_eval(t), abs=1e-14)


def test_g_derivatives_match_finite_differences():
    t, h = 0.3, 1e-6
    g, g_prime = double_cone_3d.g_eval, double_cone_3d.g_prime
    assert g_prime(t) == pytest.approx((g(t + h) - g(t - h)) / (2 * h), rel=1e-6)
    assert double_cone_3d.g_second(t) == pytest.approx(
        (g_prime(t + h) - g_prime(t - h)) / (2 * h), rel=1e-6
    )


@pytest.mark.parametrize("t", [1.0, -1.0, [0.2, 1.5]])
def test_g_domain(t):
    with pytest.raises(DomainError):
        double_cone_3d.g_eval(t)


@pytest.mark.parametrize("a1, a2", [(-1.0, 1.0), (-2.0, 0.5), (0.0, 3.0)])
def test_build_and_verify(a1, a2):
    sol = build_3d(a1, a2)
    assert sol.A == pytest.approx(-0.5 * (a1 + a2))
    assert sol.B == pytest.approx(-(a2 - a1) / (2.0 * sol.g_t0))
    report = verify_3d(sol)
    assert report.passed, report.failures()


def test_build_rejects_unordered_constants():
    with pytest.raises(ValueError, match="a1 < a2"):
        build_3d(1.0, 1.0)


def test_build_rejects_b_off_surface():
    assert build_3d(-1.0, 0.0, b=1.5).b == pytest.approx(1.5)
    with pytest.raises(ValueError, match="solvable surface"):
        build_3d(-1.0, 1.0, b=1.0)


def test_eval_3d_is_continuous_across_cones():
    sol = build_3d()
    theta0 = math.acos(sol.t0)
    for theta in (theta0, math.pi - theta0):
        below = eval_3d(sol, 1.0, 0.0, theta - 1e-9)
        above = eval_3d(sol, 1.0, 0.0, theta + 1e-9)
        assert below == pytest.approx(above, abs=1e-7)
    assert eval_3d(sol, 2.0, 0.3, 0.0) == pytest.approx(-4.0)
    assert eval_3d(sol, 2.0, 0.3, math.pi) == pytest.approx(4.0)


def test_eval_3d_cartesian_is_axisymmetric():
    sol = build_3d(-2.0, 0.5)
    points = np.array([[0.3, 0.4, 0.2], [0.5, 0.0, 0.2], [0.0, -0.5, 0.2]])
    values = eval_3d_cartesian(sol, points)
    assert values == pytest.approx(np.full(3, values[0]), abs=1e-14)


def test_as_dict():
    data = build_3d().as_dict()
    assert data["theta0"] == pytest.approx(math.acos(data["t0"]))
    assert data["b"] == 0.0
