"""
The axisymmetric double-cone solution in three dimensions.

With t = cos θ (θ the polar angle), the solution is p¹ on the cone t >= t0, p² on
t <= -t0 and the harmonic q = r² (A (3t² - 1) + B g(t)) in between, where

    g(t) = 3t + ((3t² - 1) / 2) ln((1 - t) / (1 + t))

is the odd second solution of the Legendre equation of degree two and t0 is the
unique root of g' in (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from dcone.analytic_solutions import VerificationReport
from dcone.exception import DomainError

T0_BRACKET = (0.60, 0.65)
POLE_MARGIN = 1e-3


def _check_domain(t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) >= 1.0):
        bad = t_arr[np.abs(t_arr) >= 1.0].flat[0] if t_arr.ndim else float(t_arr)
        raise DomainError(float(bad))
    return t_arr


def g_eval(t):
    """
    :param t: Scalar or array with |t| < 1.
    :raises DomainError: If |t| >= 1.
    """
    t = _check_domain(t)
    return 3.0 * t + 0.5 * (3.0 * t * t - 1.0) * np.log((1.0 - t) / (1.0 + t))


def g_prime(t):
    t = _check_domain(t)
    log_term = np.log((1.0 - t) / (1.0 + t))
    return 3.0 + 3.0 * t * log_term - (3.0 * t * t - 1.0) / (1.0 - t * t)


def g_second(t):
    t = _check_domain(t)
    one_minus = 1.0 - t * t
    return 3.0 * np.log((1.0 - t) / (1.0 + t)) - 6.0 * t / one_minus - 4.0 * t / one_minus**2


def find_t0(xtol=1e-15):
    """
    Root of g' in (0, 1), found by bisection on the bracket (0.60, 0.65).

    :rtype: float
    """
    return optimize.bisect(lambda t: float(g_prime(t)), *T0_BRACKET, xtol=xtol, maxiter=200)


@dataclass(frozen=True)
class DoubleCone3D:
    """
    Obstacles p^i = r² (a_i + b t²) with b = 3A, and q = r² (A (3t² - 1) + B g(t)).
    """

    t0: float
    a1: float
    a2: float
    A: float
    B: float

    @property
    def b(self):
        return 3.0 * self.A

    @property
    def g_t0(self):
        return float(g_eval(self.t0))

    def f1(self, t):
        """(q - p¹) / r²."""
        return 0.5 * (self.a2 - self.a1) + self.B * g_eval(t)

    def f2(self, t):
        """(p² - q) / r²."""
        return 0.5 * (self.a2 - self.a1) - self.B * g_eval(t)

    def as_dict(self):
        return {
            "t0": self.t0,
            "theta0": math.acos(self.t0),
            "a1": self.a1,
            "a2": self.a2,
            "b": self.b,
            "A": self.A,
            "B": self.B,
            "g_t0": self.g_t0,
        }


def build_3d(a1=-1.0, a2=1.0, b=None):
    """
    Solve the matching system for A and B.

    :param float a1: Lower obstacle constant.
    :param float a2: Upper obstacle constant, a2 > a1.
    :param float b: Optional common t² coefficient; it must equal -3(a1+a2)/2.
    :rtype: DoubleCone3D
    """
    if not a1 < a2:
        raise ValueError("The 3D double cone needs a1 < a2, got {!r} and {!r}.".format(a1, a2))
    t0 = find_t0()
    A = -0.5 * (a1 + a2)
    if b is not None and abs(b - 3.0 * A) > 1e-12 * max(1.0, abs(b)):
        raise ValueError(
            "b = {!r} is off the solvable surface b = -3(a1+a2)/2 = {!r}.".format(b, 3.0 * A)
        )
    B = -(a2 - a1) / (2.0 * float(g_eval(t0)))
    return DoubleCone3D(t0, float(a1), float(a2), A, B)


def eval_3d(sol, r, phi, theta):
    """
    :param DoubleCone3D sol: Built solution.
    :param r: Radius, scalar or array.
    :param phi: Azimuth; the solution does not depend on it.
    :param theta: Polar angle in [0, π].
    :return: Values shaped like the broadcast inputs.
    """
    r, phi, theta = np.broadcast_arrays(
        np.asarray(r, dtype=float), np.asarray(phi, dtype=float), np.asarray(theta, dtype=float)
    )
    t = np.cos(theta)
    r2 = r * r
    lower = r2 * (sol.a1 + sol.b * t * t)
    upper = r2 * (sol.a2 + sol.b * t * t)
    band = np.clip(t, -sol.t0, sol.t0)
    q = r2 * (sol.A * (3.0 * band * band - 1.0) + sol.B * g_eval(band))
    value = np.where(t >= sol.t0, lower, np.where(t <= -sol.t0, upper, q))
    return value if value.ndim else float(value)


def eval_3d_cartesian(sol, x):
    """
    :param x: Point (x1, x2, x3) or array of points with last axis 3.
    """
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    theta = np.arccos(np.clip(x[..., 2] / safe, -1.0, 1.0))
    phi = np.arctan2(x[..., 1], x[..., 0])
    return eval_3d(sol, r, phi, theta)


def _zeta_terms(sol, theta):
    """ζ(θ) = q/r² on the unit sphere with its first two θ-derivatives."""
    sin, cos = np.sin(theta), np.cos(theta)
    s2 = sin * sin
    # 1 - cos θ and 1 - cos² θ lose digits near the poles; use sin and tan(θ/2).
    log_term = 2.0 * np.log(np.tan(0.5 * theta))
    legendre = 3.0 * cos * cos - 1.0
    g = 3.0 * cos + 0.5 * legendre * log_term
    g_t = 3.0 + 3.0 * cos * log_term - legendre / s2
    g_tt = 3.0 * log_term - 6.0 * cos / s2 - 4.0 * cos / (s2 * s2)

    zeta = sol.A * legendre + sol.B * g
    zeta_t = 6.0 * sol.A * cos + sol.B * g_t
    zeta_tt = 6.0 * sol.A + sol.B * g_tt
    return zeta, -zeta_t * sin, zeta_tt * s2 - zeta_t * cos


def _ode_residual(theta, zeta, d1, d2):
    return d2 + (np.cos(theta) / np.sin(theta)) * d1 + 6.0 * zeta


def verify_3d(sol, n_theta=1000):
    """
    Check the ODE, the closed-form solutions of the Legendre equation, the sign of
    f1 and f2 and the C¹ matching on both cones.

    :param DoubleCone3D sol: Built solution.
    :param int n_theta: Interior θ nodes for the residual checks.
    :rtype: VerificationReport
    """
    report = VerificationReport("double_cone_3d")
    report.add("g_prime_t0", abs(float(g_prime(sol.t0))), 1e-12)
    report.add(
        "t0_in_bracket", sol.t0, T0_BRACKET[1], passed=T0_BRACKET[0] < sol.t0 < T0_BRACKET[1]
    )
    report.add("g_t0_positive", sol.g_t0, 0.0, passed=sol.g_t0 > 0)

    theta = np.linspace(POLE_MARGIN, math.pi - POLE_MARGIN, n_theta)
    residual = _ode_residual(theta, *_zeta_terms(sol, theta))
    report.add("ode_residual", np.max(np.abs(residual)), 1e-9)

    zeta1 = 1.0 + 3.0 * np.cos(2.0 * theta)
    d1 = -6.0 * np.sin(2.0 * theta)
    d2 = -12.0 * np.cos(2.0 * theta)
    report.add("zeta1_residual", np.max(np.abs(_ode_residual(theta, zeta1, d1, d2))), 1e-12)

    zeta2 = _zeta_terms(DoubleCone3D(sol.t0, 0.0, 0.0, 0.0, 1.0), theta)
    report.add("zeta2_residual", np.max(np.abs(_ode_residual(theta, *zeta2))), 1e-9)

    t = np.linspace(-sol.t0, sol.t0, 2001)
    report.add("f_nonnegative", -min(float(np.min(sol.f1(t))), float(np.min(sol.f2(t)))), 1e-12)

    g_slope = float(g_prime(sol.t0))
    matching = max(
        abs(float(sol.f1(sol.t0))),
        abs(float(sol.f2(-sol.t0))),
        abs(sol.B * g_slope),
        abs(sol.B * float(g_prime(-sol.t0))),
    )
    report.add("boundary_c1", matching, 1e-10)

    system = max(abs(2.0 * sol.A + sol.a1 + sol.a2), abs(6.0 * sol.A - 2.0 * sol.b))
    report.add("system_residual", system, 1e-12)

    inner = np.linspace(-sol.t0, sol.t0, 2001)[1:-1]
    report.add("g_monotone", -float(np.min(np.diff(g_eval(inner)))), 0.0)
    return report
