"""
Dirichlet data for `dcone solve --boundary`.

A boundary id names a closed-form solution, optionally followed by a harmonic
perturbation, e.g. ``mu:1.0472,1.5708+0.25*h3``. Perturbed data is clamped
between the obstacles. Anything else is read as a field CSV and interpolated.

Builtin ids:

* ``p1``, ``p2``: the obstacles themselves
* ``harmonic[:A,B]``: A (x1² - x2²) + 2B x1 x2, default 2 x1 x2
* ``mu:PHI1,PHI2[,ARRANGEMENT]`` and ``john`` (canonical pair only)
* ``halfspace:WHICH:ALPHA[:BRANCH[:SIDE]]``
* ``double_cone:INDEX[:ALPHA1[:ALPHA2]]``
"""

import re
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from dcone import analytic_solutions, classifier
from dcone.exception import NonCanonicalPairError, UnknownBoundaryError

PERTURBATION = re.compile(r"^(?P<base>.+?)\+(?P<eps>[-+0-9.eE]+)\*h(?P<degree>[34])$")
BUILTINS = ("p1", "p2", "harmonic", "mu", "john", "halfspace", "double_cone")


def harmonic_term(degree):
    """r^d cos(dθ) for d = 3 or 4, in Cartesian form."""
    if degree == 3:
        return lambda x1, x2: x1**3 - 3.0 * x1 * x2**2
    if degree == 4:
        return lambda x1, x2: x1**4 - 6.0 * x1**2 * x2**2 + x2**4
    raise ValueError("Only degrees 3 and 4 are available, got {!r}.".format(degree))


class BoundaryData:
    """
    Callable Dirichlet data with a label; `solution` is set when the data is an
    exact closed-form blow-up.
    """

    def __init__(self, label, function, solution=None):
        self.label = label
        self.function = function
        self.solution = solution

    def value(self, x1, x2):
        return self.function(x1, x2)

    def __call__(self, x1, x2):
        return self.function(x1, x2)


def parse_builtin(boundary_id):
    """
    Split a builtin id into its name and typed arguments.

    :return: (name, arguments), or None if the id is not a builtin.
    :raises UnknownBoundaryError: If a builtin name has malformed arguments.
    """
    name, _, text = boundary_id.partition(":")
    if name not in BUILTINS:
        return None
    try:
        if name in ("p1", "p2", "john"):
            if text:
                raise ValueError(text)
            return name, ()
        if name == "harmonic":
            values = tuple(float(part) for part in text.split(",")) if text else (0.0, 1.0)
            if len(values) != 2:
                raise ValueError(text)
            return name, values
        if name == "mu":
            parts = text.split(",")
            arrangement = parts[2] if len(parts) > 2 else "id"
            return name, (float(parts[0]), float(parts[1]), arrangement)
        if name == "halfspace":
            parts = text.split(":")
            branch = parts[2] if len(parts) > 2 else "+"
            side = int(parts[3]) if len(parts) > 3 else 1
            return name, (parts[0], float(parts[1]), branch, side)
        parts = text.split(":")
        return name, (int(parts[0]),) + tuple(float(part) for part in parts[1:])
    except (IndexError, ValueError):
        raise UnknownBoundaryError(boundary_id)


def build_builtin(name, arguments, pair):
    """
    :rtype: BlowupSolution
    """
    if name in ("mu", "john") and not pair.is_canonical:
        raise NonCanonicalPairError("boundary '{}'".format(name))
    if name == "p1":
        return analytic_solutions.build_polynomial(pair, kind="lower")
    if name == "p2":
        return analytic_solutions.build_polynomial(pair, kind="upper")
    if name == "harmonic":
        a_h, b_h = arguments
        return analytic_solutions.build_polynomial(pair, (a_h, b_h, -a_h))
    if name == "mu":
        return analytic_solutions.build_mu(*arguments)
    if name == "john":
        return analytic_solutions.build_john()
    if name == "halfspace":
        return analytic_solutions.build_halfspace(pair, *arguments)
    index, alphas = arguments[0], arguments[1:]
    cones = classifier.enumerate_double_cones(pair, *alphas)
    if not 0 <= index < len(cones):
        raise ValueError("double_cone index {} is outside 0..{}.".format(index, len(cones) - 1))
    return cones[index]


def _csv_boundary(path):
    from dcone.formats import read_field_csv

    field = read_field_csv(path)
    coords = field.grid.coords()
    interpolator = RegularGridInterpolator((coords, coords), np.asarray(field.u))

    def function(x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        points = np.stack([x1.ravel(), x2.ravel()], axis=-1)
        return interpolator(points).reshape(x1.shape)

    return function


def resolve_boundary(boundary_id, pair):
    """
    :param str boundary_id: Builtin id, optionally '+eps*h3' or '+eps*h4', or a field CSV path.
    :param NormalizedPair pair: Normalized pair the data belongs to.
    :rtype: BoundaryData
    :raises UnknownBoundaryError: If the id is not recognised.
    """
    match = PERTURBATION.match(boundary_id)
    base_id = match.group("base") if match else boundary_id

    solution = None
    parsed = parse_builtin(base_id)
    if parsed is not None:
        solution = build_builtin(*parsed, pair)
        base = solution.value
    elif Path(base_id).is_file():
        base = _csv_boundary(base_id)
    else:
        raise UnknownBoundaryError(boundary_id)

    if not match:
        return BoundaryData(boundary_id, base, solution)

    eps = float(match.group("eps"))
    term = harmonic_term(int(match.group("degree")))

    def perturbed(x1, x2):
        return np.clip(base(x1, x2) + eps * term(x1, x2), pair.lower(x1, x2), pair.upper(x1, x2))

    return BoundaryData(boundary_id, perturbed)
