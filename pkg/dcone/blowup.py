"""
Piecewise-quadratic representation shared by every closed-form blow-up solution.

A solution is a list of angular pieces partitioning the circle. Each piece carries
one quadratic form and a tag saying whether it is the lower obstacle, the upper
obstacle, or a harmonic sector polynomial.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections import namedtuple

import numpy as np

TWO_PI = 2.0 * math.pi
PARTITION_TOL = 1e-12

LOWER = "p1"
UPPER = "p2"
SECTOR = "q"


class Quadratic(namedtuple("Quadratic", ["a", "b", "c"])):
    """a x1² + 2 b x1 x2 + c x2²."""

    __slots__ = ()

    def value(self, x1, x2):
        return self.a * x1 * x1 + 2.0 * self.b * x1 * x2 + self.c * x2 * x2

    def gradient(self, x1, x2):
        return 2.0 * (self.a * x1 + self.b * x2), 2.0 * (self.b * x1 + self.c * x2)

    @property
    def laplacian(self):
        return 2.0 * (self.a + self.c)

    def matrix(self):
        return np.array([[self.a, self.b], [self.b, self.c]], dtype=float)

    @classmethod
    def from_matrix(cls, m):
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    def angular_primitive(self, theta):
        """Primitive of f(θ) = value(cos θ, sin θ)."""
        return (
            0.5 * (self.a + self.c) * theta
            + 0.25 * (self.a - self.c) * math.sin(2.0 * theta)
            - 0.5 * self.b * math.cos(2.0 * theta)
        )

    def angular_integral(self, lo, hi):
        return self.angular_primitive(hi) - self.angular_primitive(lo)


class Piece(namedtuple("Piece", ["theta_lo", "theta_hi", "tag", "quadratic"])):
    """The half-open angular sector [theta_lo, theta_hi) where u equals `quadratic`."""

    __slots__ = ()

    @property
    def width(self):
        return self.theta_hi - self.theta_lo

    def as_dict(self):
        return {
            "theta_lo": self.theta_lo,
            "theta_hi": self.theta_hi,
            "tag": self.tag,
            "a": self.quadratic.a,
            "b": self.quadratic.b,
            "c": self.quadratic.c,
        }

    @classmethod
    def from_dict(cls, data):
        quadratic = Quadratic(float(data["a"]), float(data["b"]), float(data["c"]))
        return cls(float(data["theta_lo"]), float(data["theta_hi"]), data["tag"], quadratic)


def _normalized_pieces(pieces):
    """
    Shift pieces so the first starts in [0, 2π) and check they tile one turn.

    :param list[Piece] pieces: Counterclockwise-ordered pieces.
    :rtype: list[Piece]
    """
    if not pieces:
        raise ValueError("A solution needs at least one angular piece.")
    shift = math.floor(pieces[0].theta_lo / TWO_PI) * TWO_PI
    result = []
    for piece in pieces:
        if not piece.width > 0:
            raise ValueError("Piece [{}, {}) is empty.".format(piece.theta_lo, piece.theta_hi))
        result.append(
            piece._replace(theta_lo=piece.theta_lo - shift, theta_hi=piece.theta_hi - shift)
        )

    for before, after in zip(result, result[1:]):
        if abs(before.theta_hi - after.theta_lo) > PARTITION_TOL:
            raise ValueError("Pieces must be contiguous, gap at {!r}.".format(before.theta_hi))
    total = result[-1].theta_hi - result[0].theta_lo
    if abs(total - TWO_PI) > PARTITION_TOL:
        raise ValueError("Pieces must cover one full turn, got {!r}.".format(total))
    return result


class BlowupSolution(ABC):
    """
    A degree-two homogeneous global solution stored as angular pieces.
    """

    def __init__(self, pieces):
        self._pieces = tuple(_normalized_pieces(list(pieces)))
        start = self._pieces[0].theta_lo
        self._offsets = np.array([piece.theta_lo - start for piece in self._pieces])
        self._coefficients = np.array([piece.quadratic for piece in self._pieces], dtype=float)

    @property
    @abstractmethod
    def family(self):
        """
        :return: 'polynomial', 'halfspace' or 'double_cone'
        :rtype: str
        """
        pass

    @property
    @abstractmethod
    def params(self):
        """
        :return: Family parameters, JSON-serializable.
        :rtype: dict
        """
        pass

    @abstractmethod
    def _with_pieces(self, pieces, matrix):
        """Copy of this solution with `pieces`, after applying the orthogonal `matrix`."""
        pass

    @property
    def pieces(self):
        return self._pieces

    def piece_index(self, x1, x2):
        theta = np.arctan2(x2, x1)
        phase = np.mod(theta - self._pieces[0].theta_lo, TWO_PI)
        index = np.searchsorted(self._offsets, phase, side="right") - 1
        return np.clip(index, 0, len(self._pieces) - 1)

    def evaluate(self, x1, x2):
        """
        Value and analytic gradient of the active piece at each point.

        :param x1: First coordinates, scalar or array.
        :param x2: Second coordinates, same shape as x1.
        :return: (value, d/dx1, d/dx2), arrays shaped like x1.
        """
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        coeffs = self._coefficients[self.piece_index(x1, x2)]
        a, b, c = coeffs[..., 0], coeffs[..., 1], coeffs[..., 2]
        value = a * x1 * x1 + 2.0 * b * x1 * x2 + c * x2 * x2
        return value, 2.0 * (a * x1 + b * x2), 2.0 * (b * x1 + c * x2)

    def value(self, x1, x2):
        return self.evaluate(x1, x2)[0]

    def laplacian(self, x1, x2):
        coeffs = self._coefficients[self.piece_index(np.asarray(x1), np.asarray(x2))]
        return 2.0 * (coeffs[..., 0] + coeffs[..., 2])

    def coincidence_width(self, tag):
        return sum(piece.width for piece in self._pieces if piece.tag == tag)

    def boundary_rays(self):
        """
        Angles where the active piece changes, with the pieces on either side.

        :rtype: list[tuple[float, Piece, Piece]]
        """
        rays = []
        for index, piece in enumerate(self._pieces):
            following = self._pieces[(index + 1) % len(self._pieces)]
            if following is not piece:
                rays.append((piece.theta_hi, piece, following))
        return rays

    def transformed(self, matrix):
        """
        The solution x ↦ u(Gᵀ x) for an orthogonal 2×2 matrix G.

        :param numpy.ndarray matrix: Orthogonal matrix G.
        :rtype: BlowupSolution
        """
        g = np.asarray(matrix, dtype=float)
        psi = math.atan2(g[1, 0], g[0, 0])
        reflection = np.linalg.det(g) < 0
        pieces = []
        for piece in self._pieces:
            quadratic = Quadratic.from_matrix(g @ piece.quadratic.matrix() @ g.T)
            if reflection:
                lo, hi = psi - piece.theta_hi, psi - piece.theta_lo
            else:
                lo, hi = piece.theta_lo + psi, piece.theta_hi + psi
            pieces.append(Piece(lo, hi, piece.tag, quadratic))
        if reflection:
            pieces.reverse()
        return self._with_pieces(pieces, g)

    def as_dict(self):
        return {
            "family": self.family,
            "params": self.params,
            "pieces": [piece.as_dict() for piece in self._pieces],
        }

    def __repr__(self):
        return "{}({})".format(type(self).__name__, self.params)


class PolynomialSolution(BlowupSolution):
    """A single quadratic valid on the whole plane."""

    def __init__(self, quadratic, tag):
        self.quadratic = Quadratic(*quadratic)
        self.tag = tag
        super().__init__([Piece(0.0, TWO_PI, tag, self.quadratic)])

    @property
    def family(self):
        return "polynomial"

    @property
    def params(self):
        kind = {LOWER: "lower", UPPER: "upper", SECTOR: "harmonic"}[self.tag]
        return {"kind": kind, "a": self.quadratic.a, "b": self.quadratic.b, "c": self.quadratic.c}

    def _with_pieces(self, pieces, matrix):
        return PolynomialSolution(pieces[0].quadratic, self.tag)


class HalfspaceSolution(BlowupSolution):
    """
    Agrees with one obstacle on the halfplane x·e <= 0 and with q on x·e > 0.
    """

    def __init__(self, which, direction, alpha, beta, obstacle, sector):
        self.which = which
        self.direction = (float(direction[0]), float(direction[1]))
        self.alpha = alpha
        self.beta = beta
        e_angle = math.atan2(self.direction[1], self.direction[0])
        tag = LOWER if which == "lower" else UPPER
        super().__init__(
            [
                Piece(e_angle - 0.5 * math.pi, e_angle + 0.5 * math.pi, SECTOR, Quadratic(*sector)),
                Piece(e_angle + 0.5 * math.pi, e_angle + 1.5 * math.pi, tag, Quadratic(*obstacle)),
            ]
        )

    @property
    def family(self):
        return "halfspace"

    @property
    def params(self):
        return {
            "which": self.which,
            "alpha": self.alpha,
            "beta": self.beta,
            "direction": list(self.direction),
        }

    @property
    def sector_quadratic(self):
        return next(piece.quadratic for piece in self.pieces if piece.tag == SECTOR)

    @property
    def obstacle_quadratic(self):
        return next(piece.quadratic for piece in self.pieces if piece.tag != SECTOR)

    def _with_pieces(self, pieces, matrix):
        sector = next(piece.quadratic for piece in pieces if piece.tag == SECTOR)
        obstacle = next(piece.quadratic for piece in pieces if piece.tag != SECTOR)
        direction = np.asarray(matrix) @ np.array(self.direction)
        return HalfspaceSolution(self.which, direction, sector.a, sector.b, obstacle, sector)


class DoubleConeSolution(BlowupSolution):
    """Two coincidence cones separated by two harmonic sectors."""

    def __init__(self, pieces, alphas=None, label="", extra=None):
        self.alphas = tuple(alphas) if alphas is not None else None
        self.label = label
        self.extra = dict(extra or {})
        super().__init__(pieces)

    @property
    def family(self):
        return "double_cone"

    @property
    def params(self):
        params = {"label": self.label}
        if self.alphas is not None:
            params["alphas"] = list(self.alphas)
        params.update(self.extra)
        return params

    def sector_openings(self):
        return [piece.width for piece in self.pieces if piece.tag == SECTOR]

    def _with_pieces(self, pieces, matrix):
        return DoubleConeSolution(pieces, self.alphas, self.label, self.extra)


def solution_from_dict(data):
    """
    Rebuild a solution from its `as_dict` form.

    :param dict data: Output of BlowupSolution.as_dict.
    :rtype: BlowupSolution
    """
    pieces = [Piece.from_dict(item) for item in data["pieces"]]
    params = data.get("params", {})
    family = data["family"]
    if family == "polynomial":
        return PolynomialSolution(pieces[0].quadratic, pieces[0].tag)
    if family == "halfspace":
        sector = next(piece.quadratic for piece in pieces if piece.tag == SECTOR)
        obstacle = next(piece.quadratic for piece in pieces if piece.tag != SECTOR)
        return HalfspaceSolution(
            params["which"], params["direction"], params["alpha"], params["beta"], obstacle, sector
        )
    if family == "double_cone":
        extra = {key: value for key, value in params.items() if key not in ("alphas", "label")}
        return DoubleConeSolution(pieces, params.get("alphas"), params.get("label", ""), extra)
    raise ValueError("Unknown solution family '{}'.".format(family))
