"""
Quadratic obstacle pairs, their validation, and the coordinate normalizations
applied before classification.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from dcone.exception import NotCase1Error, NotSinglePointContactError, SignViolationError

CASE_TOL = 1e-12

SignaturePolynomial = namedtuple("SignaturePolynomial", ["A", "C"])
SignaturePolynomial.__doc__ = "Coefficients of P(x) = A x1² + C x2², with A = a1+c2, C = a2+c1."


def _quadratic(a, b, c, x1, x2):
    return a * x1 * x1 + 2.0 * b * x1 * x2 + c * x2 * x2


@dataclass(frozen=True)
class ObstaclePair:
    """
    p¹ = a1 x1² + 2 b1 x1 x2 + c1 x2² and p² = a2 x1² + 2 b2 x1 x2 + c2 x2².
    """

    a1: float
    b1: float
    c1: float
    a2: float
    b2: float
    c2: float

    @property
    def lambda1(self):
        return 2.0 * (self.a1 + self.c1)

    @property
    def lambda2(self):
        return 2.0 * (self.a2 + self.c2)

    def lower(self, x1, x2):
        return _quadratic(self.a1, self.b1, self.c1, x1, x2)

    def upper(self, x1, x2):
        return _quadratic(self.a2, self.b2, self.c2, x1, x2)

    def matrices(self):
        """
        Symmetric coefficient matrices of p¹ and p², so that p(x) = xᵀ M x.

        :rtype: tuple[numpy.ndarray, numpy.ndarray]
        """
        m1 = np.array([[self.a1, self.b1], [self.b1, self.c1]], dtype=float)
        m2 = np.array([[self.a2, self.b2], [self.b2, self.c2]], dtype=float)
        return m1, m2

    def coefficients(self):
        return (self.a1, self.b1, self.c1, self.a2, self.b2, self.c2)

    def as_dict(self):
        return {
            "a1": self.a1,
            "b1": self.b1,
            "c1": self.c1,
            "a2": self.a2,
            "b2": self.b2,
            "c2": self.c2,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(*(float(data.get(key, 0.0)) for key in ("a1", "b1", "c1", "a2", "b2", "c2")))


@dataclass(frozen=True)
class NormalizedPair:
    """
    Obstacle pair with b1 = b2 = 0: p¹ = a1 x1² + c1 x2², p² = a2 x1² + c2 x2².
    """

    a1: float
    c1: float
    a2: float
    c2: float

    @property
    def lambda1(self):
        return 2.0 * (self.a1 + self.c1)

    @property
    def lambda2(self):
        return 2.0 * (self.a2 + self.c2)

    @property
    def is_canonical(self):
        return (self.a1, self.c1, self.a2, self.c2) == (-1.0, -1.0, 1.0, 1.0)

    def lower(self, x1, x2):
        return self.a1 * x1 * x1 + self.c1 * x2 * x2

    def upper(self, x1, x2):
        return self.a2 * x1 * x1 + self.c2 * x2 * x2

    def as_pair(self):
        return ObstaclePair(self.a1, 0.0, self.c1, self.a2, 0.0, self.c2)

    def as_dict(self):
        return self.as_pair().as_dict()


CANONICAL_PAIR = NormalizedPair(-1.0, -1.0, 1.0, 1.0)


def _rotation(theta):
    cos, sin = math.cos(theta), math.sin(theta)
    return np.array([[cos, -sin], [sin, cos]])


@dataclass(frozen=True)
class TransformRecord:
    """
    Maps an original pair to a normalized one:

        p_normalized(y) = scale * (p(Rᵀ y) - h(y)),  y = R x,

    with R the rotation by `rotation` and h(y) = A_h (y1² - y2²) + 2 B_h y1 y2.
    """

    rotation: float = 0.0
    harmonic: tuple = (0.0, 0.0)
    scale: float = 1.0

    def harmonic_matrix(self):
        a_h, b_h = self.harmonic
        return np.array([[a_h, b_h], [b_h, -a_h]], dtype=float)

    def compose(self, later):
        """
        Record for applying `self` first and then `later`.

        `later` must not rotate; the reductions that follow a normalization only subtract
        harmonics and rescale.

        :param TransformRecord later: Transform applied to the output of this one.
        :rtype: TransformRecord
        """
        if later.rotation != 0.0:
            raise ValueError("Only non-rotating transforms can be composed after a rotation.")
        a_h = self.harmonic[0] + later.harmonic[0] / self.scale
        b_h = self.harmonic[1] + later.harmonic[1] / self.scale
        return TransformRecord(self.rotation, (a_h, b_h), self.scale * later.scale)

    def inverse(self, normalized):
        """
        Recover the original pair from a normalized one.

        :param NormalizedPair normalized: Output of the transform.
        :rtype: ObstaclePair
        """
        rot = _rotation(self.rotation)
        m1, m2 = normalized.as_pair().matrices()
        h = self.harmonic_matrix()
        o1 = rot.T @ (m1 / self.scale + h) @ rot
        o2 = rot.T @ (m2 / self.scale + h) @ rot
        b1 = 0.5 * (o1[0, 1] + o1[1, 0])
        b2 = 0.5 * (o2[0, 1] + o2[1, 0])
        return ObstaclePair(
            float(o1[0, 0]), float(b1), float(o1[1, 1]), float(o2[0, 0]), float(b2), float(o2[1, 1])
        )

    def to_normalized_coordinates(self, x1, x2):
        """Map original coordinates x to normalized coordinates y = R x."""
        cos, sin = math.cos(self.rotation), math.sin(self.rotation)
        return cos * x1 - sin * x2, sin * x1 + cos * x2

    def as_dict(self):
        return {
            "rotation": self.rotation,
            "harmonic": [self.harmonic[0], self.harmonic[1]],
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, data):
        harmonic = data.get("harmonic", [0.0, 0.0])
        return cls(
            float(data.get("rotation", 0.0)),
            (float(harmonic[0]), float(harmonic[1])),
            float(data.get("scale", 1.0)),
        )


IDENTITY = TransformRecord()


def validate(pair):
    """
    Check the sign and single-point contact conditions of an obstacle pair.

    :param ObstaclePair pair: Pair to check.
    :return: The same pair.
    :raises SignViolationError: If lambda1 >= 0 or lambda2 <= 0.
    :raises NotSinglePointContactError: If D²(p²-p¹) is not positive definite.
    """
    if not all(math.isfinite(value) for value in pair.coefficients()):
        raise ValueError("Obstacle coefficients must be finite, got {!r}.".format(pair))
    if not pair.lambda1 < 0:
        raise SignViolationError("lambda1", pair.lambda1)
    if not pair.lambda2 > 0:
        raise SignViolationError("lambda2", pair.lambda2)

    da, db, dc = pair.a2 - pair.a1, pair.b2 - pair.b1, pair.c2 - pair.c1
    if not da + dc > 0:
        raise NotSinglePointContactError("(a2-a1)+(c2-c1) > 0")
    if not da * dc - db * db > 0:
        raise NotSinglePointContactError("(a2-a1)(c2-c1) > (b2-b1)²")
    return pair


def normalize(pair):
    """
    Rotate so the cross coefficients agree, then subtract the common harmonic 2b x1 x2.

    :param ObstaclePair pair: Validated pair.
    :rtype: tuple[NormalizedPair, TransformRecord]
    """
    validate(pair)
    if pair.b1 == pair.b2:
        theta = 0.0
        a1, c1, a2, c2 = pair.a1, pair.c1, pair.a2, pair.c2
        b = pair.b1
    else:
        theta = 0.5 * math.atan2(
            2.0 * (pair.b1 - pair.b2), pair.a2 - pair.a1 - pair.c2 + pair.c1
        )
        rot = _rotation(theta)
        m1, m2 = pair.matrices()
        r1 = rot @ m1 @ rot.T
        r2 = rot @ m2 @ rot.T
        a1, c1, a2, c2 = r1[0, 0], r1[1, 1], r2[0, 0], r2[1, 1]
        b = 0.25 * (r1[0, 1] + r1[1, 0] + r2[0, 1] + r2[1, 0])

    normalized = NormalizedPair(float(a1), float(c1), float(a2), float(c2))
    return normalized, TransformRecord(theta, (0.0, float(b)), 1.0)


def signature(pair):
    """
    :param NormalizedPair pair: Normalized pair.
    :rtype: SignaturePolynomial
    """
    return SignaturePolynomial(pair.a1 + pair.c2, pair.a2 + pair.c1)


def is_case1(pair):
    sig = signature(pair)
    return abs(sig.A) <= CASE_TOL and abs(sig.C) <= CASE_TOL


def reduce_case1(pair, record=IDENTITY):
    """
    Reduce a Case 1 pair to the canonical pair (-1,-1,1,1).

    With p¹ = -a x1² - c x2² and p² = c x1² + a x2², subtracting
    h = ((c-a)/2) x1² + ((a-c)/2) x2² leaves (a+c)/2 * (∓|x|²), and scaling
    by 2/(a+c) gives the canonical obstacles.

    :param NormalizedPair pair: Case 1 pair.
    :param TransformRecord record: Prior normalization to compose with.
    :rtype: tuple[NormalizedPair, TransformRecord]
    :raises NotCase1Error: If a1+c2 or a2+c1 is not zero within 1e-12.
    """
    sig = signature(pair)
    if not is_case1(pair):
        raise NotCase1Error(sig.A, sig.C)

    a, c = -pair.a1, -pair.c1
    reduction = TransformRecord(0.0, (0.5 * (c - a), 0.0), 2.0 / (a + c))
    return CANONICAL_PAIR, record.compose(reduction)
