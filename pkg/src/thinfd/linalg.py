"""Exact 2x2 real/integer matrix arithmetic and both Iwasawa parametrizations.

Conventions used throughout the package:

* a group element g is stored column-wise, g = (u, v) with u = (m11, m21)
  and v = (m12, m22);
* the rotation factor is k(theta) = [[cos, -sin], [sin, cos]], the diagonal
  factor diag(a, 1/a) with a > 0, and the unipotent factor n(t) = [[1, t], [0, 1]];
* theta is the principal value atan2(u2, u1) in (-pi, pi].

Both decompositions g = k a n(t) and g = k n(T) a share the same k and a;
the shear parameters are related by T = a^2 t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NotIntegralError, NotUnimodularError

DET_TOL = 1e-9
RECOMP_TOL = 1e-12
INT_TOL = 1e-6

Vec2 = tuple[float, float]


@dataclass(frozen=True, slots=True)
class Mat2:
    """Real 2x2 matrix; columns are the generator pair (u, v)."""

    m11: float
    m12: float
    m21: float
    m22: float

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def from_columns(u: Vec2, v: Vec2) -> "Mat2":
        return Mat2(u[0], v[0], u[1], v[1])

    @property
    def u(self) -> Vec2:
        return (self.m11, self.m21)

    @property
    def v(self) -> Vec2:
        return (self.m12, self.m22)

    def entries(self) -> tuple[float, float, float, float]:
        """Row-major entries (m11, m12, m21, m22)."""
        return (self.m11, self.m12, self.m21, self.m22)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def apply(self, gamma: "UnimodularInt") -> "Mat2":
        """Right action on generator pairs: columns become (p u + q v, r u + s v)."""
        p, r, q, s = gamma.p, gamma.r, gamma.q, gamma.s
        return Mat2(
            self.m11 * p + self.m12 * q,
            self.m11 * r + self.m12 * s,
            self.m21 * p + self.m22 * q,
            self.m21 * r + self.m22 * s,
        )

    def inverse(self) -> "Mat2":
        d = det(self)
        return Mat2(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d)

    def norm(self) -> float:
        """Frobenius norm."""
        return math.sqrt(self.m11**2 + self.m12**2 + self.m21**2 + self.m22**2)

    def sub_norm(self, other: "Mat2") -> float:
        return math.sqrt(
            (self.m11 - other.m11) ** 2
            + (self.m12 - other.m12) ** 2
            + (self.m21 - other.m21) ** 2
            + (self.m22 - other.m22) ** 2
        )


@dataclass(frozen=True, slots=True)
class KANCoords:
    """Parameters of g = k(theta) diag(a, 1/a) n(t)."""

    theta: float
    a: float
    t: float


@dataclass(frozen=True, slots=True)
class KNACoords:
    """Parameters of g = k(theta) n(T) diag(a, 1/a); T = a^2 t."""

    theta: float
    a: float
    T: float


@dataclass(frozen=True, slots=True)
class UnimodularInt:
    """Integer matrix [[p, r], [q, s]] with p s - q r = 1, acting from the right."""

    p: int
    r: int
    q: int
    s: int

    def __post_init__(self):
        if self.p * self.s - self.q * self.r != 1:
            raise NotUnimodularError(float(self.p * self.s - self.q * self.r), 0.0)

    @staticmethod
    def identity() -> "UnimodularInt":
        return UnimodularInt(1, 0, 0, 1)

    def inverse(self) -> "UnimodularInt":
        return UnimodularInt(self.s, -self.r, -self.q, self.p)

    def __matmul__(self, other: "UnimodularInt") -> "UnimodularInt":
        return UnimodularInt(
            self.p * other.p + self.r * other.q,
            self.p * other.r + self.r * other.s,
            self.q * other.p + self.s * other.q,
            self.q * other.r + self.s * other.s,
        )

    def __neg__(self) -> "UnimodularInt":
        return UnimodularInt(-self.p, -self.r, -self.q, -self.s)

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.p, self.r), (self.q, self.s))


def det(g: Mat2) -> float:
    return g.m11 * g.m22 - g.m12 * g.m21


def _check_unimodular(g: Mat2, tol: float) -> None:
    d = det(g)
    if not (abs(d - 1.0) <= tol) or not all(map(math.isfinite, g.entries())):
        raise NotUnimodularError(d, tol)


def perp(u: Vec2) -> Vec2:
    """Left-normal of u scaled so that |perp(u)| = 1/|u| and det(u, perp(u)) = 1."""
    n2 = u[0] * u[0] + u[1] * u[1]
    if n2 == 0.0:
        raise ValueError("perp of the zero vector is undefined")
    return (-u[1] / n2, u[0] / n2)


def iwasawa_kan(g: Mat2, tol: float = DET_TOL) -> KANCoords:
    """Decompose g = k a n(t); raises NotUnimodularError when det is off."""
    _check_unimodular(g, tol)
    u1, u2 = g.u
    v1, v2 = g.v
    uu = u1 * u1 + u2 * u2
    return KANCoords(
        theta=math.atan2(u2, u1),
        a=math.sqrt(uu),
        t=(v1 * u1 + v2 * u2) / uu,
    )


def iwasawa_kna(g: Mat2, tol: float = DET_TOL) -> KNACoords:
    """Decompose g = k n(T) a; same theta and a as iwasawa_kan, T = <v, u>."""
    _check_unimodular(g, tol)
    u1, u2 = g.u
    v1, v2 = g.v
    return KNACoords(
        theta=math.atan2(u2, u1),
        a=math.sqrt(u1 * u1 + u2 * u2),
        T=v1 * u1 + v2 * u2,
    )


def from_kan(c: KANCoords) -> Mat2:
    if not (c.a > 0.0):
        raise ValueError(f"scale parameter must be positive, got {c.a!r}")
    cs, sn = math.cos(c.theta), math.sin(c.theta)
    a, ai = c.a, 1.0 / c.a
    return Mat2(a * cs, c.t * a * cs - ai * sn, a * sn, c.t * a * sn + ai * cs)


def from_kna(c: KNACoords) -> Mat2:
    if not (c.a > 0.0):
        raise ValueError(f"scale parameter must be positive, got {c.a!r}")
    cs, sn = math.cos(c.theta), math.sin(c.theta)
    a, ai = c.a, 1.0 / c.a
    return Mat2(a * cs, ai * (c.T * cs - sn), a * sn, ai * (c.T * sn + cs))


def round_to_unimodular(m: Mat2, tol: float = INT_TOL) -> UnimodularInt:
    """Round a near-integral matrix to its integer matrix, requiring det 1 exactly."""
    ints = []
    for x in (m.m11, m.m12, m.m21, m.m22):
        k = round(x)
        if abs(x - k) > tol:
            raise NotIntegralError(f"entry {x!r} is not integral within {tol!r}")
        ints.append(int(k))
    p, r, q, s = ints
    if p * s - q * r != 1:
        raise NotUnimodularError(float(p * s - q * r), 0.0)
    return UnimodularInt(p, r, q, s)
