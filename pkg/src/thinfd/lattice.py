"""Unital lattices in the plane: shortest vectors, with and without a cone restriction.

A unital lattice is spanned by a positively oriented generator pair of
determinant 1 (area-1 fundamental cell).  The classical minimum is found by
Lagrange-Gauss reduction; the cone-restricted minimum by an exhaustive
enumeration whose coefficient bounds come from Cramer's rule on the reduced
basis, after an initial doubling box search locates one cone point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EnumerationError, NotUnimodularError
from .linalg import DET_TOL, Mat2, UnimodularInt, Vec2, det, perp


@dataclass(frozen=True, slots=True)
class UnitalLattice:
    """Lattice spanned by the columns of `basis` (determinant 1 within tol)."""

    basis: Mat2

    def __post_init__(self):
        d = det(self.basis)
        if not (abs(d - 1.0) <= DET_TOL) or not math.isfinite(d):
            raise NotUnimodularError(d, DET_TOL)

    def point(self, p: int, q: int) -> "LatticePoint":
        b = self.basis
        return LatticePoint(p, q, (p * b.m11 + q * b.m12, p * b.m21 + q * b.m22))


@dataclass(frozen=True, slots=True)
class LatticePoint:
    """Integer combination p*u + q*v of the lattice basis columns."""

    p: int
    q: int
    vec: Vec2

    def norm(self) -> float:
        return math.hypot(self.vec[0], self.vec[1])


@dataclass(frozen=True, slots=True)
class Cone:
    """Open cone {x > 0, |y/x| < tan(eps)} around the positive x-axis."""

    eps: float

    def __post_init__(self):
        if not (0.0 < self.eps <= math.pi / 6):
            raise ValueError(f"cone half-angle must be in (0, pi/6], got {self.eps!r}")

    def contains(self, w: Vec2) -> bool:
        return w[0] > 0.0 and abs(w[1]) < w[0] * math.tan(self.eps)


def cone_contains(c: Cone, w: Vec2) -> bool:
    return c.contains(w)


def _lagrange(ux, uy, vx, vy):
    """Reduce a positively oriented basis in place; returns floats + integer gamma.

    Output (ux, uy, vx, vy, p, q, r, s) satisfies |u| minimal, |<v,u>/<u,u>| <= 1/2,
    and basis * [[p, r], [q, s]] = (u, v) with p s - q r = 1.
    """
    p, q, r, s = 1, 0, 0, 1
    while True:
        uu = ux * ux + uy * uy
        if uu == 0.0:
            raise EnumerationError("degenerate basis: zero generator")
        m = round((vx * ux + vy * uy) / uu)
        if m:
            vx -= m * ux
            vy -= m * uy
            r -= m * p
            s -= m * q
        if vx * vx + vy * vy < uu:
            ux, uy, vx, vy = vx, vy, -ux, -uy
            p, q, r, s = r, s, -p, -q
        else:
            return ux, uy, vx, vy, p, q, r, s


def gauss_reduce(L: UnitalLattice) -> tuple[UnitalLattice, UnimodularInt]:
    """Lagrange-Gauss reduction; the returned gamma carries basis*gamma = reduced."""
    b = L.basis
    ux, uy, vx, vy, p, q, r, s = _lagrange(b.m11, b.m21, b.m12, b.m22)
    reduced = Mat2(ux, vx, uy, vy)
    return UnitalLattice(reduced), UnimodularInt(p, r, q, s)


def phi(L: UnitalLattice) -> float:
    """Minimal norm of a nonzero lattice point."""
    b = L.basis
    ux, uy, *_ = _lagrange(b.m11, b.m21, b.m12, b.m22)
    return math.hypot(ux, uy)


def shortest_vectors(L: UnitalLattice, rel_tol: float = 1e-12) -> list[LatticePoint]:
    """All nonzero lattice points of norm <= phi(L)*(1 + rel_tol).

    Exhaustive by Cramer coefficient bounds on the reduced basis; the result
    is closed under negation and sorted by original-basis coefficients.
    """
    b = L.basis
    ux, uy, vx, vy, p, q, r, s = _lagrange(b.m11, b.m21, b.m12, b.m22)
    radius = math.hypot(ux, uy) * (1.0 + rel_tol)
    pts = []
    pmax = math.floor(radius * math.hypot(vx, vy) * (1.0 + 1e-9)) + 1
    qmax = math.floor(radius * math.hypot(ux, uy) * (1.0 + 1e-9)) + 1
    for pp in range(-pmax, pmax + 1):
        for qq in range(-qmax, qmax + 1):
            if pp == 0 and qq == 0:
                continue
            wx = pp * ux + qq * vx
            wy = pp * uy + qq * vy
            if math.hypot(wx, wy) <= radius:
                pts.append((pp * p + qq * r, pp * q + qq * s, (wx, wy)))
    pts.sort(key=lambda t: (t[0], t[1]))
    return [LatticePoint(pp, qq, w) for pp, qq, w in pts]


def _tie_key(wx: float, wy: float, p: int, q: int):
    # ranked after the norm: smallest |theta|, then positive theta, then q, then p
    theta = math.atan2(wy, wx)
    return (abs(theta), 0 if theta > 0 else 1, q, p)


def cone_minimal_vector(
    L: UnitalLattice, c: Cone, max_box: int = 2**30
) -> LatticePoint:
    """Shortest lattice point inside the open cone.

    Searches doubling coefficient boxes on the reduced basis until some cone
    point appears, then enumerates the whole ball of that radius.  Ties in
    norm break deterministically (angle closest to the axis, positive side
    first, then smallest original-basis q, then p).
    """
    b = L.basis
    ux, uy, vx, vy, gp, gq, gr, gs = _lagrange(b.m11, b.m21, b.m12, b.m22)
    tan_eps = math.tan(c.eps)

    def in_cone(wx, wy):
        return wx > 0.0 and abs(wy) < wx * tan_eps

    # stage 1: find any cone point
    r0 = math.inf
    k = 1
    while not math.isfinite(r0):
        if k > max_box:
            raise EnumerationError(f"no cone point within coefficient box {max_box}")
        for pp in range(-k, k + 1):
            for qq in range(-k, k + 1):
                wx = pp * ux + qq * vx
                wy = pp * uy + qq * vy
                if in_cone(wx, wy):
                    r0 = min(r0, math.hypot(wx, wy))
        k *= 2

    # stage 2: exhaust the ball of radius r0
    radius = r0 * (1.0 + 1e-12)
    pmax = math.floor(radius * math.hypot(vx, vy) * (1.0 + 1e-9)) + 1
    qmax = math.floor(radius * math.hypot(ux, uy) * (1.0 + 1e-9)) + 1
    best = None
    best_key = None
    for pp in range(-pmax, pmax + 1):
        for qq in range(-qmax, qmax + 1):
            wx = pp * ux + qq * vx
            wy = pp * uy + qq * vy
            if not in_cone(wx, wy):
                continue
            n = math.hypot(wx, wy)
            if n > radius:
                continue
            op, oq = pp * gp + qq * gr, pp * gq + qq * gs
            key = (n, *_tie_key(wx, wy, op, oq))
            if best_key is None or key < best_key:
                best_key = key
                best = (op, oq, (wx, wy))
    if best is None:  # pragma: no cover - stage 1 guarantees a candidate
        raise EnumerationError("cone ball enumeration found no candidate")
    return LatticePoint(*best)


def phi_eps(L: UnitalLattice, c: Cone) -> float:
    """Minimal norm over lattice points inside the cone."""
    return cone_minimal_vector(L, c).norm()


def _complete_basis(L: UnitalLattice, u: LatticePoint) -> tuple[float, UnimodularInt]:
    """Extend the primitive point u to a positively oriented basis (u, v).

    Returns the shear t = <v, u>/<u, u> reduced into [0, 1) together with the
    integer matrix gamma0 such that basis * gamma0 = (u, v).
    """
    p, q = u.p, u.q
    g = math.gcd(abs(p), abs(q))
    if g != 1:
        raise ValueError(f"lattice point ({p}, {q}) is not primitive (gcd {g})")
    # extended gcd: x*p + y*q == 1, take r = -y, s = x so p*s - q*r == 1
    x, y = _ext_gcd(p, q)
    r, s = -y, x
    b = L.basis
    vx = r * b.m11 + s * b.m12
    vy = r * b.m21 + s * b.m22
    wx, wy = u.vec
    uu = wx * wx + wy * wy
    t0 = (vx * wx + vy * wy) / uu
    k = math.floor(t0)
    return t0 - k, UnimodularInt(p, r - k * p, q, s - k * q)


def _ext_gcd(a: int, b: int) -> tuple[int, int]:
    """Bezout coefficients (x, y) with x*a + y*b == gcd(a, b)."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        qt, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    if a < 0:
        x0, y0 = -x0, -y0
    return x0, y0


def t_parameter(L: UnitalLattice, u: LatticePoint) -> float:
    """Shear coordinate in [0, 1) of the lattice relative to the primitive point u."""
    t, _ = _complete_basis(L, u)
    return t
