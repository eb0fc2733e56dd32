"""Closed-form membership for the classical and cone-restricted fundamental sets.

The classical set is the K-invariant region a^2 <= 2/sqrt(3), 1 - a^-4 <= t^2 <= 1/4.
The cone-restricted ("thin") set depends on a half-angle eps in (0, pi/6) and
splits into four pieces, each a box in (|theta|, a) with a shear window for t.
Writing s = |theta|, sigma = sign(theta) (sign(0) = +1), A = a^2,
beta = cot(eps+s)/A, gamma = cot(eps-s)/A and W = 1 - sqrt(1 - A^-2):

  piece 1:  A <= csc(eps+s),                 |t| <= 1/2
  piece 2:  csc(eps+s) <= A <= csc(eps-s),   sigma*t in [-beta, W]
  piece 3:  csc(eps-s) <= A <= cot(eps-s)+cot(eps+s),
                                             sigma*t in [-beta, gamma-1]
  piece 4:  csc(eps-s) <= A,                 |t| <= W

The piece-3 window is the unit shift of the side interval
[1-beta, gamma] of the admissible set; this representative keeps the whole
set inside the Siegel box |T| <= cot(eps+|theta|) and makes every window
symmetric under (theta, t) -> (-theta, -t).

All boundaries are treated as closed; membership within `tau` of any defining
inequality reports Boundary.  Tag precedence on boundaries: 1 > 2 > 3 > 4.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import NotAdmissibleError, ReductionError
from .lattice import Cone, UnitalLattice, _complete_basis, cone_minimal_vector, gauss_reduce
from .linalg import (
    DET_TOL,
    KANCoords,
    KNACoords,
    Mat2,
    UnimodularInt,
    _check_unimodular,
    from_kan,
    iwasawa_kan,
)

EPS_MAX = math.pi / 6
DEFAULT_TAU = 1e-9

CLASSICAL_A2_MAX = 2.0 / math.sqrt(3.0)  # = (4/3)^(1/2), the square of the norm bound


@dataclass(frozen=True, slots=True)
class Epsilon:
    """Cone half-angle; strictly inside (0, pi/6) unless allow_max opts into pi/6."""

    value: float
    allow_max: bool = False

    def __post_init__(self):
        hi_ok = self.value < EPS_MAX or (self.allow_max and self.value <= EPS_MAX)
        if not (0.0 < self.value and hi_ok):
            raise ValueError(
                f"half-angle must be in (0, pi/6) (got {self.value!r}); "
                "pi/6 itself requires allow_max"
            )


class RegionTag(enum.Enum):
    CLASSICAL_F1 = "classical_f1"
    CLASSICAL_F2 = "classical_f2"
    THIN_F1 = "thin_f1"
    THIN_F2 = "thin_f2"
    THIN_F3 = "thin_f3"
    THIN_F4 = "thin_f4"


class MembershipKind(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True, slots=True)
class Membership:
    """Classification against a closed region at tolerance tau.

    `distance` is the signed minimum slack over the defining inequalities and
    is only populated for Boundary results (|distance| <= tau).
    """

    kind: MembershipKind
    distance: Optional[float]
    tau: float

    @property
    def is_interior(self) -> bool:
        return self.kind is MembershipKind.INTERIOR

    @property
    def is_boundary(self) -> bool:
        return self.kind is MembershipKind.BOUNDARY

    @property
    def is_outside(self) -> bool:
        return self.kind is MembershipKind.OUTSIDE


class IntervalSet:
    """Finite union of closed subintervals of [0, 1], sorted and disjoint."""

    __slots__ = ("intervals",)

    def __init__(self, pairs=()):
        cleaned = []
        for lo, hi in pairs:
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError(f"interval [{lo!r}, {hi!r}] not inside [0, 1]")
            cleaned.append((float(lo), float(hi)))
        cleaned.sort()
        merged: list[list[float]] = []
        for lo, hi in cleaned:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        self.intervals: tuple[tuple[float, float], ...] = tuple(
            (lo, hi) for lo, hi in merged
        )

    @staticmethod
    def full() -> "IntervalSet":
        return IntervalSet([(0.0, 1.0)])

    @staticmethod
    def empty() -> "IntervalSet":
        return IntervalSet()

    def contains(self, t: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= t <= hi + tol for lo, hi in self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo <= hi:
                    out.append((lo, hi))
        return IntervalSet(out)

    def reflect(self) -> "IntervalSet":
        """Image under t -> 1 - t."""
        return IntervalSet([(1.0 - hi, 1.0 - lo) for lo, hi in self.intervals])

    def shift(self, delta: float) -> "IntervalSet":
        """Translate by delta modulo 1, splitting intervals that wrap."""
        out = []
        for lo, hi in self.intervals:
            lo = lo + delta
            hi = hi + delta
            base = math.floor(lo)
            lo -= base
            hi -= base
            if hi <= 1.0:
                out.append((lo, min(hi, 1.0)))
            else:
                out.append((lo, 1.0))
                out.append((0.0, hi - 1.0))
        return IntervalSet(out)

    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)

    def endpoints(self) -> list[float]:
        return [x for pair in self.intervals for x in pair]

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        body = " u ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in self.intervals)
        return f"IntervalSet({body or 'empty'})"


def _csc(x: float) -> float:
    return 1.0 / math.sin(x)


def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


def _width(A: float) -> float:
    """1 - sqrt(1 - A^-2) for A = a^2, cancellation-free; clamps to 1 for A <= 1."""
    if A <= 1.0:
        return 1.0
    x = 1.0 / (A * A)
    return x / (1.0 + math.sqrt(1.0 - x))


def cusp_width(a: float) -> float:
    """Half-width 1 - sqrt(1 - a^-4) of the pinched shear window, for a > 1.

    Uses the stable form a^-4 / (1 + sqrt(1 - a^-4)); the direct expression
    loses relative accuracy to cancellation once a^-4 approaches the rounding
    unit.
    """
    if not (a > 1.0):
        raise ValueError(f"cusp width is defined for a > 1, got {a!r}")
    return _width(a * a)


def classical_membership(
    c: KANCoords, tau: float = DEFAULT_TAU
) -> tuple[Membership, Optional[RegionTag]]:
    """Membership in the K-invariant fundamental set; theta is ignored."""
    A = c.a * c.a
    t2 = c.t * c.t
    margin = min(CLASSICAL_A2_MAX - A, t2 - (1.0 - 1.0 / (A * A)), 0.25 - t2)
    if margin < -tau:
        return Membership(MembershipKind.OUTSIDE, None, tau), None
    if c.a <= 1.0 + tau and abs(c.t) <= 0.5 + tau:
        tag = RegionTag.CLASSICAL_F1
    else:
        tag = RegionTag.CLASSICAL_F2
    if margin > tau:
        return Membership(MembershipKind.INTERIOR, None, tau), tag
    return Membership(MembershipKind.BOUNDARY, margin, tau), tag


_THIN_TAGS = (RegionTag.THIN_F1, RegionTag.THIN_F2, RegionTag.THIN_F3, RegionTag.THIN_F4)


def _thin_margins(theta: float, a: float, shear: float, e: Epsilon, kna: bool):
    """Signed slack of each thin piece; shear is t (kna=False) or T (kna=True)."""
    eps = e.value
    s = abs(theta)
    m_theta = eps - s
    sigma = 1.0 if theta >= 0.0 else -1.0
    s_eff = min(s, eps * (1.0 - 1e-14))  # keep eps - s positive for the trig below
    A = a * a
    cp = _csc(eps + s_eff)
    cm = _csc(eps - s_eff)
    cot_p = _cot(eps + s_eff)
    cot_m = _cot(eps - s_eff)
    x = sigma * shear
    if kna:
        w = 1.0 / (A + math.sqrt(A * A - 1.0)) if A > 1.0 else A  # A - sqrt(A^2-1)
        f1_shear = 0.5 * A - abs(shear)
        f2_lo, f2_hi = x + cot_p, w - x
        f3_lo, f3_hi = x + cot_p, (cot_m - A) - x
        f4_shear = w - abs(shear)
    else:
        w = _width(A)
        beta = cot_p / A
        gamma = cot_m / A
        f1_shear = 0.5 - abs(shear)
        f2_lo, f2_hi = x + beta, w - x
        f3_lo, f3_hi = x + beta, (gamma - 1.0) - x
        f4_shear = w - abs(shear)
    return (
        min(m_theta, cp - A, f1_shear),
        min(m_theta, A - cp, cm - A, f2_lo, f2_hi),
        min(m_theta, A - cm, (cot_m + cot_p) - A, f3_lo, f3_hi),
        min(m_theta, A - cm, f4_shear),
    )


def _classify(margins, tau: float) -> tuple[Membership, Optional[RegionTag]]:
    boundary = None
    for tag, m in zip(_THIN_TAGS, margins):
        if m > tau:
            return Membership(MembershipKind.INTERIOR, None, tau), tag
        if m >= -tau and boundary is None:
            boundary = (m, tag)
    if boundary is not None:
        return Membership(MembershipKind.BOUNDARY, boundary[0], tau), boundary[1]
    return Membership(MembershipKind.OUTSIDE, None, tau), None


def thin_membership(
    c: KANCoords, e: Epsilon, tau: float = DEFAULT_TAU
) -> tuple[Membership, Optional[RegionTag]]:
    """Membership in the cone-restricted fundamental set, KAN coordinates."""
    if abs(c.theta) - e.value > tau:
        return Membership(MembershipKind.OUTSIDE, None, tau), None
    return _classify(_thin_margins(c.theta, c.a, c.t, e, kna=False), tau)


def thin_membership_kna(
    c: KNACoords, e: Epsilon, tau: float = DEFAULT_TAU
) -> tuple[Membership, Optional[RegionTag]]:
    """Same region expressed through T = a^2 t."""
    if abs(c.theta) - e.value > tau:
        return Membership(MembershipKind.OUTSIDE, None, tau), None
    return _classify(_thin_margins(c.theta, c.a, c.T, e, kna=True), tau)


def admissible_t_set(a: float, theta: float, e: Epsilon) -> IntervalSet:
    """Shear values in [0, 1] for which a(cos theta, sin theta) attains the cone minimum.

    For a <= 1 every shear works.  For a > 1 the set is the intersection of
    the two half-plane conditions (one per neighbouring lattice line), each a
    union of a cone-escape interval and a long-vector interval.  Negative
    theta is the mirror image t -> 1 - t of the positive case.
    """
    if not abs(theta) < e.value:
        raise ValueError(f"need |theta| < eps, got theta={theta!r}, eps={e.value!r}")
    if a <= 1.0:
        return IntervalSet.full()
    s = abs(theta)
    A = a * a
    root = math.sqrt(1.0 - 1.0 / (A * A))  # = 1 - W
    gamma = _cot(e.value - s) / A
    beta = _cot(e.value + s) / A
    near = IntervalSet([(0.0, min(gamma, 1.0)), (root, 1.0)])
    far = IntervalSet([(max(1.0 - beta, 0.0), 1.0), (0.0, 1.0 - root)])
    out = near.intersect(far)
    return out.reflect() if theta < 0.0 else out


def canonical_t_representative(
    t: float, a: float, theta: float, e: Epsilon, tau: float = DEFAULT_TAU
) -> tuple[float, int, RegionTag]:
    """Move t by an integer into the canonical shear window of its piece.

    Requires t (mod 1) to lie in admissible_t_set(a, theta, e) within tau;
    raises NotAdmissibleError otherwise.
    """
    eps = e.value
    s = abs(theta)
    if not s < eps:
        raise ValueError(f"need |theta| < eps, got theta={theta!r}, eps={eps!r}")
    sigma = 1.0 if theta >= 0.0 else -1.0
    A = a * a
    cp = _csc(eps + s)

    def finish(t_star: float, tag: RegionTag):
        shift = round(t_star - t)
        return t_star, shift, tag

    if A <= cp:
        return finish(t - math.floor(t + 0.5), RegionTag.THIN_F1)

    cm = _csc(eps - s)
    beta = _cot(eps + s) / A
    gamma = _cot(eps - s) / A
    w = _width(A)
    x = sigma * t
    if A <= cm:
        xs = x - math.floor(x + beta)  # into [-beta, 1-beta)
        if xs > w + tau:
            raise NotAdmissibleError(
                f"t={t!r} not admissible for a={a!r}, theta={theta!r} (piece 2)"
            )
        return finish(sigma * xs, RegionTag.THIN_F2)

    if A <= _cot(eps - s) + _cot(eps + s) + tau:
        xs = x - math.floor(x + beta)
        if xs <= (gamma - 1.0) + tau:
            return finish(sigma * xs, RegionTag.THIN_F3)
    xs = x - math.floor(x + 0.5)
    if abs(xs) <= w + tau:
        return finish(sigma * xs, RegionTag.THIN_F4)
    raise NotAdmissibleError(
        f"t={t!r} not admissible for a={a!r}, theta={theta!r} (pieces 3/4)"
    )


def reduce_to_thin(
    g: Mat2, e: Epsilon, tau: float = DEFAULT_TAU
) -> tuple[Mat2, UnimodularInt, RegionTag]:
    """Right-multiply g into the cone-restricted fundamental set.

    Returns (g', gamma, tag) with g * gamma = g' within 1e-9 * max(1, |g|),
    gamma an exact integer matrix of determinant 1, and g' inside the closure
    of the set.
    """
    _check_unimodular(g, DET_TOL)
    L = UnitalLattice(g)
    u = cone_minimal_vector(L, Cone(e.value))
    theta = math.atan2(u.vec[1], u.vec[0])
    a = u.norm()
    t0, gamma0 = _complete_basis(L, u)
    t_star, shift, tag = canonical_t_representative(t0, a, theta, e, tau)
    gamma = UnimodularInt(
        gamma0.p, gamma0.r + shift * gamma0.p, gamma0.q, gamma0.s + shift * gamma0.q
    )
    gprime = from_kan(KANCoords(theta, a, t_star))
    residual = g.apply(gamma).sub_norm(gprime)
    if residual > 1e-9 * max(1.0, g.norm()):
        raise ReductionError("reduced element does not match g * gamma", residual)
    return gprime, gamma, tag


def reduce_to_classical(g: Mat2) -> tuple[Mat2, UnimodularInt]:
    """Right-multiply g into the classical fundamental set (Gauss reduction)."""
    _check_unimodular(g, DET_TOL)
    reduced, gamma = gauss_reduce(UnitalLattice(g))
    return reduced.basis, gamma


def siegel_contains(c: KNACoords, e: Epsilon, tau: float = DEFAULT_TAU) -> bool:
    """Whether the element lies in the enclosing box |theta| < eps, |T| <= cot(eps+|theta|)."""
    s = abs(c.theta)
    if s >= e.value:
        return False
    return abs(c.T) <= _cot(e.value + s) + tau


class BoundaryRow(NamedTuple):
    region: RegionTag
    a: float
    t_lo: float
    t_hi: float


def _thin_window(tag: RegionTag, A: float, s: float, sigma: float, eps: float):
    if tag is RegionTag.THIN_F1:
        return (-0.5, 0.5)
    beta = _cot(eps + s) / A
    w = _width(A)
    if tag is RegionTag.THIN_F2:
        lo, hi = -beta, w
    elif tag is RegionTag.THIN_F3:
        gamma = _cot(eps - s) / A
        lo, hi = -beta, gamma - 1.0
    else:
        lo, hi = -w, w
    return (lo, hi) if sigma >= 0 else (-hi, -lo)


def region_boundary_polyline(
    e: Epsilon,
    theta: float,
    n: int,
    a_min: float = 0.2,
    a_max: float = 10.0,
) -> list[BoundaryRow]:
    """Sample each piece's shear window on a log-spaced grid over its a-range.

    The unbounded ends (piece 1 toward a -> 0, piece 4 toward a -> infinity)
    are clipped to [a_min, a_max].
    """
    eps = e.value
    s = abs(theta)
    if not s < eps:
        raise ValueError(f"need |theta| < eps, got theta={theta!r}, eps={eps!r}")
    if n < 2:
        raise ValueError("need at least two grid points")
    sigma = 1.0 if theta >= 0.0 else -1.0
    a_cp = math.sqrt(_csc(eps + s))
    a_cm = math.sqrt(_csc(eps - s))
    a_cots = math.sqrt(_cot(eps - s) + _cot(eps + s))
    ranges = [
        (RegionTag.THIN_F1, min(a_min, a_cp), a_cp),
        (RegionTag.THIN_F2, a_cp, a_cm),
        (RegionTag.THIN_F3, a_cm, a_cots),
        (RegionTag.THIN_F4, a_cm, max(a_max, a_cm)),
    ]
    rows = []
    for tag, lo, hi in ranges:
        log_lo, log_hi = math.log(lo), math.log(hi)
        for i in range(n):
            a = math.exp(log_lo + (log_hi - log_lo) * i / (n - 1))
            t_lo, t_hi = _thin_window(tag, a * a, s, sigma, eps)
            rows.append(BoundaryRow(tag, a, t_lo, t_hi))
    return rows
