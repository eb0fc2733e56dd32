import math

import pytest

from thinfd import (
    Epsilon,
    IntervalSet,
    Mat2,
    MembershipKind,
    NotAdmissibleError,
    RegionTag,
    UnimodularInt,
    admissible_t_set,
    canonical_t_representative,
    classical_membership,
    cusp_width,
    reduce_to_classical,
    reduce_to_thin,
    region_boundary_polyline,
    siegel_contains,
    thin_membership,
    thin_membership_kna,
)
from thinfd.domains import CLASSICAL_A2_MAX, _thin_margins, _THIN_TAGS
from thinfd.linalg import KANCoords, KNACoords, from_kan, iwasawa_kan, iwasawa_kna, round_to_unimodular
from thinfd.verify import oracle_admissible_t, random_group_element

from conftest import HEX_A, make_rng

PI6 = math.pi / 6


# ---------------------------------------------------------------------------
# IntervalSet


def test_interval_set_normalizes():
    s = IntervalSet([(0.5, 0.7), (0.0, 0.2), (0.2, 0.3)])
    assert s.intervals == ((0.0, 0.3), (0.5, 0.7))
    assert s.measure() == pytest.approx(0.5)
    assert s.contains(0.25) and not s.contains(0.4)
    assert s.contains(0.31, tol=0.02)


def test_interval_set_validates():
    with pytest.raises(ValueError):
        IntervalSet([(-0.1, 0.5)])
    with pytest.raises(ValueError):
        IntervalSet([(0.6, 0.5)])


def test_interval_set_ops():
    a = IntervalSet([(0.0, 0.4), (0.6, 1.0)])
    b = IntervalSet([(0.3, 0.7)])
    assert a.intersect(b).intervals == ((0.3, 0.4), (0.6, 0.7))
    assert a.union(b).intervals == ((0.0, 1.0),)
    assert a.reflect().intervals == ((0.0, 0.4), (0.6, 1.0))
    assert IntervalSet([(0.1, 0.3)]).reflect().intervals == ((0.7, 0.9),)
    shifted = IntervalSet([(0.8, 0.9)]).shift(0.3)
    assert [x for pair in shifted.intervals for x in pair] == pytest.approx([0.1, 0.2])
    wrapped = IntervalSet([(0.8, 0.95)]).shift(0.1)
    assert [x for pair in wrapped.intervals for x in pair] == pytest.approx(
        [0.0, 0.05, 0.9, 1.0]
    )


# ---------------------------------------------------------------------------
# Epsilon


def test_epsilon_validation():
    Epsilon(0.1)
    with pytest.raises(ValueError):
        Epsilon(0.0)
    with pytest.raises(ValueError):
        Epsilon(PI6)  # exact max needs the opt-in flag
    Epsilon(PI6, allow_max=True)
    with pytest.raises(ValueError):
        Epsilon(PI6 + 0.01, allow_max=True)


def test_side_piece_nonempty_inequality():
    # csc(eps - s) <= cot(eps - s) + cot(eps + s) on a theta grid, for every eps used
    for ev in (math.pi / 24, math.pi / 12, math.pi / 8, PI6):
        for i in range(1, 50):
            s = ev * i / 50.0 * 0.999
            lhs = 1.0 / math.sin(ev - s)
            rhs = math.cos(ev - s) / math.sin(ev - s) + math.cos(ev + s) / math.sin(ev + s)
            assert lhs <= rhs + 1e-12


# ---------------------------------------------------------------------------
# classical membership


def test_classical_membership_examples():
    m, tag = classical_membership(KANCoords(1.0, 0.5, 0.3))
    assert m.kind is MembershipKind.INTERIOR and tag is RegionTag.CLASSICAL_F1

    m, tag = classical_membership(KANCoords(0.0, HEX_A, 0.5))
    assert m.kind is MembershipKind.BOUNDARY and tag is RegionTag.CLASSICAL_F2

    m, tag = classical_membership(KANCoords(0.0, 2.0, 0.0))
    assert m.kind is MembershipKind.OUTSIDE and tag is None


def test_classical_membership_ignores_theta():
    for theta in (-3.0, 0.0, 2.5):
        m, tag = classical_membership(KANCoords(theta, 0.9, 0.4))
        assert m.kind is MembershipKind.INTERIOR and tag is RegionTag.CLASSICAL_F1


# ---------------------------------------------------------------------------
# thin membership


def test_thin_membership_examples(eps6):
    m, tag = thin_membership(KANCoords(0.0, 1.0, 0.4), eps6)
    assert m.kind is MembershipKind.INTERIOR and tag is RegionTag.THIN_F1

    # transition slice a^2 = csc(eps): the admissible pieces meet at cos(eps)
    m, tag = thin_membership(KANCoords(0.0, math.sqrt(2.0), -math.cos(PI6)), eps6)
    assert m.kind is MembershipKind.BOUNDARY

    m, tag = thin_membership(KANCoords(0.0, 2.0, 0.01), eps6)
    assert m.kind is MembershipKind.INTERIOR and tag is RegionTag.THIN_F4

    m, tag = thin_membership(KANCoords(0.6, 1.0, 0.0), eps6)
    assert m.kind is MembershipKind.OUTSIDE and tag is None


def test_thin_membership_kna_examples(eps6):
    m, tag = thin_membership_kna(KNACoords(0.0, 1.0, 0.4), eps6)
    assert m.kind is MembershipKind.INTERIOR and tag is RegionTag.THIN_F1

    m, tag = thin_membership_kna(KNACoords(0.0, 2.0, 0.04), eps6)
    assert m.kind is MembershipKind.INTERIOR and tag is RegionTag.THIN_F4
    # window is a^2 - sqrt(a^4 - 1) = 4 - sqrt(15)
    assert 0.04 < 4.0 - math.sqrt(15.0)


def test_kan_kna_agreement(eps12):
    rng = make_rng(20)
    for _ in range(100_000):
        theta = rng.uniform(-math.pi, math.pi)
        a = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
        t = rng.uniform(-2.0, 2.0)
        mk, tk = thin_membership(KANCoords(theta, a, t), eps12)
        mn, tn = thin_membership_kna(KNACoords(theta, a, a * a * t), eps12)
        assert mk.kind is mn.kind and tk is tn


def test_reflection_symmetry(eps12):
    rng = make_rng(21)
    for _ in range(10_000):
        theta = rng.uniform(-eps12.value, eps12.value)
        a = math.exp(rng.uniform(math.log(0.5), math.log(3.0)))
        t = rng.uniform(-1.2, 1.2)
        m1, t1 = thin_membership(KANCoords(theta, a, t), eps12)
        m2, t2 = thin_membership(KANCoords(-theta, a, -t), eps12)
        assert m1.kind is m2.kind and t1 is t2


# ---------------------------------------------------------------------------
# admissible shear set


def test_admissible_small_a_is_everything(eps6):
    assert admissible_t_set(0.9, 0.0, eps6) == IntervalSet.full()
    assert admissible_t_set(0.9, -0.3, eps6) == IntervalSet.full()


def test_admissible_junction_slice(eps6):
    # a^2 = csc(eps): the pieces meet at cos(eps) (to a rounding unit) and fill [0, 1]
    s = admissible_t_set(math.sqrt(2.0), 0.0, eps6)
    assert s.measure() == pytest.approx(1.0, abs=1e-12)
    for i in range(101):
        assert s.contains(i / 100.0, tol=1e-12)


def test_admissible_two_piece_example(eps6):
    s = admissible_t_set(2.0, 0.0, eps6)
    w = math.sqrt(15.0) / 4.0
    assert len(s.intervals) == 2
    assert s.intervals[0] == pytest.approx((0.0, 1.0 - w))
    assert s.intervals[1] == pytest.approx((w, 1.0))


def test_admissible_rejects_large_theta(eps12):
    with pytest.raises(ValueError):
        admissible_t_set(1.5, eps12.value, eps12)


def test_admissible_matches_oracle_spot(eps6):
    # closed form vs enumeration on a small sweep, away from endpoints
    for theta in (-0.2, 0.0, 0.13):
        for a2 in (0.5, 1.7, 2.8, 5.0):
            a = math.sqrt(a2)
            s = admissible_t_set(a, theta, eps6)
            ends = s.endpoints()
            for i in range(60):
                t = (i + 0.5) / 60.0
                if any(abs(t - x) < 1e-6 for x in ends):
                    continue
                assert s.contains(t) == oracle_admissible_t(a, theta, eps6, t)


def test_admissible_oracle_specific_values(eps6):
    assert oracle_admissible_t(0.9, 0.0, eps6, 0.37)
    assert not oracle_admissible_t(2.0, 0.0, eps6, 0.5)
    assert oracle_admissible_t(2.0, 0.0, eps6, 0.99)


# ---------------------------------------------------------------------------
# canonical representative


def test_canonical_piece1(eps6):
    t_star, shift, tag = canonical_t_representative(0.75, 0.5, 0.0, eps6)
    assert (t_star, shift, tag) == (-0.25, -1, RegionTag.THIN_F1)


def test_canonical_piece4(eps6):
    t_star, shift, tag = canonical_t_representative(0.99, 2.0, 0.0, eps6)
    assert tag is RegionTag.THIN_F4 and shift == -1
    assert t_star == pytest.approx(-0.01)


def test_canonical_piece3(eps6):
    a = math.sqrt(2.5)
    t_star, shift, tag = canonical_t_representative(0.6, a, 0.1, eps6)
    assert tag is RegionTag.THIN_F3 and shift == -1 and t_star == pytest.approx(-0.4)
    # already inside the window: unchanged
    t_star, shift, tag = canonical_t_representative(-0.4, a, 0.1, eps6)
    assert (shift, tag) == (0, RegionTag.THIN_F3) and t_star == pytest.approx(-0.4)


def test_canonical_rejects_inadmissible(eps6):
    with pytest.raises(NotAdmissibleError):
        canonical_t_representative(0.5, 2.0, 0.0, eps6)


def test_canonical_lands_in_membership(eps12):
    rng = make_rng(22)
    count = 0
    while count < 2000:
        theta = rng.uniform(-eps12.value, eps12.value) * 0.99
        a = math.exp(rng.uniform(math.log(0.3), math.log(4.0)))
        t = rng.uniform(-3.0, 3.0)
        s = admissible_t_set(a, theta, eps12)
        if not s.contains(t - math.floor(t), tol=0.0):
            continue
        count += 1
        t_star, shift, tag = canonical_t_representative(t, a, theta, eps12)
        assert t_star == pytest.approx(t + shift, abs=1e-12)
        m, tag2 = thin_membership(KANCoords(theta, a, t_star), eps12)
        assert not m.is_outside
        if m.is_interior:
            assert tag2 is tag


# ---------------------------------------------------------------------------
# partition of the admissible set by the canonical windows


def window_indicator(theta, a, e, t):
    """Union of the four canonical windows, evaluated mod 1."""
    for k in range(-2, 3):
        margins = _thin_margins(theta, a, t + k, e, kna=False)
        if max(margins) >= 0.0:
            return True
    return False


def test_partition_property(eps12):
    for theta in (-0.9 * eps12.value, -0.2 * eps12.value, 0.0, 0.37 * eps12.value, 0.8 * eps12.value):
        s_eff = abs(theta)
        thresholds = [
            1.0 / math.sin(eps12.value + s_eff),
            1.0 / math.sin(eps12.value - s_eff),
        ]
        a2_list = [0.5, thresholds[0] * 0.9, thresholds[0] * 1.02, thresholds[1] * 1.2, 9.0]
        for a2 in a2_list:
            a = math.sqrt(a2)
            admissible = admissible_t_set(a, theta, eps12)
            ends = admissible.endpoints()
            for i in range(1000):
                t = i / 999.0
                if any(abs(t - x) < 1e-7 for x in ends):
                    continue
                assert window_indicator(theta, a, eps12, t) == admissible.contains(t), (
                    theta,
                    a2,
                    t,
                )


def test_windows_overlap_only_at_endpoints(eps12):
    """Interior points belong to exactly one canonical window."""
    rng = make_rng(23)
    for _ in range(5000):
        theta = rng.uniform(-eps12.value, eps12.value) * 0.999
        a = math.exp(rng.uniform(math.log(0.3), math.log(4.0)))
        t = rng.uniform(-1.0, 1.0)
        margins = _thin_margins(theta, a, t, eps12, kna=False)
        assert sum(1 for m in margins if m > 1e-9) <= 1


# ---------------------------------------------------------------------------
# reduction


def test_reduce_identity_is_fixed(eps12):
    gp, gamma, tag = reduce_to_thin(Mat2.identity(), eps12)
    assert gamma == UnimodularInt.identity() and tag is RegionTag.THIN_F1
    assert gp.sub_norm(Mat2.identity()) <= 1e-12


def test_reduce_shear(eps12):
    gp, gamma, _ = reduce_to_thin(Mat2(1.0, 5.0, 0.0, 1.0), eps12)
    assert gamma.rows() == ((1, -5), (0, 1))
    assert gp.sub_norm(Mat2.identity()) <= 1e-12


def test_reduce_rotation(eps12):
    gp, gamma, _ = reduce_to_thin(Mat2(0.0, -1.0, 1.0, 0.0), eps12)
    assert gamma.rows() == ((0, 1), (-1, 0))
    assert gp.sub_norm(Mat2.identity()) <= 1e-12


def test_reduce_idempotent_on_interior(eps12):
    rng = make_rng(24)
    checked = 0
    while checked < 500:
        g = random_group_element(rng)
        gp, gamma, _ = reduce_to_thin(g, eps12)
        m, _ = thin_membership(iwasawa_kan(gp), eps12, 1e-7)
        if not m.is_interior:
            continue
        checked += 1
        gp2, gamma2, _ = reduce_to_thin(gp, eps12)
        assert gamma2 == UnimodularInt.identity()
        assert gp2.sub_norm(gp) <= 1e-9 * max(1.0, gp.norm())


def test_reduce_gamma_equivariance(eps12):
    rng = make_rng(25)
    checked = 0
    while checked < 300:
        g = random_group_element(rng)
        gp, _, _ = reduce_to_thin(g, eps12)
        m, _ = thin_membership(iwasawa_kan(gp), eps12, 1e-7)
        if not m.is_interior:
            continue
        checked += 1
        entries = rng.integers(-20, 21, size=2)
        gamma0 = UnimodularInt(1, int(entries[0]), 0, 1) @ UnimodularInt(1, 0, int(entries[1]), 1)
        gp2, _, _ = reduce_to_thin(g.apply(gamma0), eps12)
        assert gp2.sub_norm(gp) <= 1e-9 * max(1.0, gp.norm())


def test_reduce_matches_rounding_construction(eps12):
    """gamma agrees with rounding g^-1 g' to the nearest integer matrix."""
    rng = make_rng(26)
    for _ in range(500):
        g = random_group_element(rng)
        gp, gamma, _ = reduce_to_thin(g, eps12)
        rounded = round_to_unimodular(g.inverse() @ gp, tol=1e-6)
        assert rounded == gamma


def test_reduce_outputs_in_closure_and_siegel(eps12):
    rng = make_rng(27)
    for _ in range(2000):
        g = random_group_element(rng)
        gp, gamma, _ = reduce_to_thin(g, eps12)
        m, _ = thin_membership(iwasawa_kan(gp), eps12)
        assert not m.is_outside
        assert siegel_contains(iwasawa_kna(gp), eps12)
        assert g.apply(gamma).sub_norm(gp) <= 1e-9 * max(1.0, g.norm())


def test_reduce_classical_examples():
    gp, gamma = reduce_to_classical(Mat2.identity())
    assert gamma == UnimodularInt.identity() and gp == Mat2.identity()

    gp, _ = reduce_to_classical(Mat2(3.0, 0.0, 0.0, 1.0 / 3.0))
    c = iwasawa_kan(gp)
    assert c.a == pytest.approx(1.0 / 3.0)
    m, tag = classical_membership(c)
    assert not m.is_outside and tag is RegionTag.CLASSICAL_F1


def test_reduce_classical_bound():
    rng = make_rng(28)
    for _ in range(2000):
        gp, _ = reduce_to_classical(random_group_element(rng))
        c = iwasawa_kan(gp)
        assert c.a <= (4.0 / 3.0) ** 0.25 + 1e-9
        assert c.a * c.a <= CLASSICAL_A2_MAX + 1e-9
        assert c.t * c.t <= 0.25 + 1e-9
        assert c.t * c.t >= 1.0 - c.a ** -4 - 1e-9


# ---------------------------------------------------------------------------
# Siegel box and cusp width


def test_siegel_examples(eps6):
    assert siegel_contains(KNACoords(0.0, 1.0, 0.5), eps6)
    assert not siegel_contains(KNACoords(0.0, 1.0, 2.0), eps6)  # cot(pi/6) = sqrt(3)
    assert not siegel_contains(KNACoords(eps6.value, 1.0, 0.0), eps6)


def test_cusp_width_examples():
    assert cusp_width(1.0 + 1e-9) == pytest.approx(1.0, abs=1e-4)
    assert cusp_width(10.0) == pytest.approx(5.000125006250391e-05, rel=1e-13)
    with pytest.raises(ValueError):
        cusp_width(1.0)
    ratio = cusp_width(100.0) / (0.5 * 100.0 ** -4)
    assert abs(ratio - 1.0) <= 1e-4


def test_cusp_width_matches_direct_form_moderate_a():
    # the direct expression is reliable in double precision up to a ~ 20
    for i in range(200):
        a = 1.01 + i * 0.095
        direct = 1.0 - math.sqrt(1.0 - a**-4)
        assert cusp_width(a) == pytest.approx(direct, rel=1e-10)


def test_cusp_width_monotone():
    widths = [cusp_width(1.0 + 0.1 * k) for k in range(1, 100)]
    assert all(x > y for x, y in zip(widths, widths[1:]))


# ---------------------------------------------------------------------------
# boundary polyline


def test_boundary_shared_edges(eps12):
    rows = region_boundary_polyline(eps12, 0.1, 33)
    by_region = {}
    for row in rows:
        by_region.setdefault(row.region, []).append(row)
    f1, f2 = by_region[RegionTag.THIN_F1], by_region[RegionTag.THIN_F2]
    f3, f4 = by_region[RegionTag.THIN_F3], by_region[RegionTag.THIN_F4]
    # shared a-values where regions abut
    assert f1[-1].a == pytest.approx(f2[0].a, abs=1e-12)
    assert f2[-1].a == pytest.approx(f3[0].a, abs=1e-12)
    assert f3[0].a == pytest.approx(f4[0].a, abs=1e-12)
    # at a^2 = csc(eps+s) the piece-2 window fills a full period
    assert (f2[0].t_hi - f2[0].t_lo) == pytest.approx(1.0, abs=1e-12)
    # at a^2 = csc(eps-s) piece 3 shares both endpoints: with piece 2 and piece 4
    assert f3[0].t_lo == pytest.approx(f2[-1].t_lo, abs=1e-12)
    assert f3[0].t_hi == pytest.approx(f4[0].t_lo, abs=1e-12)


def test_boundary_f4_width_is_cusp_width(eps12):
    rows = [r for r in region_boundary_polyline(eps12, 0.0, 17) if r.region is RegionTag.THIN_F4]
    for row in rows:
        assert row.t_hi - row.t_lo == pytest.approx(2.0 * cusp_width(row.a), rel=1e-12)
    widths = [r.t_hi - r.t_lo for r in rows]
    assert all(x > y for x, y in zip(widths, widths[1:]))


def test_boundary_validates(eps12):
    with pytest.raises(ValueError):
        region_boundary_polyline(eps12, eps12.value, 8)
    with pytest.raises(ValueError):
        region_boundary_polyline(eps12, 0.0, 1)
