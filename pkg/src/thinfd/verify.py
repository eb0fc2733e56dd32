"""Independent brute-force oracles and statistical checks.

The enumeration oracles here deliberately share no code with the closed-form
paths they validate: they build their own generator pairs, their own cone
test, and search plain coefficient boxes.  The Monte-Carlo routine estimates
both sides of the L2 comparison between the angular box integral and the
norm over the fundamental set, with the measure d(theta) dT da/a on both
sides.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .domains import (
    Epsilon,
    classical_membership,
    thin_membership,
    thin_membership_kna,
    reduce_to_thin,
    reduce_to_classical,
    admissible_t_set,
)
from .errors import EnumerationError, SupportError
from .lattice import Cone, LatticePoint, UnitalLattice, _ext_gcd, phi, phi_eps
from .linalg import KANCoords, KNACoords, Mat2, UnimodularInt, from_kan, iwasawa_kan


@dataclass(frozen=True, slots=True)
class OracleConfig:
    coeff_bound: int = 200
    ball_radius_factor: float = 1.0
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.coeff_bound < 1:
            raise ValueError("coeff_bound must be >= 1")


@dataclass(frozen=True, slots=True)
class McReport:
    lhs_estimate: float
    lhs_stderr: float
    rhs_estimate: float
    rhs_stderr: float
    samples: int
    seed: int
    accept_rate: float

    def margin(self) -> float:
        return self.lhs_estimate - self.rhs_estimate

    def combined_stderr(self) -> float:
        return math.hypot(self.lhs_stderr, self.rhs_stderr)


@dataclass(frozen=True, slots=True)
class TestFunction:
    """Right-invariant function of the lattice alone: a quartic bump in phi.

    f(g) = max(0, 1 - ((phi(L_g) - center)/width)^2)^2, identically zero when
    width == 0.  Values lie in [0, 1] and the support is |phi - center| < width.
    """

    __test__ = False  # not a pytest case despite the name

    center: float
    width: float

    @staticmethod
    def bump_of_phi(center: float, width: float) -> "TestFunction":
        if width < 0:
            raise ValueError("width must be >= 0")
        return TestFunction(center, width)

    def of_phi(self, phi_value: float) -> float:
        if self.width == 0.0:
            return 0.0
        z = (phi_value - self.center) / self.width
        s = 1.0 - z * z
        return s * s if s > 0.0 else 0.0

    def of_phi_array(self, phis: np.ndarray) -> np.ndarray:
        if self.width == 0.0:
            return np.zeros_like(phis)
        z = (phis - self.center) / self.width
        s = np.maximum(0.0, 1.0 - z * z)
        return s * s

    def __call__(self, g: Mat2) -> float:
        return self.of_phi(phi(UnitalLattice(g)))


def worker_count() -> int:
    """Worker cap from THINFD_THREADS (default 1); results never depend on it."""
    try:
        return max(1, int(os.environ.get("THINFD_THREADS", "1")))
    except ValueError:
        return 1


_GRID_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _coeff_grid(bound: int) -> tuple[np.ndarray, np.ndarray]:
    if bound not in _GRID_CACHE:
        rng = np.arange(-bound, bound + 1, dtype=float)
        P, Q = np.meshgrid(rng, rng, indexing="ij")
        _GRID_CACHE[bound] = (P, Q)
    return _GRID_CACHE[bound]


def _tie_pick(wx, wy, ps, qs):
    """Deterministic pick among equal-norm candidates (mirrors the main path)."""
    best = None
    for x, y, p, q in zip(wx, wy, ps, qs):
        th = math.atan2(y, x)
        key = (abs(th), 0 if th > 0 else 1, q, p)
        if best is None or key < best[0]:
            best = (key, int(p), int(q), (float(x), float(y)))
    return LatticePoint(best[1], best[2], best[3])


def oracle_min_in_cone(
    L: UnitalLattice, e: Epsilon, cfg: OracleConfig = OracleConfig()
) -> LatticePoint:
    """Naive double-loop cone minimum over the box |p|, |q| <= coeff_bound."""
    b = L.basis
    P, Q = _coeff_grid(cfg.coeff_bound)
    wx = P * b.m11 + Q * b.m12
    wy = P * b.m21 + Q * b.m22
    mask = (wx > 0.0) & (np.abs(wy) < wx * math.tan(e.value))
    if not mask.any():
        raise EnumerationError(
            f"no cone point within coefficient bound {cfg.coeff_bound}"
        )
    norms = np.hypot(wx, wy)
    masked = np.where(mask, norms, np.inf)
    nmin = masked.min()
    tied = masked <= nmin * (1.0 + 1e-15)
    return _tie_pick(wx[tied], wy[tied], P[tied], Q[tied])


def oracle_admissible_t(
    a: float,
    theta: float,
    e: Epsilon,
    t: float,
    cfg: OracleConfig = OracleConfig(),
) -> bool:
    """Decide by enumeration whether the generator of norm `a` attains the cone minimum.

    Builds u = a(cos theta, sin theta) and v = u_perp + t u directly, then
    enumerates every lattice point in the ball of radius a(1 + tol) and checks
    that none of them lies strictly inside the cone with a strictly smaller
    norm.
    """
    if not abs(theta) < e.value:
        raise ValueError("need |theta| < eps")
    ux, uy = a * math.cos(theta), a * math.sin(theta)
    ppx, ppy = -uy / (a * a), ux / (a * a)  # normal of u with norm 1/a
    vx, vy = ppx + t * ux, ppy + t * uy
    radius = a * cfg.ball_radius_factor * (1.0 + cfg.tolerance)
    pmax = math.ceil(radius * math.hypot(vx, vy)) + 1
    qmax = math.ceil(radius * math.hypot(ux, uy)) + 1
    if max(pmax, qmax) > cfg.coeff_bound:
        raise EnumerationError(
            f"needed coefficient box {max(pmax, qmax)} exceeds bound {cfg.coeff_bound}"
        )
    ps = np.arange(-pmax, pmax + 1, dtype=float)[:, None]
    qs = np.arange(-qmax, qmax + 1, dtype=float)[None, :]
    wx = ps * ux + qs * vx
    wy = ps * uy + qs * vy
    in_cone = (wx > 0.0) & (np.abs(wy) < wx * math.tan(e.value))
    shorter = wx * wx + wy * wy < (a * (1.0 - cfg.tolerance)) ** 2
    return not bool((in_cone & shorter).any())


def stabilizer_enumeration(
    g: Mat2,
    e: Epsilon | None,
    entry_bound: int,
    classical: bool = False,
    tau: float = 1e-9,
) -> list[UnimodularInt]:
    """All unimodular gamma with entries in [-entry_bound, entry_bound] keeping g*gamma in the set.

    The first column of any such gamma must send the generators to a vector
    attaining the (cone-restricted or classical) minimum, which prunes the
    quadruple loop to a box scan over first columns plus a short scan over
    shear shifts.
    """
    if not classical and e is None:
        raise ValueError("thin enumeration needs an Epsilon")
    b = g
    L = UnitalLattice(b)
    if classical:
        target = phi(L)
    else:
        target = phi_eps(L, Cone(e.value))
    P, Q = _coeff_grid(entry_bound)
    wx = P * b.m11 + Q * b.m12
    wy = P * b.m21 + Q * b.m22
    norm_ok = np.hypot(wx, wy) <= target * (1.0 + 1e-6)
    if classical:
        mask = norm_ok & ((P != 0) | (Q != 0))
    else:
        slack = 1e-6 * target
        cone_ok = (wx > 0.0) & (
            np.abs(wy) <= wx * math.tan(e.value) * (1.0 + 1e-6) + slack
        )
        mask = norm_ok & cone_ok
    found: list[UnimodularInt] = []
    for p, q, cx, cy in zip(P[mask], Q[mask], wx[mask], wy[mask]):
        p, q = int(p), int(q)
        if math.gcd(abs(p), abs(q)) != 1:
            continue
        x, y = _ext_gcd(p, q)
        r0, s0 = -y, x
        v0x = r0 * b.m11 + s0 * b.m12
        v0y = r0 * b.m21 + s0 * b.m22
        ww = cx * cx + cy * cy
        t0 = (v0x * cx + v0y * cy) / ww
        for k in range(math.ceil(-1.0 - tau - t0), math.floor(1.0 + tau - t0) + 1):
            r, s = r0 + k * p, s0 + k * q
            if max(abs(r), abs(s)) > entry_bound:
                continue
            gamma = UnimodularInt(p, r, q, s)
            coords = iwasawa_kan(b.apply(gamma))
            if classical:
                member, _ = classical_membership(coords, tau)
            else:
                member, _ = thin_membership(coords, e, tau)
            if not member.is_outside:
                found.append(gamma)
    found.sort(key=lambda gm: (gm.p, gm.q, gm.r, gm.s))
    return found


def random_group_element(rng: np.random.Generator) -> Mat2:
    """Seeded draw: theta uniform on (-pi, pi], log a on [log 0.2, log 5], t on [-2, 2]."""
    theta = rng.uniform(-math.pi, math.pi)
    a = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
    t = rng.uniform(-2.0, 2.0)
    return from_kan(KANCoords(theta, a, t))


def _phi_batch(ux, uy, vx, vy, max_iter: int = 200) -> np.ndarray:
    """Vectorised Lagrange reduction: minimal norms for arrays of generator pairs."""
    ux, uy, vx, vy = (np.array(w, dtype=float) for w in (ux, uy, vx, vy))
    for _ in range(max_iter):
        uu = ux * ux + uy * uy
        m = np.rint((vx * ux + vy * uy) / uu)
        vx -= m * ux
        vy -= m * uy
        swap = vx * vx + vy * vy < uu
        if not (swap.any() or np.abs(m).any()):
            return np.hypot(ux, uy)
        nux = np.where(swap, vx, ux)
        nuy = np.where(swap, vy, uy)
        vx = np.where(swap, -ux, vx)
        vy = np.where(swap, -uy, vy)
        ux, uy = nux, nuy
    raise RuntimeError("batch reduction did not converge")  # pragma: no cover


_CHUNK = 1 << 16


def _chunk_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, stream, index))))


def _kna_columns(theta, T, a):
    """Column vectors of k(theta) n(T) diag(a, 1/a) for numpy arrays."""
    cs, sn = np.cos(theta), np.sin(theta)
    ux, uy = a * cs, a * sn
    vx = (T * cs - sn) / a
    vy = (T * sn + cs) / a
    return ux, uy, vx, vy


def _check_support(f: TestFunction, e: Epsilon, a_window) -> None:
    a_lo, a_hi = a_window
    if not (0.0 < a_lo < a_hi):
        raise ValueError("a_window must satisfy 0 < lo < hi")
    thetas = np.linspace(-e.value, e.value, 17)
    limit = 1.0 / e.value
    Ts = np.linspace(-limit, limit, 33)
    TH, TT = np.meshgrid(thetas, Ts, indexing="ij")
    for edge in (a_lo, a_hi):
        ux, uy, vx, vy = _kna_columns(TH.ravel(), TT.ravel(), edge)
        vals = f.of_phi_array(_phi_batch(ux, uy, vx, vy))
        if vals.max() > 0.0:
            raise SupportError(
                f"test function does not vanish at a = {edge!r}; widen a_window"
            )


def _run_chunks(tasks, threads: int):
    """Evaluate chunk closures, preserving index order regardless of worker count."""
    if threads <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [fut.result() for fut in futures]


def mc_l2_inequality(
    f: TestFunction,
    e: Epsilon,
    samples: int,
    seed: int,
    a_window: tuple[float, float] = (0.5, 20.0),
) -> McReport:
    """Monte-Carlo both sides of the L2 comparison.

    LHS: integral of |f|^2 over the box |theta| < eps, |T| < 1/eps, a in
    a_window with measure d(theta) dT da/a, by uniform sampling in
    (theta, T, log a).  RHS: same integrand over the fundamental set,
    by rejection inside the enclosing box |T| <= cot(eps).  For f >= 0 the
    true LHS dominates the true RHS.
    """
    if samples < 10**4:
        raise ValueError("need at least 1e4 samples")
    _check_support(f, e, a_window)
    a_lo, a_hi = a_window
    log_lo, log_hi = math.log(a_lo), math.log(a_hi)
    log_span = log_hi - log_lo
    eps = e.value
    threads = worker_count()

    chunks = [(i, min(_CHUNK, samples - i * _CHUNK)) for i in range((samples + _CHUNK - 1) // _CHUNK)]

    def lhs_chunk(index: int, n: int):
        def run():
            rng = _chunk_rng(seed, 1, index)
            theta = rng.uniform(-eps, eps, n)
            T = rng.uniform(-1.0 / eps, 1.0 / eps, n)
            a = np.exp(rng.uniform(log_lo, log_hi, n))
            vals = f.of_phi_array(_phi_batch(*_kna_columns(theta, T, a)))
            sq = vals * vals
            return n, float(sq.sum()), float((sq * sq).sum())

        return run

    def rhs_chunk(index: int, n: int):
        def run():
            rng = _chunk_rng(seed, 2, index)
            theta = rng.uniform(-eps, eps, n)
            limit = math.cos(eps) / math.sin(eps)
            T = rng.uniform(-limit, limit, n)
            a = np.exp(rng.uniform(log_lo, log_hi, n))
            keep = np.fromiter(
                (
                    not thin_membership_kna(KNACoords(th, av, tv), e)[0].is_outside
                    for th, tv, av in zip(theta, T, a)
                ),
                dtype=bool,
                count=n,
            )
            accepted = int(keep.sum())
            if accepted == 0:
                return n, 0.0, 0.0, 0
            ux, uy, vx, vy = _kna_columns(theta[keep], T[keep], a[keep])
            vals = f.of_phi_array(_phi_batch(ux, uy, vx, vy))
            sq = vals * vals
            return n, float(sq.sum()), float((sq * sq).sum()), accepted

        return run

    lhs_parts = _run_chunks([lhs_chunk(i, n) for i, n in chunks], threads)
    rhs_parts = _run_chunks([rhs_chunk(i, n) for i, n in chunks], threads)

    def reduce_stats(parts, volume):
        n_total = sum(p[0] for p in parts)
        s1 = sum(p[1] for p in parts)
        s2 = sum(p[2] for p in parts)
        mean = s1 / n_total
        var = max(0.0, s2 / n_total - mean * mean)
        return volume * mean, volume * math.sqrt(var / n_total)

    lhs_volume = 2.0 * eps * (2.0 / eps) * log_span
    rhs_volume = 2.0 * eps * 2.0 * (math.cos(eps) / math.sin(eps)) * log_span
    lhs_est, lhs_err = reduce_stats(lhs_parts, lhs_volume)
    rhs_est, rhs_err = reduce_stats(rhs_parts, rhs_volume)
    accepted = sum(p[3] for p in rhs_parts)
    if accepted == 0:
        raise EnumerationError("rejection sampler accepted no proposals")
    return McReport(
        lhs_estimate=lhs_est,
        lhs_stderr=lhs_err,
        rhs_estimate=rhs_est,
        rhs_stderr=rhs_err,
        samples=samples,
        seed=seed,
        accept_rate=accepted / samples,
    )


# ---------------------------------------------------------------------------
# Suite runners shared by the CLI.


def acceptance_oracle_grid(e: Epsilon, theta_count=9, a2_count=20, t_count=200):
    thetas = np.linspace(-e.value, e.value, theta_count + 2)[1:-1]
    a2s = np.geomspace(0.25, 10.0, a2_count)
    ts = np.linspace(0.0, 1.0, t_count)
    return thetas, a2s, ts


def run_oracle_suite(
    eps_values=(math.pi / 24, math.pi / 12, math.pi / 8, math.pi / 6 - 0.01),
    theta_count: int = 9,
    a2_count: int = 20,
    t_count: int = 200,
    cfg: OracleConfig = OracleConfig(),
    exclude: float = 1e-6,
) -> dict:
    """Grid agreement between the closed-form admissible set and the enumeration oracle."""
    checked = 0
    skipped = 0
    mismatches = []
    for ev in eps_values:
        e = Epsilon(ev)
        thetas, a2s, ts = acceptance_oracle_grid(e, theta_count, a2_count, t_count)
        for theta in thetas:
            for a2 in a2s:
                a = math.sqrt(a2)
                closed = admissible_t_set(a, theta, e)
                ends = closed.endpoints()
                for t in ts:
                    if any(abs(t - x) < exclude for x in ends):
                        skipped += 1
                        continue
                    checked += 1
                    want = closed.contains(t)
                    got = oracle_admissible_t(a, float(theta), e, float(t), cfg)
                    if want != got:
                        mismatches.append(
                            {"eps": ev, "theta": float(theta), "a2": float(a2), "t": float(t)}
                        )
    return {
        "suite": "oracle",
        "checked": checked,
        "skipped_near_endpoints": skipped,
        "mismatches": mismatches[:20],
        "mismatch_count": len(mismatches),
        "pass": not mismatches,
    }


def interior_points(
    e: Epsilon, count: int, seed: int, classical: bool = False, min_margin: float = 1e-6
):
    """Interior elements of the requested fundamental set, found by reduction."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 3))))
    points = []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 100 * count:
            raise EnumerationError("interior sampling stalled")
        g = random_group_element(rng)
        if classical:
            gp, _ = reduce_to_classical(g)
            member, _ = classical_membership(iwasawa_kan(gp), min_margin)
        else:
            gp, _, _ = reduce_to_thin(g, e)
            member, _ = thin_membership(iwasawa_kan(gp), e, min_margin)
        if member.is_interior:
            points.append(gp)
    return points


def run_stabilizer_suite(
    e: Epsilon, n_points: int = 100, entry_bound: int = 50, seed: int = 42
) -> dict:
    """Interior stabilizers: thin must be {I}, classical must be {I, -I}."""
    identity = UnimodularInt.identity()
    bad_thin = 0
    for g in interior_points(e, n_points, seed, classical=False):
        gammas = stabilizer_enumeration(g, e, entry_bound)
        if gammas != [identity]:
            bad_thin += 1
    bad_classical = 0
    for g in interior_points(e, n_points, seed + 1, classical=True):
        gammas = stabilizer_enumeration(g, None, entry_bound, classical=True)
        if sorted(gm.rows() for gm in gammas) != sorted(
            gm.rows() for gm in (identity, -identity)
        ):
            bad_classical += 1
    return {
        "suite": "stabilizer",
        "points": n_points,
        "entry_bound": entry_bound,
        "thin_failures": bad_thin,
        "classical_failures": bad_classical,
        "pass": bad_thin == 0 and bad_classical == 0,
    }


def run_l2_suite(
    eps_values=(math.pi / 24, math.pi / 12, math.pi / 8),
    samples: int = 10**5,
    seed: int = 42,
    center: float = 0.9,
    width: float = 0.05,
) -> dict:
    """One-seed Monte-Carlo check that the box integral dominates the set norm."""
    f = TestFunction.bump_of_phi(center, width)
    results = []
    ok = True
    for ev in eps_values:
        rep = mc_l2_inequality(f, Epsilon(ev), samples, seed)
        passed = rep.margin() >= -3.0 * rep.combined_stderr()
        ok = ok and passed
        results.append(
            {
                "eps": ev,
                "lhs": rep.lhs_estimate,
                "lhs_stderr": rep.lhs_stderr,
                "rhs": rep.rhs_estimate,
                "rhs_stderr": rep.rhs_stderr,
                "accept_rate": rep.accept_rate,
                "pass": passed,
            }
        )
    return {"suite": "l2", "samples": samples, "seed": seed, "cases": results, "pass": ok}
