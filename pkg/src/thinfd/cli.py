"""Command-line front end.

Subcommands: decompose, reduce, membership, t-set, boundary, verify, bench.
Machine-readable JSON goes to stdout (CSV/SVG for `boundary`); floats are
always serialized with 17 significant digits so that identical flags and
seeds give byte-identical output.  Exit codes: 0 success, 2 invalid input,
3 reduction failure, 4 I/O failure, 5 verification failure.
"""

from __future__ import annotations

import argparse
import enum
import json
import math
import sys
import time
from dataclasses import asdict, is_dataclass

import numpy as np

from .domains import (
    Epsilon,
    RegionTag,
    _THIN_TAGS,
    _thin_margins,
    admissible_t_set,
    classical_membership,
    reduce_to_classical,
    reduce_to_thin,
    region_boundary_polyline,
    thin_membership,
    thin_membership_kna,
)
from .errors import (
    EnumerationError,
    NotAdmissibleError,
    NotIntegralError,
    NotUnimodularError,
    ReductionError,
    SupportError,
)
from .linalg import KANCoords, KNACoords, Mat2, from_kan, iwasawa_kan, iwasawa_kna
from .verify import (
    random_group_element,
    run_l2_suite,
    run_oracle_suite,
    run_stabilizer_suite,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_REDUCTION = 3
EXIT_IO = 4
EXIT_VERIFY = 5


def _float_repr(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def _dumps(obj, indent: int = 0, level: int = 0) -> str:
    pad = " " * (indent * (level + 1)) if indent else ""
    end_pad = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = "," + nl
    if obj is None:
        return "null"
    if obj is True or obj is False:
        return "true" if obj else "false"
    if isinstance(obj, enum.Enum):
        return _dumps(obj.value, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float_repr(float(obj))
    if is_dataclass(obj) and not isinstance(obj, type):
        return _dumps(asdict(obj), indent, level)
    if isinstance(obj, dict):
        items = [
            f"{pad}{json.dumps(str(k))}:{' ' if indent else ''}{_dumps(v, indent, level + 1)}"
            for k, v in obj.items()
        ]
        return "{" + nl + sep.join(items) + nl + end_pad + "}" if items else "{}"
    if isinstance(obj, (list, tuple)):
        items = [f"{pad}{_dumps(v, indent, level + 1)}" for v in obj]
        return "[" + nl + sep.join(items) + nl + end_pad + "]" if items else "[]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(payload, args) -> None:
    indent = 2 if getattr(args, "pretty", False) else 0
    _emit(_dumps(payload, indent) + "\n", getattr(args, "out", None))


def _matrix_from_args(args) -> Mat2:
    m = Mat2(*args.matrix)
    return m


def _epsilon_from_args(args) -> Epsilon:
    return Epsilon(args.epsilon, allow_max=getattr(args, "allow_eps_max", False))


def cmd_decompose(args) -> int:
    g = _matrix_from_args(args)
    if args.mode == "kan":
        c = iwasawa_kan(g, args.tol)
        payload = {"theta": c.theta, "a": c.a, "t": c.t}
    else:
        c = iwasawa_kna(g, args.tol)
        payload = {"theta": c.theta, "a": c.a, "T": c.T}
    _emit_json(payload, args)
    return EXIT_OK


def cmd_reduce(args) -> int:
    g = _matrix_from_args(args)
    if args.classical:
        gprime, gamma = reduce_to_classical(g)
        member, tag = classical_membership(iwasawa_kan(gprime), args.tol)
    else:
        e = _epsilon_from_args(args)
        gprime, gamma, tag = reduce_to_thin(g, e, args.tol)
        member, _ = thin_membership(iwasawa_kan(gprime), e, args.tol)
    residual = g.apply(gamma).sub_norm(gprime)
    payload = {
        "gprime": list(gprime.entries()),
        "gamma": [list(row) for row in gamma.rows()],
        "region": tag,
        "membership": member.kind,
        "residual": residual,
    }
    _emit_json(payload, args)
    return EXIT_OK


def cmd_membership(args) -> int:
    if args.classical:
        member, tag = classical_membership(KANCoords(args.theta, args.a, args.t), args.tol)
        margins = None
    else:
        e = _epsilon_from_args(args)
        if args.kna:
            member, tag = thin_membership_kna(
                KNACoords(args.theta, args.a, args.t), e, args.tol
            )
        else:
            member, tag = thin_membership(KANCoords(args.theta, args.a, args.t), e, args.tol)
        raw = _thin_margins(args.theta, args.a, args.t, e, kna=args.kna)
        margins = {tag_.value: m for tag_, m in zip(_THIN_TAGS, raw)}
    payload = {
        "membership": member.kind,
        "region": tag,
        "distance": member.distance,
        "tau": member.tau,
    }
    if margins is not None:
        payload["margins"] = margins
    _emit_json(payload, args)
    return EXIT_OK


def cmd_t_set(args) -> int:
    e = _epsilon_from_args(args)
    s = admissible_t_set(args.a, args.theta, e)
    payload = {
        "a": args.a,
        "theta": args.theta,
        "epsilon": e.value,
        "intervals": [list(pair) for pair in s.intervals],
        "measure": s.measure(),
    }
    _emit_json(payload, args)
    return EXIT_OK


def _boundary_csv(rows) -> str:
    lines = ["region,a,t_lo,t_hi"]
    for row in rows:
        lines.append(
            f"{row.region.value},{_float_repr(row.a)},"
            f"{_float_repr(row.t_lo)},{_float_repr(row.t_hi)}"
        )
    return "\n".join(lines) + "\n"


_SVG_COLORS = {
    RegionTag.THIN_F1: "#4878cf",
    RegionTag.THIN_F2: "#6acc65",
    RegionTag.THIN_F3: "#d65f5f",
    RegionTag.THIN_F4: "#b47cc7",
}


def _boundary_svg(rows, eps: float, theta: float) -> str:
    """Filled outline per region: x = shear t, y = log10(a) increasing upward."""
    width, height, pad = 640.0, 480.0, 50.0
    ts = [x for r in rows for x in (r.t_lo, r.t_hi)]
    ys = [math.log10(r.a) for r in rows]
    t0, t1 = min(ts), max(ts)
    y0, y1 = min(ys), max(ys)
    t_span = (t1 - t0) or 1.0
    y_span = (y1 - y0) or 1.0

    def sx(t):
        return pad + (t - t0) / t_span * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / y_span * (height - 2 * pad)

    groups: dict[RegionTag, list] = {}
    for row in rows:
        groups.setdefault(row.region, []).append(row)
    paths = []
    for tag, region_rows in groups.items():
        pts = [(sx(r.t_lo), sy(math.log10(r.a))) for r in region_rows]
        pts += [(sx(r.t_hi), sy(math.log10(r.a))) for r in reversed(region_rows)]
        d = "M " + " L ".join(f"{_float_repr(x)} {_float_repr(y)}" for x, y in pts) + " Z"
        paths.append(
            f'<path d="{d}" fill="{_SVG_COLORS[tag]}" fill-opacity="0.55" '
            f'stroke="{_SVG_COLORS[tag]}" stroke-width="1"><title>{tag.value}</title></path>'
        )
    labels = [
        f'<text x="{_float_repr(sx(0.0))}" y="{_float_repr(height - 8.0)}" '
        f'font-size="12" text-anchor="middle">cusp: a -&gt; 0</text>',
        f'<text x="{_float_repr(sx(0.0))}" y="{_float_repr(pad - 20.0)}" '
        f'font-size="12" text-anchor="middle">cusp: shear width ~ a^-4 / 2</text>',
        f'<text x="12" y="{_float_repr(height / 2)}" font-size="12" '
        f'transform="rotate(-90 12 {_float_repr(height / 2)})">log10(a)</text>',
        f'<text x="{_float_repr(width / 2)}" y="{_float_repr(height - 28.0)}" '
        f'font-size="12" text-anchor="middle">t (eps={_float_repr(eps)}, '
        f"theta={_float_repr(theta)})</text>",
    ]
    body = "\n".join(paths + labels)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width:g} {height:g}">\n'
        f"{body}\n</svg>\n"
    )


def cmd_boundary(args) -> int:
    e = _epsilon_from_args(args)
    rows = region_boundary_polyline(e, args.theta, args.n, args.a_min, args.a_max)
    if args.format == "csv":
        _emit(_boundary_csv(rows), args.out)
    else:
        _emit(_boundary_svg(rows, e.value, args.theta), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    e = _epsilon_from_args(args)
    reports = []
    if args.suite in ("oracle", "all"):
        reports.append(run_oracle_suite(eps_values=(e.value,)))
    if args.suite in ("stabilizer", "all"):
        reports.append(
            run_stabilizer_suite(
                e, n_points=min(args.samples, 100), entry_bound=args.entry_bound, seed=args.seed
            )
        )
    if args.suite in ("l2", "all"):
        reports.append(run_l2_suite(eps_values=(e.value,), samples=args.samples, seed=args.seed))
    ok = all(rep["pass"] for rep in reports)
    _emit_json({"reports": reports, "pass": ok}, args)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bench(args) -> int:
    rng = np.random.Generator(np.random.PCG64(args.seed))
    mats = [random_group_element(rng) for _ in range(args.samples)]
    t0 = time.perf_counter()
    for g in mats:
        from_kan(iwasawa_kan(g))
    t_round = time.perf_counter() - t0
    e = _epsilon_from_args(args)
    t0 = time.perf_counter()
    for g in mats:
        reduce_to_thin(g, e)
    t_reduce = time.perf_counter() - t0
    payload = {
        "samples": args.samples,
        "seed": args.seed,
        "round_trip_us": t_round / args.samples * 1e6,
        "reduce_us": t_reduce / args.samples * 1e6,
    }
    _emit_json(payload, args)
    return EXIT_OK


def _add_common(p, epsilon=True, tol=True):
    if epsilon:
        p.add_argument("--epsilon", type=float, default=math.pi / 12)
        p.add_argument("--allow-eps-max", action="store_true", dest="allow_eps_max")
    if tol:
        p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.add_argument("--pretty", action="store_true")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thinfd",
        description="Iwasawa coordinates, cone-restricted reduction and fundamental-set tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="Iwasawa coordinates of a unimodular matrix")
    p.add_argument("matrix", type=float, nargs=4, metavar=("M11", "M12", "M21", "M22"))
    p.add_argument("--mode", choices=("kan", "kna"), default="kan")
    _add_common(p, epsilon=False)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reduce", help="reduce a matrix into a fundamental set")
    p.add_argument("matrix", type=float, nargs=4, metavar=("M11", "M12", "M21", "M22"))
    p.add_argument("--classical", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("membership", help="membership of Iwasawa coordinates")
    p.add_argument("theta", type=float)
    p.add_argument("a", type=float)
    p.add_argument("t", type=float)
    p.add_argument("--classical", action="store_true")
    p.add_argument("--kna", action="store_true", help="third coordinate is T instead of t")
    _add_common(p)
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("t-set", help="admissible shear intervals for (a, theta)")
    p.add_argument("a", type=float)
    p.add_argument("theta", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_t_set)

    p = sub.add_parser("boundary", help="region windows on a log-spaced a-grid")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--format", choices=("csv", "svg"), default="csv")
    p.add_argument("--a-min", type=float, default=0.2, dest="a_min")
    p.add_argument("--a-max", type=float, default=10.0, dest="a_max")
    _add_common(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("suite", choices=("oracle", "stabilizer", "l2", "all"))
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--entry-bound", type=int, default=50, dest="entry_bound")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time the core operations")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=42)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return EXIT_INVALID if code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ReductionError, EnumerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REDUCTION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (
        NotUnimodularError,
        NotIntegralError,
        NotAdmissibleError,
        SupportError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
