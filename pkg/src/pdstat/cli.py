"""Command-line interface.

Subcommands: dist, mean, pfm, vineyard, rips, plot, sample.  Outputs are
machine-readable JSON (stdout or --out); report-style commands additionally
write delimited CSV and matplotlib figures next to it.  Exit codes: 0 on
success, 2 for usage/input errors, 1 for computation errors.  The master seed
comes from --seed, falling back to the PDSTAT_SEED environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io as pio
from .diagrams import BoxBound
from .frechet import frechet_mean
from .grouping import grouping_to_lists
from .matching import DIAGONAL, MetricParams, bottleneck, wasserstein
from .pfm import DEFAULT_EXACT_THRESHOLD, DEFAULT_RESTARTS, PerturbParams, pfm
from .plotting import (
    emit_stack_plot,
    render_continuity_csv,
    render_stacks_csv,
    save_continuity_figure,
    save_diagram_figure,
    save_stack_figure,
)
from .rips import (
    PointCloud,
    build_rips,
    persistence,
    sample_annulus,
    sample_circle,
    sample_double_annulus,
)
from .vineyard import continuity_report, vineyard_pfm


class UsageError(ValueError):
    pass


def _default_seed() -> int:
    env = os.environ.get("PDSTAT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"PDSTAT_SEED must be an integer, got {env!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _metric(args) -> MetricParams:
    try:
        return MetricParams(args.p, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _perturb(args) -> PerturbParams:
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        return PerturbParams(args.alpha, args.draws, seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _box(args) -> BoxBound | None:
    if args.box_m is None and args.box_k is None:
        return None
    if args.box_m is None or args.box_k is None:
        raise UsageError("--box-m and --box-k must be given together")
    try:
        return BoxBound(args.box_m, args.box_k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _matching_obj(matching):
    return [
        [l if l is not DIAGONAL else None, r if r is not DIAGONAL else None]
        for l, r in matching.pairs
    ]


def cmd_dist(args) -> int:
    x = pio.read_diagram(args.diagrams[0])
    y = pio.read_diagram(args.diagrams[1])
    params = _metric(args)
    distance, matching = wasserstein(x, y, params)
    obj = {
        "distance": distance,
        "p": args.p,
        "q": args.q,
        "matching": _matching_obj(matching),
    }
    if args.bottleneck:
        obj["bottleneck"] = bottleneck(x, y, args.q)
    _emit(pio.dumps(obj), args.out)
    return 0


def cmd_mean(args) -> int:
    x = pio.read_diagram_set(args.diagrams)
    result = frechet_mean(
        x, max_iter=args.max_iter, restarts=args.restarts,
        seed=args.seed if args.seed is not None else _default_seed(),
    )
    obj = {
        "mean": pio.diagram_to_obj(result.mean),
        "grouping": grouping_to_lists(result.grouping),
        "value": result.value,
        "iterations": result.iterations,
        "converged": result.converged,
    }
    _emit(pio.dumps(obj), args.out)
    return 0


def cmd_pfm(args) -> int:
    x = pio.read_diagram_set(args.diagrams)
    params = _perturb(args)
    measure = pfm(
        x, params, exact_threshold=args.exact_threshold, restarts=args.restarts
    )
    _emit(pio.dumps(pio.measure_to_obj(measure)), args.out)
    if args.fig:
        save_stack_figure(measure, args.fig)
    return 0


def cmd_vineyard(args) -> int:
    v = pio.read_vineyard(args.input)
    params = _perturb(args)
    measures = vineyard_pfm(
        v,
        params,
        threads=args.threads,
        exact_threshold=args.exact_threshold,
        restarts=args.restarts,
    )
    report = continuity_report(measures, v, params, bound=_box(args))
    obj = {
        "times": list(v.times),
        "c_prime": report.c_prime,
        "exponent": report.exponent,
        "steps": [
            {
                "dt": s.dt,
                "set_step": s.set_distance,
                "measure_step": s.measure_distance,
                "bound": s.bound,
                "slack": s.slack,
                "within_bound": s.within_bound,
            }
            for s in report.steps
        ],
        "measures": [pio.measure_to_obj(m) for m in measures],
    }
    _emit(pio.dumps(obj), args.out)
    if args.report_csv:
        Path(args.report_csv).write_text(render_continuity_csv(report, v.times))
    if args.fig:
        save_continuity_figure(report, v.times, args.fig)
    return 0


def cmd_rips(args) -> int:
    try:
        rows = []
        for lineno, raw in enumerate(Path(args.cloud).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            rows.append([float(p) for p in line.replace(",", " ").split()])
        cloud = PointCloud(rows)
    except ValueError as exc:
        raise UsageError(f"{args.cloud}: {exc}") from None
    fc = build_rips(cloud, args.max_radius, args.max_dim)
    h0, h1 = persistence(fc)
    comment = f"cap: {pio.format_float(fc.max_radius)}"
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.cloud).stem
    pio.write_diagram(out_dir / f"{stem}_h0.csv", h0, comment=comment)
    pio.write_diagram(out_dir / f"{stem}_h1.csv", h1, comment=comment)
    if args.fig:
        save_diagram_figure([h0, h1], args.fig, labels=["H0", "H1"])
    summary = {
        "points": len(cloud),
        "cap": fc.max_radius,
        "h0": pio.diagram_to_obj(h0),
        "h1": pio.diagram_to_obj(h1),
    }
    _emit(pio.dumps(summary), args.out)
    return 0


def cmd_plot(args) -> int:
    measure = pio.read_measure(args.measure)
    emit_stack_plot(measure, args.out)
    if args.csv:
        Path(args.csv).write_text(render_stacks_csv(measure))
    if args.fig:
        save_stack_figure(measure, args.fig)
    return 0


def cmd_sample(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    n = args.n if args.n is not None else (75 if args.kind == "double-annulus" else 50)
    if args.kind == "circle":
        cloud = sample_circle(n, radius=args.radius, noise=args.noise, seed=seed)
    elif args.kind == "annulus":
        cloud = sample_annulus(n, args.r_inner, args.r_outer, seed=seed)
    elif args.kind == "double-annulus":
        n_small = args.n_small if args.n_small is not None else max(1, 2 * n // 3)
        cloud = sample_double_annulus(n_big=n, n_small=n_small, seed=seed)
    else:
        raise UsageError(f"unknown sample kind {args.kind!r}")
    lines = [",".join(pio.format_float(c) for c in row) for row in cloud.coords]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdstat",
        description="statistics on the metric space of persistence diagrams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_metric(p):
        p.add_argument("--p", type=float, default=2.0, help="outer exponent")
        p.add_argument("--q", type=float, default=2.0, help="ground norm exponent")

    def add_perturb(p):
        p.add_argument("--alpha", type=float, default=0.3, help="perturbation radius")
        p.add_argument("--draws", type=int, default=100, help="Monte-Carlo draws")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument(
            "--exact-threshold", type=int, default=DEFAULT_EXACT_THRESHOLD,
            help="max total points for exact optimal groupings",
        )
        p.add_argument(
            "--restarts", type=int, default=DEFAULT_RESTARTS,
            help="restarts for the approximate grouping search",
        )

    p = sub.add_parser("dist", help="Wasserstein distance between two diagrams")
    p.add_argument("diagrams", nargs=2)
    add_metric(p)
    p.add_argument("--bottleneck", action="store_true", help="also report the bottleneck distance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("mean", help="iterative Frechet mean of a diagram set")
    p.add_argument("diagrams", nargs="+")
    p.add_argument("--max-iter", type=int, default=64)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("pfm", help="probabilistic Frechet mean of a diagram set")
    p.add_argument("diagrams", nargs="+")
    add_perturb(p)
    p.add_argument("--out")
    p.add_argument("--fig", help="matplotlib stack figure output path")
    p.set_defaults(func=cmd_pfm)

    p = sub.add_parser("vineyard", help="per-frame means and continuity report")
    p.add_argument("input", help="vineyard directory or JSON bundle")
    add_perturb(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--box-m", type=float, default=None, help="coordinate cap M")
    p.add_argument("--box-k", type=int, default=None, help="max points per diagram K")
    p.add_argument("--out")
    p.add_argument("--report-csv", help="delimited continuity report path")
    p.add_argument("--fig", help="matplotlib continuity figure path")
    p.set_defaults(func=cmd_vineyard)

    p = sub.add_parser("rips", help="Vietoris-Rips persistence of a point cloud")
    p.add_argument("cloud", help="CSV point cloud, one point per line")
    p.add_argument("--max-radius", type=float, required=True)
    p.add_argument("--max-dim", type=int, default=2)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--out", help="JSON summary path (default: stdout)")
    p.add_argument("--fig", help="diagram scatter figure path")
    p.set_defaults(func=cmd_rips)

    p = sub.add_parser("plot", help="stacked-weight chart of a measure")
    p.add_argument("measure", help="measure JSON file")
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--csv", help="delimited stack table path")
    p.add_argument("--fig", help="matplotlib 3D figure path")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("sample", help="generate an example point cloud")
    p.add_argument("kind", choices=["circle", "annulus", "double-annulus"])
    p.add_argument("--n", type=int, default=None,
                   help="points (big-annulus points for double-annulus)")
    p.add_argument("--n-small", type=int, default=None,
                   help="small-annulus points (double-annulus only)")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--r-inner", type=float, default=0.8)
    p.add_argument("--r-outer", type=float, default=1.2)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, pio.FormatError) as exc:
        print(f"pdstat: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"pdstat: cannot read {exc.filename}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"pdstat: invalid input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # computation failure
        print(f"pdstat: computation failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
