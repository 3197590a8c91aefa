"""Command-line entry point: ``boxwall <command> [options]``.

Exit codes: 0 success, 2 numerical-quality failure, 64 usage error.
Outputs go to ``--out-dir``, else $BOXWALL_OUTPUT_DIR, else the working
directory; every data file gets a ``<stem>.manifest.json`` beside it.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
from pathlib import Path
from typing import Any, Sequence
from xml.sax.saxutils import escape

import numpy as np
import scipy

from . import __version__, analytic, moments, momsolver
from .domain import BoxConfig, ValidationError, load_box_config
from .mollifier import OperatorVariant, run_equivalence, run_verification

EXIT_OK = 0
EXIT_NUMERICAL = 2
EXIT_USAGE = 64
OUTPUT_ENV = "BOXWALL_OUTPUT_DIR"
MAX_K = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(raw: str) -> list[float]:
    try:
        values = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"malformed number list: {raw!r}") from None
    if not values or not all(math.isfinite(v) and v > 0 for v in values):
        raise UsageError(f"expected a comma-separated list of positive numbers, got {raw!r}")
    return values


def _schedule(raw: str) -> list[momsolver.Resolution]:
    out = []
    for item in raw.split(","):
        if not item.strip():
            continue
        parts = item.split(":")
        try:
            cutoff, panels, order = float(parts[0]), int(parts[1]), int(parts[2])
        except (ValueError, IndexError):
            raise UsageError(f"schedule entries look like P_over_p0:panels:order, got {item!r}") from None
        if len(parts) != 3:
            raise UsageError(f"schedule entries look like P_over_p0:panels:order, got {item!r}")
        out.append(momsolver.Resolution(cutoff, panels, order))
    if len(out) < 2:
        raise UsageError("a convergence schedule needs at least two resolutions")
    return out


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".16e")
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_table(path_stem: Path, fmt: str, header, rows) -> Path:
    if fmt == "csv":
        path = path_stem.with_suffix(".csv")
        _write_csv(path, header, rows)
    else:
        path = path_stem.with_suffix(".json")
        _write_json(path, [dict(zip(header, (float(v) if isinstance(v, np.floating) else v for v in row)))
                           for row in rows])
    return path


def write_svg(path: Path, series: dict, xlabel: str, ylabel: str, logy: bool = True) -> None:
    """Minimal line plot; ``series`` maps a label to (xs, ys)."""
    width, height, pad = 640, 420, 60
    pts = {k: (np.asarray(x, float), np.asarray(y, float)) for k, (x, y) in series.items()}
    if logy:
        pts = {k: (x[y > 0], np.log10(y[y > 0])) for k, (x, y) in pts.items()}
    allx = np.concatenate([x for x, _ in pts.values()] or [np.zeros(1)])
    ally = np.concatenate([y for _, y in pts.values()] or [np.zeros(1)])
    x0, x1 = (allx.min(), allx.max()) if allx.size else (0.0, 1.0)
    y0, y1 = (ally.min(), ally.max()) if ally.size else (0.0, 1.0)
    x1, y1 = (x1 if x1 > x0 else x0 + 1.0), (y1 if y1 > y0 else y0 + 1.0)

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" '
        f'text-anchor="middle">{escape(("log10 " if logy else "") + ylabel)}</text>',
        f'<text x="{pad}" y="{height - pad + 18}">{x0:.4g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 18}" text-anchor="end">{x1:.4g}</text>',
        f'<text x="{pad - 5}" y="{height - pad}" text-anchor="end">{y0:.3g}</text>',
        f'<text x="{pad - 5}" y="{pad + 10}" text-anchor="end">{y1:.3g}</text>',
    ]
    for i, (label, (x, y)) in enumerate(pts.items()):
        color = colors[i % len(colors)]
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        parts.append(f'<text x="{width - pad + 5}" y="{pad + 15 * (i + 1)}" fill="{color}">'
                     f'{escape(str(label))}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


def _config(args) -> BoxConfig:
    overrides = {"m": args.m, "hbar": args.hbar, "L": args.L}
    if args.config:
        return load_box_config(args.config, **overrides)
    return BoxConfig(**{k: v for k, v in overrides.items() if v is not None})


def _out_dir(args) -> Path:
    path = Path(args.out_dir or os.environ.get(OUTPUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _manifest(args, cfg: BoxConfig, params: dict, outputs: list[Path], argv) -> dict:
    return {
        "schema_version": 1,
        "command": args.command,
        "argv": list(argv),
        "parameters": params,
        "config": cfg.as_dict(),
        "version": __version__,
        "outputs": [p.name for p in outputs],
        "environment": {"python": platform.python_version(), "numpy": np.__version__,
                        "scipy": scipy.__version__},
    }


def _finish(args, cfg, params, outputs, stem: Path, argv) -> None:
    _write_json(stem.with_name(stem.name + ".manifest.json"), _manifest(args, cfg, params, outputs, argv))
    for path in outputs:
        print(path)


def cmd_spectrum(args, argv) -> int:
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    cfg = _config(args)
    _, _, matched = momsolver.solve_box_modes(
        cfg, args.n_max, args.cutoff_p0, args.panels, args.order, args.wall_limit, strict=False)
    header = ["n", "E_analytic", "re_lambda", "im_lambda", "rel_error", "overlap"]
    rows = [(m.n, m.energy, m.eigenvalue.real, m.eigenvalue.imag, m.rel_error, m.overlap)
            for m in matched.modes]
    stem = _out_dir(args) / "spectrum"
    out = _write_table(stem, args.format, header, rows)
    params = {"n_max": args.n_max, "cutoff_p0": args.cutoff_p0, "panels": args.panels,
              "order": args.order, "wall_limit": args.wall_limit, "format": args.format,
              "min_overlap": momsolver.MIN_OVERLAP}
    _finish(args, cfg, params, [out], stem, argv)
    if not matched.all_resolved:
        for m in matched.modes:
            if not m.resolved:
                print(f"mode not resolved: n={m.n} overlap {m.overlap:.4f}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_momdist(args, argv) -> int:
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    if not args.p_max > args.p_min:
        raise UsageError("--p-max must exceed --p-min")
    cfg = _config(args)
    analytic.check_quantum_number(args.n)
    p = np.linspace(args.p_min, args.p_max, args.samples) * cfg.p0
    dens = analytic.mom_density(p, args.n, cfg)
    amp = analytic.phi(p, args.n, cfg)
    rows = list(zip(p, dens, amp.real, amp.imag))
    stem = _out_dir(args) / "momdist"
    out = _write_table(stem, args.format, ["p", "density", "re_phi", "im_phi"], rows)
    params = {"n": args.n, "p_min_p0": args.p_min, "p_max_p0": args.p_max,
              "samples": args.samples, "format": args.format}
    _finish(args, cfg, params, [out], stem, argv)
    return EXIT_OK


def cmd_moments(args, argv) -> int:
    if not 0 <= args.k_max <= MAX_K:
        raise UsageError(f"--k-max must be in 0..{MAX_K}")
    cutoffs_p0 = _float_list(args.cutoffs)
    cfg = _config(args)
    analytic.check_quantum_number(args.n)
    outdir = _out_dir(args)
    cutoffs = [c * cfg.p0 for c in cutoffs_p0]
    try:
        reports = [moments.classify_moment(args.n, k, cutoffs, cfg) for k in range(args.k_max + 1)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except moments.MomentClassificationError as exc:
        print(f"{exc}: {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL
    outputs = []
    for rep in reports:
        path = outdir / f"moments_k{rep.k}.json"
        _write_json(path, rep.as_dict())
        outputs.append(path)
    params = {"n": args.n, "k_max": args.k_max, "cutoffs_p0": cutoffs_p0}
    _finish(args, cfg, params, outputs, outdir / "moments", argv)
    return EXIT_OK


def cmd_verify(args, argv) -> int:
    eps_l = _float_list(args.eps_list)
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    cfg = _config(args)
    eps = [e * cfg.L for e in eps_l]
    variants = (list(OperatorVariant) if args.variant == "both" else [OperatorVariant(args.variant)])
    n_values = range(1, args.n_max + 1)
    report = run_verification(cfg, n_values, eps, variants)
    outdir = _out_dir(args)
    stem = outdir / "verify"
    path = stem.with_suffix(".csv")
    _write_csv(path, ["n", "epsilon", "variant", "testfn_id", "residual"],
               [(r.n, r.eps, r.variant, r.testfn_id, r.residual) for r in report.rows])
    outputs = [path]
    if args.variant == "both":
        eq = run_equivalence(cfg, n_values, eps)
        eq_path = outdir / "equivalence.csv"
        _write_csv(eq_path, ["n", "epsilon", "testfn_id", "difference"],
                   [(r.n, r.eps, r.testfn_id, r.difference) for r in eq.rows])
        outputs.append(eq_path)
    params = {"n_max": args.n_max, "eps_over_L": eps_l, "variant": args.variant,
              "clamped_nodes": {f"{v}@{e!r}": c for (v, e), c in sorted(report.clamped.items())}}
    _finish(args, cfg, params, outputs, stem, argv)
    failed = [(n, v.value) for n in n_values for v in variants
              if len(eps) > 1 and not report.interior_strictly_decreasing(n, v)]
    for n, v in failed:
        print(f"interior weak residual not decreasing: n={n} variant={v}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_converge(args, argv) -> int:
    schedule = _schedule(args.schedule)
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    cfg = _config(args)
    report = momsolver.convergence_study(cfg, args.n_max, schedule, args.wall_limit)
    outdir = _out_dir(args)
    stem = outdir / "convergence"
    header = ["cutoff_p0", "panels", "order", "nodes", "n", "energy", "eig_real", "eig_imag",
              "rel_error", "overlap", "residual", "resolved"]
    path = stem.with_suffix(".csv")
    _write_csv(path, header, [tuple(getattr(r, h) for h in header) for r in report.rows])
    outputs = [path]
    if args.svg:
        svg = stem.with_suffix(".svg")
        series = {f"n={n}": ([r.nodes for r in report.rows if r.n == n], report.series(n))
                  for n in range(1, args.n_max + 1)}
        write_svg(svg, series, "nodes N", "relative energy error")
        outputs.append(svg)
    params = {"n_max": args.n_max, "wall_limit": args.wall_limit,
              "schedule": [[r.cutoff_p0, r.panels, r.order] for r in schedule]}
    _finish(args, cfg, params, outputs, stem, argv)
    bad = [n for n in range(1, args.n_max + 1) if not report.tail_non_increasing(n)]
    for n in bad:
        print(f"energy error for n={n} grows over the final refinement steps", file=sys.stderr)
    return EXIT_NUMERICAL if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boxwall", description="Wall-corrected particle-in-a-box spectral toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, metavar="FILE", help="key = value file with m, hbar, L")
    common.add_argument("--m", type=float, default=None)
    common.add_argument("--hbar", type=float, default=None)
    common.add_argument("--L", type=float, default=None)
    common.add_argument("--out-dir", default=None, metavar="DIR")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", parents=[common], help="solve the momentum integral equation")
    s.add_argument("--n-max", type=int, default=5)
    s.add_argument("--cutoff-p0", type=float, default=momsolver.REFERENCE_CUTOFF_P0)
    s.add_argument("--panels", type=int, default=momsolver.REFERENCE_PANELS)
    s.add_argument("--order", type=int, default=momsolver.REFERENCE_ORDER)
    s.add_argument("--wall-limit", choices=sorted(momsolver.WALL_LIMITS), default="interior")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=cmd_spectrum)

    d = sub.add_parser("momdist", parents=[common], help="tabulate phi_n and |phi_n|^2")
    d.add_argument("--n", type=int, default=1)
    d.add_argument("--p-min", type=float, default=-5.0, help="in units of p0")
    d.add_argument("--p-max", type=float, default=5.0, help="in units of p0")
    d.add_argument("--samples", type=int, default=1001)
    d.add_argument("--format", choices=["csv", "json"], default="csv")
    d.set_defaults(func=cmd_momdist)

    mo = sub.add_parser("moments", parents=[common], help="truncated <p^2k> and their cutoff behaviour")
    mo.add_argument("--n", type=int, default=1)
    mo.add_argument("--k-max", type=int, default=2)
    mo.add_argument("--cutoffs", default="50,100,200,400", help="comma list, units of p0")
    mo.set_defaults(func=cmd_moments)

    v = sub.add_parser("verify", parents=[common], help="weak-form checks of the mollified operator")
    v.add_argument("--n-max", type=int, default=2)
    v.add_argument("--eps-list", default="0.02,0.01,0.005", help="comma list, units of L")
    v.add_argument("--variant", choices=["HM", "HMprime", "both"], default="both")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("converge", parents=[common], help="convergence table for the eigensolver")
    c.add_argument("--n-max", type=int, default=3)
    c.add_argument("--schedule", default="20:80:4,40:160:4,60:240:4",
                   help="comma list of P_over_p0:panels:order, coarse to fine")
    c.add_argument("--wall-limit", choices=sorted(momsolver.WALL_LIMITS), default="interior")
    c.add_argument("--svg", action="store_true", help="also write convergence.svg")
    c.set_defaults(func=cmd_converge)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except (UsageError, ValidationError) as exc:
        print(f"boxwall {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except momsolver.SpectrumError as exc:
        print(f"boxwall {args.command}: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
