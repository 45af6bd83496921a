"""Command-line entry points: ``trace``, ``synth`` and ``bench``.

Errors go to stderr as one line, ``error code=<CODE> msg=<json string>``.
Exit status is 0 on success, 1 on invalid input and 2 when ``trace``
finds no boundary.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .constraints import INDICATORS, ScanConfig
from .cost import build_cost_field, compute_edges
from .harness import BOUNDARY_SHAPES, SILHOUETTES, SpecError, load_dataset, random_suite, run_benchmark, write_dataset
from .imaging import ImageError, load_image, load_mask, render_overlay, save_pgm, save_png
from .search import BoundaryPath, scan_fast, scan_simple
from .vessel import GeometryError, from_contour_points, from_interior_mask, load_contour_json

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_PATH = 2
SIG_DIGITS = 9

# (flag, ScanConfig field, type)
CONFIG_FLAGS = (
    ("--theta", "theta_max_deg", float),
    ("--phi", "phi_max_deg", float),
    ("--min-length-frac", "min_length_frac", float),
    ("--v-max", "v_max", int),
    ("--vertical-penalty", "vertical_penalty", float),
    ("--penalty-factor", "penalty_factor", float),
    ("--penalty-radius", "penalty_radius", float),
    ("--top-frac", "top_frac", float),
    ("--bottom-frac", "bottom_frac", float),
    ("--flat-d", "flat_d", float),
    ("--cost-c", "cost_c", float),
    ("--normal-offset", "normal_offset", int),
    ("--density-rows", "density_rows", int),
    ("--density-cols", "density_cols", int),
    ("--density-offset", "density_offset", int),
    ("--phase-k", "phase_threshold_k", float),
    ("--suppression-dist", "suppression_dist", float),
    ("--tau", "tau", float),
    ("--canny-sigma", "canny_sigma", float),
    ("--canny-low", "canny_low_ratio", float),
    ("--canny-high", "canny_high_ratio", float),
)


class CliError(Exception):
    def __init__(self, code: str, msg: str, status: int = EXIT_INPUT):
        super().__init__(msg)
        self.code = code
        self.status = status


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(p.title() for p in rest)


def _round(obj):
    """Round every float to a fixed number of significant digits."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dump_json(obj, path: str | os.PathLike | None, indent: int | None = None) -> str:
    text = json.dumps(_round(obj), indent=indent, separators=None if indent else (",", ":")) + "\n"
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise CliError("E_WRITE", f"cannot write {path}: {exc}") from exc
    return text


def _default_threads() -> int:
    env = os.environ.get("VESSEL_TRACE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_config_flags(p: argparse.ArgumentParser, with_indicator: bool = True) -> None:
    g = p.add_argument_group("scan configuration")
    for flag, name, typ in CONFIG_FLAGS:
        g.add_argument(flag, dest=name, type=typ, default=None, help=f"override {name}")
    if with_indicator:
        g.add_argument("--indicator", choices=INDICATORS, default=None)
    p.add_argument("--simple", action="store_true", help="use the per-pair reference scan")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env VESSEL_TRACE_THREADS)")


def _config(args) -> ScanConfig:
    overrides = {name: getattr(args, name) for _, name, _ in CONFIG_FLAGS if getattr(args, name) is not None}
    ind = getattr(args, "indicator", None)
    if isinstance(ind, str):
        overrides["indicator"] = ind
    try:
        return ScanConfig(**overrides)
    except (TypeError, ValueError) as exc:
        raise CliError("E_CONFIG", str(exc)) from exc


def _threads(args) -> int:
    n = args.threads if args.threads is not None else _default_threads()
    if n < 1:
        raise CliError("E_CONFIG", "--threads must be >= 1")
    return n


def _path_json(p: BoundaryPath) -> dict:
    return {"points": [[x, y] for x, y in p.points], "rawCost": p.raw_cost, "normalizedCost": p.normalized_cost}


def _load_geometry(args, shape):
    if args.mask:
        try:
            mask = load_mask(args.mask)
        except ImageError as exc:
            raise CliError("E_MASK", str(exc)) from exc
        if mask.shape != shape:
            raise CliError("E_MASK", f"mask is {mask.shape[1]}x{mask.shape[0]}, image is {shape[1]}x{shape[0]}")
        return from_interior_mask(mask)
    try:
        pts = load_contour_json(args.contour_json)
    except (OSError, ValueError) as exc:
        raise CliError("E_CONTOUR", str(exc)) from exc
    return from_contour_points(pts, (shape[1], shape[0]))


def run_trace(args) -> int:
    if not args.mask and not args.contour_json:
        raise CliError("E_ARGS", "one of --mask or --contour-json is required")
    cfg = _config(args)
    threads = _threads(args)
    try:
        img = load_image(args.image)
    except ImageError as exc:
        raise CliError("E_IMAGE", str(exc)) from exc
    try:
        geom = _load_geometry(args, img.shape)
    except GeometryError as exc:
        raise CliError("E_GEOMETRY", str(exc)) from exc
    cfg = cfg.resolve(geom)

    t0 = time.perf_counter()
    edges = None
    if cfg.indicator in ("edge", "edge-density") or args.dump_edges:
        edges = compute_edges(img, cfg)
    field = build_cost_field(img, geom, cfg, edges=edges)
    res = (scan_simple if args.simple else scan_fast)(img, geom, field, cfg, threads=threads)
    elapsed = (time.perf_counter() - t0) * 1000.0

    out = {
        "paths": [_path_json(p) for p in res.phases],
        "config": {_camel(k): v for k, v in cfg.to_dict().items()},
        "stats": {
            "pairsEvaluated": res.pairs_evaluated,
            "pairsRecomputed": res.pairs_recomputed,
            # Wall time varies run to run, so it is opt-in.
            "elapsedMs": elapsed if args.timing else None,
        },
    }
    text = dump_json(out, args.out_json)
    if args.out_json is None:
        sys.stdout.write(text)
    try:
        if args.out_overlay:
            save_png(render_overlay(img, res.phases, geom.contour), args.out_overlay)
        if args.dump_edges:
            save_pgm(edges.astype(np.float64), args.dump_edges)
        if args.dump_cost:
            eff = field.effective(cfg.penalty_factor)
            peak = float(eff.max())
            save_pgm(eff / peak if peak > 0 else eff, args.dump_cost, bits=16)
    except OSError as exc:
        raise CliError("E_WRITE", str(exc)) from exc
    return EXIT_OK if res.phases else EXIT_NO_PATH


def _suite(args):
    shapes = tuple(args.shapes.split(",")) if args.shapes else BOUNDARY_SHAPES
    sils = tuple(args.silhouettes.split(",")) if args.silhouettes else SILHOUETTES
    for s in shapes:
        if s not in BOUNDARY_SHAPES:
            raise CliError("E_ARGS", f"unknown boundary shape {s!r}")
    for s in sils:
        if s not in SILHOUETTES:
            raise CliError("E_ARGS", f"unknown silhouette {s!r}")
    if args.count < 0:
        raise CliError("E_ARGS", "--count must be >= 0")
    try:
        return random_suite(
            args.count,
            args.seed,
            shapes=shapes,
            silhouettes=sils,
            size=args.size,
            contrast=(args.contrast_min, args.contrast_max),
            noise_sigma=args.noise,
            speckle_density=args.speckle,
        )
    except (SpecError, ValueError) as exc:
        raise CliError("E_SPEC", str(exc)) from exc


def run_synth(args) -> int:
    specs = _suite(args)
    try:
        manifest = write_dataset(args.outdir, specs)
    except OSError as exc:
        raise CliError("E_WRITE", f"cannot write to {args.outdir}: {exc}") from exc
    print(f"wrote {len(specs)} cases to {manifest.parent}")
    return EXIT_OK


def run_bench(args) -> int:
    base = _config(args)
    threads = _threads(args)
    if args.dataset:
        try:
            cases = load_dataset(args.dataset)
        except (ValueError, ImageError) as exc:
            raise CliError("E_MANIFEST", str(exc)) from exc
    else:
        cases = _suite(args)
    if not cases:
        raise CliError("E_ARGS", "no benchmark cases")
    inds = list(dict.fromkeys(args.indicator)) if args.indicator else list(INDICATORS)
    cfgs = [replace(base, indicator=i) for i in inds]
    try:
        report = run_benchmark(cases, cfgs, threads=threads, fast=not args.simple)
    except GeometryError as exc:
        raise CliError("E_GEOMETRY", str(exc)) from exc
    print(report.format_table())
    if args.out_json:
        dump_json(report.to_dict(), args.out_json, indent=2)
    return EXIT_OK


def _add_suite_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=64, help="image side in pixels")
    p.add_argument("--shapes", default=None, help="comma list of boundary shapes")
    p.add_argument("--silhouettes", default=None, help="comma list of vessel silhouettes")
    p.add_argument("--contrast-min", type=float, default=0.6)
    p.add_argument("--contrast-max", type=float, default=0.8)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma")
    p.add_argument("--speckle", type=float, default=0.0, help="speckle density")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("E_ARGS", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vessel-trace", description="Find material boundaries inside vessel images.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("trace", help="trace the boundaries in one image")
    t.add_argument("--image", required=True)
    t.add_argument("--mask", default=None, help="interior mask (nonzero = inside)")
    t.add_argument("--contour-json", default=None, help="closed contour as [[x, y], ...]")
    t.add_argument("--out-json", default=None, help="result file (stdout if omitted)")
    t.add_argument("--out-overlay", default=None, help="PNG with contour and paths drawn")
    t.add_argument("--dump-edges", default=None, help="edge map as 8-bit PGM")
    t.add_argument("--dump-cost", default=None, help="effective cost as 16-bit PGM")
    t.add_argument("--timing", action="store_true", help="record elapsedMs (breaks byte-identical output)")
    _add_config_flags(t)
    t.set_defaults(func=run_trace)

    s = sub.add_parser("synth", help="write a synthetic dataset")
    _add_suite_flags(s)
    s.add_argument("--outdir", required=True)
    s.set_defaults(func=run_synth)

    b = sub.add_parser("bench", help="grade every indicator on a dataset")
    b.add_argument("--dataset", default=None, help="directory written by synth (generated in memory if omitted)")
    b.add_argument("--out-json", default=None)
    _add_suite_flags(b)
    _add_config_flags(b, with_indicator=False)
    b.add_argument("--indicator", action="append", choices=INDICATORS, help="repeatable; default all four")
    b.set_defaults(func=run_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error code={exc.code} msg={json.dumps(str(exc))}", file=sys.stderr)
        return exc.status
    except (GeometryError, ImageError, ValueError) as exc:
        print(f"error code=E_INPUT msg={json.dumps(str(exc))}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
