"""Synthetic vessel images with known boundaries, match grading and benchmarks."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .constraints import INDICATORS, ScanConfig
from .cost import build_cost_field, compute_edges
from .imaging import GrayImage, load_image, load_mask, save_mask, save_png
from .search import BoundaryPath, scan_fast, scan_simple
from .vessel import VesselGeometry, from_interior_mask

SILHOUETTES = ("rectangle", "trapezoid", "flask")
BOUNDARY_SHAPES = ("flat", "slanted", "sine", "step-bump")
LEVELS = ("Full", "Good", "Partial", "Low", "Miss")
TRUE_LEVELS = ("Full", "Good")

DESCRIPTIONS = {
    "intensity": "intensity change across the path",
    "relative-intensity": "relative intensity change across the path",
    "edge-density": "edge density on the path minus its surroundings",
    "edge": "edge overlap along the path",
}

BACKGROUND = 0.1
# Wall pixels are a bright tint plus a share of whatever lies behind them.
WALL_TINT = 0.5
WALL_TRANSMIT = 0.5
WALL_THICKNESS = 2
# Keep generated boundaries this many rows clear of the default exclusion bands.
BAND_MARGIN = 2


class SpecError(ValueError):
    """Synthetic spec that cannot produce a legal boundary."""


@dataclass(frozen=True)
class SyntheticSpec:
    """Parametric vessel image with one (or two) material interfaces.

    ``level`` places the main interface as a fraction of vessel height from
    its top row. ``upper_level`` adds a flat second interface above it (a
    liquid layer over a solid, say) with its own ``upper_contrast``.
    """

    silhouette: str = "rectangle"
    width: int = 64
    height: int = 64
    vessel_width: int = 44
    vessel_height: int = 52
    top_width: int = 30
    neck_frac: float = 0.3
    boundary_shape: str = "flat"
    level: float = 0.6
    angle_deg: float = 0.0
    amplitude: float = 0.0
    period: float = 24.0
    bump_height: float = 4.0
    bump_width: float = 10.0
    contrast: float = 0.8
    noise_sigma: float = 0.0
    speckle_density: float = 0.0
    seed: int = 0
    upper_level: float | None = None
    upper_contrast: float = 0.4

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticSpec":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


@dataclass(frozen=True)
class MatchLevel:
    level: str
    overlap: float

    @property
    def is_true(self) -> bool:
        return self.level in TRUE_LEVELS


def _silhouette(spec: SyntheticSpec) -> np.ndarray:
    h, w = spec.height, spec.width
    vw, vh = spec.vessel_width, spec.vessel_height
    if not (3 <= vw <= w - 2 and 3 <= vh <= h - 2):
        raise SpecError("vessel must fit inside the image with a 1 px margin")
    y0 = (h - vh) // 2
    cx = w / 2.0
    rows = np.arange(vh)
    if spec.silhouette == "rectangle":
        half = np.full(vh, vw / 2.0)
    elif spec.silhouette == "trapezoid":
        if not 3 <= spec.top_width <= vw:
            raise SpecError("trapezoid top width must lie in [3, vessel_width]")
        half = (spec.top_width + (vw - spec.top_width) * rows / max(vh - 1, 1)) / 2.0
    elif spec.silhouette == "flask":
        if not 3 <= spec.top_width < vw:
            raise SpecError("flask neck must be narrower than the body")
        if not 0.0 < spec.neck_frac < 0.6:
            raise SpecError("neck_frac must lie in (0, 0.6)")
        neck = int(round(0.6 * spec.neck_frac * vh))
        shoulder = max(1, int(round(0.4 * spec.neck_frac * vh)))
        t = np.clip((rows - neck) / shoulder, 0.0, 1.0)
        half = (spec.top_width + (vw - spec.top_width) * t) / 2.0
    else:
        raise SpecError(f"unknown silhouette {spec.silhouette!r}")
    xs = np.arange(w) + 0.5
    mask = np.zeros((h, w), dtype=bool)
    mask[y0 : y0 + vh] = np.abs(xs[None, :] - cx) <= half[:, None]
    return mask


def _boundary_rows(spec: SyntheticSpec, cols: np.ndarray, y0: float, vh: int, cx: float) -> np.ndarray:
    base = y0 + spec.level * vh
    shape = spec.boundary_shape
    if shape == "flat":
        y = np.full(cols.shape, base)
    elif shape == "slanted":
        if not 0.0 <= abs(spec.angle_deg) <= 45.0:
            raise SpecError("slant exceeds 45 degrees; the endpoint angle limit would reject it")
        y = base + math.tan(math.radians(spec.angle_deg)) * (cols - cx)
    elif shape == "sine":
        if spec.period <= 0 or 2 * math.pi * abs(spec.amplitude) / spec.period > 1.0:
            raise SpecError("sine slope exceeds 1 (45 degrees)")
        y = base + spec.amplitude * np.sin(2 * math.pi * cols / spec.period)
    elif shape == "step-bump":
        if spec.bump_height < 0 or spec.bump_width < 0:
            raise SpecError("bump dimensions must be nonnegative")
        rise = np.clip(spec.bump_height - (np.abs(cols + 0.5 - cx) - spec.bump_width / 2.0), 0.0, spec.bump_height)
        y = base - rise
    else:
        raise SpecError(f"unknown boundary shape {shape!r}")
    return np.rint(y).astype(np.int64)


def _truth_path(mask: np.ndarray, rows: np.ndarray) -> BoundaryPath:
    cols = np.arange(mask.shape[1])
    valid = (rows >= 0) & (rows < mask.shape[0])
    hit = np.zeros(mask.shape[1], dtype=bool)
    hit[valid] = mask[rows[valid], cols[valid]]
    xs = np.flatnonzero(hit)
    if xs.size < 2 or (np.diff(xs) != 1).any():
        raise SpecError("boundary does not cross the vessel in one piece")
    return BoundaryPath.from_points(list(zip(xs.tolist(), rows[xs].tolist())), 0.0)


def _check_truth(spec: SyntheticSpec, geom: VesselGeometry, gt: BoundaryPath, cfg: ScanConfig) -> None:
    pts = np.asarray(gt.points)
    if (np.abs(np.diff(pts[:, 1])) > 1).any():
        raise SpecError("boundary slope exceeds one row per column")
    extent = geom.vertical_extent
    lo = geom.top_row + cfg.top_frac * extent + BAND_MARGIN
    hi = geom.bottom_row - cfg.bottom_frac * extent - BAND_MARGIN - WALL_THICKNESS
    if pts[:, 1].min() < lo or pts[:, 1].max() > hi:
        raise SpecError("boundary runs into the top/bottom exclusion bands")
    if spec.silhouette == "flask":
        body = geom.y_top[pts[:, 0]]
        if (pts[:, 1] - body < cfg.flat_d + 2).any():
            raise SpecError("boundary must sit below the flask shoulder")
    dx = gt.dx
    dy = abs(gt.end[1] - gt.start[1])
    if dx < cfg.min_length_frac * geom.average_width or math.degrees(math.atan2(dy, dx)) > cfg.theta_max_deg:
        raise SpecError("boundary endpoints fail the endpoint filters")
    if not (geom.on_contour(gt.start) and geom.on_contour(gt.end)):
        raise SpecError("boundary endpoints are not on the vessel contour")


def _interfaces(spec: SyntheticSpec, mask: np.ndarray, geom: VesselGeometry) -> list[tuple[np.ndarray, BoundaryPath]]:
    """Per-column first-material rows and ground truth, lowest interface first."""
    cfg = ScanConfig().resolve(geom)
    y0 = (spec.height - spec.vessel_height) // 2
    cx = spec.width / 2.0
    cols = np.arange(spec.width)
    rows = _boundary_rows(spec, cols, y0, spec.vessel_height, cx)
    out = [(rows, _truth_path(mask, rows))]
    if spec.upper_level is not None:
        upper = replace(spec, boundary_shape="flat", level=spec.upper_level)
        urows = _boundary_rows(upper, cols, y0, spec.vessel_height, cx)
        if (urows > rows - 3).any():
            raise SpecError("upper interface must sit at least 3 rows above the main one")
        out.append((urows, _truth_path(mask, urows)))
    for _, gt in out:
        _check_truth(spec, geom, gt, cfg)
    return out


def _validate(spec: SyntheticSpec) -> None:
    if not 0.0 <= spec.contrast <= 1.0 - BACKGROUND:
        raise SpecError("contrast must lie in [0, 0.9]")
    if spec.upper_level is not None and spec.upper_contrast + spec.contrast > 1.0 - BACKGROUND:
        raise SpecError("layer intensities exceed 1")
    if spec.noise_sigma < 0:
        raise SpecError("noise_sigma must be >= 0")
    if not 0.0 <= spec.speckle_density <= 1.0:
        raise SpecError("speckle_density must lie in [0, 1]")


def ground_truths(spec: SyntheticSpec) -> list[BoundaryPath]:
    """Every interface of ``spec``, main (lowest) first."""
    _validate(spec)
    mask = _silhouette(spec)
    return [gt for _, gt in _interfaces(spec, mask, from_interior_mask(mask))]


def generate_synthetic(spec: SyntheticSpec) -> tuple[GrayImage, np.ndarray, BoundaryPath]:
    """Render ``spec`` into (image, interior mask, main ground-truth path).

    Dark background and vessel interior, material below the boundary at
    ``background + contrast`` and a brighter 2 px wall that partly shows
    the contents behind it. Gaussian noise and uniform speckle follow; the
    result is clamped to [0, 1].
    """
    _validate(spec)
    mask = _silhouette(spec)
    geom = from_interior_mask(mask)
    layers = _interfaces(spec, mask, geom)
    wall = mask & (geom.dist_to_boundary < WALL_THICKNESS)
    ys = np.arange(spec.height)[:, None]

    content = np.full((spec.height, spec.width), BACKGROUND)
    main_rows = layers[0][0]
    if len(layers) > 1:
        upper_rows = layers[1][0]
        content[mask & (ys >= upper_rows[None, :])] = BACKGROUND + spec.upper_contrast
        content[mask & (ys >= main_rows[None, :])] = BACKGROUND + spec.upper_contrast + spec.contrast
    else:
        content[mask & (ys >= main_rows[None, :])] = BACKGROUND + spec.contrast
    img = np.where(wall, WALL_TINT + WALL_TRANSMIT * content, content)

    rng = np.random.default_rng(spec.seed)
    if spec.noise_sigma > 0:
        img = img + rng.normal(0.0, spec.noise_sigma, img.shape)
    if spec.speckle_density > 0:
        hit = rng.random(img.shape) < spec.speckle_density
        img[hit] = rng.random(int(hit.sum()))
    return GrayImage(np.clip(img, 0.0, 1.0)), mask, layers[0][1]


def random_spec(
    rng: np.random.Generator,
    *,
    shapes: Sequence[str] = BOUNDARY_SHAPES,
    silhouettes: Sequence[str] = SILHOUETTES,
    size: int = 64,
    contrast: tuple[float, float] = (0.6, 0.8),
    noise_sigma: float = 0.0,
    speckle_density: float = 0.0,
    attempts: int = 200,
) -> SyntheticSpec:
    """Draw a valid spec; invalid draws are rejected and redrawn."""
    for _ in range(attempts):
        vw = int(rng.integers(int(0.55 * size), int(0.75 * size) + 1))
        vh = int(rng.integers(int(0.7 * size), int(0.85 * size) + 1))
        sil = str(rng.choice(list(silhouettes)))
        shape = str(rng.choice(list(shapes)))
        spec = SyntheticSpec(
            silhouette=sil,
            width=size,
            height=size,
            vessel_width=vw,
            vessel_height=vh,
            top_width=int(rng.integers(int(0.45 * vw), int(0.8 * vw) + 1)),
            neck_frac=float(rng.uniform(0.2, 0.35)),
            boundary_shape=shape,
            level=float(rng.uniform(0.45, 0.75)),
            angle_deg=float(rng.uniform(-25.0, 25.0)),
            amplitude=float(rng.uniform(1.5, 3.5)),
            period=float(rng.uniform(22.0, 40.0)),
            bump_height=float(rng.integers(3, 7)),
            bump_width=float(rng.integers(6, 14)),
            contrast=float(rng.uniform(*contrast)),
            noise_sigma=noise_sigma,
            speckle_density=speckle_density,
            seed=int(rng.integers(0, 2**31 - 1)),
        )
        try:
            ground_truths(spec)
        except SpecError:
            continue
        return spec
    raise SpecError("could not draw a valid synthetic spec")


def random_suite(n: int, seed: int, **kwargs) -> list[SyntheticSpec]:
    rng = np.random.default_rng(seed)
    return [random_spec(rng, **kwargs) for _ in range(n)]


def grade_match(found: BoundaryPath, gt: BoundaryPath, tau: float = 2.0) -> MatchLevel:
    """Fraction of ground-truth columns the found path passes within ``tau`` rows."""
    if not found.points or not gt.points:
        raise ValueError("cannot grade an empty path")
    f_pts = np.asarray(found.points)
    g_pts = np.asarray(gt.points)
    g_cols = np.unique(g_pts[:, 0])
    matched = 0
    for x in g_cols:
        fy = f_pts[f_pts[:, 0] == x, 1]
        if fy.size == 0:
            continue
        gy = g_pts[g_pts[:, 0] == x, 1]
        if (np.abs(fy[:, None] - gy[None, :]) <= tau).any():
            matched += 1
    f = matched / len(g_cols)
    if f >= 0.98:
        level = "Full"
    elif f >= 0.90:
        level = "Good"
    elif f >= 0.50:
        level = "Partial"
    elif f > 0.0:
        level = "Low"
    else:
        level = "Miss"
    return MatchLevel(level, f)


@dataclass
class ReportRow:
    indicator: str
    counts: dict[str, int]

    @property
    def n(self) -> int:
        return sum(self.counts.values())

    def percent(self, level: str) -> float:
        return 100.0 * self.counts[level] / self.n if self.n else 0.0

    @property
    def true_rate(self) -> float:
        return sum(self.percent(lv) for lv in TRUE_LEVELS)

    @property
    def false_rate(self) -> float:
        return 100.0 - self.true_rate if self.n else 0.0


@dataclass
class BenchmarkReport:
    rows: list[ReportRow]
    cases: list[dict]

    def row(self, indicator: str) -> ReportRow:
        for r in self.rows:
            if r.indicator == indicator:
                return r
        raise KeyError(indicator)

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "indicator": r.indicator,
                    "n": r.n,
                    "counts": r.counts,
                    "percent": {lv: round(r.percent(lv), 2) for lv in LEVELS},
                    "true": round(r.true_rate, 2),
                    "false": round(r.false_rate, 2),
                }
                for r in self.rows
            ],
            "cases": self.cases,
        }

    def format_table(self) -> str:
        head = ["Case", "True", "False", *LEVELS, "Indicator"]
        lines = []
        for i, r in enumerate(self.rows, 1):
            cells = [str(i), f"{r.true_rate:.0f}%", f"{r.false_rate:.0f}%"]
            cells += [f"{r.percent(lv):.0f}%" for lv in LEVELS]
            cells.append(DESCRIPTIONS.get(r.indicator, r.indicator))
            lines.append(cells)
        widths = [max(len(head[j]), *(len(row[j]) for row in lines)) for j in range(len(head) - 1)]
        fmt = "  ".join(f"{{:>{w}}}" for w in widths) + "  {}"
        return "\n".join([fmt.format(*head)] + [fmt.format(*row) for row in lines])


@dataclass
class BenchCase:
    """One benchmark input: image, mask and ground truth."""

    name: str
    image: GrayImage
    mask: np.ndarray
    truth: BoundaryPath


def case_from_spec(name: str, spec: SyntheticSpec) -> BenchCase:
    img, mask, gt = generate_synthetic(spec)
    return BenchCase(name, img, mask, gt)


def _order(cfgs: Sequence[ScanConfig]) -> list[ScanConfig]:
    rank = {ind: i for i, ind in enumerate(INDICATORS)}
    return sorted(cfgs, key=lambda c: rank[c.indicator])


def _run_case(case: BenchCase, cfgs: Sequence[ScanConfig], fast: bool) -> dict:
    geom = from_interior_mask(case.mask)
    edge_cache: dict[tuple, np.ndarray] = {}
    results = {}
    for cfg in cfgs:
        rc = cfg.resolve(geom)
        edges = None
        if rc.indicator in ("edge", "edge-density"):
            key = (rc.canny_sigma, rc.canny_low_ratio, rc.canny_high_ratio)
            if key not in edge_cache:
                edge_cache[key] = compute_edges(case.image, rc)
            edges = edge_cache[key]
        field = build_cost_field(case.image, geom, rc, edges=edges)
        res = (scan_fast if fast else scan_simple)(case.image, geom, field, rc)
        if res.best_path is None:
            grade = MatchLevel("Miss", 0.0)
        else:
            grade = grade_match(res.best_path, case.truth, rc.tau)
        results[rc.indicator] = {"level": grade.level, "overlap": round(grade.overlap, 4)}
    return {"name": case.name, "results": results}


def run_benchmark(
    specs: Iterable[SyntheticSpec | BenchCase],
    cfgs: Sequence[ScanConfig],
    *,
    threads: int = 1,
    fast: bool = True,
) -> BenchmarkReport:
    """Grade the best path of every case under every config (one row each).

    Rows follow the indicator order intensity, relative intensity,
    edge density difference, edge overlap.
    """
    cases = [s if isinstance(s, BenchCase) else case_from_spec(f"case_{i:03d}", s) for i, s in enumerate(specs)]
    if not cases:
        raise ValueError("no benchmark cases")
    if not cfgs:
        raise ValueError("no scan configurations")
    ordered = _order(cfgs)
    if len({c.indicator for c in ordered}) != len(ordered):
        raise ValueError("one configuration per indicator")
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            detail = list(pool.map(lambda c: _run_case(c, ordered, fast), cases))
    else:
        detail = [_run_case(c, ordered, fast) for c in cases]
    detail.sort(key=lambda d: d["name"])
    rows = []
    for cfg in ordered:
        counts = {lv: 0 for lv in LEVELS}
        for d in detail:
            counts[d["results"][cfg.indicator]["level"]] += 1
        rows.append(ReportRow(cfg.indicator, counts))
    return BenchmarkReport(rows, detail)


def path_to_json(path: BoundaryPath) -> list[list[int]]:
    return [[x, y] for x, y in path.points]


def write_case(outdir: str | os.PathLike, name: str, img: GrayImage, mask: np.ndarray, gt: BoundaryPath) -> None:
    out = Path(outdir)
    save_png(img, out / f"{name}.png")
    save_mask(mask, out / f"{name}.mask.png")
    (out / f"{name}.gt.json").write_text(json.dumps(path_to_json(gt)) + "\n")


def write_dataset(outdir: str | os.PathLike, specs: Sequence[SyntheticSpec]) -> Path:
    """Write ``<name>.png``, ``<name>.mask.png``, ``<name>.gt.json`` per spec plus a manifest."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, spec in enumerate(specs):
        name = f"case_{i:03d}"
        img, mask, gt = generate_synthetic(spec)
        write_case(out, name, img, mask, gt)
        entries.append({"name": name, "spec": spec.to_dict()})
    manifest = out / "manifest.json"
    manifest.write_text(json.dumps({"version": 1, "cases": entries}, indent=2, sort_keys=True) + "\n")
    return manifest


def load_dataset(directory: str | os.PathLike) -> list[BenchCase]:
    """Read the cases listed in a dataset manifest; raises ``ValueError`` if it is corrupt."""
    root = Path(directory)
    try:
        manifest = json.loads((root / "manifest.json").read_text())
        names = [str(c["name"]) for c in manifest["cases"]]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"missing or corrupt manifest in {root}: {exc}") from exc
    cases = []
    for name in names:
        try:
            pts = json.loads((root / f"{name}.gt.json").read_text())
            gt = BoundaryPath.from_points([(int(x), int(y)) for x, y in pts], 0.0)
        except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
            raise ValueError(f"bad ground truth for {name}: {exc}") from exc
        cases.append(BenchCase(name, load_image(root / f"{name}.png"), load_mask(root / f"{name}.mask.png"), gt))
    return cases
