"""Constrained minimal-cost boundary search and the full contour scans.

Paths move only rightward (straight or diagonal) or vertically, with at
most ``v_max`` vertical moves in a row, all in one direction. The run
length is part of the search state, so each pixel expands into
``2 * v_max + 1`` Dijkstra nodes. A path's raw cost is the sum of the
cost of every pixel it visits (vertical moves weighted by
``vertical_penalty``); the normalized cost divides by the horizontal
distance between its endpoints.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _dijkstra
from .constraints import (
    EndpointPair,
    ScanConfig,
    admissible_ends,
    enumerate_endpoint_pairs,
    legal_points,
    line_angle_deg,
    min_length,
    pair_legal_region,
    source_legal_region,
)
from .cost import CostField, build_cost_field
from .vessel import VesselGeometry

Point = tuple[int, int]


@dataclass(frozen=True)
class BoundaryPath:
    points: tuple[Point, ...]
    raw_cost: float
    normalized_cost: float

    @classmethod
    def from_points(cls, points, raw_cost: float) -> "BoundaryPath":
        pts = tuple((int(x), int(y)) for x, y in points)
        dx = pts[-1][0] - pts[0][0]
        return cls(pts, float(raw_cost), raw_cost / dx if dx > 0 else math.inf)

    @property
    def start(self) -> Point:
        return self.points[0]

    @property
    def end(self) -> Point:
        return self.points[-1]

    @property
    def dx(self) -> int:
        return self.end[0] - self.start[0]

    def column_profile(self) -> tuple[int, np.ndarray]:
        """First column and the mean row of the path in each column it spans."""
        pts = np.asarray(self.points)
        x0 = int(pts[0, 0])
        cols = pts[:, 0] - x0
        sums = np.bincount(cols, weights=pts[:, 1])
        counts = np.bincount(cols)
        return x0, sums / counts


@dataclass
class ScanResult:
    best_path: BoundaryPath | None
    phases: list[BoundaryPath] = dc_field(default_factory=list)
    pairs_evaluated: int = 0
    pairs_recomputed: int = 0


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _box(region: np.ndarray, x_lo: int, x_hi: int):
    cols = region[:, x_lo : x_hi + 1]
    rows = np.flatnonzero(cols.any(axis=1))
    if rows.size == 0:
        return None
    return int(rows[0]), int(rows[-1])


def _check_start(region: np.ndarray, s: Point) -> None:
    x, y = s
    h, w = region.shape
    if not (0 <= x < w and 0 <= y < h) or not region[y, x]:
        raise ValueError(f"start pixel {tuple(s)} is outside the legal region")


def _pair_search(eff: np.ndarray, region: np.ndarray, s: Point, e: Point, cfg: ScanConfig) -> BoundaryPath | None:
    h, w = region.shape
    if not (0 <= e[0] < w and 0 <= e[1] < h) or not region[e[1], e[0]] or e[0] < s[0]:
        return None
    y_lo, y_hi = _box(region, s[0], e[0])
    reg = np.ascontiguousarray(region[y_lo : y_hi + 1, s[0] : e[0] + 1])
    eb = np.ascontiguousarray(eff[y_lo : y_hi + 1, s[0] : e[0] + 1])
    bh = y_hi - y_lo + 1
    dist, pred, found = _dijkstra.sweep(
        eb, reg, 0, s[1] - y_lo, e[0] - s[0], e[1] - y_lo, cfg.v_max, float(cfg.vertical_penalty)
    )
    if found < 0:
        return None
    pts = _dijkstra.backtrack(pred, found, bh, 2 * cfg.v_max + 1)
    pts[:, 0] += s[0]
    pts[:, 1] += y_lo
    return BoundaryPath.from_points(pts.tolist(), float(dist[found]))


def best_path_pair(
    field: CostField,
    region: np.ndarray,
    s: Point,
    e: Point,
    cfg: ScanConfig,
) -> BoundaryPath | None:
    """Cheapest legal path from ``s`` to ``e`` inside ``region``.

    Returns ``None`` when ``e`` cannot be reached (including ``e`` outside
    the region). ``s`` itself must be legal.
    """
    region = np.asarray(region, dtype=bool)
    _check_start(region, s)
    return _pair_search(field.effective(cfg.penalty_factor), region, s, e, cfg)


class SourceSweep:
    """All cheapest paths from one start pixel (one full Dijkstra sweep)."""

    def __init__(self, dist, pred, x0: int, y0: int, bh: int, bw: int, ns: int, shape):
        self._pred = pred
        self._x0, self._y0, self._bh, self._bw, self._ns = x0, y0, bh, bw, ns
        self.shape = shape
        per_state = dist.reshape(bw, bh, ns)
        self._best_code = per_state.argmin(axis=2)
        self._box_cost = per_state.min(axis=2).T

    def cost(self, p: Point) -> float:
        """Minimal raw cost over all run states at ``p``; ``inf`` if unreachable."""
        bx, by = p[0] - self._x0, p[1] - self._y0
        if not (0 <= bx < self._bw and 0 <= by < self._bh):
            return math.inf
        return float(self._box_cost[by, bx])

    @property
    def cost_matrix(self) -> np.ndarray:
        out = np.full(self.shape, np.inf)
        out[self._y0 : self._y0 + self._bh, self._x0 : self._x0 + self._bw] = self._box_cost
        return out

    def path_to(self, p: Point) -> BoundaryPath | None:
        c = self.cost(p)
        if not math.isfinite(c):
            return None
        bx, by = p[0] - self._x0, p[1] - self._y0
        state = (bx * self._bh + by) * self._ns + int(self._best_code[bx, by])
        pts = _dijkstra.backtrack(self._pred, state, self._bh, self._ns)
        pts[:, 0] += self._x0
        pts[:, 1] += self._y0
        return BoundaryPath.from_points(pts.tolist(), c)


def _sweep_from(eff: np.ndarray, region: np.ndarray, s: Point, cfg: ScanConfig) -> SourceSweep:
    cols = np.flatnonzero(region.any(axis=0))
    x_hi = max(int(cols[-1]), s[0])
    y_lo, y_hi = _box(region, s[0], x_hi)
    reg = np.ascontiguousarray(region[y_lo : y_hi + 1, s[0] : x_hi + 1])
    eb = np.ascontiguousarray(eff[y_lo : y_hi + 1, s[0] : x_hi + 1])
    ns = 2 * cfg.v_max + 1
    dist, pred, _ = _dijkstra.sweep(eb, reg, 0, s[1] - y_lo, -1, -1, cfg.v_max, float(cfg.vertical_penalty))
    return SourceSweep(dist, pred, s[0], y_lo, y_hi - y_lo + 1, x_hi - s[0] + 1, ns, region.shape)


def single_source(field: CostField, region: np.ndarray, s: Point, cfg: ScanConfig) -> SourceSweep:
    """One Dijkstra sweep from ``s`` over ``region``."""
    region = np.asarray(region, dtype=bool)
    _check_start(region, s)
    return _sweep_from(field.effective(cfg.penalty_factor), region, s, cfg)


def _sort_key(item):
    idx, path = item
    return (path.normalized_cost, idx)


def _mean_gap(a: BoundaryPath, b: BoundaryPath) -> float | None:
    ax, ay = a.column_profile()
    bx, by = b.column_profile()
    lo = max(ax, bx)
    hi = min(ax + len(ay), bx + len(by))
    if hi <= lo:
        return None
    return float(np.mean(np.abs(ay[lo - ax : hi - ax] - by[lo - bx : hi - bx])))


def select_phases(candidates: Iterable[BoundaryPath], cfg: ScanConfig) -> list[BoundaryPath]:
    """Pick the phase boundaries from cost-sorted candidate paths.

    Keeps every candidate within ``phase_threshold_k`` times the best cost
    unless its mean vertical gap to an already kept path, over their shared
    columns, is below ``suppression_dist`` (5 px when unresolved).
    """
    cands = list(candidates)
    if not cands:
        return []
    limit = cfg.phase_threshold_k * cands[0].normalized_cost
    sep = 5.0 if cfg.suppression_dist is None else cfg.suppression_dist
    kept: list[BoundaryPath] = []
    for c in cands:
        if c.normalized_cost > limit:
            break
        gaps = (_mean_gap(c, k) for k in kept)
        if all(g is None or g >= sep for g in gaps):
            kept.append(c)
    return kept


def _finish(cands: list[tuple[int, BoundaryPath]], cfg: ScanConfig, n_pairs: int, n_recomputed: int) -> ScanResult:
    cands.sort(key=_sort_key)
    phases = select_phases([p for _, p in cands], cfg)
    return ScanResult(phases[0] if phases else None, phases, n_pairs, n_recomputed)


def scan_simple(img, geom: VesselGeometry, field: CostField, cfg: ScanConfig, threads: int = 1) -> ScanResult:
    """Reference scan: a separate pair-restricted search for every endpoint pair."""
    cfg = cfg if cfg.resolved else cfg.resolve(geom)
    pairs = enumerate_endpoint_pairs(geom, cfg)
    eff = field.effective(cfg.penalty_factor)

    def run(pair: EndpointPair):
        return _pair_search(eff, pair_legal_region(geom, pair.s, pair.e, cfg), pair.s, pair.e, cfg)

    paths = _pmap(run, pairs, threads)
    cands = [(i, p) for i, p in enumerate(paths) if p is not None]
    return _finish(cands, cfg, len(pairs), 0)


def _group_by_start(pairs: list[EndpointPair]) -> list[tuple[Point, list[tuple[int, EndpointPair]]]]:
    groups: dict[int, list[tuple[int, EndpointPair]]] = {}
    for i, pr in enumerate(pairs):
        groups.setdefault(pr.s_index, []).append((i, pr))
    return [(members[0][1].s, members) for members in groups.values()]


def _path_in_pair_region(geom, cfg, pair: EndpointPair, path: BoundaryPath) -> bool:
    pts = np.asarray(path.points)
    return bool(legal_points(geom, pair.s, pair.e, cfg, pts[:, 0], pts[:, 1]).all())


def scan_fast(img, geom: VesselGeometry, field: CostField, cfg: ScanConfig, threads: int = 1) -> ScanResult:
    """One relaxed sweep per start point, re-checking pair legality.

    The sweep region contains every pair region for its start point, so
    its costs are lower bounds. A bound that beats the incumbent is
    confirmed by checking the swept path against the pair region; if the
    path strays outside it, that pair is searched again on its own.
    Candidates within ``phase_threshold_k`` of the incumbent are resolved
    the same way for phase selection.
    """
    cfg = cfg if cfg.resolved else cfg.resolve(geom)
    pairs = enumerate_endpoint_pairs(geom, cfg)
    eff = field.effective(cfg.penalty_factor)
    k = cfg.phase_threshold_k
    groups = _group_by_start(pairs)

    def sweep(group):
        s, members = group
        region = source_legal_region(geom, s, cfg, ends=[pr.e for _, pr in members])
        return _sweep_from(eff, region, s, cfg)

    def recompute(pair: EndpointPair):
        return _pair_search(eff, pair_legal_region(geom, pair.s, pair.e, cfg), pair.s, pair.e, cfg)

    incumbent = math.inf
    exact: dict[int, BoundaryPath] = {}
    deferred: list[tuple[int, EndpointPair, float]] = []
    n_recomputed = 0
    batch = max(1, threads) * 2
    for b0 in range(0, len(groups), batch):
        chunk = groups[b0 : b0 + batch]
        for (s, members), sw in zip(chunk, _pmap(sweep, chunk, threads)):
            for i, pair in members:
                c = sw.cost(pair.e)
                if not math.isfinite(c):
                    continue
                bound = c / pair.dx
                if bound > k * incumbent:
                    continue
                path = sw.path_to(pair.e)
                if _path_in_pair_region(geom, cfg, pair, path):
                    exact[i] = path
                    incumbent = min(incumbent, path.normalized_cost)
                elif bound < incumbent:
                    n_recomputed += 1
                    p = recompute(pair)
                    if p is not None:
                        exact[i] = p
                        incumbent = min(incumbent, p.normalized_cost)
                else:
                    deferred.append((i, pair, bound))

    limit = k * incumbent
    todo = [(i, pair) for i, pair, bound in deferred if bound <= limit]
    for (i, _), p in zip(todo, _pmap(lambda t: recompute(t[1]), todo, threads)):
        if p is not None:
            exact[i] = p
    n_recomputed += len(todo)
    cands = [(i, p) for i, p in exact.items() if p.normalized_cost <= limit]
    return _finish(cands, cfg, len(pairs), n_recomputed)


def trace(
    img,
    geom: VesselGeometry,
    cfg: ScanConfig | None = None,
    *,
    fast: bool = True,
    threads: int = 1,
    edges: np.ndarray | None = None,
) -> ScanResult:
    """Cost field plus full scan in one call."""
    cfg = (cfg or ScanConfig()).resolve(geom)
    field = build_cost_field(img, geom, cfg, edges=edges)
    scan = scan_fast if fast else scan_simple
    return scan(img, geom, field, cfg, threads=threads)


def path_violations(
    path: BoundaryPath,
    geom: VesselGeometry,
    cfg: ScanConfig,
    field: CostField | None = None,
) -> list[str]:
    """Every broken path invariant, as human-readable strings (empty if valid)."""
    cfg = cfg if cfg.resolved else cfg.resolve(geom)
    out = []
    pts = np.asarray(path.points, dtype=np.int64)
    if len(pts) < 2:
        return ["path has fewer than two points"]
    steps = np.diff(pts, axis=0)
    legal_step = ((steps[:, 0] == 1) & (np.abs(steps[:, 1]) <= 1)) | ((steps[:, 0] == 0) & (np.abs(steps[:, 1]) == 1))
    if not legal_step.all():
        out.append(f"illegal move at step {int(np.argmin(legal_step))}")
    run, run_dir = 0, 0
    for dx, dy in steps:
        if dx == 0:
            if run and dy != run_dir:
                out.append("vertical run reverses direction")
            run = run + 1 if run and dy == run_dir else 1
            run_dir = dy
            if run > cfg.v_max:
                out.append(f"vertical run longer than {cfg.v_max}")
        else:
            run, run_dir = 0, 0
    if len({tuple(p) for p in pts}) != len(pts):
        out.append("path revisits a pixel")
    s, e = path.start, path.end
    for name, p in (("start", s), ("end", e)):
        if not geom.on_contour(p):
            out.append(f"{name} {p} not on contour")
    dx = e[0] - s[0]
    if dx <= 0:
        out.append("endpoints not left to right")
        return out
    if path.normalized_cost != path.raw_cost / dx:
        out.append("normalized cost differs from raw / dx")
    if float(line_angle_deg(dx, e[1] - s[1])) > cfg.theta_max_deg + 1e-9:
        out.append("endpoint line steeper than theta_max_deg")
    if dx < min_length(geom, cfg):
        out.append("endpoints closer than the minimal length")
    if geom.on_contour(s) and geom.on_contour(e):
        inside = legal_points(geom, s, e, cfg, pts[:, 0], pts[:, 1])
        if not inside.all():
            out.append(f"{int((~inside).sum())} points outside the pair legal region")
    if field is not None:
        eff = field.effective(cfg.penalty_factor)
        w = eff[pts[:, 1], pts[:, 0]].copy()
        w[1:][steps[:, 0] == 0] *= cfg.vertical_penalty
        if abs(float(w.sum()) - path.raw_cost) > 1e-9 * max(1.0, abs(path.raw_cost)):
            out.append("raw cost differs from the summed move costs")
    return out
