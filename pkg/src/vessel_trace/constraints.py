"""Scan configuration, endpoint-pair enumeration and legal path regions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Literal, Sequence

import numpy as np

from .vessel import VesselGeometry

Indicator = Literal["intensity", "relative-intensity", "edge", "edge-density"]
# Row order of the benchmark tables.
INDICATORS: tuple[str, ...] = ("intensity", "relative-intensity", "edge-density", "edge")

_ANGLE_EPS = 1e-9
_CONE_EXEMPT = 2


@dataclass(frozen=True)
class ScanConfig:
    """Thresholds and weights for one boundary scan.

    ``penalty_radius``, ``flat_d`` and ``suppression_dist`` default to
    ``None`` and are derived from the vessel by :meth:`resolve`.
    """

    theta_max_deg: float = 55.0
    phi_max_deg: float = 70.0
    min_length_frac: float = 0.25
    v_max: int = 3
    vertical_penalty: float = 1.2
    penalty_factor: float = 3.0
    penalty_radius: float | None = None
    top_frac: float = 0.10
    bottom_frac: float = 0.05
    flat_d: float | None = None
    indicator: Indicator = "edge-density"
    cost_c: float = 1.0
    normal_offset: int = 2
    density_rows: int = 3
    density_cols: int = 5
    density_offset: int = 3
    phase_threshold_k: float = 1.1
    suppression_dist: float | None = None
    tau: float = 2.0
    canny_sigma: float = 1.4
    canny_low_ratio: float = 0.1
    canny_high_ratio: float = 0.3

    def __post_init__(self):
        for name in ("theta_max_deg", "phi_max_deg"):
            v = getattr(self, name)
            if not 0.0 < v <= 90.0:
                raise ValueError(f"{name} must lie in (0, 90]")
        for name in ("min_length_frac", "top_frac", "bottom_frac"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.top_frac + self.bottom_frac >= 1.0:
            raise ValueError("top_frac + bottom_frac must be < 1")
        if int(self.v_max) != self.v_max or self.v_max < 0:
            raise ValueError("v_max must be a nonnegative integer")
        object.__setattr__(self, "v_max", int(self.v_max))
        for name in ("vertical_penalty", "penalty_factor", "phase_threshold_k"):
            if getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be >= 1")
        for name in ("penalty_radius", "flat_d", "suppression_dist"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.indicator not in INDICATORS:
            raise ValueError(f"indicator must be one of {', '.join(INDICATORS)}")
        if self.cost_c < 0:
            raise ValueError("cost_c must be >= 0")
        if self.normal_offset < 1:
            raise ValueError("normal_offset must be >= 1")
        if self.density_rows < 1 or self.density_cols < 1:
            raise ValueError("density window must be at least 1x1")
        if self.density_offset - self.density_rows // 2 < 2:
            raise ValueError("density strips must clear the path row by one pixel")
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if self.canny_sigma <= 0:
            raise ValueError("canny_sigma must be > 0")
        if not 0.0 <= self.canny_low_ratio < self.canny_high_ratio:
            raise ValueError("canny ratios need 0 <= low < high")

    def resolve(self, geom: VesselGeometry) -> "ScanConfig":
        """Fill the geometry-dependent defaults."""
        return replace(
            self,
            penalty_radius=(max(2.0, 0.02 * geom.average_width) if self.penalty_radius is None else self.penalty_radius),
            flat_d=(max(3.0, 0.02 * geom.vertical_extent) if self.flat_d is None else self.flat_d),
            suppression_dist=(
                max(5.0, 0.03 * geom.vertical_extent) if self.suppression_dist is None else self.suppression_dist
            ),
        )

    @property
    def resolved(self) -> bool:
        return None not in (self.penalty_radius, self.flat_d, self.suppression_dist)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScanConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def _resolved(cfg: ScanConfig, geom: VesselGeometry) -> ScanConfig:
    return cfg if cfg.resolved else cfg.resolve(geom)


@dataclass(frozen=True)
class EndpointPair:
    s: tuple[int, int]
    e: tuple[int, int]
    s_index: int
    e_index: int

    @property
    def dx(self) -> int:
        return self.e[0] - self.s[0]

    @property
    def line_angle(self) -> float:
        return math.degrees(math.atan2(abs(self.e[1] - self.s[1]), self.dx))


def line_angle_deg(dx, dy) -> np.ndarray:
    return np.degrees(np.arctan2(np.abs(dy), dx))


def excluded_rows(geom: VesselGeometry, cfg: ScanConfig) -> np.ndarray:
    """Per-row flag of the top/bottom exclusion bands (see ``vessel.excluded_band``)."""
    rows = np.arange(geom.height)
    extent = geom.vertical_extent
    return ((rows - geom.top_row) < cfg.top_frac * extent) | ((geom.bottom_row - rows) < cfg.bottom_frac * extent)


def min_length(geom: VesselGeometry, cfg: ScanConfig) -> float:
    return max(1.0, cfg.min_length_frac * geom.average_width)


def _admissible_matrix(geom: VesselGeometry, cfg: ScanConfig, pts: np.ndarray, rows_out: np.ndarray):
    """For index arrays, whether each (i, j) contour pair passes the endpoint filters."""
    xs, ys = pts[:, 0], pts[:, 1]
    dx = np.abs(xs[:, None] - xs[None, :])
    dy = ys[:, None] - ys[None, :]
    ok = dx >= min_length(geom, cfg)
    ok &= line_angle_deg(np.maximum(dx, 1), dy) <= cfg.theta_max_deg + _ANGLE_EPS
    ok &= ~rows_out[ys][:, None] & ~rows_out[ys][None, :]
    return ok


def enumerate_endpoint_pairs(geom: VesselGeometry, cfg: ScanConfig) -> list[EndpointPair]:
    """Contour pairs usable as path endpoints, ordered by S then E contour index.

    S is the left endpoint. Pairs need ``dx >= min_length_frac * average_width``
    (and at least 1), a connecting line within ``theta_max_deg`` of
    horizontal, and both endpoints outside the exclusion bands.
    """
    pts = np.asarray(geom.contour, dtype=np.int64)
    ok = _admissible_matrix(geom, cfg, pts, excluded_rows(geom, cfg))
    xs = pts[:, 0]
    ok &= xs[:, None] < xs[None, :]  # row index is S, column index is E
    si, ei = np.nonzero(ok)
    contour = geom.contour
    return [EndpointPair(contour[i], contour[j], int(i), int(j)) for i, j in zip(si, ei)]


def admissible_ends(geom: VesselGeometry, s: tuple[int, int], cfg: ScanConfig) -> list[tuple[int, int]]:
    """Contour points that form a valid pair with left endpoint ``s``."""
    pts = np.asarray(geom.contour, dtype=np.int64)
    rows_out = excluded_rows(geom, cfg)
    dx = pts[:, 0] - s[0]
    ok = (dx >= min_length(geom, cfg)) & ~rows_out[pts[:, 1]] & (not rows_out[s[1]])
    ok &= line_angle_deg(np.maximum(dx, 1), pts[:, 1] - s[1]) <= cfg.theta_max_deg + _ANGLE_EPS
    return [geom.contour[i] for i in np.flatnonzero(ok)]


def _require_contour(geom: VesselGeometry, *pts) -> None:
    for p in pts:
        if not geom.on_contour(p):
            raise ValueError(f"endpoint {tuple(p)} is not on the vessel contour")


def _cone_ok(dx: np.ndarray, dy: np.ndarray, phi: float) -> np.ndarray:
    return (dx < _CONE_EXEMPT) | (line_angle_deg(np.maximum(dx, 1), dy) <= phi + _ANGLE_EPS)


def _base_legal(geom, cfg, xs, ys, rows_out):
    """Interior and outside the exclusion bands; coordinates already in range."""
    return geom.interior[ys, xs] & ~rows_out[ys]


def legal_points(
    geom: VesselGeometry,
    s: tuple[int, int],
    e: tuple[int, int],
    cfg: ScanConfig,
    xs,
    ys,
) -> np.ndarray:
    """Pair legality evaluated for arbitrary coordinate arrays."""
    cfg = _resolved(cfg, geom)
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    inside = (xs >= s[0]) & (xs <= e[0]) & (ys >= 0) & (ys < geom.height)
    out = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
    xs, ys = np.broadcast_arrays(xs, ys)
    xi, yi = xs[inside], ys[inside]
    rows_out = excluded_rows(geom, cfg)
    ok = _base_legal(geom, cfg, xi, yi, rows_out)
    dx1 = xi - s[0]
    dx2 = e[0] - xi
    ok &= _cone_ok(dx1, yi - s[1], cfg.phi_max_deg)
    ok &= _cone_ok(dx2, yi - e[1], cfg.phi_max_deg)
    thr = np.minimum(np.minimum(dx1 / 4.0, dx2 / 4.0), cfg.flat_d)
    ok &= (yi - geom.y_top[xi] > thr) & (geom.y_bottom[xi] - yi > thr)
    ok |= ((xi == s[0]) & (yi == s[1])) | ((xi == e[0]) & (yi == e[1]))
    out[inside] = ok
    return out


def pair_legal_region(geom: VesselGeometry, s: tuple[int, int], e: tuple[int, int], cfg: ScanConfig) -> np.ndarray:
    """Pixels a path from ``s`` to ``e`` may occupy.

    A pixel in columns ``s.x..e.x`` is legal when it is interior, outside
    the exclusion bands, inside both endpoint cones (points less than two
    columns from an endpoint are exempt from that endpoint's cone), and its
    vertical distances to the column's top and bottom both exceed
    ``min(dx1/4, dx2/4, flat_d)``. ``s`` and ``e`` are always legal.
    """
    _require_contour(geom, s, e)
    if e[0] < s[0]:
        raise ValueError("S must not lie right of E")
    region = np.zeros((geom.height, geom.width), dtype=bool)
    xs = np.arange(s[0], e[0] + 1)
    ys = np.arange(geom.height)
    region[:, s[0] : e[0] + 1] = legal_points(geom, s, e, cfg, xs[None, :], ys[:, None])
    return region


def source_legal_region(
    geom: VesselGeometry,
    s: tuple[int, int],
    cfg: ScanConfig,
    ends: Sequence[tuple[int, int]] | None = None,
) -> np.ndarray:
    """Union bound of :func:`pair_legal_region` over every admissible E for ``s``.

    Only S-dependent filters are applied in full. The flat-path threshold
    uses the nearest admissible end column at or right of each pixel, the
    smallest value any pair could impose, so the region contains every
    pair region starting at ``s``.
    """
    _require_contour(geom, s)
    cfg = _resolved(cfg, geom)
    if ends is None:
        ends = admissible_ends(geom, s, cfg)
    region = np.zeros((geom.height, geom.width), dtype=bool)
    region[s[1], s[0]] = True
    if not ends:
        return region
    end_cols = np.unique(np.array([p[0] for p in ends], dtype=np.int64))
    x_hi = int(end_cols[-1])
    xs = np.arange(s[0], x_hi + 1)
    # Nearest end column >= x for each x.
    next_end = end_cols[np.searchsorted(end_cols, xs)]
    ys = np.arange(geom.height)[:, None]
    X = xs[None, :]
    rows_out = excluded_rows(geom, cfg)
    ok = geom.interior[ys, X] & ~rows_out[ys]
    dx1 = X - s[0]
    ok &= _cone_ok(dx1, ys - s[1], cfg.phi_max_deg)
    thr = np.minimum(np.minimum(dx1 / 4.0, (next_end - xs)[None, :] / 4.0), cfg.flat_d)
    ok &= (ys - geom.y_top[X] > thr) & (geom.y_bottom[X] - ys > thr)
    region[:, s[0] : x_hi + 1] = ok
    for x, y in ends:
        region[y, x] = True
    region[s[1], s[0]] = True
    return region
