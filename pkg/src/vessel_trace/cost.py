"""Per-pixel boundary-indicator costs and move weights.

Lower cost means stronger evidence that a pixel lies on the material
boundary. All fields are clamped below at zero so Dijkstra's
nonnegativity precondition always holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .constraints import ScanConfig
from .edges import canny
from .imaging import GrayImage
from .vessel import VesselGeometry, penalty_zone

# Floor on I(P) for the relative indicator.
RELATIVE_EPS = 0.05

MOVES = {
    (1, -1): "diagonal",
    (1, 0): "horizontal",
    (1, 1): "diagonal",
    (0, -1): "vertical",
    (0, 1): "vertical",
}


@dataclass(frozen=True, eq=False)
class CostField:
    """Per-pixel cost plus the boundary-proximity penalty mask."""

    cost: np.ndarray
    penalty_mask: np.ndarray
    indicator: str

    def __post_init__(self):
        cost = np.array(self.cost, dtype=np.float64)
        if cost.ndim != 2:
            raise ValueError("cost field must be 2-D")
        if not np.all(np.isfinite(cost)) or (cost < 0).any():
            raise ValueError("costs must be finite and nonnegative")
        mask = np.zeros(cost.shape, bool) if self.penalty_mask is None else np.array(self.penalty_mask, dtype=bool)
        if mask.shape != cost.shape:
            raise ValueError("penalty mask shape differs from cost field")
        cost.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "penalty_mask", mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cost.shape

    def with_penalty(self, mask: np.ndarray) -> "CostField":
        return CostField(self.cost, mask, self.indicator)

    def effective(self, penalty_factor: float) -> np.ndarray:
        """Pixel cost with the penalty-zone multiplier applied."""
        return np.where(self.penalty_mask, self.cost * penalty_factor, self.cost)


def _data(img) -> np.ndarray:
    return img.data if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)


def intensity_change(img, d: int) -> np.ndarray:
    """``|I(x, y-d) - I(x, y+d)|`` with rows clamped at the image border."""
    data = _data(img)
    h = data.shape[0]
    rows = np.arange(h)
    above = data[np.clip(rows - d, 0, h - 1)]
    below = data[np.clip(rows + d, 0, h - 1)]
    return np.abs(above - below)


def intensity_cost_field(img, cfg: ScanConfig, penalty_mask=None) -> CostField:
    cost = cfg.cost_c - intensity_change(img, cfg.normal_offset)
    return CostField(np.maximum(cost, 0.0), penalty_mask, "intensity")


def relative_intensity_cost_field(img, cfg: ScanConfig, penalty_mask=None) -> CostField:
    """Cost ``C - min(1, dI / max(I, eps))``; the ratio is capped at 1."""
    data = _data(img)
    ratio = intensity_change(data, cfg.normal_offset) / np.maximum(data, RELATIVE_EPS)
    cost = cfg.cost_c - np.minimum(1.0, ratio)
    return CostField(np.maximum(cost, 0.0), penalty_mask, "relative-intensity")


def edge_cost_field(edges: np.ndarray, cfg: ScanConfig, penalty_mask=None) -> CostField:
    e = np.asarray(edges, dtype=np.float64)
    return CostField(np.maximum(cfg.cost_c - e, 0.0), penalty_mask, "edge")


def edge_density(edges: np.ndarray, rows: int = 3, cols: int = 5, offset: int = 3) -> np.ndarray:
    """Mean edge value in two ``rows x cols`` strips centred ``offset`` rows above and below.

    Strips are clipped at the border and the mean is taken over the
    in-bounds pixels of both strips together.
    """
    e = np.asarray(edges, dtype=np.float64)
    ones = np.ones_like(e)
    kernel = np.zeros((2 * (offset + rows // 2) + 1, cols))
    c = offset + rows // 2
    r0 = rows // 2
    kernel[c - offset - r0 : c - offset - r0 + rows] = 1.0
    kernel[c + offset - r0 : c + offset - r0 + rows] = 1.0
    total = ndimage.correlate(e, kernel, mode="constant", cval=0.0)
    count = ndimage.correlate(ones, kernel, mode="constant", cval=0.0)
    return np.divide(total, count, out=np.zeros_like(total), where=count > 0)


def edge_density_cost_field(edges: np.ndarray, cfg: ScanConfig, penalty_mask=None) -> CostField:
    """Cost ``C - (Edge(P) - density(P))``; lies in ``[0, C + 1]``."""
    e = np.asarray(edges, dtype=np.float64)
    density = edge_density(e, cfg.density_rows, cfg.density_cols, cfg.density_offset)
    cost = cfg.cost_c - (e - density)
    return CostField(np.maximum(cost, 0.0), penalty_mask, "edge-density")


def compute_edges(img, cfg: ScanConfig) -> np.ndarray:
    return canny(img, sigma=cfg.canny_sigma, low_ratio=cfg.canny_low_ratio, high_ratio=cfg.canny_high_ratio)


def build_cost_field(img, geom: VesselGeometry, cfg: ScanConfig, edges: np.ndarray | None = None) -> CostField:
    """Cost field for ``cfg.indicator`` with the vessel's penalty zone attached."""
    cfg = cfg if cfg.resolved else cfg.resolve(geom)
    zone = penalty_zone(geom, cfg.penalty_radius)
    if cfg.indicator == "intensity":
        return intensity_cost_field(img, cfg, zone)
    if cfg.indicator == "relative-intensity":
        return relative_intensity_cost_field(img, cfg, zone)
    if edges is None:
        edges = compute_edges(img, cfg)
    if cfg.indicator == "edge":
        return edge_cost_field(edges, cfg, zone)
    return edge_density_cost_field(edges, cfg, zone)


def move_kind(frm: tuple[int, int], to: tuple[int, int]) -> str:
    kind = MOVES.get((to[0] - frm[0], to[1] - frm[1]))
    if kind is None:
        raise ValueError(f"{tuple(frm)} -> {tuple(to)} is not a legal move")
    return kind


def move_cost(
    field: CostField,
    frm: tuple[int, int],
    to: tuple[int, int],
    cfg: ScanConfig,
    kind: str | None = None,
) -> float:
    """Weight of stepping onto ``to``: its cost, tripled in the penalty zone
    by default and raised 20% for vertical moves; the factors compose."""
    actual = move_kind(frm, to)
    if kind is not None and kind != actual:
        raise ValueError(f"move {tuple(frm)} -> {tuple(to)} is {actual}, not {kind}")
    x, y = to
    w = float(field.cost[y, x])
    if field.penalty_mask[y, x]:
        w *= cfg.penalty_factor
    if actual == "vertical":
        w *= cfg.vertical_penalty
    return w


def start_cost(field: CostField, s: tuple[int, int], cfg: ScanConfig) -> float:
    x, y = s
    w = float(field.cost[y, x])
    return w * cfg.penalty_factor if field.penalty_mask[y, x] else w
