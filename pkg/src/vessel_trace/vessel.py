"""Vessel geometry derived from an interior mask or an ordered contour loop."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)
MIN_AREA = 9


class GeometryError(ValueError):
    """Invalid vessel mask or contour."""


@dataclass(frozen=True, eq=False)
class VesselGeometry:
    """Contour, interior and the per-column measurements used by the scan.

    Arrays are indexed ``[y, x]``. ``y_top``/``y_bottom`` hold ``-1`` for
    columns the vessel does not cover.
    """

    contour: tuple[tuple[int, int], ...]
    interior: np.ndarray
    contour_mask: np.ndarray
    y_top: np.ndarray
    y_bottom: np.ndarray
    average_width: float
    top_row: int
    bottom_row: int
    dist_to_boundary: np.ndarray

    @property
    def width(self) -> int:
        return self.interior.shape[1]

    @property
    def height(self) -> int:
        return self.interior.shape[0]

    @property
    def vertical_extent(self) -> int:
        return self.bottom_row - self.top_row + 1

    @property
    def column_bounds(self) -> dict[int, tuple[int, int]]:
        cols = np.flatnonzero(self.y_top >= 0)
        return {int(x): (int(self.y_top[x]), int(self.y_bottom[x])) for x in cols}

    def on_contour(self, p: tuple[int, int]) -> bool:
        x, y = p
        return 0 <= x < self.width and 0 <= y < self.height and bool(self.contour_mask[y, x])


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


# East, south, west, north in (dx, dy) with y pointing down.
_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def trace_contour(mask: np.ndarray) -> list[tuple[int, int]]:
    """Order the border of a 4-connected blob by square tracing.

    Returns every foreground pixel 8-adjacent to background once, in
    first-visit order. Consecutive entries are 8-adjacent unless the blob
    has a neck under 3 px wide, where the outline passes a pixel twice.
    """
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    order = np.lexsort((xs, ys))
    sx, sy = int(xs[order[0]]), int(ys[order[0]])

    def fg(x, y):
        return 0 <= x < w and 0 <= y < h and mask[y, x]

    seen: dict[tuple[int, int], None] = {(sx, sy): None}
    d = 3  # entered from the west heading east, then turn left (north)
    x, y = sx + _DIRS[d][0], sy + _DIRS[d][1]
    limit = 8 * mask.size + 16
    for _ in range(limit):
        if x == sx and y == sy and d == 0:
            break
        if fg(x, y):
            seen.setdefault((x, y), None)
            d = (d + 3) % 4
        else:
            d = (d + 1) % 4
        x, y = x + _DIRS[d][0], y + _DIRS[d][1]
    else:  # pragma: no cover - square tracing always closes on 4-connected blobs
        raise GeometryError("contour tracing did not close")

    # The walk cuts diagonally past concave corners; those corner pixels
    # touch the background only diagonally and are spliced back in here.
    walk = list(seen)
    border = contour_pixels(mask)
    out: list[tuple[int, int]] = []
    placed = set(walk)
    for i, p in enumerate(walk):
        out.append(p)
        q = walk[(i + 1) % len(walk)]
        if abs(q[0] - p[0]) == 1 and abs(q[1] - p[1]) == 1:
            for r in ((q[0], p[1]), (p[0], q[1])):
                if border[r[1], r[0]] and r not in placed:
                    out.append(r)
                    placed.add(r)
                    break
    return out


def contour_pixels(mask: np.ndarray) -> np.ndarray:
    """Foreground pixels with at least one background pixel among their 8 neighbors."""
    return mask & ndimage.binary_dilation(~mask, structure=_EIGHT, border_value=1)


def from_interior_mask(mask) -> VesselGeometry:
    """Build geometry from a binary interior mask (nonzero = inside).

    Holes are filled: only the outer outline bounds a vessel's contents.
    """
    mask = np.asarray(mask) != 0
    if mask.ndim != 2:
        raise GeometryError("mask must be 2-D")
    if not mask.any():
        raise GeometryError("empty mask")
    mask = ndimage.binary_fill_holes(mask, structure=_FOUR)
    _, n = ndimage.label(mask, structure=_FOUR)
    if n > 1:
        raise GeometryError("multiple components")
    if mask.sum() < MIN_AREA:
        raise GeometryError(f"vessel area below {MIN_AREA} pixels")
    if mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any():
        raise GeometryError("component touches the image border")

    contour_mask = contour_pixels(mask)
    contour = tuple(trace_contour(mask))

    cols = mask.any(axis=0)
    rows_idx = np.arange(mask.shape[0])[:, None]
    y_top = np.where(cols, np.where(mask, rows_idx, mask.shape[0]).min(axis=0), -1)
    y_bottom = np.where(cols, np.where(mask, rows_idx, -1).max(axis=0), -1)
    row_counts = mask.sum(axis=1)
    occupied = np.flatnonzero(row_counts)
    dist = ndimage.distance_transform_cdt(~contour_mask, metric="chessboard")

    return VesselGeometry(
        contour=contour,
        interior=_readonly(mask),
        contour_mask=_readonly(contour_mask),
        y_top=_readonly(y_top.astype(np.int64)),
        y_bottom=_readonly(y_bottom.astype(np.int64)),
        average_width=float(row_counts[occupied].mean()),
        top_row=int(occupied[0]),
        bottom_row=int(occupied[-1]),
        dist_to_boundary=_readonly(dist.astype(np.int64)),
    )


def from_contour_points(points: Sequence[Sequence[int]], dims: tuple[int, int]) -> VesselGeometry:
    """Build geometry from a closed, 8-connected loop of ``(x, y)`` pixels.

    ``dims`` is ``(width, height)``. The loop is closed implicitly (last
    point back to first) and must not visit a pixel twice.
    """
    w, h = dims
    pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    if len(pts) < 4:
        raise GeometryError("contour needs at least 4 points to enclose a region")
    if (pts[:, 0] < 0).any() or (pts[:, 0] >= w).any() or (pts[:, 1] < 0).any() or (pts[:, 1] >= h).any():
        raise GeometryError("contour point outside image")
    step = np.abs(np.diff(np.vstack([pts, pts[:1]]), axis=0)).max(axis=1)
    if (step > 1).any():
        i = int(np.argmax(step > 1))
        raise GeometryError(f"open loop: gap after point {i} {tuple(pts[i])}")
    if len({(int(x), int(y)) for x, y in pts}) != len(pts):
        raise GeometryError("self-crossing loop: repeated point")
    mask = np.zeros((h, w), dtype=bool)
    mask[pts[:, 1], pts[:, 0]] = True
    return from_interior_mask(ndimage.binary_fill_holes(mask, structure=_FOUR))


def load_contour_json(path: str | os.PathLike) -> list[tuple[int, int]]:
    with open(path) as fh:
        data = json.load(fh)
    try:
        return [(int(x), int(y)) for x, y in data]
    except (TypeError, ValueError) as exc:
        raise GeometryError("contour JSON must be an array of [x, y] integer pairs") from exc


def penalty_zone(geom: VesselGeometry, radius: float) -> np.ndarray:
    """Interior pixels within Chebyshev ``radius`` of the contour."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    return geom.interior & (geom.dist_to_boundary <= radius)


def excluded_band(geom: VesselGeometry, top_frac: float, bottom_frac: float) -> np.ndarray:
    """Interior rows close to the vessel's top or bottom (corks, valves, floors)."""
    if not (0.0 <= top_frac < 1.0 and 0.0 <= bottom_frac < 1.0):
        raise ValueError("band fractions must lie in [0, 1)")
    if top_frac + bottom_frac >= 1.0:
        raise ValueError("band fractions leave no legal rows")
    extent = geom.vertical_extent
    rows = np.arange(geom.height)
    band = ((rows - geom.top_row) < top_frac * extent) | ((geom.bottom_row - rows) < bottom_frac * extent)
    return geom.interior & band[:, None]
