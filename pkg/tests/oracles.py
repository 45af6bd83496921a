"""Slow, straightforward reference implementations used only by the tests.

Each one works from the raw definitions with plain loops and shares no
code with the package.
"""

from __future__ import annotations

import math

import numpy as np


def path_count(region: np.ndarray, s, e, v_max: int) -> int:
    """Number of legal move sequences from ``s`` to ``e`` (DP over run states)."""
    h, w = region.shape
    # ways[(y, run, dir)] for the current column, dir in {0, -1, 1}
    total = 0
    col = {(s[1], 0, 0): 1}
    x = s[0]
    while True:
        # close the column under vertical moves (runs grow one step at a time)
        frontier = dict(col)
        allc = dict(col)
        while frontier:
            nxt = {}
            for (y, run, d), n in frontier.items():
                if run >= v_max:
                    continue
                for dy in ((-1, 1) if d == 0 else (d,)):
                    ny = y + dy
                    if 0 <= ny < h and region[ny, x]:
                        key = (ny, run + 1, dy)
                        nxt[key] = nxt.get(key, 0) + n
            for k, n in nxt.items():
                allc[k] = allc.get(k, 0) + n
            frontier = nxt
        if x == e[0]:
            total = sum(n for (y, _, _), n in allc.items() if y == e[1])
            return total
        newc = {}
        for (y, _, _), n in allc.items():
            for dy in (-1, 0, 1):
                ny = y + dy
                if 0 <= ny < h and region[ny, x + 1]:
                    newc[(ny, 0, 0)] = newc.get((ny, 0, 0), 0) + n
        col = newc
        x += 1
        if not col:
            return 0


def random_instance(rng, max_paths=20_000):
    """Small random cost field, penalty mask, region and endpoints with few enough paths to enumerate."""
    while True:
        h, w = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        region = rng.random((h, w)) < rng.uniform(0.5, 1.0)
        cost = rng.random((h, w)) * rng.choice([1.0, 5.0])
        cost[rng.random((h, w)) < 0.15] = 0.0
        pen = rng.random((h, w)) < 0.2
        s = (0, int(rng.integers(h)))
        e = (int(rng.integers(0, w)), int(rng.integers(h)))
        region[s[1], s[0]] = region[e[1], e[0]] = True
        v_max = int(rng.integers(0, 4))
        if path_count(region, s, e, v_max) <= max_paths:
            return cost, pen, region, s, e, v_max


def enumerate_best(eff: np.ndarray, region: np.ndarray, s, e, v_max: int, v_pen: float):
    """Minimum raw cost over every legal move sequence, by depth-first enumeration."""
    h, w = region.shape
    best = [math.inf]
    count = [0]

    def walk(x, y, run, d, cost):
        if (x, y) == tuple(e):
            count[0] += 1
            best[0] = min(best[0], cost)
            return  # no legal continuation can come back to E
        if x + 1 < w and x + 1 <= e[0]:
            for dy in (-1, 0, 1):
                ny = y + dy
                if 0 <= ny < h and region[ny, x + 1]:
                    walk(x + 1, ny, 0, 0, cost + eff[ny, x + 1])
        if run < v_max:
            for dy in ((-1, 1) if d == 0 else (d,)):
                ny = y + dy
                if 0 <= ny < h and region[ny, x]:
                    walk(x, ny, run + 1, dy, cost + eff[ny, x] * v_pen)

    walk(s[0], s[1], 0, 0, eff[s[1], s[0]])
    return best[0], count[0]


def contour_set(mask: np.ndarray) -> set:
    h, w = mask.shape
    out = set()
    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    yy, xx = y + dy, x + dx
                    if not (0 <= yy < h and 0 <= xx < w) or not mask[yy, xx]:
                        out.add((x, y))
    return out


def chebyshev_to(points: set, shape) -> np.ndarray:
    h, w = shape
    pts = np.array(sorted(points))
    ys, xs = np.mgrid[0:h, 0:w]
    d = np.full((h, w), np.iinfo(np.int64).max, dtype=np.int64)
    for px, py in pts:
        d = np.minimum(d, np.maximum(np.abs(xs - px), np.abs(ys - py)))
    return d


def legal_region(mask: np.ndarray, s, e, *, phi, top_frac, bottom_frac, flat_d) -> np.ndarray:
    """Pair legality pixel by pixel, straight from the rule list."""
    h, w = mask.shape
    rows = [y for y in range(h) if mask[y].any()]
    top, bottom = rows[0], rows[-1]
    extent = bottom - top + 1
    out = np.zeros((h, w), dtype=bool)
    for x in range(s[0], e[0] + 1):
        col = [y for y in range(h) if mask[y, x]]
        for y in range(h):
            if (x, y) in (tuple(s), tuple(e)):
                out[y, x] = True
                continue
            if not mask[y, x]:
                continue
            if y - top < top_frac * extent or bottom - y < bottom_frac * extent:
                continue
            dx1, dx2 = x - s[0], e[0] - x
            if dx1 >= 2 and math.degrees(math.atan(abs(y - s[1]) / dx1)) > phi + 1e-9:
                continue
            if dx2 >= 2 and math.degrees(math.atan(abs(y - e[1]) / dx2)) > phi + 1e-9:
                continue
            thr = min(dx1 / 4, dx2 / 4, flat_d)
            if not (y - col[0] > thr and col[-1] - y > thr):
                continue
            out[y, x] = True
    return out


def edge_density_loop(edges: np.ndarray, rows: int, cols: int, offset: int) -> np.ndarray:
    h, w = edges.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            vals = []
            for centre in (y - offset, y + offset):
                for yy in range(centre - rows // 2, centre - rows // 2 + rows):
                    for xx in range(x - cols // 2, x - cols // 2 + cols):
                        if 0 <= yy < h and 0 <= xx < w:
                            vals.append(float(edges[yy, xx]))
            out[y, x] = sum(vals) / len(vals) if vals else 0.0
    return out
