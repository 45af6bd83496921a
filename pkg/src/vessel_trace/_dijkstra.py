"""Compiled Dijkstra sweep over run-augmented pixel states.

State layout inside a ``(h, w)`` box: ``index = (x * h + y) * ns + code``
with ``ns = 2 * v_max + 1``. ``code`` 0 means "not in a vertical run";
``code = 2 * (run - 1) + 1`` is an upward run of length ``run`` and the
next code is the matching downward run. Heap entries are ``(cost, index)``
tuples, so equal costs pop in ``(x, y, run, direction)`` order. On an
exact cost tie a horizontal move replaces the recorded predecessor of a
not-yet-settled state, which keeps flat stretches straight.
"""

from __future__ import annotations

import heapq

import numpy as np
from numba import njit

UNREACHED = -1


@njit(cache=True, nogil=True)
def sweep(eff, region, sx, sy, tx, ty, v_max, v_pen):
    """Run Dijkstra from ``(sx, sy)``; stop early once ``(tx, ty)`` pops.

    Pass ``tx = -1`` for a full single-source sweep. Returns the state
    distance array, the predecessor array and the first popped target
    state (or -1).
    """
    h, w = eff.shape
    ns = 2 * v_max + 1
    n = w * h * ns
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    start = (sx * h + sy) * ns
    dist[start] = eff[sy, sx]
    heap = [(dist[start], np.int64(start))]
    found = np.int64(-1)
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        code = u % ns
        pix = u // ns
        y = pix % h
        x = pix // h
        if x == tx and y == ty:
            found = u
            break
        if x + 1 < w:
            base = (x + 1) * h
            for dy in range(-1, 2):
                ny = y + dy
                if ny < 0 or ny >= h or not region[ny, x + 1]:
                    continue
                v = (base + ny) * ns
                nd = d + eff[ny, x + 1]
                if nd < dist[v]:
                    dist[v] = nd
                    pred[v] = u
                    heapq.heappush(heap, (nd, v))
                elif dy == 0 and nd == dist[v] and not done[v]:
                    # Exact tie: prefer the horizontal predecessor.
                    pred[v] = u
        if v_max > 0:
            if code == 0:
                run = 0
                up = True
                down = True
            else:
                run = (code - 1) // 2 + 1
                up = (code - 1) % 2 == 0
                down = not up
            if run < v_max:
                for k in range(2):
                    if k == 0:
                        if not up:
                            continue
                        ny = y - 1
                    else:
                        if not down:
                            continue
                        ny = y + 1
                    if ny < 0 or ny >= h or not region[ny, x]:
                        continue
                    v = (x * h + ny) * ns + 2 * run + 1 + k
                    nd = d + eff[ny, x] * v_pen
                    if nd < dist[v]:
                        dist[v] = nd
                        pred[v] = u
                        heapq.heappush(heap, (nd, v))
    return dist, pred, found


@njit(cache=True, nogil=True)
def backtrack(pred, state, h, ns):
    """Pixel coordinates ``(x, y)`` from the source to ``state``."""
    count = 0
    s = state
    while s != -1:
        count += 1
        s = pred[s]
    out = np.empty((count, 2), dtype=np.int64)
    s = state
    i = count - 1
    while s != -1:
        pix = s // ns
        out[i, 0] = pix // h
        out[i, 1] = pix % h
        i -= 1
        s = pred[s]
    return out
