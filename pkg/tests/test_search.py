import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import rect_mask
from vessel_trace.constraints import ScanConfig, enumerate_endpoint_pairs, pair_legal_region
from vessel_trace.cost import CostField, build_cost_field
from vessel_trace.harness import generate_synthetic, grade_match, random_suite, SyntheticSpec
from vessel_trace.imaging import GrayImage
from vessel_trace.search import (
    BoundaryPath,
    best_path_pair,
    path_violations,
    scan_fast,
    scan_simple,
    select_phases,
    single_source,
    trace,
)
from vessel_trace.vessel import from_interior_mask

CFG = ScanConfig()


def field(cost, mask=None):
    return CostField(np.asarray(cost, float), mask, "edge")


def test_uniform_straight_path():
    p = best_path_pair(field(np.ones((5, 5))), np.ones((5, 5), bool), (0, 2), (4, 2), CFG)
    assert p.points == ((0, 2), (1, 2), (2, 2), (3, 2), (4, 2))
    assert p.raw_cost == 5.0 and p.normalized_cost == 1.25


def test_cheap_row_followed():
    c = np.ones((5, 7))
    c[2] = 0.1
    p = best_path_pair(field(c), np.ones((5, 7), bool), (0, 2), (6, 2), CFG)
    assert all(y == 2 for _, y in p.points)
    assert p.raw_cost == pytest.approx(0.7)


def test_unreachable_and_bad_start():
    reg = np.ones((5, 5), bool)
    reg[:, 2] = False
    assert best_path_pair(field(np.ones((5, 5))), reg, (0, 2), (4, 2), CFG) is None
    reg = np.ones((5, 5), bool)
    reg[2, 4] = False
    assert best_path_pair(field(np.ones((5, 5))), reg, (0, 2), (4, 2), CFG) is None
    with pytest.raises(ValueError):
        best_path_pair(field(np.ones((5, 5))), ~np.eye(5, dtype=bool), (0, 0), (4, 2), CFG)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_matches_exhaustive_enumeration(seed):
    rng = np.random.default_rng(seed)
    cost, pen, region, s, e, v_max = oracles.random_instance(rng)
    cfg = ScanConfig(v_max=v_max)
    f = CostField(cost, pen, "edge")
    p = best_path_pair(f, region, s, e, cfg)
    best, n = oracles.enumerate_best(f.effective(cfg.penalty_factor), region, s, e, v_max, cfg.vertical_penalty)
    if n == 0:
        assert p is None
        return
    assert abs(p.raw_cost - best) <= 1e-9
    # the returned path is itself legal and costs what it claims
    eff = f.effective(cfg.penalty_factor)
    pts = np.array(p.points)
    steps = np.diff(pts, axis=0)
    w = eff[pts[:, 1], pts[:, 0]].copy()
    w[1:][steps[:, 0] == 0] *= cfg.vertical_penalty
    assert w.sum() == pytest.approx(p.raw_cost, abs=1e-9)
    assert region[pts[:, 1], pts[:, 0]].all()


def test_single_source_examples():
    rng = np.random.default_rng(4)
    cost = rng.random((6, 7))
    pen = rng.random((6, 7)) < 0.3
    f = CostField(cost, pen, "edge")
    region = rng.random((6, 7)) < 0.85
    s = (2, 3)
    region[3, 2] = True
    sw = single_source(f, region, s, CFG)
    eff = f.effective(CFG.penalty_factor)
    assert sw.cost(s) == eff[3, 2]
    assert np.all(np.isinf(sw.cost_matrix[:, :2]))
    for x in range(2, 7):
        for y in range(6):
            if not region[y, x]:
                continue
            p = best_path_pair(f, region, s, (x, y), CFG)
            c = sw.cost((x, y))
            if p is None:
                assert math.isinf(c)
            else:
                assert c == p.raw_cost
                assert sw.path_to((x, y)).raw_cost == c


def test_scaling_invariance():
    rng = np.random.default_rng(5)
    cost = rng.random((7, 8))
    region = np.ones((7, 8), bool)
    p1 = best_path_pair(field(cost), region, (0, 3), (7, 2), CFG)
    p2 = best_path_pair(field(cost * 4.0), region, (0, 3), (7, 2), CFG)
    assert p2.points == p1.points
    assert p2.raw_cost == pytest.approx(4 * p1.raw_cost)


def test_normalization_extension():
    p = BoundaryPath.from_points([(0, 0), (1, 0), (2, 1), (3, 1)], 1.8)
    ext = BoundaryPath.from_points(list(p.points) + [(4, 1), (5, 1)], 1.8 + 2 * p.normalized_cost)
    assert ext.normalized_cost == pytest.approx(p.normalized_cost)


def test_steepest_slopes():
    for v, expected in ((0, 45.0), (1, 63.4), (2, 71.6), (3, 76.0)):
        h, dx = 120, 20
        sw = single_source(field(np.ones((h, dx + 1))), np.ones((h, dx + 1), bool), (0, h - 1), ScanConfig(v_max=v))
        reach = [int(np.flatnonzero(np.isfinite(sw.cost_matrix[:, x]))[0]) for x in (10, dx)]
        assert math.degrees(math.atan2(reach[0] - reach[1], dx - 10)) == pytest.approx(expected, abs=0.05)


def test_select_phases_examples():
    a = BoundaryPath.from_points([(x, 10) for x in range(20)], 19 * 0.5)
    assert select_phases([a], CFG) == [a]
    dup = BoundaryPath.from_points([(x, 11) for x in range(20)], 19 * 0.52)
    far = BoundaryPath.from_points([(x, 30) for x in range(20)], 19 * 0.54)
    apart = BoundaryPath.from_points([(x, 11) for x in range(30, 40)], 9 * 0.54)
    costly = BoundaryPath.from_points([(x, 50) for x in range(20)], 19 * 0.6)
    out = select_phases([a, dup, far, apart, costly], CFG)
    assert out == [a, far, apart]


def one_pair_geometry():
    g = from_interior_mask(rect_mask(16, 16, 2, 2, 12, 12))
    cfg = ScanConfig(top_frac=0.45, bottom_frac=0.45)
    return g, cfg


def test_single_pair_fast_equals_pair_search():
    g, cfg = one_pair_geometry()
    pairs = enumerate_endpoint_pairs(g, cfg.resolve(g))
    assert [(p.s, p.e) for p in pairs] == [((2, 7), (12, 7))]
    rng = np.random.default_rng(6)
    img = GrayImage(rng.random((16, 16)))
    f = build_cost_field(img, g, cfg.resolve(g))
    fast = scan_fast(img, g, f, cfg)
    ref = best_path_pair(f, pair_legal_region(g, (2, 7), (12, 7), cfg.resolve(g)), (2, 7), (12, 7), cfg.resolve(g))
    assert fast.best_path == ref


def test_no_pairs_gives_empty_result():
    g = from_interior_mask(rect_mask(16, 16, 2, 2, 12, 12))
    img = GrayImage(np.full((16, 16), 0.5))
    cfg = ScanConfig(min_length_frac=0.99, theta_max_deg=1.0, top_frac=0.45, bottom_frac=0.5)
    for scan in (scan_fast, scan_simple):
        r = scan(img, g, build_cost_field(img, g, cfg.resolve(g)), cfg)
        assert r.best_path is None and r.phases == []


def test_scan_on_synthetic():
    spec = SyntheticSpec(width=48, height=48, vessel_width=32, vessel_height=40, level=0.6)
    img, mask, gt = generate_synthetic(spec)
    g = from_interior_mask(mask)
    a = trace(img, g, fast=True)
    b = trace(img, g, fast=False, threads=2)
    assert grade_match(a.best_path, gt).level == "Full"
    assert a.best_path.normalized_cost == pytest.approx(b.best_path.normalized_cost, abs=1e-9)
    assert b.pairs_recomputed == 0
    cfg = CFG.resolve(g)
    for p in a.phases + b.phases:
        assert path_violations(p, g, cfg, build_cost_field(img, g, cfg)) == []


def test_fast_recomputes_when_relaxed_path_strays():
    # Tapered vessels put cheap wall steps inside the S-only region.
    hits = 0
    for spec in random_suite(8, 11, size=48, silhouettes=("trapezoid",)):
        img, mask, _ = generate_synthetic(spec)
        g = from_interior_mask(mask)
        cfg = CFG.resolve(g)
        f = build_cost_field(img, g, cfg)
        a, b = scan_fast(img, g, f, cfg), scan_simple(img, g, f, cfg)
        assert abs(a.best_path.normalized_cost - b.best_path.normalized_cost) <= 1e-9
        assert path_violations(a.best_path, g, cfg, f) == []
        hits += a.pairs_recomputed >= 1
    assert hits >= 1


def test_thread_count_does_not_change_result():
    spec = random_suite(1, 21, size=48)[0]
    img, mask, _ = generate_synthetic(spec)
    g = from_interior_mask(mask)
    r1, r4 = trace(img, g, threads=1), trace(img, g, threads=4)
    assert r1.phases == r4.phases
    assert r1.pairs_recomputed == r4.pairs_recomputed


def test_path_violations_detects_problems(square_geom):
    cfg = CFG.resolve(square_geom)
    bad = BoundaryPath.from_points([(2, 4), (4, 4), (7, 4)], 1.0)
    assert any("illegal move" in v for v in path_violations(bad, square_geom, cfg))
    run = BoundaryPath.from_points([(2, 4), (3, 4), (3, 5), (3, 4), (4, 4), (5, 4), (6, 4), (7, 4)], 1.0)
    assert any("reverses" in v for v in path_violations(run, square_geom, cfg))
