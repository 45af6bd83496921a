"""Minimal-cost tracing of material boundaries inside vessel images."""

from .constraints import INDICATORS, EndpointPair, ScanConfig, enumerate_endpoint_pairs, pair_legal_region
from .cost import CostField, build_cost_field
from .edges import canny
from .harness import SyntheticSpec, generate_synthetic, grade_match, run_benchmark
from .imaging import GrayImage, load_image, render_overlay
from .search import BoundaryPath, ScanResult, best_path_pair, scan_fast, scan_simple, select_phases, trace
from .vessel import VesselGeometry, from_contour_points, from_interior_mask

__all__ = [
    "INDICATORS",
    "BoundaryPath",
    "CostField",
    "EndpointPair",
    "GrayImage",
    "ScanConfig",
    "ScanResult",
    "SyntheticSpec",
    "VesselGeometry",
    "best_path_pair",
    "build_cost_field",
    "canny",
    "enumerate_endpoint_pairs",
    "from_contour_points",
    "from_interior_mask",
    "generate_synthetic",
    "grade_match",
    "load_image",
    "pair_legal_region",
    "render_overlay",
    "run_benchmark",
    "scan_fast",
    "scan_simple",
    "select_phases",
    "trace",
]
