import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vessel_trace.vessel import from_interior_mask  # noqa: E402


def rect_mask(w, h, x0, y0, x1, y1):
    m = np.zeros((h, w), dtype=bool)
    m[y0 : y1 + 1, x0 : x1 + 1] = True
    return m


@pytest.fixture
def square_geom():
    """6x6 square at (2..7, 2..7) in a 10x10 image."""
    return from_interior_mask(rect_mask(10, 10, 2, 2, 7, 7))


@pytest.fixture
def tall_geom():
    return from_interior_mask(rect_mask(40, 60, 5, 5, 34, 54))
