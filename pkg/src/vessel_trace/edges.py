"""Canny edge detection: Gaussian blur, Sobel gradient, NMS, hysteresis.

Edge maps are boolean arrays with the same shape as the source image.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .imaging import GrayImage

DEFAULT_SIGMA = 1.4
DEFAULT_LOW_RATIO = 0.1
DEFAULT_HIGH_RATIO = 0.3

_SOBEL_SMOOTH = np.array([1.0, 2.0, 1.0])
_SOBEL_DIFF = np.array([-1.0, 0.0, 1.0])
_EIGHT = np.ones((3, 3), dtype=bool)
# Gradient peaks below this are rounding noise on a flat image.
_FLAT_EPS = 1e-9


def _data(img) -> np.ndarray:
    return img.data if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian with radius ``ceil(3*sigma)``."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    radius = int(math.ceil(3.0 * sigma))
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (t / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    """Separable Gaussian smoothing with clamped (edge-replicated) borders."""
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(_data(img), k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return GrayImage(np.clip(out, 0.0, 1.0))


def gradient(img) -> tuple[np.ndarray, np.ndarray]:
    """Sobel gradient magnitude and direction (radians, ``atan2(gy, gx)``).

    ``y`` grows downward, so a ramp brightening toward the lower right has
    direction ``pi/4``.
    """
    data = _data(img)
    if data.ndim != 2 or min(data.shape) < 3:
        raise ValueError("image too small for a 3x3 Sobel gradient")
    gx = ndimage.correlate1d(data, _SOBEL_DIFF, axis=1, mode="nearest")
    gx = ndimage.correlate1d(gx, _SOBEL_SMOOTH, axis=0, mode="nearest")
    gy = ndimage.correlate1d(data, _SOBEL_DIFF, axis=0, mode="nearest")
    gy = ndimage.correlate1d(gy, _SOBEL_SMOOTH, axis=1, mode="nearest")
    return np.hypot(gx, gy), np.arctan2(gy, gx)


# Neighbor offsets (dy, dx) along the gradient for the four direction bins.
_BIN_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1))


def quantize_direction(direction: np.ndarray) -> np.ndarray:
    """Map angles to bins 0..3 for 0, 45, 90 and 135 degrees."""
    deg = np.rad2deg(direction) % 180.0
    return (np.floor((deg + 22.5) / 45.0).astype(np.int64)) % 4


def non_maximum_suppression(magnitude: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Thin ridges to one pixel across the gradient direction.

    A pixel survives if it is >= its backward neighbor and > its forward
    neighbor, so a plateau two pixels wide keeps exactly one of them.
    """
    h, w = magnitude.shape
    padded = np.pad(magnitude, 1, mode="constant")
    bins = quantize_direction(direction)
    keep = np.zeros((h, w), dtype=bool)
    for b, (dy, dx) in enumerate(_BIN_OFFSETS):
        fwd = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        bwd = padded[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
        sel = bins == b
        keep |= sel & (magnitude >= bwd) & (magnitude > fwd)
    return np.where(keep & (magnitude > 0), magnitude, 0.0)


def hysteresis(thin: np.ndarray, low: float, high: float) -> np.ndarray:
    """Keep weak pixels (>= low) that 8-connect to a strong pixel (>= high)."""
    weak = thin >= low
    weak &= thin > 0
    strong = weak & (thin >= high)
    if not strong.any():
        return np.zeros(thin.shape, dtype=bool)
    labels, n = ndimage.label(weak, structure=_EIGHT)
    seeded = np.zeros(n + 1, dtype=bool)
    seeded[np.unique(labels[strong])] = True
    seeded[0] = False
    return seeded[labels]


def canny(
    img,
    low: float | None = None,
    high: float | None = None,
    sigma: float = DEFAULT_SIGMA,
    *,
    low_ratio: float = DEFAULT_LOW_RATIO,
    high_ratio: float = DEFAULT_HIGH_RATIO,
) -> np.ndarray:
    """Binary Canny edge map.

    Explicit ``low``/``high`` are absolute magnitudes. When omitted they
    default to ``low_ratio``/``high_ratio`` times the maximum gradient
    magnitude of the blurred image.
    """
    if low is not None and low < 0 or high is not None and high < 0:
        raise ValueError("thresholds must be nonnegative")
    if low is not None and high is not None and not low < high:
        raise ValueError("low threshold must be below high threshold")
    blurred = gaussian_blur(img, sigma)
    mag, ang = gradient(blurred)
    peak = float(mag.max())
    if peak <= _FLAT_EPS:
        return np.zeros(mag.shape, dtype=bool)
    low = low_ratio * peak if low is None else low
    high = high_ratio * peak if high is None else high
    if not low < high:
        raise ValueError("low threshold must be below high threshold")
    return hysteresis(non_maximum_suppression(mag, ang), low, high)
