import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from vessel_trace.edges import (
    canny,
    gaussian_blur,
    gaussian_kernel,
    gradient,
    hysteresis,
    non_maximum_suppression,
    quantize_direction,
)
from vessel_trace.harness import generate_synthetic, random_suite
from vessel_trace.imaging import GrayImage


def step_image(h=20, w=20, col=10):
    d = np.zeros((h, w))
    d[:, col:] = 1.0
    return GrayImage(d)


def test_blur_uniform():
    img = GrayImage(np.full((9, 11), 0.37))
    assert np.abs(gaussian_blur(img, 1.4).data - 0.37).max() < 1e-9


def test_blur_single_pixel_matches_kernel_centre():
    d = np.zeros((15, 15))
    d[7, 7] = 1.0
    out = gaussian_blur(GrayImage(d), 1.0).data
    # Independent 1-D weights, radius ceil(3 sigma) = 3.
    k = np.array([math.exp(-(i * i) / 2.0) for i in range(-3, 4)])
    centre = (1.0 / k.sum()) ** 2
    assert out[7, 7] == pytest.approx(centre, abs=1e-12)


def test_kernel_radius_and_normalisation():
    k = gaussian_kernel(1.4)
    assert len(k) == 2 * math.ceil(3 * 1.4) + 1
    assert k.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_blur_rejects_bad_sigma(sigma):
    with pytest.raises(ValueError):
        gaussian_blur(GrayImage(np.zeros((5, 5))), sigma)


def test_gradient_uniform_and_small():
    mag, _ = gradient(GrayImage(np.full((5, 5), 0.4)))
    assert np.all(mag == 0)
    with pytest.raises(ValueError):
        gradient(GrayImage(np.zeros((2, 5))))


def test_gradient_vertical_step():
    mag, direction = gradient(step_image())
    interior = mag[2:-2]
    # Sobel on a unit step peaks at 4 on both columns touching the step.
    assert interior[:, 9].min() == pytest.approx(4.0)
    assert interior[:, 10].min() == pytest.approx(4.0)
    assert np.abs(np.sin(direction[2:-2, 9:11])).max() < 1e-12


def test_gradient_diagonal_ramp():
    ys, xs = np.mgrid[0:12, 0:12]
    img = GrayImage((xs + ys) / 22.0)
    _, direction = gradient(img)
    assert np.allclose(direction[1:-1, 1:-1], math.pi / 4)


def test_quantize_bins():
    ang = np.radians([0, 22, 23, 90, 134, 158, 180, -45, -90])
    assert quantize_direction(ang).tolist() == [0, 0, 1, 2, 3, 0, 0, 3, 2]


def test_canny_uniform_empty():
    assert not canny(GrayImage(np.full((10, 10), 0.5))).any()


def test_canny_step_single_line():
    e = canny(step_image(24, 24, 12))
    rows = e[3:-3]
    assert np.all(rows.sum(axis=1) == 1)
    cols = np.argmax(rows, axis=1)
    assert np.all(np.abs(cols + 0.5 - 12) <= 1)


def test_canny_high_above_max_is_empty():
    mag, _ = gradient(gaussian_blur(step_image(), 1.4))
    assert not canny(step_image(), low=0.1, high=mag.max() * 1.01).any()


def test_canny_threshold_errors():
    img = step_image()
    with pytest.raises(ValueError):
        canny(img, low=0.5, high=0.5)
    with pytest.raises(ValueError):
        canny(img, low=-0.1, high=0.5)


def test_canny_is_binary_and_shape_preserving():
    rng = np.random.default_rng(2)
    img = GrayImage(rng.random((13, 17)))
    e = canny(img)
    assert e.shape == img.shape and e.dtype == bool


def _agreement(a, b):
    near = ndimage.binary_dilation(b, np.ones((3, 3), bool))
    return (a & near).sum() / max(a.sum(), 1)


@pytest.mark.parametrize("noise", [0.0, 0.03])
def test_canny_matches_reference_detector(noise):
    skfeature = pytest.importorskip("skimage.feature")
    for spec in random_suite(4, 5, noise_sigma=noise):
        img, _, _ = generate_synthetic(spec)
        mine = canny(img)
        mag, _ = gradient(gaussian_blur(img, 1.4))
        ref = skfeature.canny(
            img.data, sigma=1.4, low_threshold=0.1 * mag.max(), high_threshold=0.3 * mag.max(), mode="nearest"
        )
        floor = 0.999 if noise == 0 else 0.9
        assert _agreement(mine, ref) >= floor
        assert _agreement(ref, mine) >= floor


def test_nms_thinness():
    rng = np.random.default_rng(3)
    img = gaussian_blur(GrayImage(rng.random((20, 20))), 1.0)
    mag, direction = gradient(img)
    thin = non_maximum_suppression(mag, direction)
    bins = quantize_direction(direction)
    offs = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    for y, x in zip(*np.nonzero(thin)):
        dy, dx = offs[int(bins[y, x])]
        for sgn in (-1, 1):
            yy, xx = y + sgn * dy, x + sgn * dx
            if 0 <= yy < 20 and 0 <= xx < 20:
                assert mag[yy, xx] <= mag[y, x] + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_hysteresis_monotone_in_low(seed, a, b):
    rng = np.random.default_rng(seed)
    thin = rng.random((12, 12)) * (rng.random((12, 12)) < 0.5)
    lo1, lo2 = sorted((a, b))
    high = 0.6
    e1 = hysteresis(thin, lo1, high)
    e2 = hysteresis(thin, lo2, high)
    assert not (e2 & ~e1).any()
