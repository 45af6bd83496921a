"""Grayscale image container, PNG/PGM file IO and result overlays."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

# Rec.601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])

CONTOUR_COLOR = (0, 0, 255)
PATH_PALETTE = (
    (255, 0, 0),
    (0, 255, 0),
    (255, 255, 0),
    (255, 0, 255),
    (0, 255, 255),
    (255, 128, 0),
)


class ImageError(ValueError):
    """Raised for unreadable, unsupported or malformed image input."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major intensities in ``[0, 1]``; ``data[y, x]``."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2 or data.size == 0:
            raise ImageError("gray image must be a non-empty 2-D array")
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise ImageError("intensities must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB raster, ``data[y, x] = (r, g, b)``."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[2] != 3:
            raise ImageError("rgb image must have shape (height, width, 3)")
        object.__setattr__(self, "data", _frozen(data.astype(np.uint8, copy=True)))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def _to_gray(pil: Image.Image) -> np.ndarray:
    mode = pil.mode
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        arr = np.asarray(pil, dtype=np.float64)
        return np.clip(arr / 65535.0, 0.0, 1.0)
    if mode == "L":
        return np.asarray(pil, dtype=np.float64) / 255.0
    if mode in ("1", "LA", "P", "PA", "RGBA", "CMYK", "YCbCr"):
        pil = pil.convert("L" if mode in ("1", "LA") else "RGB")
        if pil.mode == "L":
            return np.asarray(pil, dtype=np.float64) / 255.0
    if pil.mode != "RGB":
        raise ImageError(f"unsupported format: image mode {mode}")
    rgb = np.asarray(pil, dtype=np.float64)
    return np.clip(rgb @ _LUMA / 255.0, 0.0, 1.0)


def load_image(path: str | os.PathLike) -> GrayImage:
    """Read a PNG or binary PGM file as a normalized grayscale image.

    Color input is reduced to Rec.601 luminance. Raises :class:`ImageError`
    for missing or truncated files and for formats other than PNG/PGM.
    """
    try:
        with Image.open(path) as pil:
            if pil.format not in ("PNG", "PPM"):
                raise ImageError(f"unsupported format: {pil.format}")
            pil.load()
            if pil.width == 0 or pil.height == 0:
                raise ImageError("zero-dimension image")
            gray = _to_gray(pil)
    except ImageError:
        raise
    except (OSError, UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise ImageError(f"unreadable file: {path}: {exc}") from exc
    return GrayImage(gray)


def load_mask(path: str | os.PathLike) -> np.ndarray:
    """Read an interior mask image; any nonzero pixel is interior."""
    return load_image(path).data > 0


def _quantize(data: np.ndarray, maxval: int) -> np.ndarray:
    return np.rint(np.clip(data, 0.0, 1.0) * maxval)


def save_pgm(img: GrayImage | np.ndarray, path: str | os.PathLike, bits: int = 8) -> None:
    """Write a binary (P5) PGM with 8- or 16-bit samples."""
    data = img.data if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    if bits == 8:
        raw = _quantize(data, 255).astype(np.uint8).tobytes()
        maxval = 255
    elif bits == 16:
        raw = _quantize(data, 65535).astype(">u2").tobytes()
        maxval = 65535
    else:
        raise ValueError("bits must be 8 or 16")
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(raw)


def save_png(img: GrayImage | RgbImage | np.ndarray, path: str | os.PathLike) -> None:
    if isinstance(img, RgbImage):
        pil = Image.fromarray(np.ascontiguousarray(img.data), mode="RGB")
    else:
        data = img.data if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
        pil = Image.fromarray(_quantize(data, 255).astype(np.uint8), mode="L")
    pil.save(path, format="PNG")


def save_mask(mask: np.ndarray, path: str | os.PathLike) -> None:
    save_png(np.asarray(mask, dtype=np.float64), path)


def downscale(img: GrayImage, factor: int) -> GrayImage:
    """Block-mean reduction; trailing partial blocks average what they cover."""
    if int(factor) != factor or factor < 1:
        raise ValueError("factor must be an integer >= 1")
    factor = int(factor)
    if factor == 1:
        return img
    h, w = img.shape
    oh, ow = -(-h // factor), -(-w // factor)
    padded = np.zeros((oh * factor, ow * factor))
    counts = np.zeros_like(padded)
    padded[:h, :w] = img.data
    counts[:h, :w] = 1.0
    sums = padded.reshape(oh, factor, ow, factor).sum(axis=(1, 3))
    n = counts.reshape(oh, factor, ow, factor).sum(axis=(1, 3))
    return GrayImage(np.clip(sums / n, 0.0, 1.0))


def _check_points(points: np.ndarray, w: int, h: int) -> None:
    if points.size == 0:
        return
    xs, ys = points[:, 0], points[:, 1]
    bad = (xs < 0) | (xs >= w) | (ys < 0) | (ys >= h)
    if bad.any():
        x, y = points[np.argmax(bad)]
        raise ValueError(f"out-of-bounds coordinate ({x}, {y}) for {w}x{h} image")


def render_overlay(
    img: GrayImage,
    paths: Iterable,
    contour: Sequence[tuple[int, int]] = (),
) -> RgbImage:
    """Gray-to-RGB copy with the contour and each path painted on top.

    ``paths`` may hold :class:`~vessel_trace.search.BoundaryPath` objects or
    plain point sequences. Paths cycle through :data:`PATH_PALETTE`.
    """
    h, w = img.shape
    layers = [np.asarray(contour, dtype=np.int64).reshape(-1, 2)]
    for p in paths:
        pts = getattr(p, "points", p)
        layers.append(np.asarray(pts, dtype=np.int64).reshape(-1, 2))
    for pts in layers:
        _check_points(pts, w, h)

    gray = _quantize(img.data, 255).astype(np.uint8)
    out = np.repeat(gray[:, :, None], 3, axis=2)
    if layers[0].size:
        out[layers[0][:, 1], layers[0][:, 0]] = CONTOUR_COLOR
    for i, pts in enumerate(layers[1:]):
        if pts.size:
            out[pts[:, 1], pts[:, 0]] = PATH_PALETTE[i % len(PATH_PALETTE)]
    return RgbImage(out)
