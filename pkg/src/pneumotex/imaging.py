"""Grayscale image container, loading, and neighbourhood sampling.

Coordinates are (x, y) with x the column and y the row; pixel (0, 0) is the
top-left corner. Sampling outside the grid replicates the nearest edge pixel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import BoundsError, ImageDimensionError, ImageFormatError, ParameterError

# BT.709 luminance weights for RGB collapse.
_LUMA = (0.2126, 0.7152, 0.0722)

MIN_SIDE = 3


@dataclass(frozen=True)
class GrayImage:
    """Immutable grayscale raster with float64 intensities in [0, 255].

    pixels is row-major with shape (height, width).
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2:
            raise ImageDimensionError(f"expected a 2-D grid, got shape {arr.shape}")
        if arr.shape[0] < MIN_SIDE or arr.shape[1] < MIN_SIDE:
            raise ImageDimensionError(
                f"image must be at least {MIN_SIDE}x{MIN_SIDE}, got {arr.shape[1]}x{arr.shape[0]}"
            )
        if not np.all(np.isfinite(arr)):
            raise ImageDimensionError("intensities must be finite")
        if arr.min() < 0.0 or arr.max() > 255.0:
            raise ImageDimensionError("intensities must lie in [0, 255]")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def shifted(self, delta: float) -> "GrayImage":
        """Image with delta added to every intensity (clipped to the range)."""
        return GrayImage(np.clip(self.pixels + delta, 0.0, 255.0))


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Sampling layout: count points equally spaced on a circle or ellipse.

    Point i sits at angle offset + 2*pi*i/count; (a, b) are the semi-axes
    along x and y (a circle has a == b == radius).
    """

    count: int
    a: float
    b: float
    offset: float = 0.0

    def __post_init__(self):
        if self.count < 4:
            raise ParameterError(f"neighbour count must be >= 4, got {self.count}")
        if self.a <= 0 or self.b <= 0:
            raise ParameterError("semi-axes must be positive")

    @classmethod
    def circle(cls, count: int, radius: float, offset: float = 0.0) -> "NeighborhoodSpec":
        return cls(count, radius, radius, offset)

    @classmethod
    def ellipse(cls, count: int, a: float, b: float, offset: float = 0.0) -> "NeighborhoodSpec":
        return cls(count, a, b, offset)

    def offsets(self) -> np.ndarray:
        """(count, 2) array of (dx, dy) displacements from the center."""
        i = np.arange(self.count, dtype=np.float64)
        theta = self.offset + 2.0 * math.pi * i / self.count
        return np.stack([self.a * np.cos(theta), self.b * np.sin(theta)], axis=1)


def load_gray(path) -> GrayImage:
    """Decode a PNG or JPEG file into a GrayImage.

    8-bit grayscale is used as-is; RGB collapses via BT.709 luminance
    (0.2126 R + 0.7152 G + 0.0722 B); 16-bit grayscale rescales to [0, 255].
    Alpha channels are dropped. No resizing is performed.
    """
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("RGBA", "LA"):
                im = im.convert(mode[:-1])
                mode = im.mode
            if mode == "P":
                im = im.convert("RGB")
                mode = "RGB"
            if mode == "L":
                arr = np.asarray(im, dtype=np.float64)
            elif mode in ("I", "I;16", "I;16B", "I;16L"):
                arr = np.asarray(im, dtype=np.float64) * (255.0 / 65535.0)
            elif mode == "RGB":
                rgb = np.asarray(im, dtype=np.float64)
                arr = rgb[..., 0] * _LUMA[0] + rgb[..., 1] * _LUMA[1] + rgb[..., 2] * _LUMA[2]
            else:
                raise ImageFormatError(f"unsupported pixel mode {mode!r} in {path}")
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"not a decodable image: {path}") from exc
    except FileNotFoundError:
        raise
    return GrayImage(arr)


def _bilinear(pixels: np.ndarray, x: float, y: float) -> float:
    """Bilinear interpolation with replicate-edge handling.

    Uses the difference form so a constant neighbourhood reproduces its value
    exactly and integer grid points return the stored pixel untouched.
    """
    h, w = pixels.shape
    x = min(max(x, 0.0), float(w - 1))
    y = min(max(y, 0.0), float(h - 1))
    x0 = int(math.floor(x))
    y0 = int(math.floor(y))
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    v00 = pixels[y0, x0]
    v10 = pixels[y0, x1]
    v01 = pixels[y1, x0]
    v11 = pixels[y1, x1]
    return v00 + fx * (v10 - v00) + fy * (v01 - v00) + fx * fy * (v00 - v10 - v01 + v11)


def sample_neighbors(img: GrayImage, cx: float, cy: float, spec: NeighborhoodSpec) -> np.ndarray:
    """Intensities at the spec's points around (cx, cy), counter-clockwise.

    The center must lie inside the image; sample points outside are clamped
    to the border (replicate-edge).
    """
    if not (0.0 <= cx <= img.width - 1 and 0.0 <= cy <= img.height - 1):
        raise BoundsError(f"center ({cx}, {cy}) outside image {img.width}x{img.height}")
    out = np.empty(spec.count, dtype=np.float64)
    for i, (dx, dy) in enumerate(spec.offsets()):
        out[i] = _bilinear(img.pixels, cx + dx, cy + dy)
    return out


def crop(img: GrayImage, x: int, y: int, width: int, height: int) -> GrayImage:
    """Copy the axis-aligned window with top-left (x, y)."""
    if width < MIN_SIDE or height < MIN_SIDE:
        raise ImageDimensionError(f"crop must be at least {MIN_SIDE}x{MIN_SIDE}")
    if x < 0 or y < 0 or x + width > img.width or y + height > img.height:
        raise BoundsError(
            f"crop ({x},{y},{width},{height}) outside image {img.width}x{img.height}"
        )
    return GrayImage(img.pixels[y : y + height, x : x + width].copy())
