"""Pixel-grid geometry: boxes, frames, integral images and sample lattices.

Positions are box anchors (top-left corners) in 0-indexed pixel
coordinates and are passed around as ``(N, 2)`` integer arrays with
columns ``(x, y)``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import BoundsError, InvalidInputError


@dataclass(frozen=True)
class BoundingBox:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise InvalidInputError(f"box size must be positive, got {self.w}x{self.h}")

    def center(self):
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def size(self):
        return (self.w, self.h)

    @property
    def anchor(self):
        return (self.x, self.y)

    def moved_to(self, x, y):
        return BoundingBox(int(x), int(y), self.w, self.h)

    def inside(self, width, height):
        return (self.x >= 0 and self.y >= 0
                and self.x + self.w <= width and self.y + self.h <= height)

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True, eq=False)
class Frame:
    """One grayscale image of a sequence.

    ``pixels`` is a row-major ``(height, width)`` uint8 array.
    """

    pixels: np.ndarray
    index: int = 0

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.size == 0:
            raise InvalidInputError("frame must be a non-empty 2-D array")
        if pixels.dtype != np.uint8:
            if pixels.min() < 0 or pixels.max() > 255:
                raise InvalidInputError("pixel values must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class IntegralImage:
    """Summed-area table of shape ``(height + 1, width + 1)``.

    ``table[i, j]`` holds the sum of all pixels in rows ``< i`` and
    columns ``< j``; the first row and column are zero.
    """

    table: np.ndarray

    @property
    def width(self):
        return self.table.shape[1] - 1

    @property
    def height(self):
        return self.table.shape[0] - 1


def integral_image(frame):
    pixels = frame.pixels if isinstance(frame, Frame) else np.asarray(frame)
    if pixels.ndim != 2 or pixels.size == 0:
        raise InvalidInputError("cannot build an integral image of an empty frame")
    table = np.zeros((pixels.shape[0] + 1, pixels.shape[1] + 1), dtype=np.int64)
    np.cumsum(pixels, axis=0, dtype=np.int64, out=table[1:, 1:])
    np.cumsum(table[1:, 1:], axis=1, out=table[1:, 1:])
    return IntegralImage(table)


def rect_sum(ii, r):
    """Sum of the pixels covered by box ``r`` using four table lookups."""
    if not r.inside(ii.width, ii.height):
        raise BoundsError(f"rectangle {r.as_tuple()} outside {ii.width}x{ii.height} image")
    t = ii.table
    x2, y2 = r.x + r.w, r.y + r.h
    return int(t[y2, x2] - t[r.y, x2] - t[y2, r.x] + t[r.y, r.x])


@dataclass(frozen=True)
class LatticeDisk:
    """Integer anchors on a ``step`` grid with ``inner <= dist < outer``.

    The grid is laid out around the rounded center. ``inner == outer == 0``
    denotes the degenerate disk holding only the center.
    """

    center: tuple
    inner_radius: float
    outer_radius: float
    step: int = 1

    def __post_init__(self):
        if self.step < 1:
            raise InvalidInputError("lattice step must be >= 1")
        if self.inner_radius < 0 or self.outer_radius < self.inner_radius:
            raise InvalidInputError(
                f"invalid radii inner={self.inner_radius} outer={self.outer_radius}")


def enumerate_positions(d, sample_size, frame_size):
    """Anchors of ``d`` whose ``sample_size`` box fits in ``frame_size``.

    Returns an ``(N, 2)`` int64 array of ``(x, y)`` sorted by ``(y, x)``;
    N may be zero when the disk is fully clipped.
    """
    w, h = sample_size
    fw, fh = frame_size
    cx, cy = float(d.center[0]), float(d.center[1])
    ox, oy = int(round(cx)), int(round(cy))

    if d.outer_radius == 0:
        offsets = np.zeros((1, 2), dtype=np.int64)
    else:
        n = int(math.ceil((d.outer_radius + 1.0) / d.step))
        ticks = np.arange(-n, n + 1, dtype=np.int64) * d.step
        # meshgrid with y as the slow axis keeps row-major scan order
        gy, gx = np.meshgrid(ticks, ticks, indexing="ij")
        offsets = np.stack([gx.ravel(), gy.ravel()], axis=1)

    pos = offsets + np.array([ox, oy], dtype=np.int64)
    if d.outer_radius > 0:
        dist = np.hypot(pos[:, 0] - cx, pos[:, 1] - cy)
        pos = pos[(dist >= d.inner_radius) & (dist < d.outer_radius)]
    keep = ((pos[:, 0] >= 0) & (pos[:, 1] >= 0)
            & (pos[:, 0] <= fw - w) & (pos[:, 1] <= fh - h))
    return pos[keep]


def subsample_positions(positions, count, rng):
    """Uniform draw of ``count`` positions without replacement, scan order kept."""
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    positions = np.asarray(positions)
    if len(positions) <= count:
        return positions.copy()
    idx = np.sort(rng.choice(len(positions), size=count, replace=False))
    return positions[idx]
