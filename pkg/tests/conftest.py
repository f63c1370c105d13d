"""Shared fixtures: deterministic synthetic rasters and small helpers."""

from __future__ import annotations

import numpy as np
import pytest

from roughseg.raster import ImageRaster

# solid colors with well-separated hues (red 0, yellow 60,
# green 120, cyan 180, blue 240, magenta 300)
RED = (255, 0, 0)
YELLOW = (255, 255, 0)
GREEN = (0, 255, 0)
CYAN = (0, 255, 255)
BLUE = (0, 0, 255)
MAGENTA = (255, 0, 255)


def make_image(width: int, height: int, painter) -> ImageRaster:
    """Build a raster from painter(x, y) -> (r, g, b)."""
    px = np.empty((width * height, 3), dtype=np.uint8)
    for y in range(height):
        for x in range(width):
            px[y * width + x] = painter(x, y)
    return ImageRaster(width, height, px)


def solid(width: int, height: int, color) -> ImageRaster:
    px = np.empty((width * height, 3), dtype=np.uint8)
    px[:] = color
    return ImageRaster(width, height, px)


def halves(width: int, height: int, left, right, split: int | None = None) -> ImageRaster:
    split = width // 2 if split is None else split
    return make_image(width, height, lambda x, y: left if x < split else right)


def hstripes(width: int, height: int, colors) -> ImageRaster:
    band = height // len(colors)
    return make_image(
        width, height, lambda x, y: colors[min(y // band, len(colors) - 1)]
    )


def disk(width: int, height: int, bg, fg, cx, cy, radius) -> ImageRaster:
    def paint(x, y):
        return fg if (x - cx) ** 2 + (y - cy) ** 2 <= radius**2 else bg

    return make_image(width, height, paint)


def rect(width: int, height: int, bg, fg, x0, y0, x1, y1) -> ImageRaster:
    def paint(x, y):
        return fg if x0 <= x < x1 and y0 <= y < y1 else bg

    return make_image(width, height, paint)


def ring(width: int, height: int, bg, fg, cx, cy, r_in, r_out) -> ImageRaster:
    def paint(x, y):
        d2 = (x - cx) ** 2 + (y - cy) ** 2
        return fg if r_in**2 <= d2 <= r_out**2 else bg

    return make_image(width, height, paint)


def l_shape(width: int, height: int, bg, fg, x0, y0, size, thick) -> ImageRaster:
    def paint(x, y):
        vertical = x0 <= x < x0 + thick and y0 <= y < y0 + size
        horizontal = x0 <= x < x0 + size and y0 + size - thick <= y < y0 + size
        return fg if vertical or horizontal else bg

    return make_image(width, height, paint)


def u_shape(width: int, height: int, bg, fg, x0, y0, size, thick) -> ImageRaster:
    def paint(x, y):
        left = x0 <= x < x0 + thick and y0 <= y < y0 + size
        right = x0 + size - thick <= x < x0 + size and y0 <= y < y0 + size
        bottom = x0 <= x < x0 + size and y0 + size - thick <= y < y0 + size
        return fg if left or right or bottom else bg

    return make_image(width, height, paint)


def spiral(width: int, height: int, bg, fg, cx, cy, arm: int, max_r: int, turns: float) -> ImageRaster:
    """Archimedean spiral stamped as overlapping arm x arm squares."""
    import math

    mask = np.zeros((height, width), dtype=bool)
    steps = 4000
    half = arm // 2
    for k in range(steps + 1):
        t = k / steps
        phi = turns * 2.0 * math.pi * t
        r = max_r * t
        x = cx + int(round(r * math.cos(phi)))
        y = cy + int(round(r * math.sin(phi)))
        mask[max(y - half, 0) : min(y + half + 1, height), max(x - half, 0) : min(x + half + 1, width)] = True

    def paint(x, y):
        return fg if mask[y, x] else bg

    return make_image(width, height, paint)


def color_regions(image: ImageRaster) -> np.ndarray:
    """Exact-color oracle: region id per pixel, ids by first appearance."""
    seen: dict[tuple[int, int, int], int] = {}
    out = np.empty(image.n_pixels, dtype=np.int32)
    for idx, px in enumerate(map(tuple, image.pixels.tolist())):
        if px not in seen:
            seen[px] = len(seen)
        out[idx] = seen[px]
    return out


def majority_agreement(assignment: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of pixels whose cluster's majority truth region matches theirs."""
    agree = 0
    for cid in np.unique(assignment):
        members = np.nonzero(assignment == cid)[0]
        regions = truth[members]
        agree += int((regions == np.bincount(regions).argmax()).sum())
    return agree / assignment.size


@pytest.fixture
def two_tone_100() -> ImageRaster:
    """100x100 left-red right-blue halves, aligned to a 10x10 grid."""
    return halves(100, 100, RED, BLUE)
