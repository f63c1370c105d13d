"""HSI color model and the pixel similarity primitive.

RGB converts through the arccos form of the HSI transform with channels
normalized to [0, 1]:

    I = (R + G + B) / 3
    S = 1 - 3 min(R, G, B) / (R + G + B)
    H = theta           if B <= G, with theta = arccos of
        360 - theta     otherwise
        0.5 [(R - G) + (R - B)] / sqrt((R - G)^2 + (R - B)(G - B))

Achromatic pixels (R = G = B, black included) take H = 0 and S = 0 by
convention so the transform is total. Distances treat hue circularly,
normalized by 360 degrees, so all three components weigh commensurately
and the Manhattan sum tops out at 2.5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from roughseg import _kernels as K
from roughseg.exceptions import ParameterError
from roughseg.raster import ImageRaster


@dataclass(frozen=True)
class HsiPixel:
    """Hue (degrees, [0, 360)), saturation and intensity (both [0, 1])."""

    h: float
    s: float
    i: float

    def __post_init__(self):
        if not (0.0 <= self.h < 360.0 and 0.0 <= self.s <= 1.0 and 0.0 <= self.i <= 1.0):
            raise ParameterError(f"HSI components out of range: {(self.h, self.s, self.i)}")


@dataclass(frozen=True)
class ClusteringParams:
    """Knobs of the rough clustering phase.

    ``theta_band`` is the band-distance threshold of the similarity test.
    ``gamma`` is the cell-claiming ratio threshold; ``None`` selects auto
    mode, where each pass uses ``theta_fraction`` times the seed cell's
    population-object ratio, clamped to [0, 1].
    """

    theta_band: float
    gamma: float | None = None
    grid_n: int = 32
    theta_fraction: float = 0.9

    def __post_init__(self):
        if self.theta_band < 0:
            raise ParameterError(f"theta_band must be non-negative, got {self.theta_band}")
        if self.gamma is not None and not 0.0 <= self.gamma <= 1.0:
            raise ParameterError(f"gamma must be in [0, 1] or None, got {self.gamma}")
        if self.grid_n < 1:
            raise ParameterError(f"grid_n must be at least 1, got {self.grid_n}")
        if self.theta_fraction < 0:
            raise ParameterError(f"theta_fraction must be non-negative, got {self.theta_fraction}")


class HsiImage:
    """Planar HSI view of a raster: one float64 array per component."""

    def __init__(self, width: int, height: int, h: np.ndarray, s: np.ndarray, i: np.ndarray):
        self.width = width
        self.height = height
        self.h = h
        self.s = s
        self.i = i

    @classmethod
    def from_raster(cls, raster: ImageRaster) -> "HsiImage":
        h, s, i = K.rgb_to_hsi_planes(raster.pixels)
        return cls(raster.width, raster.height, h, s, i)

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def pixel(self, index: int) -> HsiPixel:
        return HsiPixel(float(self.h[index]), float(self.s[index]), float(self.i[index]))


def rgb_to_hsi(rgb) -> HsiPixel:
    """Convert one RGB triple (channels in [0, 255]) to an HsiPixel."""
    r, g, b = (int(c) for c in rgb)
    for c in (r, g, b):
        if not 0 <= c <= 255:
            raise ParameterError(f"RGB channel out of range: {rgb}")
    h, s, i = K.rgb_to_hsi_pixel(r, g, b)
    return HsiPixel(h, s, i)


def hsi_manhattan(a: HsiPixel, b: HsiPixel) -> float:
    """Manhattan distance over (circular hue / 360, saturation, intensity)."""
    return K.hsi_distance(a.h, a.s, a.i, b.h, b.s, b.i)


def similarity_flag(p: HsiPixel, seed: HsiPixel, theta_band: float) -> int:
    """1 if p lies within theta_band of the seed (inclusive), else 0."""
    if theta_band < 0:
        raise ParameterError(f"theta_band must be non-negative, got {theta_band}")
    return 1 if hsi_manhattan(p, seed) <= theta_band else 0
