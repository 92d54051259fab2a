"""Rectangular detection-plane grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class GridSpec:
    """Pixel grid over a rectangle of the detection plane.

    nx, ny: pixel counts along x and y.
    extent_x, extent_y: full physical widths in meters.
    center: (cx, cy) of the rectangle in meters.

    Pixel (0, 0) sits at the most negative corner; coordinates refer to pixel
    centers.
    """

    nx: int
    ny: int
    extent_x: float
    extent_y: float
    center: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ParameterError("grids need at least 2 pixels per axis")
        if not (self.extent_x > 0 and self.extent_y > 0):
            raise ParameterError("grid extents must be positive")
        if len(self.center) != 2 or not all(np.isfinite(c) for c in self.center):
            raise ParameterError("grid center must be two finite coordinates")

    @property
    def pitch(self) -> Tuple[float, float]:
        return self.extent_x / self.nx, self.extent_y / self.ny

    @property
    def origin(self) -> Tuple[float, float]:
        """Coordinates of the center of pixel (0, 0)."""
        px, py = self.pitch
        return (
            self.center[0] - self.extent_x / 2 + px / 2,
            self.center[1] - self.extent_y / 2 + py / 2,
        )

    def x_centers(self) -> np.ndarray:
        px, _ = self.pitch
        return self.origin[0] + px * np.arange(self.nx)

    def y_centers(self) -> np.ndarray:
        _, py = self.pitch
        return self.origin[1] + py * np.arange(self.ny)
