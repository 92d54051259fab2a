"""Coincidence-map experiments: ghost interference and ghost imaging.

Ghost interference: a double slit in the object plane, no lens; the
coincidence amplitude is the sum of the two-photon amplitude over the slit
positions and the map is its squared magnitude over the far plane.

Ghost imaging: a polarization-sensitive phase pattern in the object plane and
a thin lens in photon 2's arm. Each pattern pixel contributes its imaging
amplitude weighted by the local aperture transmission and the polarization
projection coefficient at the local phase; the coherent sum over pattern
pixels, squared, is the coincidence map. Maps are peak-normalized with the
raw peak kept in metadata so different maps remain comparable on a common
scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .biphoton import QuadSettings, SourceParams, closed_form_amplitude, _leggauss
from .errors import (
    ConvergenceError,
    GridMismatchError,
    NumericError,
    ParameterError,
    SamplingError,
)
from .grids import GridSpec
from .optics import LensSystem, aperture_nodes, ghost_magnification, pattern_image_field
from .polarization import pattern_projection_coeff

# minimum pixels per fringe period before the interference map is trusted
MIN_PIXELS_PER_FRINGE = 8

_FINITE_SLIT_NODES = 64


@dataclass(frozen=True)
class DoubleSlit:
    """Two slits separated by d along one axis of the object plane.

    slit_width 0 means ideal delta slits (closed-form two-term sum); a
    positive width integrates uniformly over each opening.
    """

    d: float
    axis: str = "x"
    slit_width: float = 0.0
    center: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.d) or self.d <= 0:
            raise ParameterError(f"slit separation must be > 0, got {self.d!r}")
        if self.axis not in ("x", "y"):
            raise ParameterError(f"slit axis must be 'x' or 'y', got {self.axis!r}")
        if not (0.0 <= self.slit_width < self.d):
            raise ParameterError("slit width must satisfy 0 <= width < separation")
        if not np.isfinite(self.center):
            raise ParameterError("slit center must be finite")


@dataclass(frozen=True)
class PhasePattern:
    """Discretized polarization-sensitive phase pattern phi(x1, y1).

    grid: (ny, nx) phase values in radians.
    pitch: (px, py) meters per pixel.
    origin: (ox, oy) object-plane coordinates of the center of pixel (0, 0).
    aperture: transmission in [0, 1] of matching shape; None means fully open.
    """

    grid: np.ndarray
    pitch: Tuple[float, float]
    origin: Tuple[float, float]
    aperture: Optional[np.ndarray] = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 2 or grid.size == 0:
            raise ParameterError("pattern grid must be a non-empty 2D array")
        if not np.all(np.isfinite(grid)):
            raise ParameterError("pattern phases must be finite")
        if len(self.pitch) != 2 or not all(p > 0 for p in self.pitch):
            raise ParameterError("pattern pitch must be two positive lengths")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "pitch", (float(self.pitch[0]), float(self.pitch[1])))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        if self.aperture is not None:
            ap = np.asarray(self.aperture, dtype=float)
            if ap.shape != grid.shape:
                raise ParameterError("aperture shape must match the pattern grid")
            if not np.all((ap >= 0) & (ap <= 1)):
                raise ParameterError("aperture transmission must lie in [0, 1]")
            object.__setattr__(self, "aperture", ap)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    def x_centers(self) -> np.ndarray:
        return self.origin[0] + self.pitch[0] * np.arange(self.grid.shape[1])

    def y_centers(self) -> np.ndarray:
        return self.origin[1] + self.pitch[1] * np.arange(self.grid.shape[0])

    def transmission(self) -> np.ndarray:
        if self.aperture is None:
            return np.ones_like(self.grid)
        return self.aperture


def pattern_from_extent(
    grid: np.ndarray,
    extent: Tuple[float, float],
    center: Tuple[float, float] = (0.0, 0.0),
    aperture: Optional[np.ndarray] = None,
) -> PhasePattern:
    """Wrap a phase array as a pattern covering a centered physical extent."""
    grid = np.asarray(grid, dtype=float)
    ny, nx = grid.shape
    px, py = extent[0] / nx, extent[1] / ny
    origin = (center[0] - extent[0] / 2 + px / 2, center[1] - extent[1] / 2 + py / 2)
    return PhasePattern(grid=grid, pitch=(px, py), origin=origin, aperture=aperture)


def half_plane_pattern(
    n: int = 128, extent: float = 4e-3, phi: float = np.pi, axis: str = "x"
) -> PhasePattern:
    """Binary two-region pattern: phase phi on the negative half, 0 on the other."""
    coords = -extent / 2 + (np.arange(n) + 0.5) * (extent / n)
    if axis == "x":
        grid = np.where(coords[None, :] < 0, phi, 0.0) * np.ones((n, 1))
    elif axis == "y":
        grid = np.where(coords[:, None] < 0, phi, 0.0) * np.ones((1, n))
    else:
        raise ParameterError(f"axis must be 'x' or 'y', got {axis!r}")
    return pattern_from_extent(grid, (extent, extent))


def uniform_pattern(n: int = 128, extent: float = 4e-3, phi: float = 0.0) -> PhasePattern:
    """Spatially uniform phase pattern (the background configuration)."""
    return pattern_from_extent(np.full((n, n), float(phi)), (extent, extent))


def rotate_pattern_90(pattern: PhasePattern) -> PhasePattern:
    """Rotate a square, centered pattern by 90 degrees in its own plane."""
    ny, nx = pattern.shape
    if ny != nx or abs(pattern.pitch[0] - pattern.pitch[1]) > 1e-15:
        raise ParameterError("rotation is defined for square patterns only")
    cx = pattern.origin[0] + pattern.pitch[0] * (nx - 1) / 2
    cy = pattern.origin[1] + pattern.pitch[1] * (ny - 1) / 2
    if abs(cx) > 1e-12 or abs(cy) > 1e-12:
        raise ParameterError("rotation is defined for centered patterns only")
    ap = None if pattern.aperture is None else np.rot90(pattern.aperture).copy()
    return PhasePattern(
        grid=np.rot90(pattern.grid).copy(),
        pitch=pattern.pitch,
        origin=pattern.origin,
        aperture=ap,
    )


# ---------------------------------------------------------------------------
# coincidence maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoincidenceMap:
    """Gridded coincidence probabilities over the detection plane.

    values: (ny, nx) array, peak-normalized to 1 unless identically zero;
      signed maps (differences) are normalized by the largest magnitude.
    pitch, origin: grid geometry as in PhasePattern, detection-plane meters.
    meta: polarizer angles, raw peak before normalization, provenance notes.
    """

    values: np.ndarray
    pitch: Tuple[float, float]
    origin: Tuple[float, float]
    meta: dict = field(default_factory=dict)
    signed: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.size == 0:
            raise ParameterError("map values must be a non-empty 2D array")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("map values must be finite")
        if not self.signed and np.any(vals < 0):
            raise ParameterError("coincidence probabilities cannot be negative")
        peak = float(np.max(np.abs(vals)))
        if peak > 0 and abs(peak - 1.0) > 1e-9:
            raise ParameterError("map must be peak-normalized (or identically zero)")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "pitch", (float(self.pitch[0]), float(self.pitch[1])))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def x_centers(self) -> np.ndarray:
        return self.origin[0] + self.pitch[0] * np.arange(self.values.shape[1])

    def y_centers(self) -> np.ndarray:
        return self.origin[1] + self.pitch[1] * np.arange(self.values.shape[0])

    def raw_values(self) -> np.ndarray:
        """Values on the common pre-normalization scale."""
        return self.values * self.meta.get("raw_peak", 1.0)


def _normalized_map(raw: np.ndarray, grid: GridSpec, meta: dict, signed=False):
    peak = float(np.max(np.abs(raw)))
    vals = raw / peak if peak > 0 else raw
    meta = dict(meta)
    meta["raw_peak"] = peak
    meta["normalization"] = "peak" if peak > 0 else "zero map"
    return CoincidenceMap(
        values=vals, pitch=grid.pitch, origin=grid.origin, meta=meta, signed=signed
    )


def expected_fringe_period(params: SourceParams, d: float) -> float:
    """Double-slit fringe period wavelength * (s1 + s2) / d."""
    return params.wavelength * (params.s1 + params.s2) / d


def ghost_interference_map(
    params: SourceParams, slit: DoubleSlit, plane_grid: GridSpec
) -> CoincidenceMap:
    """Coincidence map of the double-slit ghost interference experiment.

    The slit plane is the object plane; the map lives in the far plane with no
    lens. For delta slits the amplitude is the normalized two-term sum of the
    closed form; finite slit widths integrate over each opening.
    """
    period = expected_fringe_period(params, slit.d)
    pitch = plane_grid.pitch[0] if slit.axis == "x" else plane_grid.pitch[1]
    if period / pitch < MIN_PIXELS_PER_FRINGE:
        raise SamplingError(
            f"grid pitch {pitch:g} m gives {period / pitch:.1f} pixels per "
            f"fringe period {period:g} m; need >= {MIN_PIXELS_PER_FRINGE}"
        )

    X2 = plane_grid.x_centers()[None, :]
    Y2 = plane_grid.y_centers()[:, None]
    centers = (slit.center + slit.d / 2, slit.center - slit.d / 2)

    def slit_amplitude(pos: float) -> np.ndarray:
        if slit.slit_width == 0.0:
            if slit.axis == "x":
                return closed_form_amplitude(params, pos, 0.0, X2, Y2)
            return closed_form_amplitude(params, 0.0, pos, X2, Y2)
        # width-normalized average across the opening; GL weights sum to 2
        t, w = _leggauss(_FINITE_SLIT_NODES)
        offs = pos + 0.5 * slit.slit_width * t
        wts = 0.5 * w
        acc = np.zeros((plane_grid.ny, plane_grid.nx), dtype=complex)
        for off, wt in zip(offs, wts):
            if slit.axis == "x":
                acc += wt * closed_form_amplitude(params, off, 0.0, X2, Y2)
            else:
                acc += wt * closed_form_amplitude(params, 0.0, off, X2, Y2)
        return acc

    amp = (slit_amplitude(centers[0]) + slit_amplitude(centers[1])) / np.sqrt(2.0)
    raw = np.abs(amp) ** 2
    if not np.all(np.isfinite(raw)):
        raise NumericError("interference map produced non-finite values")
    meta = {
        "experiment": "ghost interference",
        "slit_separation_m": slit.d,
        "slit_axis": slit.axis,
        "fringe_period_expected_m": period,
    }
    return _normalized_map(raw, plane_grid, meta)


def ghost_image_map(
    params: SourceParams,
    lens: LensSystem,
    pattern: PhasePattern,
    d1: float,
    d2: float,
    image_grid: GridSpec,
    quad: QuadSettings = QuadSettings(),
    telescope_scale: float = 1.0,
    workers: int = 1,
) -> CoincidenceMap:
    """Coincidence map of the polarization-sensitive ghost image.

    d1, d2 are the polarizer angles in radians. image_grid describes the
    camera plane; telescope_scale is the extra coordinate magnification of a
    relay between the lens image plane and the camera (1.0 means the camera
    sits directly in the lens image plane). The total object-to-camera scale
    is then (v/u) * telescope_scale.
    """
    if not np.isfinite(telescope_scale) or telescope_scale <= 0:
        raise ParameterError("telescope scale must be finite and > 0")
    m = ghost_magnification(params, lens)
    total_scale = m * telescope_scale

    # the camera grid must resolve the magnified pattern pixels
    for cam_pitch, pat_pitch, name in zip(
        image_grid.pitch, pattern.pitch, ("x", "y")
    ):
        if cam_pitch / total_scale > pat_pitch * (1 + 1e-12):
            raise SamplingError(
                f"camera pitch {cam_pitch:g} m back-projects to "
                f"{cam_pitch / total_scale:g} m on the object, coarser than the "
                f"pattern pitch {pat_pitch:g} m along {name}"
            )

    nodes = aperture_nodes(lens, params.k, quad)
    weights = (
        pattern.transmission()
        * pattern_projection_coeff(pattern.grid, d1, d2)
        * (pattern.pitch[0] * pattern.pitch[1])
    )
    x2c = image_grid.x_centers() / telescope_scale
    y2c = image_grid.y_centers() / telescope_scale

    def evaluate(n: int, x2, y2) -> np.ndarray:
        return pattern_image_field(
            params, lens, weights, pattern.x_centers(), pattern.y_centers(),
            x2, y2, n, workers=workers,
        )

    fieldvals = evaluate(nodes, x2c, y2c)
    raw = np.abs(fieldvals) ** 2

    if quad.check:
        mid = image_grid.ny // 2
        probe = evaluate(2 * nodes, x2c, y2c[mid : mid + 1])
        scale = max(float(np.max(np.abs(probe))), 1e-300)
        change = float(np.max(np.abs(probe[0] - fieldvals[mid]))) / scale
        if change > quad.tol:
            raise ConvergenceError(
                f"doubling {nodes} -> {2 * nodes} aperture nodes changed the "
                f"image field by {change:.3e} relative (tol {quad.tol:g})"
            )

    meta = {
        "experiment": "ghost image",
        "delta1_deg": float(np.rad2deg(d1)),
        "delta2_deg": float(np.rad2deg(d2)),
        "telescope_scale": float(telescope_scale),
        "total_scale": float(total_scale),
        "aperture_nodes": nodes,
    }
    return _normalized_map(raw, image_grid, meta)


def background_subtract(
    signal: CoincidenceMap, background: CoincidenceMap
) -> CoincidenceMap:
    """Pixel-wise difference signal - background on the common raw scale.

    The result may contain negative values and is normalized by its largest
    magnitude.
    """
    if signal.shape != background.shape:
        raise GridMismatchError(
            f"shape mismatch: {signal.shape} vs {background.shape}"
        )
    for a, b, what in (
        (signal.pitch, background.pitch, "pitch"),
        (signal.origin, background.origin, "origin"),
    ):
        if any(abs(x - y) > 1e-12 for x, y in zip(a, b)):
            raise GridMismatchError(f"{what} mismatch: {a} vs {b}")

    raw = signal.raw_values() - background.raw_values()
    peak = float(np.max(np.abs(raw)))
    vals = raw / peak if peak > 0 else raw
    meta = {
        "experiment": "background-subtracted ghost image",
        "delta1_deg": signal.meta.get("delta1_deg"),
        "delta2_deg": signal.meta.get("delta2_deg"),
        "raw_peak": peak,
        "normalization": "max magnitude" if peak > 0 else "zero map",
    }
    return CoincidenceMap(
        values=vals,
        pitch=signal.pitch,
        origin=signal.origin,
        meta=meta,
        signed=True,
    )
