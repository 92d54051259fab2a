"""Thin-lens imaging of photon 2: lens phase, Fresnel step, imaging amplitude.

The imaging amplitude propagates the two-photon amplitude from the lens plane
(distance s2 from the source) through the lens phase and aperture, then by a
Fresnel step over the image distance v:

    Phi_I(x1, y1; x2, y2) = integral over the aperture of
        Phi(x1, y1; xi, eta) * a_p2(xi, eta)
        * exp(-i k (xi^2+eta^2) / 2f) * exp(+i k ((x2-xi)^2+(y2-eta)^2) / 2v)

Evaluation rides on the x/y separability of Phi: with Gauss-Legendre nodes on
the aperture square, the double integral becomes matrix contractions over the
node axes, with the circular aperture mask applied blockwise so the full
node-by-node matrix never has to be materialized. Results are normalized by
the on-axis value Phi_I(0,0;0,0) so interior peaks are O(1).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .biphoton import QuadSettings, SourceParams, axis_amplitude, _leggauss
from .errors import (
    ApertureSamplingWarning,
    ConvergenceError,
    NumericError,
    ParameterError,
)

# first zero of the Bessel function J1, fixing the Airy radius 3.83 * v / (k rho)
AIRY_FIRST_ZERO = 3.8317059702075125

IMAGING_CONDITION_TOL = 1e-9

# fixed internal work-unit sizes; workers only consume whole units, so results
# cannot depend on the worker count
_NODE_BLOCK = 512

AUTO_NODES_MIN = 256
AUTO_NODES_MAX = 8192


@dataclass(frozen=True)
class LensSystem:
    """Thin imaging lens with a circular aperture.

    f: focal length, meters.
    u: object distance, meters (object plane to lens).
    v: image distance, meters; None solves the imaging condition
       1/u + 1/v = 1/f.
    aperture_radius: circular aperture radius in meters.
    """

    f: float
    u: float
    v: Optional[float] = None
    aperture_radius: float = 25e-3

    def __post_init__(self):
        for name in ("f", "u"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0:
                raise ParameterError(f"{name} must be finite and > 0, got {val!r}")
        if self.u <= self.f:
            raise ParameterError("real imaging needs object distance u > f")
        if not np.isfinite(self.aperture_radius) or self.aperture_radius <= 0:
            raise ParameterError("aperture radius must be finite and > 0")
        if self.v is None:
            object.__setattr__(self, "v", 1.0 / (1.0 / self.f - 1.0 / self.u))
        else:
            if not np.isfinite(self.v) or self.v <= 0:
                raise ParameterError(f"v must be finite and > 0, got {self.v!r}")
            gap = abs(1.0 / self.u + 1.0 / self.v - 1.0 / self.f)
            if gap > IMAGING_CONDITION_TOL:
                raise ParameterError(
                    f"imaging condition violated: |1/u + 1/v - 1/f| = {gap:.3e} "
                    f"exceeds {IMAGING_CONDITION_TOL:g} 1/m"
                )

    @property
    def magnification(self) -> float:
        return self.v / self.u


def lens_phase(f: float, k: float, xi, eta) -> np.ndarray:
    """Unit-magnitude lens factor exp(-i k (xi^2 + eta^2) / (2 f))."""
    if f <= 0:
        raise ParameterError("focal length must be positive")
    xi = np.asarray(xi, float)
    eta = np.asarray(eta, float)
    return np.exp(-1j * k * (xi * xi + eta * eta) / (2.0 * f))


def fresnel_kernel(dist: float, k: float, dx, dy) -> np.ndarray:
    """Unit-magnitude paraxial propagator exp(+i k (dx^2 + dy^2) / (2 dist))."""
    if dist <= 0:
        raise ParameterError("propagation distance must be positive")
    dx = np.asarray(dx, float)
    dy = np.asarray(dy, float)
    return np.exp(1j * k * (dx * dx + dy * dy) / (2.0 * dist))


def ghost_magnification(params: SourceParams, lens: LensSystem) -> float:
    """Image scale m = v / (s1 + s2) of the ghost-imaging geometry.

    The object sits at distance s1 on the far side of the source, so the
    effective object distance is s1 + s2 and the lens must be placed
    accordingly (u = s1 + s2).
    """
    u_expected = params.s1 + params.s2
    if abs(lens.u - u_expected) > 1e-9:
        raise ParameterError(
            f"lens object distance u = {lens.u:g} m does not match "
            f"s1 + s2 = {u_expected:g} m"
        )
    return lens.v / u_expected


def fresnel_number(lens: LensSystem, k: float) -> float:
    """Aperture Fresnel number k rho^2 / (2 pi min(u, v))."""
    return k * lens.aperture_radius**2 / (2.0 * np.pi * min(lens.u, lens.v))


def rule_nodes(lens: LensSystem, k: float) -> int:
    """Node count per axis from the aperture sampling rule.

    Requires uniform-equivalent node spacing 2*rho/n at most rho/(8*N_F),
    i.e. n >= 16 * N_F, clamped to a practical range.
    """
    n = math.ceil(16.0 * fresnel_number(lens, k))
    return int(min(max(n, AUTO_NODES_MIN), AUTO_NODES_MAX))


def aperture_nodes(lens: LensSystem, k: float, quad: QuadSettings) -> int:
    """Resolve the per-axis node count, warning on under-sampling overrides."""
    wanted = rule_nodes(lens, k)
    if quad.nodes is None:
        return wanted
    if quad.nodes < wanted:
        warnings.warn(
            f"{quad.nodes} aperture nodes per axis is below the sampling-rule "
            f"count {wanted}; oscillations may be unresolved",
            ApertureSamplingWarning,
            stacklevel=3,
        )
    return quad.nodes


# ---------------------------------------------------------------------------
# lens-plane contraction
# ---------------------------------------------------------------------------


def _lens_nodes(lens: LensSystem, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    t, w = _leggauss(nodes)
    rho = lens.aperture_radius
    return rho * t, rho * w


def _point_blocks(params, lens, x1, y1, x2, y2, nodes):
    """Yield per-node-block partial sums of the aperture integral for points.

    All inputs are flat arrays of equal length P; each yielded value is the
    (P,) partial contribution of one xi-block, in fixed block order.
    """
    k = params.k
    xi, wxi = _lens_nodes(lens, nodes)
    rho2 = lens.aperture_radius**2
    # per-node factor common to both axes: lens phase and Fresnel quadratic
    quad_phase = np.exp(1j * (0.5 * k / lens.v - 0.5 * k / lens.f) * xi * xi) * wxi
    # (P, nodes) factors: source axis factor times linear Fresnel term
    vx = axis_amplitude(params, x1[:, None], xi[None, :]) * np.exp(
        -1j * k * np.outer(x2, xi) / lens.v
    ) * quad_phase[None, :]
    vy = axis_amplitude(params, y1[:, None], xi[None, :]) * np.exp(
        -1j * k * np.outer(y2, xi) / lens.v
    ) * quad_phase[None, :]
    for a0 in range(0, nodes, _NODE_BLOCK):
        a1 = min(a0 + _NODE_BLOCK, nodes)
        mask = (xi[a0:a1, None] ** 2 + xi[None, :] ** 2) <= rho2
        inner = vy @ mask.T.astype(float)          # (P, blk): sum over eta nodes
        yield np.sum(vx[:, a0:a1] * inner, axis=1)


def _imaging_raw(params, lens, x1, y1, x2, y2, nodes) -> np.ndarray:
    """Unnormalized Phi_I at flat point arrays, without the output phase."""
    total = None
    for part in _point_blocks(params, lens, x1, y1, x2, y2, nodes):
        total = part if total is None else total + part
    return total


def imaging_amplitude(
    params: SourceParams,
    lens: LensSystem,
    x1, y1, x2, y2,
    quad: QuadSettings = QuadSettings(),
) -> np.ndarray:
    """Normalized imaging amplitude Phi_I(x1, y1; x2, y2).

    Accepts scalars or broadcastable arrays of object points (x1, y1) and
    image points (x2, y2). With quad.check, a probe subset is re-evaluated at
    doubled nodes and a disagreement above quad.tol raises ConvergenceError.
    """
    nodes = aperture_nodes(lens, params.k, quad)
    x1b, y1b, x2b, y2b = np.broadcast_arrays(
        np.asarray(x1, float), np.asarray(y1, float),
        np.asarray(x2, float), np.asarray(y2, float),
    )
    shape = x1b.shape
    flat = [np.atleast_1d(a.ravel()) for a in (x1b, y1b, x2b, y2b)]
    raw = _imaging_raw(params, lens, *flat, nodes)
    ref = _imaging_raw(
        params, lens, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1), nodes
    )[0]
    out_phase = fresnel_kernel(lens.v, params.k, flat[2], flat[3])
    value = raw * out_phase / ref

    if quad.check:
        probe = slice(0, min(16, flat[0].size))
        fine = _imaging_raw(params, lens, *(a[probe] for a in flat), 2 * nodes)
        fine_ref = _imaging_raw(
            params, lens, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1), 2 * nodes
        )[0]
        fine_val = fine * out_phase[probe] / fine_ref
        scale = max(float(np.max(np.abs(fine_val))), 1e-300)
        change = float(np.max(np.abs(fine_val - value[probe]))) / scale
        if change > quad.tol:
            raise ConvergenceError(
                f"doubling {nodes} -> {2 * nodes} aperture nodes changed the "
                f"imaging amplitude by {change:.3e} relative (tol {quad.tol:g})"
            )

    if not np.all(np.isfinite(value)):
        raise NumericError("imaging amplitude produced non-finite values")
    return value.reshape(shape) if shape else value[0]


def pattern_image_field(
    params: SourceParams,
    lens: LensSystem,
    weights: np.ndarray,
    x1c: np.ndarray,
    y1c: np.ndarray,
    x2c: np.ndarray,
    y2c: np.ndarray,
    nodes: int,
    workers: int = 1,
) -> np.ndarray:
    """Coherent image-plane field of a weighted object grid.

    Computes A[jy, jx] = sum over object pixels of
    weights[iy, ix] * Phi_I(x1c[ix], y1c[iy]; x2c[jx], y2c[jy]) using the
    separable contraction: object sums first collapse onto the lens-plane
    node lattice, then the masked lens factors propagate to the image grid.
    Output is in the same normalization as imaging_amplitude.

    The node axis is cut into fixed-size blocks; each block yields a partial
    image summed in block order, so any worker count gives identical bits.
    """
    k = params.k
    xi, wxi = _lens_nodes(lens, nodes)
    rho2 = lens.aperture_radius**2
    quad_phase = np.exp(1j * (0.5 * k / lens.v - 0.5 * k / lens.f) * xi * xi) * wxi

    Fx = axis_amplitude(params, x1c[:, None], xi[None, :])   # (npx, nodes)
    Fy = axis_amplitude(params, y1c[:, None], xi[None, :])   # (npy, nodes)
    WF = weights.T @ Fy                                      # (npx, nodes)
    Ex = np.exp(-1j * k * np.outer(xi, x2c) / lens.v)        # (nodes, nx2)
    Ey = np.exp(-1j * k * np.outer(xi, y2c) / lens.v)        # (nodes, ny2)

    blocks = list(range(0, nodes, _NODE_BLOCK))

    def one_block(a0: int) -> np.ndarray:
        a1 = min(a0 + _NODE_BLOCK, nodes)
        G = Fx[:, a0:a1].T @ WF                              # (blk, nodes)
        mask = (xi[a0:a1, None] ** 2 + xi[None, :] ** 2) <= rho2
        H = G * mask * (quad_phase[a0:a1, None] * quad_phase[None, :])
        return Ex[a0:a1, :].T @ (H @ Ey)                     # (nx2, ny2)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(one_block, blocks))
    else:
        partials = [one_block(a0) for a0 in blocks]

    acc = partials[0]
    for part in partials[1:]:
        acc = acc + part

    ref = _imaging_raw(
        params, lens, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1), nodes
    )[0]
    out_phase = fresnel_kernel(lens.v, k, x2c[:, None], y2c[None, :])  # (nx2, ny2)
    field = (acc * out_phase / ref).T                        # (ny2, nx2)
    if not np.all(np.isfinite(field)):
        raise NumericError("image-field contraction produced non-finite values")
    return field
