"""Two-photon position amplitude of the Gaussian-source pair.

The closed form used everywhere is

    Phi(x1, y1; x2, y2) = exp(-(c_env + i c_chirp) * r2)
                          * exp(i k/2 * ((x1^2+y1^2)/s1 + (x2^2+y2^2)/s2))

with r2 = (x1/s1 + x2/s2)^2 + (y1/s1 + y2/s2)^2 and

    D       = 4 s1^2 s2^2 + k^2 sigma^4 (s1+s2)^2
    c_env   = k^2 sigma^2 s1^2 s2^2 / D
    c_chirp = k^3 sigma^4 s1 s2 (s1+s2) / (2 D)

All constant prefactors are collapsed into a normalization that makes
Phi(0,0;0,0) = 1 exactly; only relative values are observable. An independent
Gauss-Legendre quadrature of the underlying source integral, normalized the
same way, serves as the correctness oracle for the closed form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    ConvergenceError,
    NumericError,
    ParameterError,
    ParaxialWarning,
    SourceRegimeWarning,
)

# fraction of min(s1, s2) beyond which transverse coordinates draw a warning
PARAXIAL_FRACTION = 0.05


@dataclass(frozen=True)
class SourceParams:
    """Source and geometry parameters of the photon-pair model.

    wavelength: vacuum wavelength in meters.
    sigma: transverse Gaussian width of the pair-creation region, meters.
    w: longitudinal Gaussian width, meters; inert under the collapsed
       normalization but kept for completeness.
    s1: distance from the source to the object plane, meters.
    s2: distance from the source to the second plane (interference plane or
        imaging lens), meters.
    """

    wavelength: float
    sigma: float
    s1: float
    s2: float
    w: float = 1e-3

    def __post_init__(self):
        for name in ("wavelength", "sigma", "s1", "s2", "w"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0:
                raise ParameterError(f"{name} must be finite and > 0, got {val!r}")
        for name in ("s1", "s2"):
            s = getattr(self, name)
            if s < 50.0 * self.sigma:
                warnings.warn(
                    f"{name} = {s:g} m is below 50*sigma = {50 * self.sigma:g} m; "
                    "the far-plane model is strained",
                    SourceRegimeWarning,
                    stacklevel=3,
                )
            if self.k * self.sigma**2 / (2 * np.pi * s) < 1.0:
                warnings.warn(
                    f"k*sigma^2/(2*pi*{name}) < 1; outside the broad-source "
                    "regime the amplitude was derived for",
                    SourceRegimeWarning,
                    stacklevel=3,
                )

    @property
    def k(self) -> float:
        """Wavenumber 2*pi/wavelength in rad/m."""
        return 2.0 * np.pi / self.wavelength


@dataclass(frozen=True)
class QuadSettings:
    """Gauss-Legendre quadrature controls.

    nodes: nodes per axis; None lets each consumer pick its default (2048 for
      the source oracle, the aperture sampling rule for imaging).
    half_width_sigmas: source-integral truncation half-width in units of sigma.
    check: when True, re-evaluate with doubled nodes and fail on disagreement.
    tol: relative tolerance for the doubling check.
    """

    nodes: Optional[int] = None
    half_width_sigmas: float = 4.0
    check: bool = False
    tol: float = 1e-8

    def __post_init__(self):
        if self.nodes is not None and self.nodes < 64:
            raise ParameterError("quadrature needs at least 64 nodes per axis")
        if self.half_width_sigmas < 4.0:
            raise ParameterError("integration half-width must be >= 4 sigma")
        if self.tol <= 0:
            raise ParameterError("tolerance must be positive")


ORACLE_DEFAULT_NODES = 2048


@lru_cache(maxsize=32)
def _leggauss(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(n)


def envelope_coefficients(params: SourceParams) -> Tuple[float, float]:
    """Return (c_env, c_chirp) of the closed-form amplitude."""
    k, sig, s1, s2 = params.k, params.sigma, params.s1, params.s2
    D = 4 * s1**2 * s2**2 + k**2 * sig**4 * (s1 + s2) ** 2
    c_env = k**2 * sig**2 * s1**2 * s2**2 / D
    c_chirp = k**3 * sig**4 * s1 * s2 * (s1 + s2) / (2 * D)
    return c_env, c_chirp


def constant_phase(params: SourceParams) -> float:
    """Constant phase with tan(phi) = -k sigma^2 (s1+s2) / (2 s1 s2).

    Exposed for completeness; it multiplies the whole amplitude and is excluded
    from the normalized values.
    """
    k, sig, s1, s2 = params.k, params.sigma, params.s1, params.s2
    return float(np.arctan(-k * sig**2 * (s1 + s2) / (2 * s1 * s2)))


def _warn_paraxial(params: SourceParams, *coords) -> None:
    limit = PARAXIAL_FRACTION * min(params.s1, params.s2)
    biggest = max((float(np.max(np.abs(c))) if np.size(c) else 0.0) for c in coords)
    if biggest > limit:
        warnings.warn(
            f"transverse coordinate {biggest:g} m exceeds the paraxial budget "
            f"{limit:g} m",
            ParaxialWarning,
            stacklevel=3,
        )


def closed_form_amplitude(params: SourceParams, x1, y1, x2, y2) -> np.ndarray:
    """Normalized two-photon amplitude Phi(x1, y1; x2, y2).

    Accepts scalars or broadcastable arrays; returns a complex array of the
    broadcast shape (0-d for scalar input). Phi(0,0;0,0) = 1 exactly.
    """
    x1, y1, x2, y2 = np.broadcast_arrays(
        np.asarray(x1, float), np.asarray(y1, float),
        np.asarray(x2, float), np.asarray(y2, float),
    )
    _warn_paraxial(params, x1, y1, x2, y2)
    c_env, c_chirp = envelope_coefficients(params)
    k, s1, s2 = params.k, params.s1, params.s2
    ux = x1 / s1 + x2 / s2
    uy = y1 / s1 + y2 / s2
    r2 = ux * ux + uy * uy
    sphase = 0.5 * k * ((x1 * x1 + y1 * y1) / s1 + (x2 * x2 + y2 * y2) / s2)
    value = np.exp(-c_env * r2 + 1j * (-c_chirp * r2 + sphase))
    if not np.all(np.isfinite(value)):
        raise NumericError("closed-form amplitude produced non-finite values")
    return value


def axis_amplitude(params: SourceParams, a1, a2) -> np.ndarray:
    """One-axis factor of the separable closed form.

    closed_form_amplitude(x1, y1, x2, y2) equals
    axis_amplitude(x1, x2) * axis_amplitude(y1, y2); map evaluators exploit
    this to factorize plane integrals.
    """
    c_env, c_chirp = envelope_coefficients(params)
    k, s1, s2 = params.k, params.s1, params.s2
    a1 = np.asarray(a1, float)
    a2 = np.asarray(a2, float)
    u = a1 / s1 + a2 / s2
    return np.exp(
        -c_env * u * u + 1j * (-c_chirp * u * u + 0.5 * k * (a1 * a1 / s1 + a2 * a2 / s2))
    )


def envelope_magnitude(params: SourceParams, x1, y1, x2, y2) -> np.ndarray:
    """|Phi| from the envelope expression alone (no phases evaluated)."""
    c_env, _ = envelope_coefficients(params)
    ux = np.asarray(x1, float) / params.s1 + np.asarray(x2, float) / params.s2
    uy = np.asarray(y1, float) / params.s1 + np.asarray(y2, float) / params.s2
    return np.exp(-c_env * (ux * ux + uy * uy))


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------


def _axis_integral(params: SourceParams, a1, a2, nodes: int, half_width: float):
    """Single-axis source integral for point pairs (a1, a2), vectorized.

    Integrates exp(-t^2/sigma^2) * exp(i k/2 ((a1-t)^2/s1 + (a2-t)^2/s2)) over
    t in [-half_width, half_width].
    """
    t, wts = _leggauss(nodes)
    t = t * half_width
    wts = wts * half_width
    a1 = np.atleast_1d(np.asarray(a1, float))[:, None]
    a2 = np.atleast_1d(np.asarray(a2, float))[:, None]
    tt = t[None, :]
    phase = 0.5 * params.k * ((a1 - tt) ** 2 / params.s1 + (a2 - tt) ** 2 / params.s2)
    integrand = np.exp(-(tt**2) / params.sigma**2 + 1j * phase)
    return integrand @ wts


def quadrature_oracle_amplitude(
    params: SourceParams, x1, y1, x2, y2, quad: QuadSettings = QuadSettings()
) -> np.ndarray:
    """Two-photon amplitude by direct quadrature of the source integral.

    Independent of the closed form: per-axis Gauss-Legendre integration of the
    Gaussian-times-chirp integrand, normalized by the origin value so that
    oracle(0,0;0,0) = 1 with phases comparable to closed_form_amplitude.
    The x and y axes factorize, so the result is Ix * Iy / I0^2.
    """
    nodes = quad.nodes if quad.nodes is not None else ORACLE_DEFAULT_NODES
    half_width = quad.half_width_sigmas * params.sigma

    def evaluate(n: int) -> np.ndarray:
        x1b, y1b, x2b, y2b = np.broadcast_arrays(
            np.asarray(x1, float), np.asarray(y1, float),
            np.asarray(x2, float), np.asarray(y2, float),
        )
        shape = x1b.shape
        ix = _axis_integral(params, x1b.ravel(), x2b.ravel(), n, half_width)
        iy = _axis_integral(params, y1b.ravel(), y2b.ravel(), n, half_width)
        i0 = _axis_integral(params, 0.0, 0.0, n, half_width)[0]
        return (ix * iy / i0**2).reshape(shape)

    value = evaluate(nodes)
    if quad.check:
        finer = evaluate(2 * nodes)
        scale = max(float(np.max(np.abs(finer))), 1e-300)
        change = float(np.max(np.abs(finer - value))) / scale
        if change > quad.tol:
            raise ConvergenceError(
                f"doubling {nodes} -> {2 * nodes} nodes changed the oracle by "
                f"{change:.3e} relative (tol {quad.tol:g})"
            )
    if not np.all(np.isfinite(value)):
        raise NumericError("quadrature oracle produced non-finite values")
    return value


# ---------------------------------------------------------------------------
# derived source properties
# ---------------------------------------------------------------------------


def anticorrelation_locus(params: SourceParams, x1, y1) -> Tuple[np.ndarray, np.ndarray]:
    """Peak of |Phi| over (x2, y2) for fixed (x1, y1): (-x1 s2/s1, -y1 s2/s1)."""
    ratio = params.s2 / params.s1
    return -ratio * np.asarray(x1, float), -ratio * np.asarray(y1, float)


def correlation_width(params: SourceParams) -> float:
    """1/e half-width of |Phi|^2 in the correlation variable x1/s1 + x2/s2."""
    c_env, _ = envelope_coefficients(params)
    return float(1.0 / np.sqrt(2.0 * c_env))
