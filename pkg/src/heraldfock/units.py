"""Unit conversions and the discretised frequency grid.

All frequencies are angular frequencies in s^-1. Wavelengths only appear at
the boundary (configs and reports) and are given in nanometres.
"""

from dataclasses import dataclass

import numpy as np

C_LIGHT = 2.99792458e8  # m/s, exact

_FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))


def wavelength_nm_to_omega(wavelength_nm):
    """Angular frequency (s^-1) of a vacuum wavelength given in nm."""
    if np.any(np.asarray(wavelength_nm) <= 0):
        raise ValueError("wavelength must be positive")
    return 2.0 * np.pi * C_LIGHT / (np.asarray(wavelength_nm) * 1e-9)


def omega_to_wavelength_nm(omega):
    if np.any(np.asarray(omega) <= 0):
        raise ValueError("angular frequency must be positive")
    return 2.0 * np.pi * C_LIGHT / np.asarray(omega) * 1e9


def fwhm_nm_to_sigma(center_wavelength_nm: float, fwhm_nm: float) -> float:
    """Convert a spectral FWHM in nm to the Gaussian width of an amplitude.

    The returned ``sigma`` is such that ``exp(-nu**2 / (2 sigma**2))`` has the
    given full width at half maximum once mapped to angular frequency with the
    small-bandwidth approximation ``d omega = 2 pi c d lambda / lambda**2``.

    >>> round(fwhm_nm_to_sigma(400.0, 1.0) / 1e12, 2)
    5.0
    """
    if center_wavelength_nm <= 0 or fwhm_nm <= 0:
        raise ValueError("wavelength and FWHM must be positive")
    lam = center_wavelength_nm * 1e-9
    fwhm_omega = 2.0 * np.pi * C_LIGHT * (fwhm_nm * 1e-9) / lam**2
    return float(fwhm_omega / _FWHM_PER_SIGMA)


def sigma_to_fwhm_nm(sigma: float, center_wavelength_nm: float) -> float:
    """Inverse of :func:`fwhm_nm_to_sigma`."""
    if sigma <= 0 or center_wavelength_nm <= 0:
        raise ValueError("sigma and wavelength must be positive")
    lam = center_wavelength_nm * 1e-9
    fwhm_omega = sigma * _FWHM_PER_SIGMA
    return float(fwhm_omega * lam**2 / (2.0 * np.pi * C_LIGHT) * 1e9)


@dataclass(frozen=True)
class GridSpec:
    """Uniform square grid: ``n_points`` samples per axis over ``span``."""

    n_points: int
    span: float
    center: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not self.span > 0:
            raise ValueError(f"span must be positive, got {self.span}")

    @property
    def spacing(self) -> float:
        return self.span / (self.n_points - 1)


@dataclass(frozen=True, eq=False)
class Axis:
    """Sample frequencies with per-sample quadrature weights."""

    samples: np.ndarray
    spacing: float
    weights: np.ndarray

    def __post_init__(self):
        if self.samples.ndim != 1 or self.samples.shape != self.weights.shape:
            raise ValueError("samples and weights must be 1-d arrays of equal length")
        if np.any(np.diff(self.samples) <= 0):
            raise ValueError("axis samples must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def __len__(self):
        return self.samples.size

    def same_as(self, other: "Axis", rtol: float = 1e-12) -> bool:
        return (
            len(self) == len(other)
            and np.allclose(self.samples, other.samples, rtol=rtol, atol=0.0)
            and np.allclose(self.weights, other.weights, rtol=rtol, atol=0.0)
        )


def uniform_axis(n_points: int, span: float, center: float) -> Axis:
    spec = GridSpec(n_points, span, center)
    # offsets built symmetrically so that samples mirror exactly about center
    offsets = (np.arange(spec.n_points) - (spec.n_points - 1) / 2.0) * spec.spacing
    samples = center + offsets
    weights = np.full(spec.n_points, spec.spacing)
    return Axis(samples=samples, spacing=spec.spacing, weights=weights)


def build_axis(spec: GridSpec):
    """Return ``(idler_axis, signal_axis)``, two identical uniform axes."""
    idler = uniform_axis(spec.n_points, spec.span, spec.center)
    signal = uniform_axis(spec.n_points, spec.span, spec.center)
    return idler, signal
