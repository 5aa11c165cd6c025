"""Pump envelope, phase matching and the joint spectral amplitude (JSA).

Frequencies inside this module are offsets ``nu = omega - mu`` from the
degenerate centre ``mu = mu_p / 2`` unless stated otherwise. The phase mismatch
is expanded to first order around perfect quasi-phase matching, so the poling
period never appears explicitly; ``delta0`` carries any residual mismatch.
"""

from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources

import numpy as np

from .units import Axis, GridSpec, build_axis

DEFAULT_GAMMA = 0.193


class PmfKind(str, Enum):
    SINC = "sinc"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PumpSpec:
    mu_p: float
    sigma_p: float

    def __post_init__(self):
        if not self.sigma_p > 0:
            raise ValueError("pump width sigma_p must be positive")
        if not self.mu_p > 0:
            raise ValueError("pump centre frequency must be positive")

    @property
    def mu(self) -> float:
        """Degenerate signal/idler centre frequency."""
        return self.mu_p / 2.0


@dataclass(frozen=True)
class CrystalSpec:
    """Waveguide length (m), group slownesses (s/m) and PMF constants."""

    length: float
    k_pump: float
    k_signal: float
    k_idler: float
    delta0: float = 0.0
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("crystal length must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True, eq=False)
class JsaGrid:
    idler: Axis
    signal: Axis
    amplitude: np.ndarray  # [idler, signal]
    normalized: bool = False

    def norm_squared(self) -> float:
        w = np.outer(self.idler.weights, self.signal.weights)
        return float(np.sum(np.abs(self.amplitude) ** 2 * w))

    def normalize(self) -> "JsaGrid":
        norm2 = self.norm_squared()
        if not norm2 > 0:
            raise ValueError("JSA vanishes on the grid; the grid misses its support")
        return replace(self, amplitude=self.amplitude / np.sqrt(norm2), normalized=True)


def pump_envelope(nu_sum, pump: PumpSpec):
    """Gaussian pump amplitude at ``nu_sum = omega_i + omega_s - mu_p``."""
    nu_sum = np.asarray(nu_sum, dtype=float)
    return np.exp(-(nu_sum**2) / (2.0 * pump.sigma_p**2))


def phase_mismatch(nu_i, nu_s, crystal: CrystalSpec):
    """First-order phase mismatch (1/m) at offsets ``nu_i``, ``nu_s``."""
    nu_i = np.asarray(nu_i, dtype=float)
    nu_s = np.asarray(nu_s, dtype=float)
    return (
        (crystal.k_signal - crystal.k_pump) * nu_s
        + (crystal.k_idler - crystal.k_pump) * nu_i
        + crystal.delta0
    )


def sinc(x):
    """sin(x)/x, using a short series near the removable singularity."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 1.0 - xs**2 / 6.0 + xs**4 / 120.0
    xl = x[~small]
    out[~small] = np.sin(xl) / xl
    return out


def phase_matching(delta_k, crystal: CrystalSpec, kind=PmfKind.SINC):
    delta_k = np.asarray(delta_k, dtype=float)
    kind = PmfKind(kind)
    if kind is PmfKind.SINC:
        return sinc(crystal.length * delta_k / 2.0)
    return np.exp(-crystal.gamma * crystal.length**2 * delta_k**2 / 4.0)


def jsa_on_axes(pump: PumpSpec, crystal: CrystalSpec, idler: Axis, signal: Axis,
                kind=PmfKind.SINC) -> JsaGrid:
    """Sample and normalise the JSA on explicit axes."""
    nu_i = idler.samples[:, None] - pump.mu
    nu_s = signal.samples[None, :] - pump.mu
    # elementwise fill only: no reductions, so the matrix is schedule independent
    alpha = pump_envelope(nu_i + nu_s, pump)
    phi = phase_matching(phase_mismatch(nu_i, nu_s, crystal), crystal, kind)
    return JsaGrid(idler=idler, signal=signal, amplitude=alpha * phi).normalize()


def build_jsa(pump: PumpSpec, crystal: CrystalSpec, grid: GridSpec,
              kind=PmfKind.SINC) -> JsaGrid:
    """Normalised JSA ``f[i, s]`` on the square grid described by ``grid``.

    Raises ``ValueError`` if the sampled amplitude is identically zero.
    """
    idler, signal = build_axis(grid)
    return jsa_on_axes(pump, crystal, idler, signal, kind)


def symmetric_length(sigma_p: float, k_signal: float, k_idler: float,
                     gamma: float = DEFAULT_GAMMA) -> float:
    """Waveguide length making the Gaussian-PMF JSA separable.

    Assumes the symmetric group-velocity condition
    ``k_pump = (k_signal + k_idler) / 2``; the result zeroes
    :func:`separability_residual`, i.e. ``L**2 = 8 / (gamma sigma_p**2 dk'**2)``.
    """
    dk = k_signal - k_idler
    if dk == 0:
        raise ValueError("k_signal == k_idler: no finite separable length")
    if not sigma_p > 0 or not gamma > 0:
        raise ValueError("sigma_p and gamma must be positive")
    return float(np.sqrt(8.0 / (gamma * sigma_p**2 * dk**2)))


def separability_residual(pump: PumpSpec, crystal: CrystalSpec) -> float:
    """Coefficient of the cross term of the Gaussian-PMF JSA exponent (s^2).

    Zero means the Gaussian-approximation JSA factorises.
    """
    return float(
        2.0 / pump.sigma_p**2
        + crystal.gamma * crystal.length**2
        * (crystal.k_signal - crystal.k_pump) * (crystal.k_idler - crystal.k_pump)
    )


def symmetric_crystal(pump: PumpSpec, k_signal: float, k_idler: float,
                      gamma: float = DEFAULT_GAMMA) -> CrystalSpec:
    """Crystal meeting the symmetric extended phase-matching conditions."""
    length = symmetric_length(pump.sigma_p, k_signal, k_idler, gamma)
    return CrystalSpec(length=length, k_pump=(k_signal + k_idler) / 2.0,
                       k_signal=k_signal, k_idler=k_idler, gamma=gamma)


# ---------------------------------------------------------------------------
# bundled dispersion data

DISPERSION_TABLES = {"ppktp": "ppktp_group_slowness.txt"}


def load_dispersion_table(name: str = "ppktp"):
    """Return ``{wavelength_nm: {"y": k', "z": k'}}`` from a bundled table."""
    try:
        fname = DISPERSION_TABLES[name]
    except KeyError:
        raise ValueError(f"unknown dispersion table {name!r}; known: {sorted(DISPERSION_TABLES)}")
    text = resources.files("heraldfock.data").joinpath(fname).read_text()
    table = {}
    axes = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if fields and fields[0] == "wavelength_nm":
                axes = [f.split("_", 1)[1] for f in fields[1:]]
            continue
        if axes is None:
            raise ValueError(f"dispersion table {name!r} has no column header")
        values = [float(v) for v in line.split()]
        table[values[0]] = dict(zip(axes, values[1:]))
    return table


def group_slowness(pump_wavelength_nm: float, axes=("y", "y", "z"), table: str = "ppktp"):
    """Look up ``(k_pump, k_signal, k_idler)`` for degenerate type-II PDC.

    ``axes`` gives the crystal axis of the pump, signal and idler fields.
    Only wavelengths present in the table are supported (no interpolation).
    """
    data = load_dispersion_table(table)
    lam_p = float(pump_wavelength_nm)
    lam_s = 2.0 * lam_p
    for lam in (lam_p, lam_s):
        if lam not in data:
            raise ValueError(
                f"{lam} nm is not tabulated in {table!r}; available: {sorted(data)}")
    pa, sa, ia = axes
    return data[lam_p][pa], data[lam_s][sa], data[lam_s][ia]
