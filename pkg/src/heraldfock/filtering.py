"""Heralding-arm spectral filter, detector loss and induced mode overlaps.

A filter with amplitude transmission ``Tt(w)`` followed by a detector of
efficiency ``eta`` acts on the idler like a frequency dependent beamsplitter
with ``T = Tt sqrt(eta)`` and ``R = sqrt(1 - |Tt|^2 eta)``. Projected onto the
idler Schmidt modes this gives the Hermitian matrices

    Tmat[k, k'] = int |T(w)|^2 zeta_k(w) conj(zeta_k'(w)) dw
    Rmat[k, k'] = int |R(w)|^2 zeta_k(w) conj(zeta_k'(w)) dw

which are all the heralding formulas need.
"""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .schmidt import SchmidtDecomposition
from .units import Axis

FILTER_KINDS = ("none", "gaussian", "delta", "table")


@dataclass(frozen=True, eq=False)
class FilterSpec:
    """Amplitude filter on the idler arm plus detector efficiency.

    Use the constructors :meth:`none`, :meth:`gaussian`, :meth:`delta` and
    :meth:`table` rather than the raw fields. ``delta_width`` is the bandwidth
    assigned to the single transmitted frequency of a delta filter; ``None``
    means one grid spacing of the idler axis it is applied to.
    """

    kind: str = "none"
    eta: float = 1.0
    mu_f: Optional[float] = None
    sigma_f: Optional[float] = None
    table_omega: Optional[np.ndarray] = None
    table_transmission: Optional[np.ndarray] = None
    delta_width: Optional[float] = None

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"detector efficiency must lie in [0, 1], got {self.eta}")
        if self.kind == "gaussian" and not (self.sigma_f and self.sigma_f > 0):
            raise ValueError("gaussian filter needs sigma_f > 0")
        if self.kind in ("gaussian", "delta") and self.mu_f is None:
            raise ValueError(f"{self.kind} filter needs a centre frequency mu_f")
        if self.kind == "table":
            om, tr = self.table_omega, self.table_transmission
            if om is None or tr is None or om.shape != tr.shape or om.size < 2:
                raise ValueError("table filter needs matching omega/transmission arrays")
            if np.any(np.diff(om) <= 0):
                raise ValueError("table frequencies must be strictly increasing")
            if np.any(tr < 0) or np.any(tr > 1):
                raise ValueError("table transmission must lie in [0, 1]")

    @classmethod
    def none(cls, eta=1.0):
        return cls(kind="none", eta=eta)

    @classmethod
    def gaussian(cls, mu_f, sigma_f, eta=1.0):
        return cls(kind="gaussian", eta=eta, mu_f=float(mu_f), sigma_f=float(sigma_f))

    @classmethod
    def delta(cls, mu_f, eta=1.0, width=None):
        return cls(kind="delta", eta=eta, mu_f=float(mu_f), delta_width=width)

    @classmethod
    def table(cls, omega, transmission, eta=1.0):
        return cls(kind="table", eta=eta,
                   table_omega=np.asarray(omega, dtype=float),
                   table_transmission=np.asarray(transmission, dtype=float))

    @classmethod
    def from_file(cls, path, eta=1.0):
        """Two-column text file: omega (s^-1) and amplitude transmission."""
        data = np.loadtxt(Path(path), comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
        return cls.table(data[:, 0], data[:, 1], eta=eta)

    def with_eta(self, eta) -> "FilterSpec":
        return replace(self, eta=eta)

    def label(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian(sigma_f={self.sigma_f:.6g})"
        return self.kind


def filter_transmission(spec: FilterSpec, axis: Axis) -> np.ndarray:
    """Amplitude transmission ``Tt`` sampled on ``axis`` (not for delta filters).

    Table filters are linearly interpolated and block outside the tabulated band.
    """
    w = axis.samples
    if spec.kind == "none":
        return np.ones_like(w)
    if spec.kind == "gaussian":
        return np.exp(-((w - spec.mu_f) ** 2) / (2.0 * spec.sigma_f**2))
    if spec.kind == "table":
        return np.interp(w, spec.table_omega, spec.table_transmission, left=0.0, right=0.0)
    raise ValueError("delta filters have no sampled transmission profile")


def fold_detector(spec: FilterSpec, axis: Axis):
    """Effective ``(T, R)`` of filter plus inefficient detector on ``axis``."""
    tt = filter_transmission(spec, axis)
    t = tt * np.sqrt(spec.eta)
    r = np.sqrt(np.clip(1.0 - np.abs(tt) ** 2 * spec.eta, 0.0, None))
    return t, r


def _delta_width(spec: FilterSpec, axis: Axis) -> float:
    return axis.spacing if spec.delta_width is None else float(spec.delta_width)


def _sample_modes(zeta: np.ndarray, axis: Axis, omega: float) -> np.ndarray:
    """Linearly interpolate every row of ``zeta`` at ``omega``."""
    w = axis.samples
    if not w[0] <= omega <= w[-1]:
        raise ValueError("delta filter centre lies outside the idler axis")
    j = int(np.clip(np.searchsorted(w, omega) - 1, 0, w.size - 2))
    frac = (omega - w[j]) / (w[j + 1] - w[j])
    return (1.0 - frac) * zeta[:, j] + frac * zeta[:, j + 1]


@dataclass(frozen=True, eq=False)
class OverlapMatrices:
    tmat: np.ndarray
    rmat: np.ndarray

    @property
    def t_diag(self) -> np.ndarray:
        """Per-mode amplitude transmissions ``T_zeta_k``."""
        return np.sqrt(np.clip(self.tmat.diagonal().real, 0.0, None))

    @property
    def r_diag(self) -> np.ndarray:
        return np.sqrt(np.clip(self.rmat.diagonal().real, 0.0, None))

    @classmethod
    def lossy(cls, n_modes: int, eta: float) -> "OverlapMatrices":
        """Frequency independent loss, ``Tmat = eta I``."""
        eye = np.eye(n_modes)
        return cls(tmat=eta * eye, rmat=(1.0 - eta) * eye)


def _check_axis(decomp: SchmidtDecomposition, axis: Optional[Axis]):
    if axis is not None and not axis.same_as(decomp.idler):
        raise ValueError("filter axis does not match the decomposition's idler axis")


def overlap_matrices(decomp: SchmidtDecomposition, spec: FilterSpec,
                     axis: Optional[Axis] = None) -> OverlapMatrices:
    """Tmat/Rmat for ``spec`` acting on the idler modes of ``decomp``."""
    _check_axis(decomp, axis)
    ax = decomp.idler
    z = decomp.zeta
    gram = (z * ax.weights[None, :]) @ z.conj().T
    if spec.kind == "delta":
        zc = _sample_modes(z, ax, spec.mu_f)
        tmat = spec.eta * _delta_width(spec, ax) * np.outer(zc, zc.conj())
        return OverlapMatrices(tmat=tmat, rmat=gram - tmat)
    t, r = fold_detector(spec, ax)
    tmat = (z * (ax.weights * np.abs(t) ** 2)[None, :]) @ z.conj().T
    rmat = (z * (ax.weights * np.abs(r) ** 2)[None, :]) @ z.conj().T
    return OverlapMatrices(tmat=tmat, rmat=rmat)


# ---------------------------------------------------------------------------
# explicit mode functions (only needed for plots and cross checks)

def modified_gram_schmidt(vectors: np.ndarray, weights: np.ndarray, drop_tol: float = 1e-10):
    """Orthonormalise the rows of ``vectors`` under ``<a, b> = sum w conj(a) b``.

    Modified Gram-Schmidt with one re-orthogonalisation pass. A row whose
    residual norm falls below ``drop_tol`` times its original norm is treated
    as linearly dependent and dropped.

    Returns
    -------
    basis : ndarray, shape (J, n)
    coeffs : ndarray, shape (K, J)
        ``coeffs[k, j] = <basis_j, vectors_k>`` so that
        ``vectors ~= coeffs @ basis``.
    """
    def inner(a, b):
        return np.sum(weights * np.conj(a) * b)

    basis = []
    for v in vectors:
        norm0 = np.sqrt(inner(v, v).real)
        if norm0 == 0.0:
            continue
        r = v.astype(complex)
        for _ in range(2):
            for q in basis:
                r = r - inner(q, r) * q
        norm = np.sqrt(inner(r, r).real)
        if norm < drop_tol * norm0:
            continue
        basis.append(r / norm)
    basis = np.array(basis, dtype=complex).reshape(len(basis), vectors.shape[1])
    coeffs = (np.conj(basis) * weights[None, :]) @ vectors.T
    return basis, coeffs.T


@dataclass(frozen=True, eq=False)
class FilteredModes:
    phi: np.ndarray      # orthonormal transmitted idler modes (J, n)
    u: np.ndarray        # (K, J)
    varphi: np.ndarray   # orthonormal reflected idler modes (J', n)
    v: np.ndarray        # (K, J')

    @property
    def rank_t(self) -> int:
        return self.phi.shape[0]

    @property
    def rank_r(self) -> int:
        return self.varphi.shape[0]


def orthogonalize_filtered_modes(decomp: SchmidtDecomposition, spec: FilterSpec,
                                 drop_tol: float = 1e-10) -> FilteredModes:
    """Gram-Schmidt the filtered idler modes ``T zeta_k`` and ``R zeta_k``.

    Modes are processed in order of descending Schmidt coefficient. For a
    delta filter the transmitted set is rank one and ``phi`` is a single grid
    bin at the sample nearest ``mu_f``.
    """
    ax = decomp.idler
    z = decomp.zeta
    if spec.kind == "delta":
        zc = _sample_modes(z, ax, spec.mu_f)
        j = int(np.argmin(np.abs(ax.samples - spec.mu_f)))
        phi = np.zeros((1, len(ax)), dtype=complex)
        phi[0, j] = 1.0 / np.sqrt(ax.weights[j])
        u = (np.sqrt(spec.eta * _delta_width(spec, ax)) * zc)[:, None]
        varphi, v = modified_gram_schmidt(z, ax.weights, drop_tol)
        return FilteredModes(phi=phi, u=u, varphi=varphi, v=v)
    t, r = fold_detector(spec, ax)
    phi, u = modified_gram_schmidt(z * t[None, :], ax.weights, drop_tol)
    varphi, v = modified_gram_schmidt(z * r[None, :], ax.weights, drop_tol)
    return FilteredModes(phi=phi, u=u, varphi=varphi, v=v)


# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiagonalModeSpectrum:
    """Eigen-decomposition of ``M = diag(b) Tmat diag(b)``.

    ``coeffs[m, k]`` are the coefficients of the diagonal signal mode
    ``tau_m = sum_k coeffs[m, k] xi_k``.
    """

    lambdas: np.ndarray
    coeffs: np.ndarray

    def signal_modes(self, decomp: SchmidtDecomposition) -> np.ndarray:
        return self.coeffs @ decomp.xi


def diagonalize_signal(b, tmat) -> DiagonalModeSpectrum:
    b = np.asarray(b, dtype=float)
    m = b[:, None] * np.asarray(tmat) * b[None, :]
    m = 0.5 * (m + m.conj().T)
    lam, vec = np.linalg.eigh(m)
    order = np.argsort(lam)[::-1]
    # M is PSD; tiny negative eigenvalues are rounding noise
    lam = np.clip(lam[order], 0.0, None)
    return DiagonalModeSpectrum(lambdas=lam, coeffs=vec[:, order].T)
