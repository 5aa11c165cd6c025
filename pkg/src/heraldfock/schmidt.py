"""Discretised Schmidt decomposition of a JSA.

The continuous decomposition ``f(w_i, w_s) = sum_k b_k zeta_k(w_i) xi_k(w_s)``
is obtained from the SVD of the quadrature-weighted matrix
``f[i, s] * sqrt(w_i w_s)``. ``zeta`` are idler modes and ``xi`` signal modes;
both are stored as rows sampled on their axis, orthonormal under the grid
quadrature.
"""

from dataclasses import dataclass, replace

import numpy as np

from .pdc import JsaGrid
from .units import Axis

NORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    b: np.ndarray          # (K,) descending, non-negative
    zeta: np.ndarray       # (K, n_idler)
    xi: np.ndarray         # (K, n_signal)
    idler: Axis
    signal: Axis
    cutoff: float = 0.0
    total_weight: float = 1.0   # sum of b_k**2 before truncation

    @property
    def n_modes(self) -> int:
        return self.b.size

    @property
    def truncated(self) -> bool:
        return self.n_modes < min(len(self.idler), len(self.signal)) or self.cutoff > 0

    def retained_weight(self) -> float:
        return float(np.sum(self.b**2))

    def regauged(self, phases) -> "SchmidtDecomposition":
        """Apply ``zeta_k -> e^{i theta_k} zeta_k``, ``xi_k -> e^{-i theta_k} xi_k``."""
        ph = np.exp(1j * np.asarray(phases, dtype=float))[:, None]
        return replace(self, zeta=self.zeta * ph, xi=self.xi * np.conj(ph))


def _fix_gauge(u, vh):
    """Make the largest-magnitude sample of each idler mode real positive."""
    idx = np.argmax(np.abs(u), axis=0)
    pivot = u[idx, np.arange(u.shape[1])]
    phase = pivot / np.abs(pivot)
    return u * np.conj(phase)[None, :], vh * phase[:, None]


def _degenerate_clusters(s, rtol):
    """Index groups of (descending) ``s`` whose values agree within ``rtol * s[0]``."""
    if s.size == 0 or s[0] == 0:
        return []
    tol = rtol * s[0]
    groups, start = [], 0
    for j in range(1, s.size + 1):
        if j == s.size or s[j - 1] - s[j] > tol:
            if j - start > 1 and s[start] > tol:
                groups.append(np.arange(start, j))
            start = j
    return groups


def _canonicalize_degenerate(s, u, vh, idler: Axis, wi, rtol=1e-10):
    """Rotate each degenerate block of modes onto eigenvectors of the frequency operator.

    Within a block of equal singular values the SVD basis is arbitrary; any
    unitary rotation ``U -> U R``, ``Vh -> R^H Vh`` leaves the JSA unchanged.
    Choosing the basis that diagonalises ``<zeta_a| omega |zeta_b>`` makes the
    modes unique (for distinct moments) and backend independent.
    """
    for idx in _degenerate_clusters(s, rtol):
        z = u[:, idx] / wi[:, None]
        moment = (z.conj().T * (idler.weights * idler.samples)[None, :]) @ z
        _, rot = np.linalg.eigh(0.5 * (moment + moment.conj().T))
        u[:, idx] = u[:, idx] @ rot
        vh[idx, :] = rot.conj().T @ vh[idx, :]
    return u, vh


def _order_ties(s, zeta, idler: Axis, rtol=1e-10):
    """Permutation keeping ``s`` descending, ties ordered by ascending mean frequency."""
    order = np.arange(s.size)
    moment = (np.abs(zeta) ** 2 * idler.weights[None, :]) @ idler.samples
    for idx in _degenerate_clusters(s, rtol):
        order[idx] = idx[np.argsort(moment[idx], kind="stable")]
    return order


def schmidt_decompose(jsa: JsaGrid, cutoff: float = 0.0) -> SchmidtDecomposition:
    """Schmidt decompose a normalised JSA.

    Coefficients with ``b_k < cutoff`` are dropped and the remainder is *not*
    renormalised. ``cutoff=0`` keeps every singular value.
    """
    if not 0.0 <= cutoff < 1.0:
        raise ValueError("cutoff must lie in [0, 1)")
    norm2 = jsa.norm_squared()
    if abs(norm2 - 1.0) > NORM_TOL:
        raise ValueError(f"JSA is not normalised (norm^2 = {norm2!r})")

    wi = np.sqrt(jsa.idler.weights)
    ws = np.sqrt(jsa.signal.weights)
    weighted = jsa.amplitude * wi[:, None] * ws[None, :]
    try:
        u, s, vh = np.linalg.svd(weighted, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"SVD of the JSA failed: {exc}") from exc
    u, vh = _canonicalize_degenerate(s, u, vh, jsa.idler, wi)
    u, vh = _fix_gauge(u, vh)

    zeta = (u / wi[:, None]).T
    xi = vh / ws[None, :]
    order = _order_ties(s, zeta, jsa.idler)
    s, zeta, xi = s[order], zeta[order], xi[order]

    total = float(np.sum(s**2))
    keep = s >= cutoff
    if not np.any(keep):
        raise ValueError(f"no Schmidt coefficient survives cutoff {cutoff}")
    return SchmidtDecomposition(b=s[keep], zeta=zeta[keep], xi=xi[keep],
                                idler=jsa.idler, signal=jsa.signal,
                                cutoff=cutoff, total_weight=total)


def entropy_of_entanglement(b) -> float:
    """Entropy of entanglement in bits, ``-sum b_k^2 log2 b_k^2``."""
    p = np.abs(np.asarray(b, dtype=complex)) ** 2
    if np.sum(p) > 1.0 + 1e-8:
        raise ValueError("sum of b_k^2 exceeds one")
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def schmidt_number(b) -> float:
    """Effective mode number ``1 / sum b_k^4``."""
    p = np.abs(np.asarray(b)) ** 2
    return float(np.sum(p) ** 2 / np.sum(p**2))


def reconstruct_jsa(decomp: SchmidtDecomposition) -> JsaGrid:
    amp = np.einsum("k,ki,ks->is", decomp.b, decomp.zeta, decomp.xi)
    if not np.iscomplexobj(decomp.zeta) and not np.iscomplexobj(decomp.xi):
        amp = amp.real
    return JsaGrid(idler=decomp.idler, signal=decomp.signal, amplitude=amp,
                   normalized=not decomp.truncated)
