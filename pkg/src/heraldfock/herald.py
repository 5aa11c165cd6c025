"""Closed-form heralding metrics for one- and two-photon Fock states.

The PDC state is kept to second order in the effective gain ``chi``:

    N { (1 + chi^2)|0> + chi sum_k b_k |1;zeta_k>|1;xi_k>
        + chi^2/2 (sum_k b_k A^+_zeta_k A^+_xi_k)^2 |0> }

For the filtered cases everything is expressed through the K x K matrices

    X = diag(b) Tmat diag(b),    Y = diag(b) Rmat diag(b)

which turns the nested mode sums into traces: for instance the two-photon
part of the single-photon herald has weight ``tr X tr Y + tr XY`` and purity
``(tr X^2)(tr Y^2) + 2 tr X^2 Y^2 + (tr XY)^2``. Perfect and inefficient
detection are the special cases ``Tmat = eta I``; they are implemented from
their own scalar formulas so that the reductions can be tested.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .filtering import DiagonalModeSpectrum, OverlapMatrices, diagonalize_signal

CHI_MAX = {1: 0.5, 2: 0.25}


@dataclass(frozen=True, eq=False)
class HeraldReport:
    """Heralded signal-state figures of merit.

    Conditional metrics are ``None`` when the herald can never fire
    (``probability == 0``).
    """

    n: int
    case: str
    chi: float
    probability: float
    g2: Optional[float]
    purity: Optional[float]
    fidelity: Optional[float]
    d: Optional[np.ndarray] = None
    spectrum: Optional[DiagonalModeSpectrum] = field(default=None, repr=False)

    @property
    def clicked(self) -> bool:
        return self.probability > 0


def _no_click(n, case, chi, spectrum=None):
    return HeraldReport(n=n, case=case, chi=chi, probability=0.0,
                        g2=None, purity=None, fidelity=None, spectrum=spectrum)


def _coeffs(b):
    b = np.abs(np.asarray(b, dtype=complex)).real
    if b.ndim != 1 or b.size == 0:
        raise ValueError("Schmidt coefficients must be a non-empty 1-d array")
    return b


def pair_sums(b):
    """``(sum_k b_k^4, sum_{k<k'} b_k^2 b_k'^2)``."""
    p = _coeffs(b) ** 2
    s4 = float(np.sum(p**2))
    cross = float((np.sum(p) ** 2 - s4) / 2.0)
    return s4, cross


def norm_constant(chi, b) -> float:
    """State normalisation ``N`` of the second-order PDC state."""
    chi = abs(chi)
    s4, cross = pair_sums(b)
    return float((abs(1 + chi**2) ** 2 + chi**2 + chi**4 * (cross + s4)) ** -0.5)


def _check_eta(eta):
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"detector efficiency must lie in [0, 1], got {eta}")


# ---------------------------------------------------------------------------
# single-photon heralds

def herald_single_perfect(chi, b) -> HeraldReport:
    b = _coeffs(b)
    s4, _ = pair_sums(b)
    n = norm_constant(chi, b)
    p = n**2 * abs(chi) ** 2
    if p == 0:
        return _no_click(1, "perfect", chi)
    b0 = np.max(b)
    return HeraldReport(n=1, case="perfect", chi=chi, probability=p, g2=0.0,
                        purity=s4, fidelity=float(b0**2), d=b**2)


def herald_single_inefficient(chi, eta, b) -> HeraldReport:
    _check_eta(eta)
    b = _coeffs(b)
    chi2 = abs(chi) ** 2
    s4, cross = pair_sums(b)
    s = s4 + cross
    n = norm_constant(chi, b)
    p = n**2 * chi2 * eta * (1.0 + 2.0 * chi2 * (1.0 - eta) * s)
    if p == 0:
        return _no_click(1, "inefficient", chi)
    n1sq = n**2 * chi2 * eta / p
    gamma = 4.0 * chi2 * (1.0 - eta) * s
    g2 = gamma / (n1sq * (1.0 + gamma) ** 2)
    s8 = float(np.sum(b**8))
    cross4 = float((s4**2 - s8) / 2.0)
    purity = n1sq**2 * (s4 + 4.0 * chi2**2 * (1.0 - eta) ** 2 * (cross4 + s8))
    fidelity = n1sq * float(np.max(b) ** 2)
    return HeraldReport(n=1, case="inefficient", chi=chi, probability=p, g2=g2,
                        purity=purity, fidelity=fidelity, d=n1sq * b**2)


@dataclass(frozen=True, eq=False)
class FilteredTerms:
    """chi-independent traces shared by the filtered formulas."""

    b: np.ndarray
    spectrum: DiagonalModeSpectrum
    tr_x: float
    tr_y: float
    tr_x2: float
    tr_y2: float
    tr_xy: float
    tr_x2y2: float
    tr_x4: float
    s4: float
    cross: float

    @classmethod
    def build(cls, b, overlaps: OverlapMatrices, spectrum=None):
        b = _coeffs(b)
        k = b.size
        if overlaps.tmat.shape != (k, k) or overlaps.rmat.shape != (k, k):
            raise ValueError("overlap matrices do not match the number of Schmidt modes")
        x = b[:, None] * overlaps.tmat * b[None, :]
        y = b[:, None] * overlaps.rmat * b[None, :]
        x2 = x @ x
        y2 = y @ y
        if spectrum is None:
            spectrum = diagonalize_signal(b, overlaps.tmat)
        s4, cross = pair_sums(b)
        re = lambda z: float(np.real(z))  # noqa: E731
        return cls(
            b=b, spectrum=spectrum,
            tr_x=re(np.trace(x)), tr_y=re(np.trace(y)),
            tr_x2=re(np.trace(x2)), tr_y2=re(np.trace(y2)),
            tr_xy=re(np.sum(x * y.T)),
            tr_x2y2=re(np.sum(x2 * y2.T)),
            tr_x4=re(np.sum(x2 * x2.T)),
            s4=s4, cross=cross,
        )


def herald_single_filtered(chi, b, overlaps: OverlapMatrices,
                           diag: Optional[DiagonalModeSpectrum] = None,
                           terms: Optional[FilteredTerms] = None) -> HeraldReport:
    """Single-photon herald behind a spectral filter and lossy detector."""
    t = terms if terms is not None else FilteredTerms.build(b, overlaps, diag)
    chi2 = abs(chi) ** 2
    n = norm_constant(chi, t.b)
    one = t.tr_x                       # one-pair weight, sum_k b_k^2 T_kk
    two = chi2 * (t.tr_x * t.tr_y + t.tr_xy)   # two-pair weight, one photon lost
    p = n**2 * chi2 * (one + two)
    if p <= 0:
        return _no_click(1, "filtered", chi, t.spectrum)
    n1sq = n**2 * chi2 / p
    gamma_f = 2.0 * two
    g2 = gamma_f / (n1sq * (one + gamma_f) ** 2)
    two_purity = t.tr_x2 * t.tr_y2 + 2.0 * t.tr_x2y2 + t.tr_xy**2
    purity = n1sq**2 * (t.tr_x2 + chi2**2 * two_purity)
    d = n1sq * t.spectrum.lambdas
    return HeraldReport(n=1, case="filtered", chi=chi, probability=p, g2=g2,
                        purity=purity, fidelity=float(d[0]), d=d, spectrum=t.spectrum)


# ---------------------------------------------------------------------------
# two-photon heralds

def herald_double_perfect(chi, b) -> HeraldReport:
    b = _coeffs(b)
    s4, cross = pair_sums(b)
    s = s4 + cross
    n = norm_constant(chi, b)
    p = n**2 * abs(chi) ** 4 * s
    if p == 0:
        return _no_click(2, "perfect", chi)
    s8 = float(np.sum(b**8))
    cross4 = float((s4**2 - s8) / 2.0)
    purity = (cross4 + s8) / s**2
    fidelity = float(np.max(b) ** 4) / s
    return HeraldReport(n=2, case="perfect", chi=chi, probability=p, g2=0.5,
                        purity=purity, fidelity=fidelity, d=b**2 / np.sqrt(s))


def herald_double_inefficient(chi, eta, b) -> HeraldReport:
    """Two-photon herald with a lossy detector.

    To second order only the probability changes (by ``eta^2``).
    """
    _check_eta(eta)
    perfect = herald_double_perfect(chi, b)
    p = perfect.probability * eta**2
    if p == 0:
        return _no_click(2, "inefficient", chi)
    return HeraldReport(n=2, case="inefficient", chi=chi, probability=p, g2=0.5,
                        purity=perfect.purity, fidelity=perfect.fidelity, d=perfect.d)


def herald_double_filtered(chi, b, overlaps: OverlapMatrices,
                           diag: Optional[DiagonalModeSpectrum] = None,
                           terms: Optional[FilteredTerms] = None) -> HeraldReport:
    t = terms if terms is not None else FilteredTerms.build(b, overlaps, diag)
    n = norm_constant(chi, t.b)
    weight = 0.5 * (t.tr_x**2 + t.tr_x2)
    p = n**2 * abs(chi) ** 4 * weight
    if p <= 0:
        return _no_click(2, "filtered", chi, t.spectrum)
    purity = 0.5 * (t.tr_x2**2 + t.tr_x4) / weight**2
    # d_m normalised so that sum d_m^2 + sum_{m<m'} d_m d_m' = 1
    d = t.spectrum.lambdas / np.sqrt(weight)
    return HeraldReport(n=2, case="filtered", chi=chi, probability=p, g2=0.5,
                        purity=purity, fidelity=float(d[0] ** 2), d=d, spectrum=t.spectrum)


def herald(n, chi, b, eta=1.0, overlaps: Optional[OverlapMatrices] = None,
           terms: Optional[FilteredTerms] = None) -> HeraldReport:
    """Dispatch on photon number and detection case.

    With ``overlaps`` (or prebuilt ``terms``) the filtered formulas are used;
    otherwise ``eta == 1`` selects perfect detection and ``eta < 1`` the lossy
    detector.
    """
    if n not in (1, 2):
        raise ValueError(f"herald photon number must be 1 or 2, got {n}")
    if overlaps is not None or terms is not None:
        fn = herald_single_filtered if n == 1 else herald_double_filtered
        return fn(chi, b, overlaps, terms=terms)
    if eta == 1.0:
        return herald_single_perfect(chi, b) if n == 1 else herald_double_perfect(chi, b)
    if n == 1:
        return herald_single_inefficient(chi, eta, b)
    return herald_double_inefficient(chi, eta, b)
