"""Invert and sweep the heralding metrics.

The main question answered here: for a given detector and idler filter, what
is the largest gain ``chi`` that still delivers a target fidelity, and how
often does the herald fire at that gain?
"""

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .filtering import FilterSpec, overlap_matrices
from .herald import CHI_MAX, FilteredTerms, HeraldReport, herald
from .pdc import CrystalSpec, PmfKind, PumpSpec, build_jsa
from .schmidt import SchmidtDecomposition, entropy_of_entanglement, schmidt_decompose
from .units import GridSpec

BISECT_ITERATIONS = 60
PROBE_POINTS = 8
FIDELITY_TOL = 1e-6
FLAT_TOL = 1e-12

OK = "ok"
CHI_INDEPENDENT = "chi-independent"
UNREACHABLE = "unreachable"
AT_BOUND = "at-bound"


class NonMonotoneError(RuntimeError):
    """Fidelity is not non-increasing in chi; bisection would be unsafe."""


@dataclass(frozen=True)
class ChiSolution:
    status: str
    chi: Optional[float]
    fidelity: Optional[float]
    report: Optional[HeraldReport] = None

    @property
    def success(self) -> bool:
        return self.chi is not None


def herald_function(n: int, decomp: SchmidtDecomposition,
                    spec: FilterSpec) -> Callable[[float], HeraldReport]:
    """``chi -> HeraldReport`` with every chi-independent piece precomputed."""
    if spec.kind == "none":
        return lambda chi: herald(n, chi, decomp.b, eta=spec.eta)
    terms = FilteredTerms.build(decomp.b, overlap_matrices(decomp, spec))
    return lambda chi: herald(n, chi, decomp.b, terms=terms)


def _fidelity(fn, chi):
    rep = fn(chi)
    return -math.inf if rep.fidelity is None else rep.fidelity


def solve_chi_for_fidelity(target: float, eta: float, spec: FilterSpec,
                           decomp: SchmidtDecomposition, n: int = 1,
                           chi_max: Optional[float] = None) -> ChiSolution:
    """Largest ``chi`` in ``[0, chi_max]`` whose fidelity is still >= target.

    Statuses: ``ok`` (root found by bisection), ``at-bound`` (target met on the
    whole interval, chi_max returned), ``chi-independent`` (fidelity flat in
    chi; ``chi`` is chi_max if feasible, else ``None``) and ``unreachable``
    (even chi -> 0 falls short). Raises :class:`NonMonotoneError` if an
    8-point probe finds the fidelity increasing anywhere.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target fidelity must lie in (0, 1)")
    chi_max = CHI_MAX[n] if chi_max is None else chi_max
    spec = spec.with_eta(eta)
    fn = herald_function(n, decomp, spec)

    # chi = 0 never clicks; probe from a tiny positive gain instead
    lo = chi_max * 1e-9
    grid = np.linspace(lo, chi_max, PROBE_POINTS)
    fids = np.array([_fidelity(fn, c) for c in grid])
    if not np.all(np.isfinite(fids)):
        return ChiSolution(UNREACHABLE, None, None)
    scale = max(1.0, float(np.max(np.abs(fids))))
    if np.any(np.diff(fids) > FLAT_TOL * scale):
        raise NonMonotoneError(f"fidelity increases with chi for {spec.label()}")
    if fids[0] - fids[-1] <= FLAT_TOL * scale:
        if fids[0] >= target:
            return ChiSolution(CHI_INDEPENDENT, chi_max, float(fids[-1]), fn(chi_max))
        return ChiSolution(CHI_INDEPENDENT, None, float(fids[0]))
    if fids[0] < target:
        return ChiSolution(UNREACHABLE, None, float(fids[0]))
    if fids[-1] >= target:
        return ChiSolution(AT_BOUND, chi_max, float(fids[-1]), fn(chi_max))

    a, b = lo, chi_max
    for _ in range(BISECT_ITERATIONS):
        mid = 0.5 * (a + b)
        if _fidelity(fn, mid) >= target:
            a = mid
        else:
            b = mid
        if b - a <= 1e-15 * chi_max:
            break
    rep = fn(a)
    if abs(rep.fidelity - target) > FIDELITY_TOL:
        raise RuntimeError(
            f"bisection did not converge: F({a}) = {rep.fidelity}, target {target}")
    return ChiSolution(OK, a, rep.fidelity, rep)


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SourceConfig:
    pump: PumpSpec
    crystal: CrystalSpec
    grid: GridSpec
    kind: PmfKind = PmfKind.SINC
    cutoff: float = 0.0


class DecompositionCache:
    """Thread-safe memo of Schmidt decompositions keyed by source config."""

    def __init__(self):
        self._lock = threading.Lock()
        self._store = {}

    def get(self, source: SourceConfig) -> SchmidtDecomposition:
        with self._lock:
            hit = self._store.get(source)
            if hit is None:
                jsa = build_jsa(source.pump, source.crystal, source.grid, source.kind)
                hit = schmidt_decompose(jsa, source.cutoff)
                self._store[source] = hit
            return hit

    def __len__(self):
        return len(self._store)


DEFAULT_CACHE = DecompositionCache()


@dataclass(frozen=True)
class SweepRequest:
    """A filter-width sweep.

    ``filters`` entries are ``"none"``, ``"delta"`` or a Gaussian width
    ``sigma_f`` in s^-1; Gaussian and delta filters are centred on ``mu_f``
    (default: the degenerate frequency).
    """

    source: SourceConfig
    n: int
    eta: float
    filters: Sequence
    target: float
    chi_max: Optional[float] = None
    mu_f: Optional[float] = None

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("n must be 1 or 2")
        if not 0.0 < self.target < 1.0:
            raise ValueError("target fidelity must lie in (0, 1)")
        if self.chi_max is not None and not 0 < self.chi_max <= CHI_MAX[self.n]:
            raise ValueError(f"chi_max must lie in (0, {CHI_MAX[self.n]}] for n={self.n}")


@dataclass(frozen=True)
class SweepRow:
    sigma_f: float            # 0 for delta, inf for no filter
    label: str
    chi_star: Optional[float]
    probability: Optional[float]
    fidelity: Optional[float]
    entropy: float
    flags: tuple = field(default_factory=tuple)


def filter_sort_key(entry):
    if entry == "delta":
        return 0.0
    if entry == "none":
        return math.inf
    return float(entry)


def make_filter(entry, mu_f, eta) -> FilterSpec:
    if entry == "none":
        return FilterSpec.none(eta)
    if entry == "delta":
        return FilterSpec.delta(mu_f, eta)
    return FilterSpec.gaussian(mu_f, float(entry), eta)


def _sweep_row(entry, req: SweepRequest, decomp, entropy) -> SweepRow:
    mu_f = req.source.pump.mu if req.mu_f is None else req.mu_f
    spec = make_filter(entry, mu_f, req.eta)
    sigma = filter_sort_key(entry)
    try:
        sol = solve_chi_for_fidelity(req.target, req.eta, spec, decomp, req.n, req.chi_max)
    except (NonMonotoneError, RuntimeError) as exc:
        return SweepRow(sigma, spec.label(), None, None, None, entropy,
                        ("solver-error", type(exc).__name__))
    flags = () if sol.status == OK else (sol.status,)
    if sol.status == CHI_INDEPENDENT and not sol.success:
        flags = flags + (UNREACHABLE,)
    prob = sol.report.probability if sol.report is not None else None
    return SweepRow(sigma, spec.label(), sol.chi, prob, sol.fidelity, entropy, flags)


def sweep_filter_width(req: SweepRequest, threads: int = 1,
                       cache: Optional[DecompositionCache] = None) -> list:
    """One :class:`SweepRow` per filter, ordered by filter width."""
    cache = DEFAULT_CACHE if cache is None else cache
    decomp = cache.get(req.source)
    entropy = entropy_of_entanglement(decomp.b)
    entries = sorted(req.filters, key=filter_sort_key)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda e: _sweep_row(e, req, decomp, entropy), entries))
    else:
        rows = [_sweep_row(e, req, decomp, entropy) for e in entries]
    return rows


def best_probability(rows) -> Optional[float]:
    probs = [r.probability for r in rows if r.probability is not None]
    return max(probs) if probs else None


# ---------------------------------------------------------------------------
# surfaces

SURFACE_COLUMNS = ("chi", "eta", "probability", "g2", "purity", "fidelity")


def metric_surface(chi_grid, eta_grid, case: str, n: int,
                   decomp: SchmidtDecomposition, spec: Optional[FilterSpec] = None,
                   threads: int = 1) -> np.ndarray:
    """Dense table of metrics over a ``chi x eta`` grid.

    ``case`` is ``perfect`` (eta ignored, fixed to 1), ``inefficient`` or
    ``filtered`` (needs ``spec``; its own eta is replaced by the grid value).
    Returns an array with columns :data:`SURFACE_COLUMNS`; conditional metrics
    of points that never click are NaN in this table.
    """
    if case not in ("perfect", "inefficient", "filtered"):
        raise ValueError(f"unknown detection case {case!r}")
    if case == "filtered" and spec is None:
        raise ValueError("filtered surface needs a filter spec")
    chi_grid = np.asarray(chi_grid, dtype=float)
    eta_grid = np.asarray([1.0] if case == "perfect" else eta_grid, dtype=float)
    if np.any(chi_grid < 0) or np.any(chi_grid > CHI_MAX[n] + 1e-12):
        raise ValueError(f"chi grid must lie in [0, {CHI_MAX[n]}] for n={n}")

    def column(eta):
        if case == "filtered":
            fn = herald_function(n, decomp, spec.with_eta(eta))
        else:
            fn = lambda chi: herald(n, chi, decomp.b, eta=eta)  # noqa: E731
        out = []
        for chi in chi_grid:
            r = fn(chi)
            vals = [r.probability, r.g2, r.purity, r.fidelity]
            out.append([chi, eta] + [np.nan if v is None else v for v in vals])
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(column, eta_grid))
    else:
        cols = [column(eta) for eta in eta_grid]
    return np.array([row for col in cols for row in col], dtype=float)
