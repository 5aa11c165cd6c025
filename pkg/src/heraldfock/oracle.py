"""Brute-force validator working directly in the frequency-bin Fock basis.

Nothing here uses the Schmidt decomposition. The second-order PDC state is
built by applying the pair-creation operator ``B^+ = sum F[i,s] a_i^+ s_s^+``
to the vacuum, each idler bin is sent through its own beamsplitter, the
heralding register is projected on ``n`` photons and everything else is traced
out. Only meant for coarse grids (a few tens of bins).

Fock basis states are keyed by sorted tuples of mode indices (a multiset), so
``(3, 3)`` is two photons in mode 3 and ``(1, 4)`` one photon each in modes 1
and 4. Idler modes ``0..n-1`` are transmitted bins, ``n..2n-1`` reflected bins.
"""

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .filtering import FilterSpec, fold_detector
from .pdc import JsaGrid

MAX_BINS = 32


@dataclass
class BinnedState:
    amplitudes: dict          # (idler_cfg, signal_cfg) -> complex
    n_bins: int
    chi: float
    norm: float               # numerically obtained normalisation constant
    split: bool = False       # idler already passed through the beamsplitter

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))


def _create(cfg, mode):
    """Apply a^+_mode to the normalised Fock state ``cfg``."""
    factor = np.sqrt(cfg.count(mode) + 1)
    return tuple(sorted(cfg + (mode,))), factor


def _occupation_norm(cfg):
    """sqrt(prod m_i!) for a multiset of modes."""
    out = 1.0
    for m in set(cfg):
        out *= np.sqrt(float(np.prod(np.arange(1, cfg.count(m) + 1))))
    return out


def _apply_pair_operator(states, pair):
    """Apply ``sum_{i,s} pair[i,s] a_i^+ s_s^+`` to a dict of states."""
    out = defaultdict(complex)
    n_i, n_s = pair.shape
    nz = [(i, s, pair[i, s]) for i in range(n_i) for s in range(n_s) if pair[i, s] != 0]
    for (icfg, scfg), amp in states.items():
        for i, s, f in nz:
            ic, fi = _create(icfg, i)
            sc, fs = _create(scfg, s)
            out[(ic, sc)] += amp * f * fi * fs
    return out


def pair_matrix(jsa: JsaGrid) -> np.ndarray:
    """Bin-amplitude matrix ``F[i, s] = f[i, s] sqrt(w_i w_s)``."""
    return jsa.amplitude * np.sqrt(np.outer(jsa.idler.weights, jsa.signal.weights))


def state_from_pair_matrix(pair: np.ndarray, chi: float) -> BinnedState:
    n = max(pair.shape)
    if n > MAX_BINS:
        raise ValueError(f"oracle supports at most {MAX_BINS} bins per axis, got {n}")
    vac = {((), ()): 1.0 + 0j}
    one = _apply_pair_operator(vac, pair)
    two = _apply_pair_operator(one, pair)
    amps = defaultdict(complex)
    amps[((), ())] = 1.0 + chi**2
    for key, a in one.items():
        amps[key] += chi * a
    for key, a in two.items():
        amps[key] += 0.5 * chi**2 * a
    norm2 = sum(abs(a) ** 2 for a in amps.values())
    scale = 1.0 / np.sqrt(norm2)
    amps = {k: a * scale for k, a in amps.items() if a != 0}
    return BinnedState(amplitudes=amps, n_bins=pair.shape[0], chi=chi, norm=scale)


def build_binned_state(jsa: JsaGrid, chi: float) -> BinnedState:
    """Second-order PDC state for a coarse JSA, normalised numerically."""
    return state_from_pair_matrix(pair_matrix(jsa), chi)


def apply_binwise_beamsplitter(state: BinnedState, t, r) -> BinnedState:
    """Send idler bin ``i`` to ``t[i] c_i^+ + r[i] d_i^+``."""
    if state.split:
        raise ValueError("beamsplitter already applied")
    n = state.n_bins
    t = np.asarray(t, dtype=complex)
    r = np.asarray(r, dtype=complex)
    out = defaultdict(complex)
    for (icfg, scfg), amp in state.amplitudes.items():
        pref = amp / _occupation_norm(icfg)
        terms = [((), pref)]
        for mode in icfg:
            nxt = []
            for cfg, a in terms:
                c_cfg, fc = _create(cfg, mode)
                d_cfg, fd = _create(cfg, mode + n)
                nxt.append((c_cfg, a * t[mode] * fc))
                nxt.append((d_cfg, a * r[mode] * fd))
            terms = nxt
        for cfg, a in terms:
            if a != 0:
                out[(cfg, scfg)] += a
    return BinnedState(amplitudes=dict(out), n_bins=n, chi=state.chi,
                       norm=state.norm, split=True)


def signal_basis(n_bins: int, max_photons: int = 2):
    basis = [()]
    for k in range(1, max_photons + 1):
        basis.extend(combinations_with_replacement(range(n_bins), k))
    return basis


@dataclass
class SignalState:
    probability: float
    rho: np.ndarray      # normalised, over ``basis``
    basis: list
    n_bins: int


def herald_and_reduce(state: BinnedState, n: int) -> SignalState:
    """Project on ``n`` transmitted idler photons, trace out the idler."""
    if not state.split:
        raise ValueError("apply the beamsplitter first (use t=1, r=0 for none)")
    nb = state.n_bins
    basis = signal_basis(nb)
    index = {cfg: j for j, cfg in enumerate(basis)}
    branches = defaultdict(lambda: np.zeros(len(basis), dtype=complex))
    for (icfg, scfg), amp in state.amplitudes.items():
        if sum(1 for m in icfg if m < nb) == n:
            branches[icfg][index[scfg]] += amp
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    for vec in branches.values():
        rho += np.outer(vec, vec.conj())
    prob = float(np.trace(rho).real)
    if prob <= 0:
        raise ZeroDivisionError("herald probability is zero")
    return SignalState(probability=prob, rho=rho / prob, basis=basis, n_bins=nb)


def _one_body_matrix(sig: SignalState) -> np.ndarray:
    """``G[i, j] = <a_i^+ a_j>`` of the signal state."""
    index = {cfg: j for j, cfg in enumerate(sig.basis)}
    g = np.zeros((sig.n_bins, sig.n_bins), dtype=complex)
    for a, cfg in enumerate(sig.basis):
        for j in set(cfg):
            lst = list(cfg)
            lst.remove(j)
            f_ann = np.sqrt(cfg.count(j))
            rest = tuple(lst)
            for i in range(sig.n_bins):
                new, f_cre = _create(rest, i)
                b = index[new]
                g[i, j] += sig.rho[a, b] * f_ann * f_cre
    return g


def _two_photon_fock(tau, basis):
    vec = np.zeros(len(basis), dtype=complex)
    for j, cfg in enumerate(basis):
        if len(cfg) != 2:
            continue
        p, q = cfg
        vec[j] = tau[p] ** 2 if p == q else np.sqrt(2.0) * tau[p] * tau[q]
    return vec


def metrics_from_density_matrix(sig: SignalState, n: int):
    """Return ``(g2, purity, fidelity)`` of a heralded signal state."""
    rho = sig.rho
    purity = float(np.real(np.trace(rho @ rho)))
    photons = np.array([len(cfg) for cfg in sig.basis], dtype=float)
    pops = np.real(np.diag(rho))
    mean_n = float(np.sum(pops * photons))
    g2 = float(np.sum(pops * photons * (photons - 1.0)) / mean_n**2)
    if n == 1:
        sel = photons == 1
        fidelity = float(np.linalg.eigvalsh(rho[np.ix_(sel, sel)])[-1])
    else:
        g = _one_body_matrix(sig)
        _, vecs = np.linalg.eigh(g.T)
        best = 0.0
        for tau in vecs.T:
            v = _two_photon_fock(tau, sig.basis)
            best = max(best, float(np.real(v.conj() @ rho @ v)))
        fidelity = best
    return g2, purity, fidelity


def binwise_transmission(spec: FilterSpec, jsa: JsaGrid):
    """Per-bin ``(T, R)`` of the folded filter on the idler axis.

    A delta filter becomes a single transmitting bin at the sample nearest
    ``mu_f``.
    """
    axis = jsa.idler
    if spec.kind == "delta":
        j = int(np.argmin(np.abs(axis.samples - spec.mu_f)))
        tt = np.zeros(len(axis))
        tt[j] = 1.0
        t = tt * np.sqrt(spec.eta)
        r = np.sqrt(1.0 - tt**2 * spec.eta)
        return t, r
    return fold_detector(spec, axis)


@dataclass
class OracleResult:
    probability: float
    g2: float
    purity: float
    fidelity: float
    norm: float


def oracle_metrics(jsa: JsaGrid, chi: float, spec: FilterSpec, n: int,
                   pair: np.ndarray = None) -> OracleResult:
    """Brute-force herald metrics; ``pair`` overrides the bin matrix if given."""
    if pair is None:
        pair = pair_matrix(jsa)
    t, r = binwise_transmission(spec, jsa)
    state = state_from_pair_matrix(pair, chi)
    split = apply_binwise_beamsplitter(state, t, r)
    sig = herald_and_reduce(split, n)
    g2, purity, fidelity = metrics_from_density_matrix(sig, n)
    return OracleResult(probability=sig.probability, g2=g2, purity=purity,
                        fidelity=fidelity, norm=state.norm)


def sector_probabilities(state: BinnedState):
    """Probability of 0, 1, 2 transmitted idler photons."""
    nb = state.n_bins
    out = np.zeros(3)
    for (icfg, _), amp in state.amplitudes.items():
        out[sum(1 for m in icfg if m < nb)] += abs(amp) ** 2
    return out
