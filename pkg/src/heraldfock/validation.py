"""Closed form versus brute force: randomized equivalence suite.

Each instance is a random rank-``K`` JSA on a coarse bin grid, a filter, a
detector efficiency, a gain and a herald photon number. The closed-form
metrics (Schmidt route) and the Fock-space oracle (no Schmidt decomposition)
are evaluated independently and compared with a relative tolerance.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .filtering import FilterSpec, overlap_matrices
from .herald import herald
from .oracle import oracle_metrics
from .pdc import JsaGrid
from .schmidt import schmidt_decompose
from .units import uniform_axis

METRICS = ("probability", "g2", "purity", "fidelity")
ETAS = (0.3, 0.7, 1.0)
CHIS = (0.05, 0.2, 0.4)
FILTER_KINDS = ("none", "gaussian", "delta")
DEFAULT_TOLERANCE = 1e-8
# below this the reference value is treated as zero and compared absolutely
ABS_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class Instance:
    index: int
    jsa: JsaGrid
    spec: FilterSpec
    chi: float
    n: int
    rank: int

    def describe(self) -> str:
        return (f"#{self.index} bins={len(self.jsa.idler)} K={self.rank} "
                f"filter={self.spec.label()} eta={self.spec.eta} chi={self.chi} n={self.n}")


@dataclass(frozen=True)
class Comparison:
    instance: Instance
    closed: tuple
    brute: tuple
    rel_error: tuple
    tolerance: float

    @property
    def worst(self) -> float:
        return max(self.rel_error)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


def random_jsa(rng: np.random.Generator, n_bins: int, rank: int) -> JsaGrid:
    """Random complex JSA with exactly ``rank`` Schmidt modes on a bin grid."""
    if not 1 <= rank <= n_bins:
        raise ValueError("rank must lie in [1, n_bins]")
    axis = uniform_axis(n_bins, float(n_bins - 1), 0.0)

    def isometry():
        z = rng.normal(size=(n_bins, rank)) + 1j * rng.normal(size=(n_bins, rank))
        q, _ = np.linalg.qr(z)
        return q

    b = rng.uniform(0.1, 1.0, size=rank)
    b /= np.linalg.norm(b)
    bins = (isometry() * b) @ isometry().T
    amp = bins / np.sqrt(np.outer(axis.weights, axis.weights))
    return JsaGrid(axis, axis, amp).normalize()


def random_filter(rng: np.random.Generator, kind: str, eta: float, jsa: JsaGrid) -> FilterSpec:
    w = jsa.idler.samples
    if kind == "none":
        return FilterSpec.none(eta)
    if kind == "gaussian":
        mu_f = rng.uniform(w[0], w[-1])
        sigma_f = rng.uniform(0.5, 0.5 * (w[-1] - w[0]))
        return FilterSpec.gaussian(mu_f, sigma_f, eta)
    if kind == "delta":
        return FilterSpec.delta(w[rng.integers(len(w))], eta)
    raise ValueError(f"unsupported filter kind {kind!r}")


def generate_suite(count: int = 60, seed: int = 2024, n_bins: int = 8,
                   max_rank: int = 3) -> list:
    """Deterministic list of instances cycling through every parameter combination."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    # filter kind varies fastest so that even short suites cover every kind
    combos = list(product(CHIS, ETAS, (1, 2), FILTER_KINDS))
    out = []
    for i in range(count):
        chi, eta, n, kind = combos[i % len(combos)]
        rank = int(rng.integers(1, max_rank + 1))
        jsa = random_jsa(rng, n_bins, rank)
        out.append(Instance(i, jsa, random_filter(rng, kind, eta, jsa), chi, n, rank))
    return out


def closed_form(inst: Instance):
    decomp = schmidt_decompose(inst.jsa, cutoff=1e-9)
    if inst.spec.kind == "none":
        rep = herald(inst.n, inst.chi, decomp.b, eta=inst.spec.eta)
    else:
        rep = herald(inst.n, inst.chi, decomp.b,
                     overlaps=overlap_matrices(decomp, inst.spec))
    return tuple(float(getattr(rep, m)) for m in METRICS)


def brute_force(inst: Instance):
    res = oracle_metrics(inst.jsa, inst.chi, inst.spec, inst.n)
    return tuple(float(getattr(res, m)) for m in METRICS)


def relative_errors(closed, brute):
    out = []
    for a, b in zip(closed, brute):
        scale = abs(b)
        out.append(abs(a - b) if scale < ABS_FLOOR else abs(a - b) / scale)
    return tuple(out)


def compare(inst: Instance, tolerance: float = DEFAULT_TOLERANCE) -> Comparison:
    closed = closed_form(inst)
    brute = brute_force(inst)
    return Comparison(inst, closed, brute, relative_errors(closed, brute), tolerance)
