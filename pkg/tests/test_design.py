import numpy as np
import pytest

from heraldfock import design
from heraldfock.design import (AT_BOUND, CHI_INDEPENDENT, OK, UNREACHABLE, DecompositionCache,
                               NonMonotoneError, SourceConfig, SweepRequest, best_probability,
                               metric_surface, solve_chi_for_fidelity, sweep_filter_width)
from heraldfock.filtering import FilterSpec
from heraldfock.herald import HeraldReport, herald
from heraldfock.pdc import CrystalSpec, PumpSpec
from heraldfock.schmidt import schmidt_decompose
from heraldfock.units import GridSpec
from heraldfock.validation import random_jsa


@pytest.fixture(scope="module")
def decomp():
    return schmidt_decompose(random_jsa(np.random.default_rng(3), 10, 3), cutoff=1e-9)


@pytest.fixture(scope="module")
def small_source():
    pump = PumpSpec(2.39e15, 0.9e12)
    crystal = CrystalSpec(24.2e-3, 6.031e-9, 5.8835e-9, 6.1785e-9)
    return SourceConfig(pump, crystal, GridSpec(120, 0.06e15, pump.mu))


def test_perfect_unfiltered_is_chi_independent(decomp):
    sol = solve_chi_for_fidelity(0.95, 1.0, FilterSpec.none(), decomp)
    assert sol.status == CHI_INDEPENDENT and sol.chi is None
    sol = solve_chi_for_fidelity(0.1, 1.0, FilterSpec.none(), decomp)
    assert sol.status == CHI_INDEPENDENT and sol.chi == 0.5


def test_two_photon_unfiltered_is_chi_independent(decomp):
    sol = solve_chi_for_fidelity(0.01, 0.5, FilterSpec.none(), decomp, n=2)
    assert sol.status == CHI_INDEPENDENT and sol.chi == 0.25


def test_delta_filter_solution_meets_target(decomp):
    spec = FilterSpec.delta(decomp.idler.samples[4])
    sol = solve_chi_for_fidelity(0.95, 0.5, spec, decomp)
    assert sol.status == OK
    assert abs(sol.fidelity - 0.95) < 1e-6
    # the largest chi: slightly larger already misses the target
    worse = herald(1, sol.chi * (1 + 1e-6), decomp.b,
                   overlaps=design.overlap_matrices(decomp, spec.with_eta(0.5)))
    assert worse.fidelity < 0.95


def test_inefficient_detector_solution(decomp):
    f0 = decomp.b[0] ** 2
    sol = solve_chi_for_fidelity(0.9 * f0, 0.5, FilterSpec.none(), decomp)
    assert sol.status == OK and abs(sol.fidelity - 0.9 * f0) < 1e-6
    assert solve_chi_for_fidelity(min(0.999, f0 * 1.01), 0.5, FilterSpec.none(),
                                  decomp).status == UNREACHABLE


def test_target_met_on_whole_interval_returns_bound(decomp):
    spec = FilterSpec.delta(decomp.idler.samples[4])
    sol = solve_chi_for_fidelity(0.01, 0.5, spec, decomp)
    assert sol.status == AT_BOUND and sol.chi == 0.5


def test_target_validation(decomp):
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            solve_chi_for_fidelity(bad, 0.5, FilterSpec.none(), decomp)


def test_non_monotone_fidelity_is_an_error(decomp, monkeypatch):
    def fake(n, d, spec):
        return lambda chi: HeraldReport(n, "x", chi, 0.1, 0.0, 1.0, 0.5 + chi)
    monkeypatch.setattr(design, "herald_function", fake)
    with pytest.raises(NonMonotoneError):
        solve_chi_for_fidelity(0.6, 0.5, FilterSpec.none(), decomp)


def test_sweep_rows_ordered_and_flagged(small_source):
    req = SweepRequest(small_source, 1, 0.5, ["none", 2e12, "delta", 0.5e12], 0.95)
    rows = sweep_filter_width(req, cache=DecompositionCache())
    assert [r.label for r in rows][0] == "delta" and rows[-1].label == "none"
    assert [r.sigma_f for r in rows] == sorted(r.sigma_f for r in rows)
    assert rows[0].chi_star is not None and rows[0].flags == ()
    assert UNREACHABLE in rows[-1].flags and rows[-1].probability is None
    assert best_probability(rows) == max(r.probability for r in rows if r.probability)


def test_sweep_is_identical_serial_and_threaded(small_source):
    req = SweepRequest(small_source, 1, 0.5, ["delta", 0.2e12, 0.5e12, 1e12, 2e12, "none"],
                       0.95)
    a = sweep_filter_width(req, threads=1, cache=DecompositionCache())
    b = sweep_filter_width(req, threads=4, cache=DecompositionCache())
    assert a == b


def test_decomposition_cache_reuses_entries(small_source):
    cache = DecompositionCache()
    assert cache.get(small_source) is cache.get(small_source)
    assert len(cache) == 1


def test_sweep_request_validation(small_source):
    with pytest.raises(ValueError):
        SweepRequest(small_source, 3, 0.5, ["none"], 0.9)
    with pytest.raises(ValueError):
        SweepRequest(small_source, 1, 0.5, ["none"], 1.0)
    with pytest.raises(ValueError):
        SweepRequest(small_source, 2, 0.5, ["none"], 0.9, chi_max=0.4)


def test_surface_matches_closed_forms(decomp):
    chis = np.linspace(0, 0.5, 6)
    tab = metric_surface(chis, [0.3], "perfect", 1, decomp)
    assert tab.shape == (6, 6)
    np.testing.assert_array_equal(tab[:, 1], 1.0)
    for row in tab[1:]:
        r = herald(1, row[0], decomp.b)
        np.testing.assert_allclose(row[2:], [r.probability, r.g2, r.purity, r.fidelity])
    assert np.all(np.isnan(tab[0, 3:]))       # chi = 0 never clicks


def test_surface_monotone_probability_and_zero_g2(decomp):
    chis = np.linspace(0.05, 0.5, 10)
    etas = np.linspace(0.1, 1, 10)
    spec = FilterSpec.gaussian(0.0, 2.0)
    tab = metric_surface(chis, etas, "filtered", 1, decomp, spec)
    p = tab[:, 2].reshape(len(etas), len(chis))
    assert np.all(np.diff(p, axis=1) > 0) and np.all(np.diff(p, axis=0) > 0)
    ineff = metric_surface([0.0, 0.1], etas, "inefficient", 1, decomp)
    assert np.all(ineff[ineff[:, 0] == 0.0][:, 2] == 0.0)
    small = metric_surface([1e-9], [0.5], "inefficient", 1, decomp)
    assert small[0, 3] < 1e-15


def test_surface_threaded_identical(decomp):
    spec = FilterSpec.gaussian(0.0, 2.0)
    a = metric_surface(np.linspace(0, 0.25, 5), np.linspace(0, 1, 7), "filtered", 2, decomp, spec)
    b = metric_surface(np.linspace(0, 0.25, 5), np.linspace(0, 1, 7), "filtered", 2, decomp, spec,
                       threads=3)
    np.testing.assert_array_equal(a, b)


def test_surface_validation(decomp):
    with pytest.raises(ValueError):
        metric_surface([0.3], [1.0], "filtered", 1, decomp)
    with pytest.raises(ValueError):
        metric_surface([0.3], [1.0], "bogus", 1, decomp)
    with pytest.raises(ValueError):
        metric_surface([0.3], [1.0], "perfect", 2, decomp)
