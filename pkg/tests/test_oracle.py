import numpy as np
import pytest

from heraldfock.filtering import FilterSpec
from heraldfock.oracle import (MAX_BINS, SignalState, apply_binwise_beamsplitter,
                               build_binned_state, herald_and_reduce,
                               metrics_from_density_matrix, oracle_metrics, pair_matrix,
                               sector_probabilities, signal_basis, state_from_pair_matrix)
from heraldfock.pdc import JsaGrid
from heraldfock.schmidt import schmidt_decompose
from heraldfock.units import uniform_axis
from heraldfock.validation import compare, generate_suite, random_jsa


@pytest.fixture
def jsa(rng):
    return random_jsa(rng, 5, 2)


def test_zero_gain_is_vacuum(jsa):
    s = build_binned_state(jsa, 0.0)
    assert set(s.amplitudes) == {((), ())}
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-12)


def test_state_is_normalised_and_matches_closed_norm(jsa):
    from heraldfock.herald import norm_constant
    chi = 0.3
    s = build_binned_state(jsa, chi)
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-12)
    b = schmidt_decompose(jsa, 1e-9).b
    assert s.norm == pytest.approx(norm_constant(chi, b), rel=1e-12)
    # only vacuum, one-pair and two-pair sectors
    assert {len(i) for (i, _) in s.amplitudes} == {0, 1, 2}


def test_rank_one_double_pair_is_fock_square():
    ax = uniform_axis(3, 2.0, 0.0)
    g = np.array([0.6, 0.8, 0.0])
    jsa = JsaGrid(ax, ax, np.outer(g, g)).normalize()
    s = build_binned_state(jsa, 0.2)
    two = {k: a for k, a in s.amplitudes.items() if len(k[0]) == 2}
    # |2;g>|2;g> coefficient: doubly occupied bins carry the sqrt(2) factor
    ratio = two[((0, 0), (0, 0))] / two[((0, 1), (0, 1))]
    assert ratio == pytest.approx((0.6**2 / np.sqrt(2)) ** 2 / (0.6 * 0.8) ** 2 * 1.0)


def test_too_many_bins_rejected():
    with pytest.raises(ValueError):
        state_from_pair_matrix(np.eye(MAX_BINS + 1) / np.sqrt(MAX_BINS + 1), 0.1)


def test_beamsplitter_identity_and_full_reflection(jsa):
    s = build_binned_state(jsa, 0.3)
    n = s.n_bins
    same = apply_binwise_beamsplitter(s, np.ones(n), np.zeros(n))
    assert same.amplitudes.keys() == s.amplitudes.keys()
    for k, a in s.amplitudes.items():
        assert same.amplitudes[k] == pytest.approx(a, abs=1e-15)
    refl = apply_binwise_beamsplitter(s, np.zeros(n), np.ones(n))
    assert all(m >= n for (i, _) in refl.amplitudes for m in i)
    with pytest.raises(ValueError):
        apply_binwise_beamsplitter(same, np.ones(n), np.zeros(n))


def test_beamsplitter_preserves_norm_and_sectors_sum_to_one(jsa, rng):
    s = build_binned_state(jsa, 0.4)
    t = rng.uniform(0, 1, s.n_bins)
    split = apply_binwise_beamsplitter(s, t, np.sqrt(1 - t**2))
    assert split.norm_squared() == pytest.approx(1.0, abs=1e-12)
    assert np.sum(sector_probabilities(split)) == pytest.approx(1.0, abs=1e-12)


def test_herald_requires_split_state(jsa):
    with pytest.raises(ValueError):
        herald_and_reduce(build_binned_state(jsa, 0.1), 1)


def test_zero_probability_raises(jsa):
    s = build_binned_state(jsa, 0.1)
    split = apply_binwise_beamsplitter(s, np.zeros(s.n_bins), np.ones(s.n_bins))
    with pytest.raises(ZeroDivisionError):
        herald_and_reduce(split, 1)


def test_perfect_detection_signal_spectrum_is_b_squared(jsa):
    s = apply_binwise_beamsplitter(build_binned_state(jsa, 0.2), np.ones(5), np.zeros(5))
    sig = herald_and_reduce(s, 1)
    ev = np.sort(np.linalg.eigvalsh(sig.rho))[::-1]
    b = schmidt_decompose(jsa, 1e-9).b
    np.testing.assert_allclose(ev[:b.size], b**2, atol=1e-12)


def _state(rho, n_bins):
    basis = signal_basis(n_bins)
    return SignalState(probability=1.0, rho=rho, basis=basis, n_bins=n_bins)


def test_metrics_of_pure_single_photon():
    basis = signal_basis(2)
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    rho[basis.index((0,)), basis.index((0,))] = 1.0
    assert metrics_from_density_matrix(_state(rho, 2), 1) == pytest.approx((0.0, 1.0, 1.0))


def test_metrics_of_spectral_mixture():
    basis = signal_basis(2)
    rho = np.zeros((len(basis), len(basis)), dtype=complex)
    rho[basis.index((0,)), basis.index((0,))] = 0.8
    rho[basis.index((1,)), basis.index((1,))] = 0.2
    g2, purity, fid = metrics_from_density_matrix(_state(rho, 2), 1)
    assert (g2, purity, fid) == pytest.approx((0.0, 0.68, 0.8))


def test_metrics_of_two_photon_fock_in_superposed_mode():
    basis = signal_basis(2)
    tau = np.array([0.6, 0.8])
    v = np.zeros(len(basis), dtype=complex)
    v[basis.index((0, 0))] = tau[0] ** 2
    v[basis.index((0, 1))] = np.sqrt(2) * tau[0] * tau[1]
    v[basis.index((1, 1))] = tau[1] ** 2
    g2, purity, fid = metrics_from_density_matrix(_state(np.outer(v, v.conj()), 2), 2)
    assert (g2, purity, fid) == pytest.approx((0.5, 1.0, 1.0))


def test_oracle_two_photon_g2(jsa):
    for spec in (FilterSpec.none(0.7), FilterSpec.gaussian(0.0, 1.0, 0.4)):
        assert oracle_metrics(jsa, 0.2, spec, 2).g2 == pytest.approx(0.5, abs=1e-12)


def test_pair_matrix_carries_quadrature_weights():
    ax = uniform_axis(4, 6.0, 0.0)
    jsa = JsaGrid(ax, ax, np.ones((4, 4))).normalize()
    np.testing.assert_allclose(np.sum(np.abs(pair_matrix(jsa)) ** 2), 1.0)


def test_equivalence_suite_is_deterministic_and_passes():
    a = [compare(i) for i in generate_suite(12, seed=7)]
    b = [compare(i) for i in generate_suite(12, seed=7)]
    assert [c.closed for c in a] == [c.closed for c in b]
    assert all(c.passed for c in a)
    assert {c.instance.spec.kind for c in a} == {"none", "gaussian", "delta"}
