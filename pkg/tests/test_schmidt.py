import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heraldfock.pdc import JsaGrid
from heraldfock.schmidt import (entropy_of_entanglement, reconstruct_jsa, schmidt_decompose,
                                schmidt_number)
from heraldfock.units import uniform_axis
from heraldfock.validation import random_jsa

from conftest import synth_jsa


def _orthonormality_error(modes, axis):
    gram = (modes * axis.weights) @ modes.conj().T
    return np.max(np.abs(gram - np.eye(len(modes))))


def test_separable_input_has_single_mode():
    ax = uniform_axis(50, 10.0, 0.0)
    g = np.exp(-(ax.samples - 1) ** 2)
    h = np.exp(-(ax.samples + 0.5) ** 2 / 3)
    d = schmidt_decompose(JsaGrid(ax, ax, np.outer(g, h)).normalize())
    assert d.b[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(d.b[1:] < 1e-12)
    gn = g / np.sqrt(np.sum(g**2 * ax.weights))
    np.testing.assert_allclose(d.zeta[0], gn, atol=1e-10)


def test_two_mode_synthesis_round_trip():
    b = np.sqrt([0.8, 0.2])
    d = schmidt_decompose(synth_jsa(b))
    np.testing.assert_allclose(d.b[:2], b, atol=1e-8)
    assert entropy_of_entanglement(d.b) == pytest.approx(
        -(0.8 * np.log2(0.8) + 0.2 * np.log2(0.2)), abs=1e-8)


def test_modes_orthonormal_and_descending(rng):
    jsa = random_jsa(rng, 16, 4)
    d = schmidt_decompose(jsa)
    assert np.all(np.diff(d.b) <= 1e-15)
    assert _orthonormality_error(d.zeta, d.idler) < 1e-8
    assert _orthonormality_error(d.xi, d.signal) < 1e-8
    assert np.sum(d.b**2) == pytest.approx(1.0, abs=1e-8)


def test_random_32x32_reconstruction(rng):
    ax = uniform_axis(32, 5.0, 1.0)
    amp = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
    jsa = JsaGrid(ax, ax, amp).normalize()
    rec = reconstruct_jsa(schmidt_decompose(jsa))
    assert np.max(np.abs(rec.amplitude - jsa.amplitude)) < 1e-10


def test_truncation_parseval(rng):
    ax = uniform_axis(24, 3.0, 0.0)
    jsa = JsaGrid(ax, ax, rng.normal(size=(24, 24))).normalize()
    d = schmidt_decompose(jsa, cutoff=0.1)
    assert d.truncated and d.n_modes < 24
    assert np.all(d.b >= 0.1)
    rec = reconstruct_jsa(d)
    err2 = np.sum(np.abs(rec.amplitude - jsa.amplitude) ** 2 * np.outer(ax.weights, ax.weights))
    assert err2 == pytest.approx(1.0 - d.retained_weight(), rel=1e-9)
    # remainder is not renormalised
    assert d.retained_weight() < 1.0
    assert d.total_weight == pytest.approx(1.0)


def test_rejects_unnormalised_and_bad_cutoff():
    ax = uniform_axis(4, 3.0, 0.0)
    with pytest.raises(ValueError):
        schmidt_decompose(JsaGrid(ax, ax, np.ones((4, 4))))
    jsa = JsaGrid(ax, ax, np.ones((4, 4))).normalize()
    with pytest.raises(ValueError):
        schmidt_decompose(jsa, cutoff=1.0)
    with pytest.raises(ValueError):
        schmidt_decompose(jsa, cutoff=-0.1)


def test_gauge_makes_largest_idler_sample_real_positive(rng):
    d = schmidt_decompose(random_jsa(rng, 10, 3), cutoff=1e-9)
    for z in d.zeta:
        j = np.argmax(np.abs(z))
        assert abs(z[j].imag) < 1e-12 and z[j].real > 0


def test_degenerate_modes_ordered_by_mean_frequency():
    ax = uniform_axis(96, 24.0, 0.0)
    x = ax.samples
    g1 = np.exp(-(x + 5) ** 2)
    g2 = np.exp(-(x - 5) ** 2)
    amp = np.outer(g2, g2) + np.outer(g1, g1)
    d = schmidt_decompose(JsaGrid(ax, ax, amp).normalize())
    mean = (np.abs(d.zeta[:2]) ** 2 * ax.weights) @ x
    assert mean[0] == pytest.approx(-5, abs=1e-6) and mean[1] == pytest.approx(5, abs=1e-6)
    # the degenerate block is resolved into the two localised modes, not a mixture
    np.testing.assert_allclose(np.abs(d.zeta[0]), g1 / np.sqrt(np.sum(g1**2 * ax.weights)),
                               atol=1e-8)


def test_entropy_trivial_values():
    assert entropy_of_entanglement([1.0]) == 0.0
    assert entropy_of_entanglement([1.0, 0.0, 0.0]) == 0.0
    assert entropy_of_entanglement(np.sqrt([0.5, 0.5])) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        entropy_of_entanglement([1.0, 1.0])


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=8))
def test_entropy_bounds_and_purity_bound(raw):
    b = np.sqrt(np.array(raw) / np.sum(raw))
    e = entropy_of_entanglement(b)
    assert -1e-12 <= e <= np.log2(len(b)) + 1e-9
    assert np.sum(b**4) <= 1 + 1e-12
    assert schmidt_number(b) >= 1 - 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_regauging_preserves_reconstruction(seed):
    r = np.random.default_rng(seed)
    d = schmidt_decompose(random_jsa(r, 8, 3), cutoff=1e-9)
    d2 = d.regauged(r.uniform(0, 2 * np.pi, d.n_modes))
    np.testing.assert_allclose(reconstruct_jsa(d2).amplitude, reconstruct_jsa(d).amplitude,
                               atol=1e-12)
