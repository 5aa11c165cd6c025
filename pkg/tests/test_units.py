import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heraldfock.units import (Axis, GridSpec, build_axis, fwhm_nm_to_sigma,
                              omega_to_wavelength_nm, sigma_to_fwhm_nm, uniform_axis,
                              wavelength_nm_to_omega)


@pytest.mark.parametrize("lam, fwhm, mantissa", [(400, 1, 5.00), (788, 0.7, 0.90),
                                                 (1930, 3, 0.64)])
def test_pump_width_conversion_matches_quoted_values(lam, fwhm, mantissa):
    assert round(fwhm_nm_to_sigma(lam, fwhm) / 1e12, 2) == mantissa


def test_wavelength_omega_round_trip():
    w = wavelength_nm_to_omega(800.0)
    assert math.isclose(w, 2 * math.pi * 299792458.0 / 800e-9)
    assert math.isclose(omega_to_wavelength_nm(w), 800.0)


@given(st.floats(200, 5000), st.floats(0.01, 20))
def test_fwhm_sigma_round_trip(lam, fwhm):
    assert math.isclose(sigma_to_fwhm_nm(fwhm_nm_to_sigma(lam, fwhm), lam), fwhm, rel_tol=1e-12)


def test_fwhm_rejects_nonpositive():
    with pytest.raises(ValueError):
        fwhm_nm_to_sigma(400, 0)
    with pytest.raises(ValueError):
        fwhm_nm_to_sigma(-1, 1)


def test_uniform_axis_is_centred_with_equal_weights():
    ax = uniform_axis(5, 4.0, 10.0)
    np.testing.assert_allclose(ax.samples, [8, 9, 10, 11, 12])
    np.testing.assert_allclose(ax.weights, 1.0)
    assert ax.spacing == pytest.approx(1.0)
    assert len(ax) == 5


def test_grid_spec_spacing_and_axes():
    spec = GridSpec(800, 0.2e15, 2.35e15)
    idler, signal = build_axis(spec)
    assert len(idler) == 800 and idler.same_as(signal)
    assert spec.spacing == pytest.approx(0.2e15 / 799)
    assert idler.samples[0] == pytest.approx(2.35e15 - 0.1e15)


@pytest.mark.parametrize("args", [(1, 1.0, 1.0), (10, 0.0, 1.0), (10, float("nan"), 1.0)])
def test_grid_spec_validation(args):
    with pytest.raises(ValueError):
        GridSpec(*args)


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis(np.array([0.0, 1.0]), 1.0, np.array([1.0]))
