import numpy as np
import pytest

from heraldfock.pdc import JsaGrid
from heraldfock.units import uniform_axis

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def hermite_gauss(n, x):
    """Normalised Hermite-Gauss functions on a sample grid (first 2 orders)."""
    g = np.exp(-x**2 / 2) / np.pi**0.25
    if n == 0:
        return g
    if n == 1:
        return np.sqrt(2.0) * x * g
    raise ValueError(n)


def synth_jsa(b, n_points=64, span=16.0):
    """JSA sum_k b_k HG_k(w_i) HG_k(w_s) on a centred grid."""
    ax = uniform_axis(n_points, span, 0.0)
    amp = sum(bk * np.outer(hermite_gauss(k, ax.samples), hermite_gauss(k, ax.samples))
              for k, bk in enumerate(b))
    return JsaGrid(ax, ax, amp)
