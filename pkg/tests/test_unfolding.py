import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmtraffic.correlation import GOE, EnsembleSpec, goe_matrix
from rmtraffic.errors import TooFewEigenvalues
from rmtraffic.unfolding import broadened_cdf, broadening_widths, empirical_cdf, unfold


def test_empirical_cdf():
    assert empirical_cdf([1, 2, 3], 2) == 2
    assert empirical_cdf([1, 2, 3], 0.5) == 0
    assert empirical_cdf([1, 2, 3], 3) == 3
    assert empirical_cdf([1, 2, 3], 99) == 3


def test_broadened_cdf_limits():
    lam = np.arange(1.0, 21.0)
    assert broadened_cdf(lam, 2, -1e6) == 0.0
    assert broadened_cdf(lam, 2, 1e6) == 20.0


def test_degenerate_cluster_half_count():
    lam = np.zeros(17)
    assert np.all(broadening_widths(lam, 8) > 0)
    assert broadened_cdf(lam, 8, 0.0) == pytest.approx(8.5, abs=1e-12)


def test_broadened_cdf_tracks_staircase():
    lam = np.linalg.eigvalsh(goe_matrix(EnsembleSpec(200, seed=1, variant=GOE)))
    f = broadened_cdf(lam, 8, lam)
    assert np.mean(np.abs(f - np.arange(1, 201))) < 1.5


def test_broadened_cdf_increasing():
    lam = np.sort(np.random.default_rng(2).normal(size=50))
    grid = np.linspace(lam[0] - 1, lam[-1] + 1, 500)
    assert np.all(np.diff(broadened_cdf(lam, 3, grid)) > 0)


@pytest.mark.parametrize("a", [1, 2])
def test_equal_spacing_small_a(a):
    n = 100
    xi = unfold(np.arange(1.0, n + 1), a).xi
    assert np.max(np.abs(xi - (np.arange(1, n + 1) - 0.5))) < 0.6


def test_equal_spacing_large_a_interior():
    # a wide kernel leaks half its mass past the spectrum ends, so only
    # levels more than 2a from an end sit at i - 1/2
    n, a = 100, 8
    xi = unfold(np.arange(1.0, n + 1), a).xi
    i = np.arange(1, n + 1)
    inner = slice(2 * a, n - 2 * a)
    assert np.max(np.abs(xi[inner] - (i[inner] - 0.5))) < 0.6


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100), st.floats(-100, 100), st.integers(0, 1000))
def test_affine_invariance(alpha, beta, seed):
    lam = np.sort(np.random.default_rng(seed).normal(size=40))
    a = unfold(lam, 3).xi
    b = unfold(alpha * lam + beta, 3).xi
    assert np.max(np.abs(a - b)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=9, max_size=60), st.integers(1, 4))
def test_monotone(values, a):
    if len(values) < 2 * a + 1:
        return
    u = unfold(values, a)
    assert np.all(np.diff(u.xi) >= 0)


def test_too_few():
    with pytest.raises(TooFewEigenvalues):
        unfold(np.arange(16.0), 8)
    unfold(np.arange(17.0), 8)


def test_unit_mean_spacing_goe(goe_spectra):
    for lam in goe_spectra:
        xi = unfold(lam, 8).xi
        assert 0.97 <= np.mean(np.diff(xi)) <= 1.03
