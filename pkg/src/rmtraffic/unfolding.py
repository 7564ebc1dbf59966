"""Unfolding by Gaussian broadening of the eigenvalue staircase.

Each eigenvalue is replaced by a normal CDF whose width is ``a`` times the
mean level spacing among its 2a+1 nearest neighbours (fewer at the spectrum
ends).  The smooth sum of these CDFs is the averaged staircase F_av, and the
unfolded levels are xi_i = F_av(lambda_i).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import TooFewEigenvalues

DEFAULT_BROADENING = 8


@dataclass(frozen=True, eq=False)
class UnfoldedSpectrum:
    xi: np.ndarray
    a: int
    eigenvalues: np.ndarray
    widths: np.ndarray

    @property
    def n(self) -> int:
        return self.xi.size


def empirical_cdf(eigenvalues, lam: float) -> int:
    """Number of eigenvalues <= lam."""
    return int(np.searchsorted(np.asarray(eigenvalues, dtype=float), lam, side="right"))


def _check(eigenvalues, a: int) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=float)
    if int(a) != a or a < 1:
        raise ValueError(f"broadening must be a positive integer, got {a!r}")
    if lam.size < 2 * a + 1:
        raise TooFewEigenvalues(f"need at least {2 * a + 1} eigenvalues for a={a}, got {lam.size}")
    if np.any(np.diff(lam) < 0):
        lam = np.sort(lam)
    return lam


def broadening_widths(eigenvalues, a: int) -> np.ndarray:
    lam = _check(eigenvalues, a)
    n = lam.size
    k = np.arange(n)
    lo = np.maximum(k - a, 0)
    hi = np.minimum(k + a, n - 1)
    local_spacing = (lam[hi] - lam[lo]) / (hi - lo)
    floor = 1e-12 * (lam[-1] - lam[0] + 1.0)
    return np.maximum(a * local_spacing, floor)


def broadened_cdf(eigenvalues, a: int, lam):
    """Smoothed level count F_av evaluated at ``lam`` (scalar or array)."""
    levels = _check(eigenvalues, a)
    widths = broadening_widths(levels, a)
    x = np.asarray(lam, dtype=float)
    z = (x.reshape(-1, 1) - levels) / widths
    out = ndtr(z).sum(axis=1).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def unfold(eigenvalues, a: int = DEFAULT_BROADENING) -> UnfoldedSpectrum:
    levels = _check(eigenvalues, a)
    widths = broadening_widths(levels, a)
    z = (levels[:, None] - levels[None, :]) / widths[None, :]
    xi = ndtr(z).sum(axis=1)
    # summation order can break ties by an ulp; F_av itself is monotone
    xi = np.maximum.accumulate(xi)
    return UnfoldedSpectrum(xi, int(a), levels, widths)
