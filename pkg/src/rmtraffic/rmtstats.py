"""Universality tests on unfolded spectra.

Spacing laws are unit-mean densities on s >= 0:

* ``wigner_goe_pdf``  (pi s / 2) exp(-pi s^2 / 4)
* ``gse_pdf``         (2^18 / 3^6 pi^3) s^4 exp(-64 s^2 / 9 pi)
* ``poisson_pdf``     exp(-s)

Next-nearest spacings of a GOE spectrum follow the GSE nearest-spacing law
once halved to unit mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import EmptySample, WindowTooLarge
from .unfolding import UnfoldedSpectrum

NEAREST = "nearest"
NEXT_NEAREST = "next-nearest"

_GSE_NORM = 2.0**18 / (3.0**6 * math.pi**3)
_GSE_RATE = 64.0 / (9.0 * math.pi)


def wigner_goe_pdf(s):
    s = np.asarray(s, dtype=float)
    return np.pi * s / 2.0 * np.exp(-np.pi * s * s / 4.0)


def wigner_goe_cdf(s):
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    return -np.expm1(-np.pi * s * s / 4.0)


def gse_pdf(s):
    s = np.asarray(s, dtype=float)
    return _GSE_NORM * s**4 * np.exp(-_GSE_RATE * s * s)


def gse_cdf(s):
    # integral of c s^4 exp(-b s^2) is the regularized lower gamma P(5/2, b s^2)
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    return special.gammainc(2.5, _GSE_RATE * s * s)


def poisson_pdf(s):
    return np.exp(-np.asarray(s, dtype=float))


def poisson_cdf(s):
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    return -np.expm1(-s)


SPACING_LAWS = {
    "goe": (wigner_goe_pdf, wigner_goe_cdf),
    "gse": (gse_pdf, gse_cdf),
    "poisson": (poisson_pdf, poisson_cdf),
}


@dataclass(frozen=True, eq=False)
class SpacingSample:
    spacings: np.ndarray
    order: str
    rescaled: bool = False


@dataclass(frozen=True, eq=False)
class VarianceCurve:
    l: np.ndarray
    sigma2: np.ndarray
    source: str


def _xi(xi) -> np.ndarray:
    if isinstance(xi, UnfoldedSpectrum):
        return xi.xi
    return np.asarray(xi, dtype=float)


def nn_spacings(xi) -> SpacingSample:
    x = _xi(xi)
    if x.size < 2:
        raise EmptySample("need at least two unfolded levels")
    return SpacingSample(np.diff(x), NEAREST, False)


def nnn_spacings(xi) -> SpacingSample:
    """Next-nearest spacings halved to unit mean for comparison with ``gse_pdf``."""
    x = _xi(xi)
    if x.size < 3:
        raise EmptySample("need at least three unfolded levels")
    return SpacingSample((x[2:] - x[:-2]) / 2.0, NEXT_NEAREST, True)


def pooled(samples) -> SpacingSample:
    samples = list(samples)
    return SpacingSample(
        np.concatenate([s.spacings for s in samples]), samples[0].order, samples[0].rescaled
    )


def _cdf_for(pdf):
    if isinstance(pdf, str):
        return SPACING_LAWS[pdf][1]
    for p, c in SPACING_LAWS.values():
        if pdf is p:
            return c

    def by_quadrature(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        order = np.argsort(s)
        out = np.empty_like(s)
        acc, prev = 0.0, 0.0
        for i in order:
            x = max(s[i], 0.0)
            acc += integrate.quad(lambda t: float(pdf(t)), prev, x)[0] if x > prev else 0.0
            prev = max(prev, x)
            out[i] = acc
        return out

    return by_quadrature


def ks_distance(sample, pdf) -> float:
    """Sup distance between the empirical CDF of a sample and a spacing law.

    ``pdf`` is one of the module's laws (or its name); any other callable
    density is integrated numerically.
    """
    s = sample.spacings if isinstance(sample, SpacingSample) else np.asarray(sample, dtype=float)
    s = np.sort(np.ravel(s))
    n = s.size
    if n == 0:
        raise EmptySample("KS distance of an empty sample")
    f = _cdf_for(pdf)(s)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


# --------------------------------------------------------------------------
# Number variance


def number_variance_empirical(xi, l: float, n_windows: int = 2000, seed=0) -> float:
    """Mean squared deviation <(n(x, l) - l)^2> over random window centers.

    Centers are uniform on [xi_1 + l/2, xi_N - l/2]; each window is
    [x - l/2, x + l/2].
    """
    x = np.sort(_xi(xi))
    l = float(l)
    if l < 0:
        raise ValueError("window length must be non-negative")
    if n_windows < 100:
        raise ValueError("n_windows must be at least 100")
    if l == 0:
        return 0.0
    if l > (x[-1] - x[0]) / 2.0:
        raise WindowTooLarge(f"l={l} exceeds half the unfolded range {(x[-1] - x[0]) / 2.0}")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(x[0] + l / 2.0, x[-1] - l / 2.0, size=n_windows)
    counts = np.searchsorted(x, centers + l / 2.0, side="right") - np.searchsorted(
        x, centers - l / 2.0, side="left"
    )
    return float(np.mean((counts - l) ** 2))


def number_variance_curve(xi, ls, n_windows: int = 2000, seed=0) -> VarianceCurve:
    ls = np.asarray(ls, dtype=float)
    vals = np.array([number_variance_empirical(xi, l, n_windows, seed) for l in ls])
    return VarianceCurve(ls, vals, "empirical")


def sine_kernel(x):
    """sin(pi x) / (pi x)."""
    return np.sinc(x)


def _sine_kernel_slope(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    exact = (np.cos(np.pi * xs) - np.sinc(xs)) / xs
    return np.where(small, -(np.pi**2) * x / 3.0, exact)


def sine_kernel_tail(x):
    """Integral of the sine kernel from x to infinity: 1/2 - Si(pi x)/pi."""
    si, _ = special.sici(np.pi * np.asarray(x, dtype=float))
    return 0.5 - si / np.pi


def goe_cluster_function(x):
    """Two-level cluster function Y(x) of the GOE."""
    return sine_kernel(x) ** 2 + _sine_kernel_slope(x) * sine_kernel_tail(x)


def number_variance_goe(l: float) -> float:
    l = float(l)
    if l < 0:
        raise ValueError("window length must be non-negative")
    if l == 0:
        return 0.0
    # split at integers so quad sees the oscillations of Y piecewise
    points = list(np.arange(1.0, l, 1.0)) if l > 1 else None
    integral, _ = integrate.quad(
        lambda t: (l - t) * float(goe_cluster_function(t)),
        0.0,
        l,
        points=points,
        limit=max(200, 4 * int(l) + 50),
        epsabs=1e-11,
        epsrel=1e-10,
    )
    return l - 2.0 * integral


def number_variance_poisson(l: float) -> float:
    return float(l)


def variance_curve_theory(ls, source: str = "goe-theory") -> VarianceCurve:
    ls = np.asarray(ls, dtype=float)
    fn = number_variance_goe if source == "goe-theory" else number_variance_poisson
    return VarianceCurve(ls, np.array([fn(l) for l in ls]), source)


def spacing_histogram(sample, law: str, bins: int = 40, s_max: float = 4.0):
    """(bin_center, empirical_density, theory_density) for plotting."""
    s = sample.spacings if isinstance(sample, SpacingSample) else np.asarray(sample, dtype=float)
    edges = np.linspace(0.0, s_max, bins + 1)
    density, _ = np.histogram(s, bins=edges, density=False)
    density = density / (s.size * np.diff(edges))
    centers = 0.5 * (edges[1:] + edges[:-1])
    return centers, density, SPACING_LAWS[law][0](centers)
