"""Eigenvector analytics: localization, component statistics, projections."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotNormalized, ZeroVariance
from .panel import ReturnsPanel
from .spectrum import SpectralResult

NORM_TOL = 1e-8
HIST_BINS = 30


@dataclass(frozen=True, eq=False)
class IprSeries:
    eigenvalues: np.ndarray
    ipr: np.ndarray

    @property
    def n(self) -> int:
        return self.ipr.size


@dataclass(frozen=True, eq=False)
class ComponentStats:
    index: int
    kurtosis: float
    positive_fraction: float
    bin_centers: np.ndarray
    density: np.ndarray


@dataclass(frozen=True, eq=False)
class ProjectionSeries:
    values: np.ndarray
    index: int | None
    sigma: float


@dataclass(frozen=True, eq=False)
class Regression:
    correlations: np.ndarray
    best_index: int
    best_label: str


def _unit(u) -> np.ndarray:
    u = np.asarray(u, dtype=float).ravel()
    norm = np.linalg.norm(u)
    if abs(norm - 1.0) > NORM_TOL:
        raise NotNormalized(f"vector norm is {norm}, expected 1")
    return u


def ipr(u) -> float:
    """Inverse participation ratio, sum of fourth powers of a unit vector."""
    u = _unit(u)
    return float(np.sum(u**4))


def ipr_series(spec: SpectralResult) -> IprSeries:
    values = np.sum(spec.eigenvectors**4, axis=0)
    return IprSeries(spec.eigenvalues.copy(), values)


def participant_count(ipr_value: float) -> int:
    # round half up; the 1e-9 guard absorbs float noise in 1/I near .5
    return int(np.floor(1.0 / ipr_value + 0.5 + 1e-9))


def significant_participants(u, labels: Sequence[str] | None = None) -> list:
    """Labels of the round(1/IPR) largest-magnitude components, largest first."""
    u = _unit(u)
    k = min(participant_count(ipr(u)), u.size)
    order = np.lexsort((np.arange(u.size), -np.abs(u)))[:k]
    if labels is None:
        return [int(i) for i in order]
    if len(labels) != u.size:
        raise DimensionMismatch(f"{len(labels)} labels for a vector of length {u.size}")
    return [labels[i] for i in order]


def component_stats(u, index: int = -1) -> ComponentStats:
    """Moments of the sqrt(N)-rescaled components.

    Moments are taken about zero, matching the zero-mean unit-variance
    Gaussian reference, so the kurtosis equals N * IPR and a Gaussian vector
    gives 3.
    """
    u = _unit(u)
    x = u * np.sqrt(u.size)
    m2 = np.mean(x**2)
    kurt = float(np.mean(x**4) / m2**2)
    sigma = np.sqrt(m2)
    edges = np.linspace(-4 * sigma, 4 * sigma, HIST_BINS + 1)
    counts, _ = np.histogram(x, bins=edges)
    density = counts / (x.size * np.diff(edges))
    return ComponentStats(
        index,
        kurt,
        float(np.mean(u > 0)),
        0.5 * (edges[1:] + edges[:-1]),
        density,
    )


def pooled_kurtosis(vectors) -> float:
    """Kurtosis of the rescaled components of several unit vectors taken together."""
    x = np.concatenate([_unit(v) * np.sqrt(len(v)) for v in vectors])
    return float(np.mean(x**4) / np.mean(x**2) ** 2)


def gaussian_component_density(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-x * x / 2.0) / np.sqrt(2.0 * np.pi)


def project(returns: ReturnsPanel, u, index: int | None = None) -> ProjectionSeries:
    """Weighted sum of the raw rate changes along an eigenvector."""
    G = returns.G if isinstance(returns, ReturnsPanel) else np.asarray(returns, dtype=float)
    u = np.asarray(u, dtype=float).ravel()
    if u.size != G.shape[0]:
        raise DimensionMismatch(f"vector of length {u.size} for {G.shape[0]} series")
    u = _unit(u)
    values = u @ G
    return ProjectionSeries(values, index, float(values.std()))


def regress_projection(proj: ProjectionSeries, returns: ReturnsPanel) -> Regression:
    """Pearson correlation of the projection with every member series."""
    G = returns.G
    if proj.values.size != G.shape[1]:
        raise DimensionMismatch(f"projection of length {proj.values.size} vs {G.shape[1]} observations")
    p = proj.values - proj.values.mean()
    sp = p.std()
    if sp == 0:
        raise ZeroVariance("projection")
    centered = G - G.mean(axis=1, keepdims=True)
    sg = centered.std(axis=1)
    for i in np.flatnonzero(sg == 0):
        raise ZeroVariance(returns.labels[i])
    corr = (centered @ p) / (G.shape[1] * sg * sp)
    corr = np.clip(corr, -1.0, 1.0)
    best = int(np.argmax(corr))
    return Regression(corr, best, returns.labels[best])


def group_by_loading(vectors, members, k: int = 2, seed: int = 0) -> np.ndarray:
    """Cluster series by the direction of their loadings on several eigenvectors.

    ``vectors`` is N x m (one eigenvector per column).  Series driven by the
    same source load on the m vectors along one common direction, even when
    near-degenerate modes have mixed, so k-means on the unit loading
    directions recovers the groups.  Returns one integer label per member.
    """
    from scipy.cluster.vq import kmeans2

    V = np.asarray(vectors, dtype=float)
    X = V[np.asarray(members, dtype=int)]
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    X = X / np.where(norms > 0, norms, 1.0)
    _, labels = kmeans2(X, k, seed=seed, minit="++")
    return labels
