"""Eigendecomposition and the Marchenko-Pastur reference spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationMatrix
from .errors import ConvergenceFailure, QOutOfRange

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class MpLaw:
    Q: float
    lambda_minus: float
    lambda_plus: float


def mp_bounds(Q: float) -> MpLaw:
    """Edges of the random-correlation spectrum for aspect ratio Q = L/N."""
    Q = float(Q)
    if not Q > 1:
        raise QOutOfRange(f"Q must exceed 1, got {Q}")
    r = 1.0 / Q
    return MpLaw(Q, 1.0 + r - 2.0 * math.sqrt(r), 1.0 + r + 2.0 * math.sqrt(r))


def mp_density(lam, law: MpLaw):
    """Marchenko-Pastur density; zero outside [lambda_minus, lambda_plus]."""
    lam = np.asarray(lam, dtype=float)
    inside = (lam > law.lambda_minus) & (lam < law.lambda_plus)
    safe = np.where(inside, lam, 1.0)
    root = np.sqrt(np.clip((law.lambda_plus - safe) * (safe - law.lambda_minus), 0.0, None))
    out = np.where(inside, law.Q / (2.0 * np.pi) * root / safe, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]
    mp: MpLaw
    bulk: np.ndarray
    deviating_above: np.ndarray
    deviating_below: np.ndarray
    labels: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def p(self) -> int:
        return self.deviating_above.size

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]


def classify(eigenvalues, law: MpLaw):
    """Split indices into (bulk, above, below) with strict inequalities at the edges."""
    lam = np.asarray(eigenvalues, dtype=float)
    above = np.flatnonzero(lam > law.lambda_plus)
    below = np.flatnonzero(lam < law.lambda_minus)
    bulk = np.flatnonzero((lam >= law.lambda_minus) & (lam <= law.lambda_plus))
    return bulk, above, below


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry (lowest index on ties) is positive."""
    v = np.array(vectors, dtype=float)
    lead = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[lead, np.arange(v.shape[1])] < 0, -1.0, 1.0)
    return v * signs


def _order_degenerate(values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    n = values.size
    order = np.arange(n)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[stop - 1] < DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            block = order[start:stop]
            lead = np.argmax(np.abs(vectors[:, block]), axis=0)
            order[start:stop] = block[np.argsort(lead, kind="stable")]
        start = stop
    return vectors[:, order]


def decompose(values: np.ndarray, Q: float, labels=()) -> SpectralResult:
    a = np.asarray(values, dtype=float)
    law = mp_bounds(Q)
    if not np.all(np.isfinite(a)):
        raise ConvergenceFailure(f"matrix of shape {a.shape} has {int(np.sum(~np.isfinite(a)))} non-finite entries")
    try:
        lam, vec = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        finite = bool(np.all(np.isfinite(a)))
        asym = float(np.max(np.abs(a - a.T))) if finite else float("nan")
        raise ConvergenceFailure(
            f"eigh failed on {a.shape} matrix (finite={finite}, max asymmetry={asym:.3g}): {exc}"
        ) from exc
    vec = _order_degenerate(lam, fix_signs(vec))
    bulk, above, below = classify(lam, law)
    for arr in (lam, vec, bulk, above, below):
        arr.setflags(write=False)
    return SpectralResult(lam, vec, law, bulk, above, below, tuple(labels))


def eigendecompose(c: CorrelationMatrix) -> SpectralResult:
    """Ascending eigenvalues with sign-fixed orthonormal eigenvectors."""
    return decompose(c.values, c.Q, c.labels)
