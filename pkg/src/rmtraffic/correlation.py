"""Equal-time cross-correlation matrices and their null ensembles."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidSpec
from .panel import NormalizedPanel, _as_text, format_number, standardize

RANDOM_CORRELATION = "random-correlation"
GOE = "goe"


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    n_obs: int

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def Q(self) -> float:
        return self.n_obs / self.n_series


@dataclass(frozen=True)
class EnsembleSpec:
    """Size and seed of a null-hypothesis draw.

    ``v`` only matters for the GOE variant, where it sets the width of the
    eigenvalue spectrum.
    """

    n: int
    L: int = 0
    seed: int | None = None
    variant: str = RANDOM_CORRELATION
    v: float = 1.0

    def __post_init__(self):
        if self.variant not in (RANDOM_CORRELATION, GOE):
            raise InvalidSpec(f"unknown ensemble variant {self.variant!r}")
        if self.variant == RANDOM_CORRELATION:
            if self.n < 2:
                raise InvalidSpec("random-correlation ensemble needs n >= 2")
            if self.L <= self.n:
                raise InvalidSpec(f"random-correlation ensemble needs L > n (L={self.L}, n={self.n})")
        else:
            if self.n < 1:
                raise InvalidSpec("GOE needs n >= 1")
            if not self.v > 0:
                raise InvalidSpec("GOE scale v must be positive")


def _rng(spec: EnsembleSpec, rng):
    return rng if rng is not None else np.random.default_rng(spec.seed)


def correlation_matrix(panel: NormalizedPanel) -> CorrelationMatrix:
    g = np.asarray(panel.g, dtype=float)
    if g.ndim != 2 or g.shape[0] != len(panel.labels):
        raise DimensionMismatch(f"panel of shape {g.shape} with {len(panel.labels)} labels")
    n, L = g.shape
    if n < 2 or L < 2:
        raise DimensionMismatch(f"need at least 2 series and 2 observations, got {g.shape}")
    c = (g @ g.T) / L
    # mirror the upper triangle so C is symmetric to the last bit
    c = np.triu(c, 1)
    c = c + c.T
    # <g_i^2> is 1 for every standardized row
    np.fill_diagonal(c, 1.0)
    c.setflags(write=False)
    return CorrelationMatrix(panel.labels, c, L)


def random_normalized_panel(spec: EnsembleSpec, rng: np.random.Generator | None = None) -> NormalizedPanel:
    """Independent Gaussian rows, re-standardized so R has an exact unit diagonal."""
    if spec.variant != RANDOM_CORRELATION:
        raise InvalidSpec("random_normalized_panel needs the random-correlation variant")
    a = _rng(spec, rng).standard_normal((spec.n, spec.L))
    labels = tuple(f"r{i}" for i in range(spec.n))
    return NormalizedPanel(labels, standardize(a))


def random_correlation_matrix(spec: EnsembleSpec, rng: np.random.Generator | None = None) -> CorrelationMatrix:
    return correlation_matrix(random_normalized_panel(spec, rng))


def goe_matrix(spec: EnsembleSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """Real symmetric matrix with weight exp(-tr H^2 / 4v^2).

    Off-diagonal entries are N(0, v^2) and diagonal entries N(0, 2v^2).
    """
    if spec.variant != GOE:
        raise InvalidSpec("goe_matrix needs the goe variant")
    gen = _rng(spec, rng)
    n, v = spec.n, spec.v
    upper = np.triu(gen.normal(0.0, v, size=(n, n)), 1)
    h = upper + upper.T
    h[np.diag_indices(n)] = gen.normal(0.0, np.sqrt(2.0) * v, size=n)
    return h


def write_matrix_csv(values: np.ndarray) -> bytes:
    """Row-major CSV, one matrix row per line."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    for row in np.atleast_2d(values):
        w.writerow([format_number(v) for v in row])
    return out.getvalue().encode("utf-8")


def read_matrix_csv(data) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(_as_text(data))) if r]
    return np.array([[float(v) for v in r] for r in rows], dtype=float)
