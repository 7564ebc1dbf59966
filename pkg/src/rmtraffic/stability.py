"""Time stability of the deviating eigenvectors.

The deviating basis of a window stacks the eigenvectors whose eigenvalues
exceed the upper random-matrix bound, largest eigenvalue first.  The overlap
of two windows A and B is ``D_A @ D_B.T``; a diagonal close to one means the
same non-random interaction modes are present in both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlation import correlation_matrix
from .errors import DimensionMismatch, InvalidSpec, NoDeviating, WindowTooLong
from .panel import NormalizedPanel, window
from .spectrum import SpectralResult, eigendecompose


@dataclass(frozen=True)
class WindowPlan:
    length: int
    step: int
    windows: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.windows)


@dataclass(frozen=True, eq=False)
class DeviatingBasis:
    D: np.ndarray  # p x N, rows ordered by descending eigenvalue
    eigenvalues: np.ndarray
    window: tuple[int, int] | None = None

    @property
    def p(self) -> int:
        return self.D.shape[0]


@dataclass(frozen=True, eq=False)
class OverlapMatrix:
    O: np.ndarray
    window_a: tuple[int, int] | None
    window_b: tuple[int, int] | None
    lag: int | None = None

    @property
    def diagonal(self) -> np.ndarray:
        k = min(self.O.shape)
        return np.diagonal(self.O)[:k].copy()

    @property
    def mean_abs_diagonal(self) -> float:
        d = self.diagonal
        return float(np.mean(np.abs(d))) if d.size else 0.0


@dataclass
class LagEntry:
    lag: int
    window: tuple[int, int]
    overlap: OverlapMatrix

    @property
    def diagonal(self):
        return self.overlap.diagonal

    @property
    def mean_abs_diagonal(self):
        return self.overlap.mean_abs_diagonal


@dataclass
class StabilityReport:
    base_window: tuple[int, int]
    entries: list[LagEntry] = field(default_factory=list)
    most_stable_row: int | None = None
    row_stability: np.ndarray | None = None
    missing: list[tuple[int, tuple[int, int]]] = field(default_factory=list)  # (lag, window) without deviating modes


def plan_windows(L: int, length: int, step: int) -> WindowPlan:
    """All windows ``[s, s + length)`` with ``s = 0, step, 2*step, ...`` inside ``L``."""
    if step < 1 or length < 1:
        raise InvalidSpec("window length and step must be positive")
    if length > L:
        raise WindowTooLong(f"window of {length} observations exceeds panel length {L}")
    starts = range(0, L - length + 1, step)
    return WindowPlan(length, step, tuple((s, s + length) for s in starts))


def window_spectrum(panel: NormalizedPanel, start: int, end: int) -> SpectralResult:
    return eigendecompose(correlation_matrix(window(panel, start, end)))


def deviating_basis(spec: SpectralResult, window_id=None) -> DeviatingBasis:
    idx = spec.deviating_above[::-1]
    if idx.size == 0:
        raise NoDeviating(window=window_id)
    return DeviatingBasis(spec.eigenvectors[:, idx].T.copy(), spec.eigenvalues[idx].copy(), window_id)


def overlap(a: DeviatingBasis, b: DeviatingBasis, lag: int | None = None) -> OverlapMatrix:
    if a.D.shape[1] != b.D.shape[1]:
        raise DimensionMismatch(f"bases over {a.D.shape[1]} and {b.D.shape[1]} series")
    return OverlapMatrix(a.D @ b.D.T, a.window, b.window, lag)


def stability_report(panel: NormalizedPanel, base_window: tuple[int, int], lags, skip_missing: bool = False) -> StabilityReport:
    """Overlap of the base window's deviating basis with the basis at each lag.

    ``base_window`` is ``(start, length)`` in observations; lags are offsets
    of the window start.  A window with no deviating eigenvalue raises
    ``NoDeviating`` naming the window, unless ``skip_missing`` is set, in
    which case the lag is listed in ``report.missing`` and the run goes on.
    """
    start, length = base_window
    lags = [int(t) for t in lags]
    for t in lags:
        if t < 0:
            raise InvalidSpec("lags must be non-negative")
        if start + t + length > panel.n_obs:
            raise WindowTooLong(
                f"lag {t}: window [{start + t}, {start + t + length}) exceeds {panel.n_obs} observations"
            )
    base_id = (start, start + length)
    report = StabilityReport(base_id)
    try:
        base = deviating_basis(window_spectrum(panel, *base_id), base_id)
    except NoDeviating:
        if not skip_missing:
            raise
        report.missing = [(t, (start + t, start + t + length)) for t in lags]
        return report
    for t in lags:
        wid = (start + t, start + t + length)
        try:
            other = base if t == 0 else deviating_basis(window_spectrum(panel, *wid), wid)
        except NoDeviating:
            if not skip_missing:
                raise
            report.missing.append((t, wid))
            continue
        report.entries.append(LagEntry(t, wid, overlap(base, other, lag=t)))
    summarize_rows(report)
    return report


def summarize_rows(report: StabilityReport) -> None:
    """Mean |O_ii| across lags for the rows every lag shares; sets the most stable row."""
    if not report.entries:
        return
    k = min(e.diagonal.size for e in report.entries)
    if k == 0:
        return
    stack = np.abs(np.array([e.diagonal[:k] for e in report.entries]))
    report.row_stability = stack.mean(axis=0)
    report.most_stable_row = int(np.argmax(report.row_stability))


def eigenvalue_convergence(panel: NormalizedPanel, lengths) -> list[tuple[int, float]]:
    """KS distance between pooled window spectra of length w and 2w.

    Windows tile the panel without overlap; returns ``(w, distance)`` pairs.
    """
    from scipy.stats import ks_2samp

    out = []
    for w in lengths:
        pools = []
        for length in (w, 2 * w):
            plan = plan_windows(panel.n_obs, length, length)
            vals = [np.linalg.eigvalsh(correlation_matrix(window(panel, s, e)).values) for s, e in plan.windows]
            pools.append(np.concatenate(vals))
        out.append((int(w), float(ks_2samp(pools[0], pools[1]).statistic)))
    return out
