"""Traffic-count panels: ingest, inactive-series exclusion and rate changes.

A panel holds N equally spaced traffic-rate series (bytes/s averages as
logged by MRTG).  The pipeline is::

    TrafficPanel --exclude_inactive--> TrafficPanel
                 --log_returns------> ReturnsPanel   (G_i(t), mean, sigma)
                 --normalize--------> NormalizedPanel (g_i(t), Q = L/N)
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllExcluded,
    DimensionMismatch,
    DuplicateLabel,
    EmptyLog,
    InvalidSpec,
    MalformedRow,
    UnequalSpacing,
    ZeroVariance,
)

DEFAULT_DT = 300
_ZERO_SIGMA = 1e-14


def _as_text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        return data.decode("utf-8")
    if isinstance(data, str):
        return data
    raw = data.read()
    return raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw


def format_number(x) -> str:
    """Decimal text that parses back to the identical float."""
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class TrafficPanel:
    labels: tuple[str, ...]
    timestamps: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        ts = np.asarray(self.timestamps, dtype=np.int64)
        counts = np.array(self.counts, dtype=float, ndmin=2)
        if len(set(labels)) != len(labels):
            seen = set()
            dup = next(x for x in labels if x in seen or seen.add(x))
            raise DuplicateLabel(f"label {dup!r} appears more than once")
        if counts.shape != (len(labels), ts.size):
            raise DimensionMismatch(
                f"counts shape {counts.shape} != ({len(labels)}, {ts.size})"
            )
        if ts.size < 2:
            raise InvalidSpec("a panel needs at least two timestamps")
        gaps = np.diff(ts)
        if gaps[0] <= 0 or np.any(gaps != gaps[0]):
            raise UnequalSpacing(f"timestamp gaps are not constant: {sorted(set(gaps.tolist()))[:5]}")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise MalformedRow("counts must be finite and non-negative")
        ts.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "counts", counts)

    @property
    def n_series(self) -> int:
        return len(self.labels)

    @property
    def n_obs(self) -> int:
        return self.timestamps.size

    @property
    def dt(self) -> int:
        return int(self.timestamps[1] - self.timestamps[0])

    def select(self, indices: Sequence[int]) -> "TrafficPanel":
        idx = list(indices)
        return TrafficPanel(
            tuple(self.labels[i] for i in idx), self.timestamps, self.counts[idx]
        )

    def equals(self, other: "TrafficPanel") -> bool:
        """Bit-exact comparison of labels, timestamps and counts."""
        return (
            self.labels == other.labels
            and np.array_equal(self.timestamps, other.timestamps)
            and self.counts.shape == other.counts.shape
            and self.counts.tobytes() == other.counts.tobytes()
        )


@dataclass(frozen=True, eq=False)
class ReturnsPanel:
    labels: tuple[str, ...]
    G: np.ndarray
    mean: np.ndarray
    sigma: np.ndarray

    @property
    def n_series(self) -> int:
        return self.G.shape[0]

    @property
    def n_obs(self) -> int:
        return self.G.shape[1]


@dataclass(frozen=True, eq=False)
class NormalizedPanel:
    labels: tuple[str, ...]
    g: np.ndarray

    @property
    def n_series(self) -> int:
        return self.g.shape[0]

    @property
    def n_obs(self) -> int:
        return self.g.shape[1]

    @property
    def Q(self) -> float:
        return self.n_obs / self.n_series


@dataclass
class ExclusionReport:
    kept: list[str] = field(default_factory=list)
    dropped: list[tuple[str, str]] = field(default_factory=list)


# --------------------------------------------------------------------------
# Readers and writers


def parse_csv(data) -> TrafficPanel:
    """Read ``timestamp,<label1>,...`` CSV text into a panel.

    Rows may arrive in any order; they are sorted by timestamp before the
    spacing check.
    """
    reader = csv.reader(io.StringIO(_as_text(data)))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow("empty CSV input") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "timestamp" or len(header) < 2:
        raise MalformedRow(f"bad header {header!r}")
    labels = header[1:]
    if len(set(labels)) != len(labels):
        raise DuplicateLabel(f"duplicate labels in header {labels!r}")

    times, rows = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            t = int(row[0])
            vals = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise MalformedRow(f"line {lineno}: {exc}") from None
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise MalformedRow(f"line {lineno}: counts must be finite and non-negative")
        times.append(t)
        rows.append(vals)
    if len(times) < 2:
        raise MalformedRow("need at least two data rows")

    order = np.argsort(np.asarray(times, dtype=np.int64), kind="stable")
    ts = np.asarray(times, dtype=np.int64)[order]
    counts = np.asarray(rows, dtype=float)[order].T
    return TrafficPanel(tuple(labels), ts, counts)


def write_csv(panel: TrafficPanel) -> bytes:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["timestamp", *panel.labels])
    for j, t in enumerate(panel.timestamps):
        w.writerow([int(t), *(format_number(v) for v in panel.counts[:, j])])
    return out.getvalue().encode("utf-8")


def parse_mrtg_log(data, direction: str = "in", label: str = "series", dt: int = DEFAULT_DT) -> TrafficPanel:
    """Extract the finest consolidation tier of an MRTG log as one series.

    MRTG writes ``unixtime avg_in avg_out max_in max_out`` newest first, with
    the 300 s rows followed by coarser tiers.  Rows are walked in file order
    and kept while each sits ``dt`` seconds before the last kept row; the
    first larger gap marks the start of the coarser tiers.  A leading
    three-field line (MRTG's current-counter header) is skipped, and so is a
    newest row less than ``dt`` ahead of the next one (the open interval).
    """
    if direction not in ("in", "out"):
        raise InvalidSpec(f"direction must be 'in' or 'out', not {direction!r}")
    col = 1 if direction == "in" else 2
    lines = [ln.split() for ln in _as_text(data).splitlines() if ln.strip()]
    if lines and len(lines[0]) == 3:
        lines = lines[1:]
    if not lines:
        raise EmptyLog("MRTG log has no data rows")
    # the newest row covers the still-open interval and sits closer than dt
    if len(lines) > 1 and len(lines[0]) == len(lines[1]) == 5:
        try:
            if 0 <= int(lines[0][0]) - int(lines[1][0]) < dt:
                lines = lines[1:]
        except ValueError:
            pass

    kept_t, kept_v = [], []
    for lineno, parts in enumerate(lines, start=1):
        if len(parts) != 5:
            raise MalformedRow(f"MRTG row {lineno}: expected 5 fields, got {len(parts)}")
        try:
            t = int(parts[0])
            v = float(parts[col])
        except ValueError as exc:
            raise MalformedRow(f"MRTG row {lineno}: {exc}") from None
        if not math.isfinite(v) or v < 0:
            raise MalformedRow(f"MRTG row {lineno}: negative or non-finite rate")
        if kept_t and kept_t[-1] - t > dt:
            break
        if kept_t and kept_t[-1] - t < dt:
            raise UnequalSpacing(f"MRTG row {lineno}: gap {kept_t[-1] - t} s is below {dt} s")
        kept_t.append(t)
        kept_v.append(v)

    ts = np.asarray(kept_t[::-1], dtype=np.int64)
    counts = np.asarray(kept_v[::-1], dtype=float)[None, :]
    return TrafficPanel((label,), ts, counts)


def combine(panels: Iterable[TrafficPanel]) -> TrafficPanel:
    """Stack single- or multi-series panels over their shared timestamps."""
    panels = list(panels)
    if not panels:
        raise EmptyLog("nothing to combine")
    common = panels[0].timestamps
    for p in panels[1:]:
        common = np.intersect1d(common, p.timestamps)
    labels, rows = [], []
    for p in panels:
        idx = np.searchsorted(p.timestamps, common)
        labels.extend(p.labels)
        rows.append(p.counts[:, idx])
    return TrafficPanel(tuple(labels), common, np.vstack(rows))


def read_mrtg_dir(path, dt: int = DEFAULT_DT) -> TrafficPanel:
    """Every ``*.log`` file contributes ``<stem>:in`` and ``<stem>:out``."""
    files = sorted(Path(path).glob("*.log"))
    if not files:
        raise EmptyLog(f"no *.log files in {path}")
    parts = []
    for f in files:
        raw = f.read_bytes()
        for direction in ("in", "out"):
            parts.append(parse_mrtg_log(raw, direction, f"{f.stem}:{direction}", dt))
    return combine(parts)


# --------------------------------------------------------------------------
# Preprocessing


def exclude_inactive(panel: TrafficPanel, min_distinct: int = 2) -> tuple[TrafficPanel, ExclusionReport]:
    """Drop series with fewer than ``min_distinct`` distinct count values.

    Idle links (all zero) and links carrying only a constant test rate show a
    single distinct value and are always dropped.
    """
    if min_distinct < 2:
        raise InvalidSpec("min_distinct must be at least 2")
    report = ExclusionReport()
    keep = []
    for i, label in enumerate(panel.labels):
        n_distinct = np.unique(panel.counts[i]).size
        if n_distinct >= min_distinct:
            keep.append(i)
            report.kept.append(label)
        else:
            reason = "constant" if n_distinct == 1 else f"only {n_distinct} distinct values"
            report.dropped.append((label, reason))
    if not keep:
        raise AllExcluded("every series was excluded as inactive")
    return panel.select(keep), report


def log_returns(panel: TrafficPanel) -> ReturnsPanel:
    # one byte added to every count keeps ln() finite on idle intervals
    logs = np.log1p(panel.counts)
    G = np.diff(logs, axis=1)
    # population sigma, sqrt(<G^2> - <G>^2), computed two-pass for accuracy
    return ReturnsPanel(panel.labels, G, G.mean(axis=1), G.std(axis=1))


def standardize(x: np.ndarray, labels: Sequence[str] | None = None) -> np.ndarray:
    """Rows rescaled to mean 0 and population standard deviation 1."""
    x = np.asarray(x, dtype=float)
    centered = x - x.mean(axis=1, keepdims=True)
    sigma = centered.std(axis=1)
    scale = np.abs(x).max(axis=1) if x.size else sigma
    for i in np.flatnonzero(sigma <= _ZERO_SIGMA * (1.0 + scale)):
        raise ZeroVariance(labels[i] if labels is not None else i)
    g = centered / sigma[:, None]
    # second pass removes the residual rounding in the first division
    g -= g.mean(axis=1, keepdims=True)
    g /= g.std(axis=1)[:, None]
    return g


def normalize(returns: ReturnsPanel) -> NormalizedPanel:
    return NormalizedPanel(returns.labels, standardize(returns.G, returns.labels))


def window(panel: NormalizedPanel, start: int, end: int) -> NormalizedPanel:
    """Re-standardized slice ``[start, end)`` of a normalized panel."""
    if not 0 <= start < end <= panel.n_obs:
        raise InvalidSpec(f"window [{start}, {end}) outside 0..{panel.n_obs}")
    return NormalizedPanel(panel.labels, standardize(panel.g[:, start:end], panel.labels))


def prepare(panel: TrafficPanel, min_distinct: int = 2) -> tuple[NormalizedPanel, ReturnsPanel, ExclusionReport]:
    """Exclusion, log returns and normalization in one call."""
    active, report = exclude_inactive(panel, min_distinct)
    returns = log_returns(active)
    return normalize(returns), returns, report
