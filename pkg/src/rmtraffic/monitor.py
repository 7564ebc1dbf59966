"""Window-level monitoring and anomaly detection.

A monitored panel is cut into windows; each window contributes three
indicators:

* the largest eigenvalue,
* the IPR tail: how many eigenvectors above the upper noise bound are
  localized (IPR above ``ipr_tail_factor * 3 / N``, the Gaussian-vector
  expectation being 3/N),
* the overlap diagonal between consecutive windows' deviating bases,
  restricted to the rows that are stable in the baseline.

``detect`` compares a current run with a baseline run.  An indicator fires
when a current window leaves both the baseline's observed range and its
tolerance band (k standard deviations, or the overlap floor), so a baseline
compared with itself never fires.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .correlation import correlation_matrix
from .eigenmodes import significant_participants
from .errors import IncompatibleReports, InvalidSpec
from .panel import NormalizedPanel, window
from .spectrum import eigendecompose
from .stability import WindowPlan


@dataclass(frozen=True)
class Thresholds:
    eigenvalue_sigmas: float = 3.0
    ipr_tail_sigmas: float = 3.0
    min_count_change: int = 1
    overlap_floor: float = 0.7
    stable_row_cut: float = 0.8
    novelty_cut: float = 0.5
    ipr_tail_factor: float = 2.0

    @classmethod
    def from_mapping(cls, d: dict) -> "Thresholds":
        names = {f.name: f.type for f in fields(cls)}
        unknown = set(d) - set(names)
        if unknown:
            raise InvalidSpec(f"unknown threshold keys {sorted(unknown)}")
        kw = {}
        for k, v in d.items():
            default = getattr(cls, k)
            try:
                kw[k] = type(default)(v)
            except (TypeError, ValueError):
                raise InvalidSpec(f"bad value for threshold {k}: {v!r}") from None
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "Thresholds":
        text = Path(path).read_text()
        if text.lstrip().startswith("{"):
            return cls.from_mapping(json.loads(text))
        return cls.from_mapping(parse_key_values(text))


def parse_key_values(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec(f"line {lineno}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


@dataclass
class WindowSummary:
    start: int
    end: int
    lambda_max: float
    lambda_plus: float
    ipr_tail: int
    deviating_eigenvalues: list
    deviating_ipr: list
    deviating_vectors: list  # p rows of N components, descending eigenvalue

    @property
    def p(self) -> int:
        return len(self.deviating_eigenvalues)

    def basis(self, n: int) -> np.ndarray:
        if not self.deviating_vectors:
            return np.zeros((0, n))
        return np.asarray(self.deviating_vectors, dtype=float)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = self.p
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WindowSummary":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def ipr_tail_cut(n: int, factor: float) -> float:
    return factor * 3.0 / n


def summarize_window(panel: NormalizedPanel, start: int, end: int, ipr_tail_factor: float = 2.0) -> WindowSummary:
    spec = eigendecompose(correlation_matrix(window(panel, start, end)))
    iprs = np.sum(spec.eigenvectors**4, axis=0)
    dev = spec.deviating_above[::-1]
    return WindowSummary(
        start=int(start),
        end=int(end),
        lambda_max=float(spec.eigenvalues[-1]),
        lambda_plus=float(spec.mp.lambda_plus),
        ipr_tail=int(np.sum(iprs[dev] > ipr_tail_cut(spec.n, ipr_tail_factor))),
        deviating_eigenvalues=[float(x) for x in spec.eigenvalues[dev]],
        deviating_ipr=[float(x) for x in iprs[dev]],
        deviating_vectors=[[float(x) for x in spec.eigenvectors[:, k]] for k in dev],
    )


def summarize_windows(panel: NormalizedPanel, plan: WindowPlan, ipr_tail_factor: float = 2.0) -> list[WindowSummary]:
    return [summarize_window(panel, s, e, ipr_tail_factor) for s, e in plan.windows]


def _overlap_diagonal(a: np.ndarray, b: np.ndarray, rows) -> list[float]:
    out = []
    for r in rows:
        if r < a.shape[0] and r < b.shape[0]:
            out.append(abs(float(a[r] @ b[r])))
        else:
            out.append(0.0)
    return out


def _outside(values, x, sigmas, min_change=0.0) -> bool:
    """x leaves the observed range and sits more than ``sigmas`` std (and ``min_change``) from the mean."""
    values = np.asarray(values, dtype=float)
    dev = abs(x - values.mean())
    in_range = values.min() <= x <= values.max()
    return dev > sigmas * values.std() and dev >= min_change and not in_range


def _tail(s: WindowSummary, cut: float) -> int:
    return int(sum(v > cut for v in s.deviating_ipr))


def stable_rows(summaries, n: int, cut: float) -> tuple[list[int], list[float]]:
    """Rows whose consecutive-window |O_ii| averages at least ``cut``."""
    bases = [s.basis(n) for s in summaries]
    if len(bases) < 2:
        return [], []
    max_p = max(b.shape[0] for b in bases)
    scores = np.zeros(max_p)
    for a, b in zip(bases, bases[1:]):
        scores += np.array(_overlap_diagonal(a, b, range(max_p)))
    scores /= len(bases) - 1
    rows = [r for r in range(max_p) if scores[r] >= cut]
    return rows, [float(x) for x in scores]


def detect(baseline: list[WindowSummary], current: list[WindowSummary], labels, thresholds: Thresholds | None = None) -> dict:
    th = thresholds or Thresholds()
    labels = list(labels)
    n = len(labels)
    if not baseline or not current:
        raise IncompatibleReports("both reports need window summaries")
    if {s.end - s.start for s in baseline} != {s.end - s.start for s in current}:
        raise IncompatibleReports("reports use different window lengths")

    # largest eigenvalue
    base_top = np.array([s.lambda_max for s in baseline])
    eig_windows = [i for i, s in enumerate(current)
                   if _outside(base_top, s.lambda_max, th.eigenvalue_sigmas)]

    # IPR tail length, recounted with the configured cut
    cut = ipr_tail_cut(n, th.ipr_tail_factor)
    base_tail = np.array([_tail(s, cut) for s in baseline], dtype=float)
    cur_tail = [_tail(s, cut) for s in current]
    tail_windows = [i for i, c in enumerate(cur_tail)
                    if _outside(base_tail, c, th.ipr_tail_sigmas, th.min_count_change)]

    # overlap diagonal of consecutive windows on baseline-stable rows
    rows, row_scores = stable_rows(baseline, n, th.stable_row_cut)
    base_bases = [s.basis(n) for s in baseline]
    base_pairs = [float(np.mean(_overlap_diagonal(a, b, rows))) for a, b in zip(base_bases, base_bases[1:])] if rows else []
    floor = min([th.overlap_floor] + base_pairs)
    cur_bases = [s.basis(n) for s in current]
    pair_values, overlap_windows = [], []
    if rows:
        for i, (a, b) in enumerate(zip(cur_bases, cur_bases[1:])):
            v = float(np.mean(_overlap_diagonal(a, b, rows)))
            pair_values.append(v)
            if v < th.overlap_floor and v < floor:
                overlap_windows.extend([i, i + 1])
    overlap_windows = sorted(set(overlap_windows))

    flagged = sorted(set(eig_windows) | set(tail_windows) | set(overlap_windows))

    # vectors in flagged windows that match no baseline-stable mode
    reference = [b[r] for b in base_bases for r in rows if r < b.shape[0]]
    implicated, changed = [], []
    for w in flagged:
        s = current[w]
        basis = cur_bases[w]
        for j in range(basis.shape[0]):
            v = basis[j]
            novelty = max((abs(float(v @ r)) for r in reference), default=0.0)
            if novelty < th.novelty_cut and s.deviating_ipr[j] > cut:
                members = significant_participants(v, labels)
                changed.append({"window": w, "row": j, "eigenvalue": s.deviating_eigenvalues[j],
                                "max_baseline_overlap": novelty, "participants": members})
                for m in members:
                    if m not in implicated:
                        implicated.append(m)

    handoff = []
    for w in flagged:
        if w == 0:
            continue
        prev, cur = cur_bases[w - 1], cur_bases[w]
        for r in rows:
            if r >= prev.shape[0] or cur.shape[0] == 0:
                continue
            ov = np.abs(cur @ prev[r])
            j = int(np.argmax(ov))
            handoff.append({"window": w, "row": r, "moved_to": j, "overlap": float(ov[j])})

    return {
        "eigenvalue": {
            "fired": bool(eig_windows),
            "windows": eig_windows,
            "baseline_mean": float(base_top.mean()),
            "baseline_std": float(base_top.std()),
            "values": [s.lambda_max for s in current],
        },
        "ipr_tail": {
            "fired": bool(tail_windows),
            "windows": tail_windows,
            "baseline_mean": float(base_tail.mean()),
            "baseline_std": float(base_tail.std()),
            "counts": cur_tail,
        },
        "overlap": {
            "fired": bool(overlap_windows),
            "windows": overlap_windows,
            "stable_rows": rows,
            "row_scores": row_scores,
            "baseline_min": min(base_pairs) if base_pairs else None,
            "pair_mean_abs_diagonal": pair_values,
        },
        "any_fired": bool(flagged),
        "flagged_windows": flagged,
        "implicated": implicated,
        "changed_vectors": changed,
        "handoff": handoff,
        "thresholds": asdict(th),
    }
