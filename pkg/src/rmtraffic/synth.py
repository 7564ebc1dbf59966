"""Synthetic traffic panels and anomaly injection.

Null panels are geometric random walks, so their log-returns are i.i.d.
Gaussian and the resulting correlation matrix is a finite-sample draw of the
random-correlation null.  ``inject`` perturbs a block of series over a span
of observations and leaves every other entry bit-identical.

Injection works on y = ln(T + 1), the same transform the returns use.  The
first count of the span is the anchor; step-based kinds (common-factor and
random-noise) subtract the mean step change so the last count of the span
also matches the original, which keeps the walk continuous at both ends.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import IndexOutOfBounds, InvalidSpec, SpanOutOfBounds
from .panel import DEFAULT_DT, TrafficPanel

BASE_RATE = 1e5
STEP_SIGMA = 0.05

COMMON_FACTOR = "common-factor"
SINE = "sine"
QUADRATIC = "quadratic"
RANDOM_NOISE = "random-noise"
KINDS = (COMMON_FACTOR, SINE, QUADRATIC, RANDOM_NOISE)

DEFAULT_AMPLITUDE = {SINE: 0.1}
DEFAULT_PERIOD = 24


@dataclass(frozen=True)
class InjectionSpec:
    targets: tuple[int, ...]
    span: tuple[int, int]
    kind: str = COMMON_FACTOR
    strength: float = 0.9
    seed: int = 0
    amplitude: float | None = None
    period: int = DEFAULT_PERIOD

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(i) for i in self.targets))
        object.__setattr__(self, "span", (int(self.span[0]), int(self.span[1])))
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown injection kind {self.kind!r}; expected one of {KINDS}")
        if len(set(self.targets)) != len(self.targets):
            raise InvalidSpec("injection targets must be distinct")
        if self.kind == COMMON_FACTOR and not 0 < self.strength <= 1:
            raise InvalidSpec(f"strength must lie in (0, 1], got {self.strength}")
        if self.period < 1:
            raise InvalidSpec("period must be positive")

    def validate(self, n_series: int, n_obs: int) -> None:
        for i in self.targets:
            if not 0 <= i < n_series:
                raise IndexOutOfBounds(f"target {i} outside 0..{n_series - 1}")
        s, e = self.span
        if not 0 <= s <= e <= n_obs:
            raise SpanOutOfBounds(f"span ({s}, {e}) outside 0..{n_obs}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["targets"] = list(self.targets)
        d["span"] = list(self.span)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InjectionSpec":
        known = {"targets", "span", "kind", "strength", "seed", "amplitude", "period"}
        extra = set(d) - known
        if extra:
            raise InvalidSpec(f"unknown injection fields {sorted(extra)}")
        if "targets" not in d or "span" not in d:
            raise InvalidSpec("injection spec needs 'targets' and 'span'")
        return cls(**d)


def load_specs(data) -> list[InjectionSpec]:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"injection spec file is not JSON: {exc}") from None
    if not isinstance(raw, list):
        raise InvalidSpec("injection spec file must hold a JSON list")
    try:
        return [InjectionSpec.from_dict(d) for d in raw]
    except TypeError as exc:
        raise InvalidSpec(str(exc)) from None


def dump_specs(specs) -> str:
    return json.dumps([s.to_dict() for s in specs], indent=2, sort_keys=True) + "\n"


def generate_null(n: int, L: int, seed=0, dt: int = DEFAULT_DT, base: float = BASE_RATE,
                  step_sigma: float = STEP_SIGMA) -> TrafficPanel:
    """N independent geometric random walks of L counts each."""
    if n < 1 or L < 2:
        raise InvalidSpec(f"need n >= 1 and L >= 2, got n={n}, L={L}")
    rng = np.random.default_rng(seed)
    steps = rng.normal(0.0, step_sigma, size=(n, L))
    counts = np.round(base * np.exp(np.cumsum(steps, axis=1)))
    labels = tuple(f"link{i:03d}" for i in range(n))
    ts = np.arange(L, dtype=np.int64) * dt
    return TrafficPanel(labels, ts, counts)


def _bridge(y: np.ndarray, new_steps: np.ndarray) -> np.ndarray:
    old_steps = np.diff(y, axis=1)
    new_steps = new_steps - (new_steps - old_steps).mean(axis=1, keepdims=True)
    out = np.empty_like(y)
    out[:, 0] = y[:, 0]
    out[:, 1:] = y[:, :1] + np.cumsum(new_steps, axis=1)
    out[:, -1] = y[:, -1]
    return out


def _step_scale(y: np.ndarray) -> np.ndarray:
    sd = np.diff(y, axis=1).std(axis=1)
    return np.where(sd > 0, sd, STEP_SIGMA)[:, None]


def _quadratic_amplitude(half: float, period: int) -> float:
    """Peak giving the parabola the same per-step RMS change as the default sine.

    The sine's steps have RMS sqrt(2) A sin(pi/P); the parabola's steps are a
    linear ramp with RMS 2 peak / (half sqrt(3)).
    """
    sine_rms = np.sqrt(2.0) * DEFAULT_AMPLITUDE[SINE] * np.sin(np.pi / period)
    return float(sine_rms * half * np.sqrt(3.0) / 2.0)


def inject(panel: TrafficPanel, spec: InjectionSpec) -> TrafficPanel:
    spec.validate(panel.n_series, panel.n_obs)
    s, e = spec.span
    d = e - s
    if d < 2 or not spec.targets:
        return TrafficPanel(panel.labels, panel.timestamps, panel.counts.copy())
    idx = np.asarray(spec.targets)
    y = np.log1p(panel.counts[idx, s:e])
    rng = np.random.default_rng(spec.seed)
    t = np.arange(d, dtype=float)

    if spec.kind == COMMON_FACTOR:
        rho = spec.strength
        own = np.diff(y, axis=1)
        shared = rng.standard_normal(d - 1)
        steps = np.sqrt(1.0 - rho**2) * own + rho * _step_scale(y) * shared
        y_new = _bridge(y, steps)
    elif spec.kind == RANDOM_NOISE:
        steps = _step_scale(y) * rng.standard_normal((idx.size, d - 1))
        y_new = _bridge(y, steps)
    elif spec.kind == SINE:
        amp = DEFAULT_AMPLITUDE[SINE] if spec.amplitude is None else spec.amplitude
        y_new = y + amp * np.sin(2.0 * np.pi * t / spec.period)
    else:
        half = (d - 1) / 2.0
        amp = _quadratic_amplitude(half, spec.period) if spec.amplitude is None else spec.amplitude
        # parabola vanishing at both span ends, peak amplitude at the center
        y_new = y + amp * (1.0 - ((t - half) / half) ** 2)

    counts = panel.counts.copy()
    block = np.ix_(idx, np.arange(s, e))
    # entries the perturbation leaves at zero keep their exact original count
    counts[block] = np.where(y_new == y, panel.counts[block], np.clip(np.expm1(y_new), 0.0, None))
    return TrafficPanel(panel.labels, panel.timestamps, counts)


def inject_all(panel: TrafficPanel, specs) -> TrafficPanel:
    for spec in specs:
        panel = inject(panel, spec)
    return panel


def ground_truth(specs, n_series: int, n_obs: int) -> np.ndarray:
    """Boolean (series x observation) mask: union of every spec's rectangle."""
    mask = np.zeros((n_series, n_obs), dtype=bool)
    for spec in specs:
        spec.validate(n_series, n_obs)
        s, e = spec.span
        mask[np.ix_(np.asarray(spec.targets, dtype=int), np.arange(s, e))] = True
    return mask


def write_mask_csv(mask: np.ndarray, panel: TrafficPanel) -> bytes:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["timestamp", *panel.labels])
    for j, ts in enumerate(panel.timestamps):
        w.writerow([int(ts), *(int(v) for v in mask[:, j])])
    return out.getvalue().encode("utf-8")


def read_mask_csv(data) -> np.ndarray:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    rows = list(csv.reader(io.StringIO(data)))[1:]
    return np.array([[v == "1" for v in r[1:]] for r in rows if r], dtype=bool).T


@dataclass
class Experiment:
    """A structured panel plus the anomaly injected on top of it."""

    baseline: TrafficPanel
    current: TrafficPanel
    structure: list[InjectionSpec] = field(default_factory=list)
    anomalies: list[InjectionSpec] = field(default_factory=list)


def structured_panel(n: int, L: int, seed=0, groups=((0, 12, 0.6),)) -> tuple[TrafficPanel, list[InjectionSpec]]:
    """Null panel with persistent common factors.

    ``groups`` holds ``(first_index, size, strength)`` triples; each group
    shares one factor over the whole panel, giving stable deviating modes.
    """
    panel = generate_null(n, L, seed)
    specs = []
    for g, (first, size, rho) in enumerate(groups):
        spec = InjectionSpec(tuple(range(first, first + size)), (0, L), COMMON_FACTOR, rho,
                             seed=_derived_seed(seed, 1000 + g))
        specs.append(spec)
        panel = inject(panel, spec)
    return panel, specs


def _derived_seed(seed, salt: int) -> int:
    return int(np.random.SeedSequence([int(seed or 0), salt]).generate_state(1)[0])


def correlation_experiment(n: int = 200, L: int = 2000, k: int = 22, span=(800, 1000), seed=0,
                           strength: float = 0.9, groups=((0, 12, 0.6),)) -> Experiment:
    """Temporary correlation among ``k`` series outside the persistent groups."""
    baseline, structure = structured_panel(n, L, seed, groups)
    taken = {i for spec in structure for i in spec.targets}
    pool = np.array([i for i in range(n) if i not in taken])
    rng = np.random.default_rng(_derived_seed(seed, 7))
    targets = tuple(sorted(int(i) for i in rng.choice(pool, size=k, replace=False)))
    anomaly = InjectionSpec(targets, tuple(span), COMMON_FACTOR, strength, seed=_derived_seed(seed, 8))
    return Experiment(baseline, inject(baseline, anomaly), structure, [anomaly])
