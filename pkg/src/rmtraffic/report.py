"""report.json and plot-table builders for a single analysed panel.

Every table is plain CSV with a header row; numbers are written with 17
significant digits so they parse back bit-identical.  JSON output is sorted
and indented, which makes a report a deterministic function of its inputs.
"""

from __future__ import annotations

import json

import numpy as np

from . import __version__
from .correlation import correlation_matrix
from .eigenmodes import (
    component_stats,
    gaussian_component_density,
    ipr_series,
    participant_count,
    project,
    regress_projection,
    significant_participants,
)
from .errors import InvalidSpec, NumericalError, WindowTooLarge
from .monitor import summarize_windows
from .panel import TrafficPanel, format_number, prepare
from .rmtstats import (
    nn_spacings,
    nnn_spacings,
    ks_distance,
    number_variance_empirical,
    number_variance_goe,
    number_variance_poisson,
    spacing_histogram,
)
from .spectrum import eigendecompose, mp_density
from .stability import plan_windows
from .unfolding import unfold

VARIANCE_LENGTHS = (1.0, 2.0, 5.0, 10.0)
DENSITY_BINS = 50


def dumps(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")


def loads(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    return json.loads(data)


def table(header, columns) -> bytes:
    """CSV bytes from equal-length columns."""
    cols = [list(c) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(_cell(v) for v in row))
    return ("\n".join(lines) + "\n").encode("utf-8")


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format_number(v)


def _floats(x) -> list:
    return [float(v) for v in np.ravel(x)]


def _ints(x) -> list:
    return [int(v) for v in np.ravel(x)]


def analyze(panel: TrafficPanel, a: int = 8, min_distinct: int = 2, seed: int = 0,
            unfold_bulk: bool = False, window: int | None = None, step: int | None = None,
            ipr_tail_factor: float = 2.0, stage=None) -> tuple[dict, dict]:
    """Run the full pipeline on a panel.

    Returns ``(report, plots)`` where plots maps file names to CSV bytes.
    ``stage`` is called with a short name before each step so callers can
    say where a failure happened.
    """
    mark = stage or (lambda name: None)

    mark("preprocess")
    norm, returns, excl = prepare(panel, min_distinct)

    mark("spectrum")
    corr = correlation_matrix(norm)
    spec = eigendecompose(corr)
    lam = spec.eigenvalues
    labels = list(norm.labels)

    mark("unfolding")
    levels = lam[spec.bulk] if unfold_bulk else lam
    unf = unfold(levels, a)

    mark("universality")
    nn = nn_spacings(unf)
    nnn = nnn_spacings(unf)
    variance = []
    for l in VARIANCE_LENGTHS:
        try:
            emp = number_variance_empirical(unf, l, seed=seed)
        except WindowTooLarge:
            continue
        variance.append({"l": l, "empirical": emp, "goe": number_variance_goe(l), "poisson": number_variance_poisson(l)})

    mark("eigenvectors")
    iprs = ipr_series(spec)
    deviating = []
    for k in spec.deviating_above[::-1]:
        u = spec.vector(k)
        st = component_stats(u, int(k))
        deviating.append({
            "index": int(k),
            "eigenvalue": float(lam[k]),
            "ipr": float(iprs.ipr[k]),
            "participant_count": participant_count(float(iprs.ipr[k])),
            "participants": significant_participants(u, labels),
            "kurtosis": st.kurtosis,
            "positive_fraction": st.positive_fraction,
        })
    bulk_ipr = iprs.ipr[spec.bulk]
    regression = None
    if spec.p:
        top = int(spec.deviating_above[-1])
        proj = project(returns, spec.vector(top), top)
        try:
            reg = regress_projection(proj, returns)
        except NumericalError:
            reg = None
        if reg is not None:
            regression = {
                "index": top,
                "best_label": reg.best_label,
                "best_correlation": float(reg.correlations[reg.best_index]),
                "correlations": _floats(reg.correlations),
            }

    windows = None
    if window is not None:
        mark("windows")
        if window <= norm.n_series:
            raise InvalidSpec(f"window of {window} returns needs to exceed the {norm.n_series} series (Q > 1)")
        plan = plan_windows(norm.n_obs, window, step or window)
        windows = {
            "length": plan.length,
            "step": plan.step,
            "ipr_tail_factor": ipr_tail_factor,
            "summaries": [s.to_dict() for s in summarize_windows(norm, plan, ipr_tail_factor)],
        }

    report = {
        "version": __version__,
        "config": {
            "broadening": int(a),
            "min_distinct": int(min_distinct),
            "seed": int(seed),
            "unfold_bulk": bool(unfold_bulk),
            "window": window,
            "step": (step or window) if window is not None else None,
        },
        "panel": {
            "n_series": norm.n_series,
            "n_returns": norm.n_obs,
            "dt": int(panel.dt),
            "Q": float(norm.Q),
            "labels": labels,
            "excluded": [{"label": lab, "reason": why} for lab, why in excl.dropped],
        },
        "mp": {
            "Q": float(spec.mp.Q),
            "lambda_minus": float(spec.mp.lambda_minus),
            "lambda_plus": float(spec.mp.lambda_plus),
        },
        "spectrum": {
            "eigenvalues": _floats(lam),
            "ipr": _floats(iprs.ipr),
            "bulk_count": int(spec.bulk.size),
            "deviating_above": _ints(spec.deviating_above),
            "deviating_below": _ints(spec.deviating_below),
            "p": int(spec.p),
            "fraction_inside": float(spec.bulk.size / spec.n),
            "bulk_mean_ipr": float(bulk_ipr.mean()) if bulk_ipr.size else None,
        },
        "universality": {
            "unfolded": "bulk" if unfold_bulk else "full",
            "n_levels": int(unf.n),
            "mean_spacing": float(np.mean(nn.spacings)),
            "ks_nearest_goe": ks_distance(nn, "goe"),
            "ks_nearest_poisson": ks_distance(nn, "poisson"),
            "ks_next_nearest_gse": ks_distance(nnn, "gse"),
            "number_variance": variance,
        },
        "deviating": deviating,
        "regression": regression,
        "windows": windows,
    }

    mark("plots")
    plots = _plots(spec, unf, nn, nnn, iprs, seed, returns, regression)
    return report, plots


def _plots(spec, unf, nn, nnn, iprs, seed, returns, regression) -> dict:
    lam = spec.eigenvalues
    out = {}

    # eigenvalue density against the noise law
    hi = max(float(lam[-1]), spec.mp.lambda_plus) * 1.02
    edges = np.linspace(0.0, hi, DENSITY_BINS + 1)
    counts, _ = np.histogram(lam, bins=edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    out["fig1_density.csv"] = table(
        ["lambda", "empirical", "marchenko_pastur"],
        [centers, counts / (lam.size * np.diff(edges)), mp_density(centers, spec.mp)],
    )

    # staircase and its smooth part
    out["fig2_unfolding.csv"] = table(
        ["staircase", "eigenvalue", "unfolded"],
        [np.arange(1, unf.n + 1), unf.eigenvalues, unf.xi],
    )

    s, emp, goe = spacing_histogram(nn, "goe")
    _, _, poi = spacing_histogram(nn, "poisson")
    out["fig3_nearest_spacing.csv"] = table(["s", "empirical", "goe", "poisson"], [s, emp, goe, poi])

    s, emp, gse = spacing_histogram(nnn, "gse")
    out["fig4_next_nearest_spacing.csv"] = table(["s", "empirical", "gse"], [s, emp, gse])

    top = min(10.0, (unf.xi[-1] - unf.xi[0]) / 2.0)
    ls = np.linspace(top / 40.0, top, 40) if top > 0 else np.zeros(0)
    out["fig5_number_variance.csv"] = table(
        ["l", "empirical", "goe", "poisson"],
        [ls,
         [number_variance_empirical(unf, l, seed=seed) for l in ls],
         [number_variance_goe(l) for l in ls],
         [number_variance_poisson(l) for l in ls]],
    )

    out["fig6_ipr.csv"] = table(["eigenvalue", "ipr"], [iprs.eigenvalues, iprs.ipr])

    # component distributions: a mid-bulk vector and the deviating ones
    picks = []
    if spec.bulk.size:
        picks.append(("bulk", int(spec.bulk[spec.bulk.size // 2])))
    picks += [(f"dev{j + 1}", int(k)) for j, k in enumerate(spec.deviating_above[::-1])]
    header, cols = ["x", "gaussian"], []
    for name, k in picks:
        st = component_stats(spec.vector(k), k)
        if not cols:
            cols = [st.bin_centers, gaussian_component_density(st.bin_centers)]
        header.append(f"{name}_u{k}")
        cols.append(st.density)
    if cols:
        out["fig7_components.csv"] = table(header, cols)

    if regression is not None:
        k = regression["index"]
        proj = project(returns, spec.vector(k), k)
        best = returns.labels.index(regression["best_label"])
        out["projection_regression.csv"] = table(
            ["t", "projection", "best_series"],
            [np.arange(proj.values.size), proj.values, returns.G[best]],
        )
    return out
