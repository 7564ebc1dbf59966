"""Command-line front end.

Subcommands::

    rmtraffic analyze   --input panel.csv --out run/ [--window 400 --step 200]
    rmtraffic stability --input panel.csv --window 400 --lags 0,200,400 --out stab/
    rmtraffic synth     --n-series 200 --length 2000 --specs inject.json --out synth/
    rmtraffic detect    --baseline a/report.json --current b/report.json --out verdict/

Settings may also come from ``--config FILE`` holding ``key=value`` lines
named like the long flags; flags given on the command line win.

Exit codes: 0 success, 1 configuration or spec error, 2 input/output error,
3 numerical failure.  On failure the stage that failed is named on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import IncompatibleReports, InputError, InvalidSpec, NumericalError
from .monitor import Thresholds, WindowSummary, detect, parse_key_values
from .panel import DEFAULT_DT, parse_csv, prepare, read_mrtg_dir, write_csv
from .report import analyze, dumps, loads, table
from .stability import stability_report
from .synth import generate_null, dump_specs, ground_truth, inject_all, load_specs, write_mask_csv
from .unfolding import DEFAULT_BROADENING

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(InvalidSpec):
    pass


def _lags(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(t) for t in text]
    try:
        return [int(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError:
        raise ConfigError(f"lags must be comma-separated integers, got {text!r}") from None


def _flag(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


# name -> (converter, default)
SETTINGS = {
    "input": (str, None),
    "kind": (str, "csv"),
    "dt": (int, DEFAULT_DT),
    "broadening": (int, DEFAULT_BROADENING),
    "window": (int, None),
    "step": (int, None),
    "start": (int, 0),
    "lags": (_lags, None),
    "min_distinct": (int, 2),
    "seed": (int, 0),
    "out": (str, None),
    "thresholds": (str, None),
    "unfold_bulk": (_flag, False),
    "n_series": (int, None),
    "length": (int, None),
    "specs": (str, None),
    "baseline": (str, None),
    "current": (str, None),
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rmtraffic", description="Random-matrix analysis of traffic-count panels.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inputs=True):
        sp.add_argument("--config", help="key=value file mirroring the long flags")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int)
        if inputs:
            sp.add_argument("--input", help="CSV panel or MRTG log directory")
            sp.add_argument("--kind", choices=("csv", "mrtg-dir"))
            sp.add_argument("--dt", type=int, help="sampling interval in seconds (default 300)")
            sp.add_argument("--min-distinct", type=int, help="drop series with fewer distinct counts (default 2)")
            sp.add_argument("--broadening", type=int, help="unfolding parameter a (default 8)")

    a = sub.add_parser("analyze", help="spectrum, universality tests and eigenvector report")
    common(a)
    a.add_argument("--window", type=int, help="monitoring window length in returns")
    a.add_argument("--step", type=int, help="monitoring window step (default: window)")
    a.add_argument("--unfold-bulk", action="store_const", const=True, help="unfold only eigenvalues inside the noise band")

    s = sub.add_parser("stability", help="overlap of deviating eigenvectors across time lags")
    common(s)
    s.add_argument("--window", type=int, help="window length in returns")
    s.add_argument("--start", type=int, help="start of the base window (default 0)")
    s.add_argument("--lags", help="comma-separated lags in returns (default 0)")
    s.add_argument("--step", type=int, help="lag spacing when --lags is absent")

    y = sub.add_parser("synth", help="null panel with injected anomalies")
    common(y, inputs=False)
    y.add_argument("--n-series", type=int)
    y.add_argument("--length", type=int, help="number of counts per series")
    y.add_argument("--dt", type=int)
    y.add_argument("--specs", help="JSON list of injection specs")

    d = sub.add_parser("detect", help="compare two windowed reports")
    d.add_argument("--config")
    d.add_argument("--out", help="output directory (default: print to stdout)")
    d.add_argument("--baseline", help="baseline report.json")
    d.add_argument("--current", help="current report.json")
    d.add_argument("--thresholds", help="threshold file, JSON or key=value")
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = {k: default for k, (_, default) in SETTINGS.items()}
    if getattr(args, "config", None):
        text = Path(args.config).read_text()
        for k, v in parse_key_values(text).items():
            if k not in SETTINGS:
                raise ConfigError(f"unknown config key {k!r}")
            try:
                cfg[k] = SETTINGS[k][0](v)
            except ValueError:
                raise ConfigError(f"bad value for {k}: {v!r}") from None
    for k, v in vars(args).items():
        if k in SETTINGS and v is not None:
            cfg[k] = SETTINGS[k][0](v)
    if cfg["dt"] <= 0:
        raise ConfigError("dt must be positive")
    if cfg["broadening"] < 1:
        raise ConfigError("broadening must be at least 1")
    if cfg["window"] is not None and cfg["window"] <= 2 * cfg["broadening"] + 1:
        raise ConfigError(f"window {cfg['window']} must exceed 2a+1 = {2 * cfg['broadening'] + 1}")
    if cfg["step"] is not None and cfg["step"] < 1:
        raise ConfigError("step must be positive")
    if cfg["min_distinct"] < 2:
        raise ConfigError("min_distinct must be at least 2")
    return cfg


def _require(cfg, *names):
    for n in names:
        if cfg[n] is None:
            raise ConfigError(f"--{n.replace('_', '-')} is required")


def _load_panel(cfg):
    path = Path(cfg["input"])
    if not path.exists():
        raise FileNotFoundError(f"input not found: {path}")
    if cfg["kind"] == "csv":
        return parse_csv(path.read_bytes())
    if cfg["kind"] == "mrtg-dir":
        return read_mrtg_dir(path, cfg["dt"])
    raise ConfigError(f"unknown input kind {cfg['kind']!r}")


def _write(out: Path, name: str, data: bytes) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_bytes(data)


class _Stage:
    name = "config"

    def __call__(self, name):
        self.name = name


def cmd_analyze(cfg, stage) -> int:
    _require(cfg, "input", "out")
    stage("read")
    panel = _load_panel(cfg)
    report, plots = analyze(
        panel,
        a=cfg["broadening"],
        min_distinct=cfg["min_distinct"],
        seed=cfg["seed"],
        unfold_bulk=cfg["unfold_bulk"],
        window=cfg["window"],
        step=cfg["step"],
        stage=stage,
    )
    stage("write")
    out = Path(cfg["out"])
    data = dumps(report)
    if loads(data) != report:
        raise NumericalError("report.json does not round-trip")
    _write(out, "report.json", data)
    for name in sorted(plots):
        _write(out, name, plots[name])
    return EXIT_OK


def cmd_stability(cfg, stage) -> int:
    _require(cfg, "input", "out", "window")
    stage("read")
    panel = _load_panel(cfg)
    stage("preprocess")
    norm, _, _ = prepare(panel, cfg["min_distinct"])
    lags = cfg["lags"]
    if lags is None:
        step = cfg["step"] or cfg["window"]
        lags = list(range(0, norm.n_obs - cfg["start"] - cfg["window"] + 1, step)) or [0]
    stage("stability")
    rep = stability_report(norm, (cfg["start"], cfg["window"]), lags, skip_missing=True)
    stage("write")
    out = Path(cfg["out"])
    entries = []
    for e in rep.entries:
        name = f"overlap_lag{e.lag}.csv"
        O = e.overlap.O
        header = ["row"] + [f"b{j + 1}" for j in range(O.shape[1])]
        _write(out, name, table(header, [range(1, O.shape[0] + 1), *O.T]))
        entries.append({
            "lag": e.lag,
            "window": list(e.window),
            "p_base": int(O.shape[0]),
            "p_lag": int(O.shape[1]),
            "diagonal": [float(x) for x in e.diagonal],
            "mean_abs_diagonal": e.mean_abs_diagonal,
            "file": name,
        })
    summary = {
        "base_window": list(rep.base_window),
        "window": cfg["window"],
        "lags": entries,
        "missing": [{"lag": t, "window": list(w), "reason": "no deviating eigenvalue"} for t, w in rep.missing],
        "most_stable_row": rep.most_stable_row,
        "row_stability": None if rep.row_stability is None else [float(x) for x in rep.row_stability],
        "labels": list(norm.labels),
    }
    _write(out, "stability.json", dumps(summary))
    for t, w in rep.missing:
        print(f"rmtraffic: stability: lag {t} window [{w[0]}, {w[1]}) has no deviating eigenvalue", file=sys.stderr)
    return EXIT_OK


def cmd_synth(cfg, stage) -> int:
    _require(cfg, "out", "n_series", "length")
    specs = []
    if cfg["specs"]:
        stage("read")
        path = Path(cfg["specs"])
        if not path.exists():
            raise FileNotFoundError(f"input not found: {path}")
        stage("specs")
        specs = load_specs(path.read_bytes())
        for s in specs:
            s.validate(cfg["n_series"], cfg["length"])
    stage("generate")
    panel = generate_null(cfg["n_series"], cfg["length"], cfg["seed"], dt=cfg["dt"])
    panel = inject_all(panel, specs)
    mask = ground_truth(specs, panel.n_series, panel.n_obs)
    stage("write")
    out = Path(cfg["out"])
    _write(out, "panel.csv", write_csv(panel))
    _write(out, "mask.csv", write_mask_csv(mask, panel))
    _write(out, "specs.json", dump_specs(specs).encode("utf-8"))
    return EXIT_OK


def _windows(path) -> tuple[list, list[WindowSummary]]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"input not found: {p}")
    try:
        rep = loads(p.read_bytes())
    except ValueError as exc:
        raise IncompatibleReports(f"{p} is not a report: {exc}") from None
    w = rep.get("windows") if isinstance(rep, dict) else None
    if not w or not w.get("summaries"):
        raise IncompatibleReports(f"{p} has no window summaries; run analyze with --window")
    return rep["panel"]["labels"], [WindowSummary.from_dict(s) for s in w["summaries"]]


def cmd_detect(cfg, stage) -> int:
    _require(cfg, "baseline", "current")
    stage("read")
    th = Thresholds()
    if cfg["thresholds"]:
        tp = Path(cfg["thresholds"])
        if not tp.exists():
            raise FileNotFoundError(f"input not found: {tp}")
        th = Thresholds.load(tp)
    base_labels, base = _windows(cfg["baseline"])
    cur_labels, cur = _windows(cfg["current"])
    if base_labels != cur_labels:
        raise IncompatibleReports("reports cover different series")
    stage("detect")
    verdict = detect(base, cur, cur_labels, th)
    data = dumps(verdict)
    stage("write")
    if cfg["out"]:
        _write(Path(cfg["out"]), "verdict.json", data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "stability": cmd_stability, "synth": cmd_synth, "detect": cmd_detect}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    stage = _Stage()
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg, stage)
    except FileNotFoundError as exc:
        _fail(stage, exc.args[0] if exc.args and "input not found" in str(exc.args[0]) else f"input not found: {exc.filename or exc}")
        return EXIT_IO
    except (OSError, InputError) as exc:
        _fail(stage, exc)
        return EXIT_IO
    except (InvalidSpec, ValueError) as exc:
        _fail(stage, exc)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        _fail(stage, exc)
        return EXIT_NUMERIC


def _fail(stage, exc) -> None:
    kind = type(exc).__name__ if isinstance(exc, BaseException) else ""
    msg = f"{kind}: {exc}" if kind else str(exc)
    print(f"rmtraffic: {stage.name} failed: {msg}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
