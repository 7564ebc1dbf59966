import json

import pytest

from rmtraffic.errors import IncompatibleReports, InvalidSpec
from rmtraffic.monitor import Thresholds, WindowSummary, detect, summarize_windows
from rmtraffic.panel import prepare
from rmtraffic.stability import plan_windows
from rmtraffic.synth import correlation_experiment


@pytest.fixture(scope="module")
def experiment():
    ex = correlation_experiment(k=22, seed=11)
    base, _, _ = prepare(ex.baseline)
    cur, _, _ = prepare(ex.current)
    plan = plan_windows(base.n_obs, 400, 200)
    return ex, cur.labels, summarize_windows(base, plan), summarize_windows(cur, plan)


def test_baseline_against_itself(experiment):
    _, labels, base, _ = experiment
    v = detect(base, base, labels)
    assert not v["any_fired"]
    assert v["implicated"] == []


def test_large_injection_fires(experiment):
    ex, labels, base, cur = experiment
    v = detect(base, cur, labels)
    assert v["eigenvalue"]["fired"] and v["ipr_tail"]["fired"] and v["overlap"]["fired"]
    targets = {ex.current.labels[i] for i in ex.anomalies[0].targets}
    assert len(targets & set(v["implicated"])) >= 0.8 * len(targets)
    # span (800, 1000) lies inside windows 3 and 4
    assert {3, 4} <= set(v["flagged_windows"])
    assert v["handoff"]


def test_verdict_is_json(experiment):
    _, labels, base, cur = experiment
    v = detect(base, cur, labels)
    assert json.loads(json.dumps(v)) == v


def test_summary_round_trip(experiment):
    _, _, base, _ = experiment
    for s in base:
        d = json.loads(json.dumps(s.to_dict()))
        assert WindowSummary.from_dict(d) == s


def test_incompatible(experiment):
    _, labels, base, _ = experiment
    with pytest.raises(IncompatibleReports):
        detect([], base, labels)
    other = [WindowSummary(0, 100, 1.0, 2.0, 0, [], [], [])]
    with pytest.raises(IncompatibleReports):
        detect(base, other, labels)


def test_thresholds_loading(tmp_path):
    th = Thresholds.from_mapping({"eigenvalue_sigmas": "4", "min_count_change": "2"})
    assert th.eigenvalue_sigmas == 4.0 and th.min_count_change == 2
    f = tmp_path / "t.conf"
    f.write_text("# tighter overlap\noverlap-floor = 0.5\n")
    assert Thresholds.load(f).overlap_floor == 0.5
    f.write_text('{"novelty_cut": 0.3}')
    assert Thresholds.load(f).novelty_cut == 0.3
    with pytest.raises(InvalidSpec):
        Thresholds.from_mapping({"nonsense": 1})
    with pytest.raises(InvalidSpec):
        Thresholds.from_mapping({"overlap_floor": "high"})
