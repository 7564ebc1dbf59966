import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmtraffic.errors import (
    AllExcluded,
    DuplicateLabel,
    EmptyLog,
    InvalidSpec,
    MalformedRow,
    UnequalSpacing,
    ZeroVariance,
)
from rmtraffic.panel import (
    ReturnsPanel,
    TrafficPanel,
    exclude_inactive,
    log_returns,
    normalize,
    parse_csv,
    parse_mrtg_log,
    prepare,
    read_mrtg_dir,
    standardize,
    window,
    write_csv,
)


def panel_of(*rows, dt=300):
    rows = np.array(rows, dtype=float)
    return TrafficPanel(tuple(f"s{i}" for i in range(len(rows))), np.arange(rows.shape[1]) * dt, rows)


# -- parse_csv --------------------------------------------------------------

def test_parse_csv_three_rows():
    p = parse_csv(b"timestamp,a\n0,5\n300,10\n600,20\n")
    assert p.dt == 300
    assert p.n_obs == 3
    assert p.labels == ("a",)
    assert p.counts.tolist() == [[5.0, 10.0, 20.0]]


def test_parse_csv_sorts_rows():
    p = parse_csv("timestamp,a\n600,20\n0,5\n300,10\n")
    assert p.timestamps.tolist() == [0, 300, 600]
    assert p.counts.tolist() == [[5.0, 10.0, 20.0]]


def test_parse_csv_unequal_spacing():
    with pytest.raises(UnequalSpacing):
        parse_csv("timestamp,a\n0,1\n300,2\n900,3\n")


def test_parse_csv_duplicate_label():
    with pytest.raises(DuplicateLabel):
        parse_csv("timestamp,a,a\n0,1,2\n300,2,3\n")


@pytest.mark.parametrize("body", [
    "timestamp,a\n0,x\n300,1\n",
    "timestamp,a\n0,-1\n300,1\n",
    "timestamp,a\n0,1,2\n300,1\n",
    "time,a\n0,1\n300,1\n",
    "",
])
def test_parse_csv_malformed(body):
    with pytest.raises(MalformedRow):
        parse_csv(body)


@settings(max_examples=50, deadline=None)
@given(
    counts=st.lists(
        st.lists(st.floats(0, 1e12, allow_nan=False, allow_infinity=False), min_size=2, max_size=8),
        min_size=1, max_size=5,
    ).filter(lambda rows: len({len(r) for r in rows}) == 1),
    dt=st.integers(1, 3600),
)
def test_csv_round_trip(counts, dt):
    p = panel_of(*counts, dt=dt)
    q = parse_csv(write_csv(p))
    assert p.equals(q)
    assert write_csv(q) == write_csv(p)


# -- MRTG ---------------------------------------------------------------------

def test_mrtg_reversal_and_direction():
    log = b"600 7 9 70 90\n300 5 8 50 80\n"
    p = parse_mrtg_log(log, "in")
    assert p.timestamps.tolist() == [300, 600]
    assert p.counts.tolist() == [[5.0, 7.0]]
    assert parse_mrtg_log(log, "out").counts.tolist() == [[8.0, 9.0]]


def test_mrtg_empty():
    with pytest.raises(EmptyLog):
        parse_mrtg_log(b"")
    with pytest.raises(EmptyLog):
        parse_mrtg_log(b"1000 123 456\n")


def test_mrtg_keeps_only_finest_tier():
    rows = [(1000 + 300 * k, k, 2 * k) for k in range(4)][::-1]
    coarse = [(1000 - 1800 * k, 99, 99) for k in range(1, 3)]
    text = "1900 12345 67890\n" + "".join(f"{t} {a} {b} 0 0\n" for t, a, b in rows + coarse)
    p = parse_mrtg_log(text, "in", "x")
    assert p.timestamps.tolist() == [1000, 1300, 1600, 1900]
    assert p.counts.tolist() == [[0.0, 1.0, 2.0, 3.0]]


def test_mrtg_skips_open_interval():
    text = "2023 5 5\n2023 9 9 0 0\n1900 3 4 0 0\n1600 1 2 0 0\n"
    p = parse_mrtg_log(text, "in")
    assert p.timestamps.tolist() == [1600, 1900]


def test_mrtg_malformed():
    with pytest.raises(MalformedRow):
        parse_mrtg_log(b"600 7 9 70\n300 5 8 50 80\n")
    with pytest.raises(MalformedRow):
        parse_mrtg_log(b"600 x 9 70 1\n300 5 8 50 80\n")


def test_read_mrtg_dir(tmp_path):
    (tmp_path / "r1.log").write_text("1200 1 2\n900 3 4 0 0\n600 5 6 0 0\n300 7 8 0 0\n")
    (tmp_path / "r2.log").write_text("900 1 2 0 0\n600 3 4 0 0\n300 5 6 0 0\n")
    p = read_mrtg_dir(tmp_path)
    assert p.labels == ("r1:in", "r1:out", "r2:in", "r2:out")
    assert p.timestamps.tolist() == [300, 600, 900]
    assert p.counts[0].tolist() == [7.0, 5.0, 3.0]
    assert p.counts[3].tolist() == [6.0, 4.0, 2.0]


# -- exclusion ------------------------------------------------------------------

def test_exclude_inactive_examples():
    p = panel_of([0, 0, 0, 0], [5, 5, 5, 5], [5, 6, 5, 6])
    kept, report = exclude_inactive(p, 2)
    assert kept.labels == ("s2",)
    assert report.kept == ["s2"]
    assert report.dropped == [("s0", "constant"), ("s1", "constant")]


def test_exclude_inactive_threshold_reason():
    p = panel_of([1, 2, 1, 2], [1, 2, 3, 4])
    kept, report = exclude_inactive(p, 3)
    assert kept.labels == ("s1",)
    assert report.dropped == [("s0", "only 2 distinct values")]


def test_exclude_inactive_needs_two():
    with pytest.raises(InvalidSpec):
        exclude_inactive(panel_of([1, 2, 3]), 1)


def test_exclude_inactive_all_dropped():
    with pytest.raises(AllExcluded):
        exclude_inactive(panel_of([1, 1, 1]), 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.integers(0, 3), min_size=4, max_size=4), min_size=1, max_size=6), st.integers(2, 4))
def test_exclude_inactive_idempotent(rows, k):
    p = panel_of(*rows)
    try:
        once, _ = exclude_inactive(p, k)
    except AllExcluded:
        return
    twice, report = exclude_inactive(once, k)
    assert twice.equals(once)
    assert report.dropped == []


# -- returns and normalization ---------------------------------------------------

def test_log_returns_offset():
    assert log_returns(panel_of([0, 0])).G.tolist() == [[0.0]]
    assert log_returns(panel_of([100, 100])).G.tolist() == [[0.0]]


def test_log_returns_near_scale_invariance():
    a, b, c = 1e6, 2e6, 10.0
    g1 = log_returns(panel_of([a, b])).G[0, 0]
    g2 = log_returns(panel_of([c * a, c * b])).G[0, 0]
    # direct evaluation of the +1 rule is the oracle
    assert g1 == pytest.approx(math.log(b + 1) - math.log(a + 1), abs=1e-15)
    assert abs(g1 - g2) < 1e-6


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.floats(0, 1e9), min_size=2, max_size=30), min_size=1, max_size=5)
       .filter(lambda rows: len({len(r) for r in rows}) == 1))
def test_log_returns_shape(rows):
    p = panel_of(*rows)
    r = log_returns(p)
    assert r.G.shape == (p.n_series, p.n_obs - 1)
    assert np.allclose(r.sigma, r.G.std(axis=1))


def returns_of(*rows):
    G = np.array(rows, dtype=float)
    return ReturnsPanel(tuple(f"s{i}" for i in range(len(G))), G, G.mean(axis=1), G.std(axis=1))


def test_normalize_examples():
    assert normalize(returns_of([-1.0, 1.0])).g.tolist() == [[-1.0, 1.0]]
    g = normalize(returns_of([1.0, 2.0, 3.0])).g[0]
    assert g == pytest.approx([-math.sqrt(1.5), 0.0, math.sqrt(1.5)], abs=1e-15)
    with pytest.raises(ZeroVariance) as err:
        normalize(returns_of([1.0, 2.0, 3.0], [0.0, 0.0, 0.0]))
    assert err.value.label == "s1"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=3, max_size=60))
def test_standardize_moments(row):
    x = np.array([row])
    if np.ptp(x) < 1e-6:
        return
    g = standardize(x)[0]
    assert abs(g.mean()) < 1e-12
    assert abs(g.std() - 1.0) < 1e-12


def test_prepare_and_window():
    rng = np.random.default_rng(3)
    counts = np.round(1e4 * np.exp(np.cumsum(rng.normal(0, 0.1, (4, 50)), axis=1)))
    counts = np.vstack([counts, np.full(50, 7.0)])
    p = TrafficPanel(tuple("abcde"), np.arange(50) * 300, counts)
    norm, returns, report = prepare(p)
    assert norm.labels == ("a", "b", "c", "d")
    assert report.dropped == [("e", "constant")]
    assert norm.Q == 49 / 4
    w = window(norm, 10, 30)
    assert w.g.shape == (4, 20)
    assert np.all(np.abs(w.g.mean(axis=1)) < 1e-12)
    assert np.all(np.abs(w.g.std(axis=1) - 1) < 1e-12)


def test_panel_validation():
    with pytest.raises(InvalidSpec):
        TrafficPanel(("a",), [0], [[1.0]])
    with pytest.raises(UnequalSpacing):
        TrafficPanel(("a",), [0, 300, 900], [[1.0, 2.0, 3.0]])
    with pytest.raises(DuplicateLabel):
        TrafficPanel(("a", "a"), [0, 300], [[1.0, 2.0], [1.0, 2.0]])
