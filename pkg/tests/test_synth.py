import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmtraffic.correlation import correlation_matrix
from rmtraffic.eigenmodes import group_by_loading
from rmtraffic.errors import IndexOutOfBounds, InvalidSpec, SpanOutOfBounds
from rmtraffic.panel import prepare, window
from rmtraffic.spectrum import eigendecompose
from rmtraffic.synth import (
    COMMON_FACTOR,
    KINDS,
    QUADRATIC,
    RANDOM_NOISE,
    SINE,
    InjectionSpec,
    correlation_experiment,
    dump_specs,
    generate_null,
    ground_truth,
    inject,
    load_specs,
    read_mask_csv,
    structured_panel,
    write_mask_csv,
)


def top_mode(panel):
    spec = eigendecompose(correlation_matrix(prepare(panel)[0]))
    k = spec.n - 1
    return spec, spec.eigenvalues[k], 1.0 / np.sum(spec.vector(k) ** 4)


def test_null_determinism_and_minimal_size():
    assert generate_null(5, 40, seed=3).equals(generate_null(5, 40, seed=3))
    assert not generate_null(5, 40, seed=3).equals(generate_null(5, 40, seed=4))
    p = generate_null(2, 3, seed=0)
    assert p.counts.shape == (2, 3)
    assert np.all(p.counts > 0)
    with pytest.raises(InvalidSpec):
        generate_null(2, 1)


def test_null_spectrum_containment():
    inside = []
    for seed in range(10):
        spec = eigendecompose(correlation_matrix(prepare(generate_null(200, 2015, seed))[0]))
        inside.append(spec.bulk.size / spec.n)
    assert np.mean(inside) >= 0.97


def test_empty_span_is_identity():
    p = generate_null(10, 50, 1)
    for kind in KINDS:
        q = inject(p, InjectionSpec((1, 2), (20, 20), kind))
        assert q.equals(p)


@settings(max_examples=40, deadline=None)
@given(
    kind=st.sampled_from(KINDS),
    targets=st.sets(st.integers(0, 7), min_size=1, max_size=8),
    start=st.integers(0, 60),
    length=st.integers(0, 60),
    seed=st.integers(0, 10_000),
)
def test_injection_locality(kind, targets, start, length, seed):
    p = generate_null(8, 60, 7)
    end = min(60, start + length)
    spec = InjectionSpec(tuple(sorted(targets)), (min(start, end), end), kind, seed=seed)
    q = inject(p, spec)
    mask = ground_truth([spec], 8, 60)
    assert np.array_equal(p.counts[~mask], q.counts[~mask])
    assert np.all(q.counts >= 0)
    assert inject(p, spec).equals(q)


def test_bridged_kinds_keep_span_end_counts():
    p = generate_null(6, 200, 2)
    for kind in (COMMON_FACTOR, RANDOM_NOISE):
        q = inject(p, InjectionSpec((0, 3), (50, 150), kind, seed=1))
        assert q.counts[0, 50] == p.counts[0, 50]
        assert q.counts[0, 149] == p.counts[0, 149]
        assert np.any(q.counts[0, 51:149] != p.counts[0, 51:149])


def test_common_factor_mode_size():
    k, rho = 20, 0.9
    panel = inject(generate_null(200, 2000, 0), InjectionSpec(tuple(range(k)), (0, 2000), COMMON_FACTOR, rho))
    spec, top, participants = top_mode(panel)
    c = correlation_matrix(prepare(panel)[0]).values[:k, :k]
    estimate = 1.0 + (k - 1) * c[np.triu_indices(k, 1)].mean()
    assert top > spec.mp.lambda_plus
    assert k / 2 <= participants <= 2 * k
    assert top == pytest.approx(estimate, rel=0.05)


@pytest.mark.parametrize("kind", [SINE, QUADRATIC])
def test_shape_kinds_clear_edge_twice(kind):
    panel = inject(generate_null(200, 2000, 0), InjectionSpec(tuple(range(20)), (0, 2000), kind))
    spec, top, participants = top_mode(panel)
    assert top >= 1.9 * spec.mp.lambda_plus
    assert 10 <= participants <= 40


def test_random_noise_breaks_factor():
    panel, _ = structured_panel(100, 1000, 0, ((0, 15, 0.8),))
    before = correlation_matrix(prepare(panel)[0]).values[:15, :15]
    noisy = inject(panel, InjectionSpec(tuple(range(15)), (0, 1000), RANDOM_NOISE, seed=3))
    after = correlation_matrix(prepare(noisy)[0]).values[:15, :15]
    iu = np.triu_indices(15, 1)
    assert before[iu].mean() > 0.5
    assert abs(after[iu].mean()) < 0.1


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        InjectionSpec((0,), (0, 1), "wobble")
    with pytest.raises(InvalidSpec):
        InjectionSpec((0, 0), (0, 1))
    with pytest.raises(InvalidSpec):
        InjectionSpec((0,), (0, 1), COMMON_FACTOR, strength=1.5)
    p = generate_null(4, 10, 0)
    with pytest.raises(IndexOutOfBounds):
        inject(p, InjectionSpec((4,), (0, 5)))
    with pytest.raises(SpanOutOfBounds):
        inject(p, InjectionSpec((0,), (5, 11)))
    with pytest.raises(SpanOutOfBounds):
        inject(p, InjectionSpec((0,), (6, 5)))


def test_spec_json_round_trip():
    specs = [InjectionSpec((1, 2), (3, 9), SINE, seed=4, amplitude=0.2, period=12),
             InjectionSpec((0,), (0, 5), RANDOM_NOISE)]
    text = dump_specs(specs)
    assert load_specs(text) == specs
    assert dump_specs(load_specs(text)) == text
    with pytest.raises(InvalidSpec):
        load_specs("{}")
    with pytest.raises(InvalidSpec):
        load_specs(json.dumps([{"targets": [1], "span": [0, 1], "colour": 3}]))
    with pytest.raises(InvalidSpec):
        load_specs("not json")


def test_ground_truth_examples():
    assert not ground_truth([], 3, 5).any()
    a = InjectionSpec((0,), (1, 3))
    b = InjectionSpec((0, 2), (2, 4))
    m = ground_truth([a, b], 3, 5)
    assert m.astype(int).tolist() == [[0, 1, 1, 1, 0], [0, 0, 0, 0, 0], [0, 0, 1, 1, 0]]
    p = generate_null(3, 5, 0)
    assert np.array_equal(read_mask_csv(write_mask_csv(m, p)), m)


def test_correlation_experiment_targets():
    ex = correlation_experiment(n=60, L=300, k=5, span=(100, 150), seed=2, groups=((0, 12, 0.6),))
    targets = ex.anomalies[0].targets
    assert len(targets) == 5 and min(targets) >= 12
    changed = np.any(ex.baseline.counts != ex.current.counts, axis=1)
    assert set(np.flatnonzero(changed)) <= set(targets)


@pytest.mark.parametrize("seed", range(4))
def test_sine_and_quadratic_groups_separate(seed):
    # two disjoint sets, one per shape, over the same span
    rng = np.random.default_rng(seed)
    a, b = np.split(rng.choice(200, 40, replace=False), 2)
    panel = generate_null(200, 2000, seed)
    panel = inject(panel, InjectionSpec(tuple(a), (800, 1000), SINE, seed=seed))
    panel = inject(panel, InjectionSpec(tuple(b), (800, 1000), QUADRATIC, seed=seed))
    spec = eigendecompose(correlation_matrix(window(prepare(panel)[0], 700, 1100)))
    V = np.column_stack([spec.vector(spec.n - 1), spec.vector(spec.n - 2)])
    members = np.concatenate([a, b])
    labels = group_by_loading(V, members)
    truth = np.r_[np.zeros(20, int), np.ones(20, int)]
    purity = max(np.mean(labels == truth), np.mean(labels != truth))
    assert purity >= 0.95
