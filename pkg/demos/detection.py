"""Injection experiments: temporary correlation, and two shapes that separate.

    python3 demos/detection.py
"""

import numpy as np

from rmtraffic import correlation_matrix, eigendecompose, generate_null, inject, prepare
from rmtraffic.eigenmodes import group_by_loading
from rmtraffic.monitor import detect, summarize_windows
from rmtraffic.panel import window
from rmtraffic.stability import plan_windows
from rmtraffic.synth import QUADRATIC, SINE, InjectionSpec, correlation_experiment

print("temporary common factor over observations 800..1000")
for k in (22, 2):
    ex = correlation_experiment(k=k, seed=0)
    plan = plan_windows(1999, 400, 200)
    base = summarize_windows(prepare(ex.baseline)[0], plan)
    cur = summarize_windows(prepare(ex.current)[0], plan)
    v = detect(base, cur, ex.current.labels)
    targets = {ex.current.labels[i] for i in ex.anomalies[0].targets}
    hit = len(targets & set(v["implicated"]))
    print(f"  k={k:>2}: eigenvalue {v['eigenvalue']['fired']}, ipr tail {v['ipr_tail']['fired']}, "
          f"overlap {v['overlap']['fired']}; windows {v['flagged_windows']}; {hit}/{k} targets implicated")

print("sine on set A, parabola on set B, same span")
rng = np.random.default_rng(0)
a, b = np.split(rng.choice(200, 40, replace=False), 2)
panel = generate_null(200, 2000, seed=0)
panel = inject(panel, InjectionSpec(tuple(a), (800, 1000), SINE))
panel = inject(panel, InjectionSpec(tuple(b), (800, 1000), QUADRATIC))
spec = eigendecompose(correlation_matrix(window(prepare(panel)[0], 700, 1100)))
V = np.column_stack([spec.vector(spec.n - 1), spec.vector(spec.n - 2)])
labels = group_by_loading(V, np.concatenate([a, b]))
print(f"  top eigenvalues {spec.eigenvalues[-1]:.2f}, {spec.eigenvalues[-2]:.2f} (bound {spec.mp.lambda_plus:.2f})")
print(f"  cluster labels, set A: {labels[:20].tolist()}")
print(f"  cluster labels, set B: {labels[20:].tolist()}")
