"""Where information sits: IPR, component statistics and the top projection.

A panel with one strong group (series 0..19) and one weaker group (20..31)
produces two deviating modes; everything else looks like noise.

    python3 demos/eigenvectors.py
"""

import numpy as np

from rmtraffic import correlation_matrix, eigendecompose, prepare, project, regress_projection
from rmtraffic.eigenmodes import component_stats, ipr_series, participant_count, significant_participants
from rmtraffic.synth import structured_panel

panel, _ = structured_panel(200, 2000, seed=0, groups=((0, 20, 0.8), (20, 12, 0.6)))
norm, returns, _ = prepare(panel)
spec = eigendecompose(correlation_matrix(norm))
iprs = ipr_series(spec)

print(f"{spec.p} eigenvalues above {spec.mp.lambda_plus:.3f}")
print(f"bulk mean IPR x N = {iprs.ipr[spec.bulk].mean() * spec.n:.3f} (Gaussian vectors give 3)")
for k in spec.deviating_above[::-1]:
    u = spec.vector(k)
    st = component_stats(u, int(k))
    members = significant_participants(u, norm.labels)
    print(f"lambda={spec.eigenvalues[k]:.3f} IPR={iprs.ipr[k]:.4f} "
          f"~{participant_count(iprs.ipr[k])} participants, kurtosis {st.kurtosis:.2f}")
    print(f"  significant: {members[:6]}{' ...' if len(members) > 6 else ''} ({len(members)})")

top = spec.n - 1
reg = regress_projection(project(returns, spec.vector(top), top), returns)
print(f"top projection tracks {reg.best_label} with correlation {reg.correlations[reg.best_index]:.3f}")
print(f"median |corr| with the other series {np.median(np.abs(reg.correlations)):.3f}")
