"""Pure-noise panel: eigenvalues against the MP law, then the universality checks.

    python3 demos/null_spectrum.py
"""

import numpy as np

from rmtraffic import correlation_matrix, eigendecompose, generate_null, prepare, unfold
from rmtraffic.rmtstats import ks_distance, nn_spacings, nnn_spacings, number_variance_empirical, number_variance_goe

panel = generate_null(497, 2016, seed=1)
norm, _, _ = prepare(panel)
spec = eigendecompose(correlation_matrix(norm))
law = spec.mp
print(f"N={spec.n} Q={law.Q:.4f} MP bounds [{law.lambda_minus:.4f}, {law.lambda_plus:.4f}]")
print(f"largest eigenvalue {spec.eigenvalues[-1]:.4f}, {spec.bulk.size}/{spec.n} inside the bounds")

unf = unfold(spec.eigenvalues[spec.bulk], 8)
nn, nnn = nn_spacings(unf), nnn_spacings(unf)
print(f"mean unfolded spacing {np.mean(nn.spacings):.4f}")
print(f"KS nearest vs GOE {ks_distance(nn, 'goe'):.4f}, vs Poisson {ks_distance(nn, 'poisson'):.4f}")
print(f"KS next-nearest (halved) vs GSE {ks_distance(nnn, 'gse'):.4f}")
for l in (1, 2, 5, 10):
    print(f"  Sigma2({l:>2}) empirical {number_variance_empirical(unf, l):.3f}  GOE {number_variance_goe(l):.3f}  Poisson {l}")
