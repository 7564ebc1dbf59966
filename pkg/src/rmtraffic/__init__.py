"""Random-matrix analysis of traffic-count panels.

Typical use::

    from rmtraffic import parse_csv, prepare, correlation_matrix, eigendecompose

    norm, returns, excluded = prepare(parse_csv(open("panel.csv").read()))
    spec = eigendecompose(correlation_matrix(norm))
    print(spec.p, spec.mp.lambda_plus)
"""

__version__ = "0.1.0"

from .correlation import (
    CorrelationMatrix,
    EnsembleSpec,
    correlation_matrix,
    goe_matrix,
    random_correlation_matrix,
    random_normalized_panel,
)
from .eigenmodes import (
    component_stats,
    ipr,
    ipr_series,
    participant_count,
    project,
    regress_projection,
    significant_participants,
)
from .errors import InputError, InvalidSpec, NumericalError, RmtError
from .panel import (
    NormalizedPanel,
    ReturnsPanel,
    TrafficPanel,
    exclude_inactive,
    log_returns,
    normalize,
    parse_csv,
    parse_mrtg_log,
    prepare,
    read_mrtg_dir,
    write_csv,
)
from .rmtstats import (
    ks_distance,
    nn_spacings,
    nnn_spacings,
    number_variance_empirical,
    number_variance_goe,
)
from .spectrum import MpLaw, SpectralResult, eigendecompose, mp_bounds, mp_density
from .stability import overlap, plan_windows, stability_report
from .synth import InjectionSpec, generate_null, ground_truth, inject
from .unfolding import unfold
