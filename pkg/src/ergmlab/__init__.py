"""Monte Carlo laboratory for ferromagnetic exponential random graph models."""

from .graphs import (
    EdgeId,
    GraphError,
    SimpleGraph,
    all_edges,
    codegree,
    erdos_renyi_sample,
    flip_edge,
    hamming_distance,
    local_hamming,
)
from .motifs import (
    MotifGraph,
    catalog,
    edge_mapped_count,
    fast_triangle_rooted,
    fast_wedge_rooted,
    good_set_statistic,
    hom_count,
    hom_density,
    pair_mapped_count,
    rooted_count,
)
from .model import (
    ErgmSpec,
    MotifConstants,
    SpecError,
    conditional_probability,
    differential,
    hajek_residual,
    hamiltonian_poly,
    hamiltonian_value,
    motif_constants,
    phi,
    validate_spec,
)
from .phase import (
    PhaseReport,
    RefusalError,
    cstar,
    dobrushin_check,
    find_wells,
    free_energy,
    require_well,
    sigma_n_sq,
)
from .dynamics import (
    ChainConfig,
    ChainResult,
    CouplingRun,
    DecisionStream,
    glauber_step,
    monotone_coupled_step,
    occupancy_run,
    run_chain,
    warm_start,
    wasserstein_coupled_step,
)
from .estimators import (
    EstimateResult,
    ScalingFit,
    degree_variance,
    differential_fluctuation,
    hajek_ratio,
    marginal_correction,
    scaling_fit,
    spec_fingerprint,
    wasserstein_coupled,
    wasserstein_plugin,
)

__version__ = "0.1.0"
