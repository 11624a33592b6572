"""Group-cell handover analytics and Monte Carlo simulation for user-centric
cooperative ultra-dense networks."""

__version__ = "0.1.0"

from .analytics import (
    CostParams,
    CoverageParams,
    ToeplitzState,
    ase_cost,
    cost_aware_coverage,
    coverage_probability,
    handover_cost,
    handover_rate_gcho,
    handover_rate_gchos,
    handover_rate_radius,
    k_integral,
    laplace_interference,
    optimal_cluster_size,
    overall_cost,
    signaling_overhead,
)
from .channel import PathLossParams, SirSample, path_loss, sir_approx, sir_exact
from .errors import (
    ConfigError,
    InsufficientPointsError,
    NumericalError,
    ParameterError,
    UdngcError,
)
from .geometry import (
    Deployment,
    NeighborList,
    Trajectory,
    Window,
    edge_distance_pdf,
    guard_radius,
    k_nearest,
    kth_distance_pdf,
    sample_ppp,
    sample_trajectory,
)
from .harness import ScenarioParams, SweepRow, parse_config, run_figure, validate
from .simulator import (
    GroupCellState,
    HandoverAction,
    RateEstimate,
    TrialResult,
    coverage_oracle_geometric,
    coverage_oracle_model,
    estimate_all_rates,
    estimate_handover_rate,
    gcho_step,
    gchos_decision,
    run_handover_trial,
    simulate_trials,
)
