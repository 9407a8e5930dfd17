"""Distributed estimation of high-dimensional fields where each agent tracks only its interest set."""
from cirfe.analysis import (
    asymptotic_covariance,
    classical_asymptotic_covariance,
    empirical_scaled_covariance,
    interest_counts,
    mse_decay_slope,
    normalized_error,
)
from cirfe.censor import (
    CensoredLaplacian,
    InterestSet,
    build_censored_laplacian,
    censor_received,
    censor_self,
    lift,
    restrict,
)
from cirfe.compare import compare_estimators
from cirfe.estimator import (
    BatchKernel,
    EstimatorKind,
    NetworkState,
    PluginCovariance,
    WeightSchedule,
    cirfe_step,
    classical_step,
    compact_step,
    plugin_covariance_update,
)
from cirfe.graph import Graph, LaplacianProcess, algebraic_connectivity, induced_subgraph, laplacian
from cirfe.montecarlo import RunResult, run_monte_carlo
from cirfe.scenarios import ScenarioConfig, builtin_scenario, default_schedule
from cirfe.sensing import (
    NetworkModel,
    NoiseKind,
    SensingModel,
    check_global_observability,
    check_interest_consistency,
    check_structural_observability,
    generate_observation,
    min_valid_gain,
    physical_coupling,
    smallest_admissible_gain,
    verify_a5,
)

__version__ = "0.1.0"
