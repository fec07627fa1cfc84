"""Directed information-flow analysis for multivariate time series.

Estimates the rate (nats per unit time) at which each component of a
multivariate series contributes to the entropy evolution of every other
component, attaches asymptotic and surrogate significance, detects self
loops, and assembles significance-filtered weighted causal graphs. Closed
forms for stable linear stochastic systems (via a Lyapunov solve) provide
exact ground truth, and a seeded Euler-Maruyama simulator generates
validation data with planted causal structure.
"""

from .analytic import (
    LinearSDE,
    StationaryCovariance,
    analytic_flow,
    load_system,
    stationary_covariance,
    transform_other_components,
)
from .covariance import (
    CovarianceSet,
    build_covariance_set,
    cofactor_matrix,
    derivative_cross_covariance,
    sample_covariance,
)
from .errors import (
    ConditioningWarning,
    DataError,
    DegenerateComponentError,
    DegenerateInferenceWarning,
    DegenerateNormalizerError,
    InfoflowError,
    InstabilityError,
    InsufficientDataError,
    InvalidPairError,
    InvalidStrideError,
    InvalidTransformError,
    NonStationaryError,
    NumericalError,
    ResolutionError,
    SingularCovarianceError,
    UsageError,
    ValidationError,
)
from .estimator import (
    FlowEstimate,
    FlowMatrix,
    LinearModelFit,
    SelfInfluenceEstimate,
    estimate_flow,
    estimate_flow_matrix,
    estimate_self_influence,
    fit_linear_model,
    normalize_flow,
)
from .graph import (
    CausalGraph,
    GraphEdge,
    SelfLoop,
    export_graph,
    import_graph,
    reconstruct_graph,
)
from .panel import (
    DifferencedSeries,
    TimeSeriesPanel,
    forward_difference,
    ingest_csv,
    write_csv,
)
from .significance import (
    SignificanceReport,
    asymptotic_significance,
    self_influence_significance,
    surrogate_flow_samples,
    surrogate_significance,
)
from .simulate import (
    BenchmarkResult,
    SimulationSpec,
    benchmark,
    euler_maruyama,
    regime_switch_panel,
)
from .window import WindowedFlowSeries, windowed_flows

__version__ = "0.1.0"

__all__ = [
    "BenchmarkResult",
    "CausalGraph",
    "ConditioningWarning",
    "CovarianceSet",
    "DataError",
    "DegenerateComponentError",
    "DegenerateInferenceWarning",
    "DegenerateNormalizerError",
    "DifferencedSeries",
    "FlowEstimate",
    "FlowMatrix",
    "GraphEdge",
    "InfoflowError",
    "InstabilityError",
    "InsufficientDataError",
    "InvalidPairError",
    "InvalidStrideError",
    "InvalidTransformError",
    "LinearModelFit",
    "LinearSDE",
    "NonStationaryError",
    "NumericalError",
    "ResolutionError",
    "SelfInfluenceEstimate",
    "SelfLoop",
    "SignificanceReport",
    "SimulationSpec",
    "SingularCovarianceError",
    "StationaryCovariance",
    "TimeSeriesPanel",
    "UsageError",
    "ValidationError",
    "WindowedFlowSeries",
    "analytic_flow",
    "asymptotic_significance",
    "benchmark",
    "build_covariance_set",
    "cofactor_matrix",
    "derivative_cross_covariance",
    "estimate_flow",
    "estimate_flow_matrix",
    "estimate_self_influence",
    "euler_maruyama",
    "export_graph",
    "fit_linear_model",
    "forward_difference",
    "import_graph",
    "ingest_csv",
    "load_system",
    "normalize_flow",
    "reconstruct_graph",
    "regime_switch_panel",
    "sample_covariance",
    "self_influence_significance",
    "stationary_covariance",
    "surrogate_flow_samples",
    "surrogate_significance",
    "transform_other_components",
    "windowed_flows",
    "write_csv",
]
