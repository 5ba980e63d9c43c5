"""Solver and certifier for positive fixed-point systems that are
unique up to a scaling direction, plus built-in quantitative trade
models expressed in that form."""

from scalefix.certify import (
    AmbiguousScalingError,
    CertificationReport,
    CheckResult,
    ScalingCertificate,
    SignPartition,
    SpectralEvidence,
    certify,
    check_connectedness,
    check_monotonicity,
    check_self_interaction,
    check_spectral,
    find_scaling_exponent,
    sample_states,
)
from scalefix.solve import (
    NormalizationError,
    NumeraireRule,
    SolveOptions,
    SolveResult,
    iterate,
    normalize,
    trace_to_csv,
    up_to_scale_distance,
)
from scalefix.spectral import (
    PowerIterationError,
    ReducibleMatrixError,
    SpectralResult,
    gauge_norm,
    is_irreducible,
    is_primitive,
    quotient_norm,
    spectral_radius,
    strongly_connected_components,
)
from scalefix.system import (
    DifferentiationError,
    ElasticityMatrix,
    EvaluationError,
    PositiveSystem,
    StateVector,
    elasticity_at,
    log_transform,
)
from scalefix.trade import (
    CounterfactualResult,
    GeneralParams,
    MultiSectorParams,
    OneSectorParams,
    Outcomes,
    ParameterError,
    ShockStep,
    StaleStateError,
    apply_shock,
    build_general,
    build_multi_sector,
    build_one_sector,
    build_system,
    counterfactual,
    gamma_constant,
    recover_outcomes,
)

__version__ = "0.1.0"
