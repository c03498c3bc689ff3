"""Phaseless short-time linear canonical transform analysis of Gaussian
shift-invariant signals: simulation, reconstruction, and certified bounds."""

from .bounds import (
    DiscretizationBound,
    PlannedParameters,
    StabilityConstants,
    conditioning_factor,
    d_constants,
    inflated_frame_sum,
    leading_frequency_columns,
    leading_time_rows,
    local_error_bound,
    mixed_norm_discrepancy,
    plan_parameters,
    stability_constants,
    suggested_row_range,
)
from .errors import (
    AnchorError,
    AnchorGapError,
    DataFormatError,
    EndpointError,
    FittingError,
    InfeasibleToleranceError,
    LatticeConsistencyError,
    NonpositiveAnchorError,
    ParameterError,
    PropertyFailure,
    QuadratureConfigError,
    StlctPhaseError,
    ZeroBasePointError,
    ZeroTransitionError,
)
from .measurement import (
    LatticeSpec,
    MeasurementSet,
    add_noise,
    load_measurements,
    matrix_inf_norm,
    sample_exact,
    save_measurements,
)
from .quadrature import QuadSpec
from .reconstruction import (
    AnchorDetector,
    AnchorSet,
    PhaseAlignment,
    Reconstruction,
    ReconstructionEngine,
    phase_aligned_error,
    phase_correlation,
    reconstruct,
    reconstruct_semidiscrete,
    select_anchors,
)
from .signal_model import (
    GaussianSisSignal,
    load_signal,
    random_signal,
    save_signal,
    signal_from_json,
    signal_to_json,
    sup_norm_on_interval,
    sup_norm_upper_bound,
)
from .special_functions import (
    DecayConstants,
    DualGeneratorSpec,
    FourierLambdaTable,
    biorthogonality_defect,
    build_table,
    c_sigma_beta,
    dual_generator,
    estimate_decay_constants,
    in_certified_regime,
    inv_fourier_lambda,
    lambda_fn,
    riesz_periodization,
    theta3,
)
from .stlct import (
    LctParams,
    MagnitudeRow,
    correlation_coefficient_bound,
    correlation_coefficients,
    magnitude_closed_form,
    magnitude_row,
    stlct_closed_form,
    stlct_quadrature_oracle,
    strip_half_width,
    v_strip_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorDetector",
    "AnchorError",
    "AnchorGapError",
    "AnchorSet",
    "DataFormatError",
    "DecayConstants",
    "DiscretizationBound",
    "DualGeneratorSpec",
    "EndpointError",
    "FittingError",
    "FourierLambdaTable",
    "GaussianSisSignal",
    "InfeasibleToleranceError",
    "LatticeConsistencyError",
    "LatticeSpec",
    "LctParams",
    "MagnitudeRow",
    "MeasurementSet",
    "NonpositiveAnchorError",
    "ParameterError",
    "PhaseAlignment",
    "PlannedParameters",
    "PropertyFailure",
    "QuadSpec",
    "QuadratureConfigError",
    "Reconstruction",
    "ReconstructionEngine",
    "StabilityConstants",
    "StlctPhaseError",
    "ZeroBasePointError",
    "ZeroTransitionError",
    "add_noise",
    "biorthogonality_defect",
    "build_table",
    "c_sigma_beta",
    "conditioning_factor",
    "correlation_coefficient_bound",
    "correlation_coefficients",
    "d_constants",
    "dual_generator",
    "estimate_decay_constants",
    "in_certified_regime",
    "inflated_frame_sum",
    "inv_fourier_lambda",
    "lambda_fn",
    "leading_frequency_columns",
    "leading_time_rows",
    "load_measurements",
    "load_signal",
    "local_error_bound",
    "magnitude_closed_form",
    "magnitude_row",
    "matrix_inf_norm",
    "mixed_norm_discrepancy",
    "phase_aligned_error",
    "phase_correlation",
    "plan_parameters",
    "random_signal",
    "reconstruct",
    "reconstruct_semidiscrete",
    "sample_exact",
    "save_measurements",
    "save_signal",
    "select_anchors",
    "signal_from_json",
    "signal_to_json",
    "stability_constants",
    "stlct_closed_form",
    "stlct_quadrature_oracle",
    "strip_half_width",
    "sup_norm_on_interval",
    "sup_norm_upper_bound",
    "suggested_row_range",
    "theta3",
    "v_strip_bound",
]
