"""Polarization-encoded QKD toolkit.

Closed-form key rates and a pulse-level Monte Carlo for BB84 (two basis
choices), six-state and reference-frame-independent protocols over a
depolarizing channel whose polarization frame is rotated and fluctuating.
"""

from .channel import (
    FrameParams,
    FrameSample,
    averaged_correlation,
    depolarize,
    rotated_axis_decomposition,
    sample_frame,
    sinc,
)
from .montecarlo import (
    DetectorConfig,
    EstimateReport,
    InsufficientStatisticsError,
    SessionTally,
    SourceConfig,
    TallyFormatError,
    estimate,
    load_tally,
    midpoint_grid,
    mix_sessions,
    run_session,
    save_tally,
)
from .polarization import (
    BasisAxis,
    ComplexMatrix2,
    Eigenvalue,
    PolarizationState,
    bloch_vector,
    conjugate_observable,
    eigenstate,
    equal_up_to_phase,
    expectation,
    frame_rotation_unitary,
    pauli,
    rotation_plate_composite,
    waveplate_half,
    waveplate_quarter,
)
from .rates import (
    KeyRateReport,
    NoZeroCrossingError,
    ProtocolKind,
    QberReport,
    RfiSecurityParams,
    SweepVariable,
    binary_entropy,
    c_parameter,
    eve_information,
    find_zero_threshold,
    key_rate,
    qber_basis,
    qber_protocol,
)
from .sweep import (
    AxisRange,
    CrossCheck,
    MonteCarloSettings,
    SweepMode,
    SweepResult,
    SweepRow,
    SweepSpec,
    run_sweep,
)

__all__ = [
    "AxisRange",
    "BasisAxis",
    "ComplexMatrix2",
    "CrossCheck",
    "DetectorConfig",
    "Eigenvalue",
    "EstimateReport",
    "FrameParams",
    "FrameSample",
    "InsufficientStatisticsError",
    "KeyRateReport",
    "MonteCarloSettings",
    "NoZeroCrossingError",
    "PolarizationState",
    "ProtocolKind",
    "QberReport",
    "RfiSecurityParams",
    "SessionTally",
    "SourceConfig",
    "SweepMode",
    "SweepResult",
    "SweepRow",
    "SweepSpec",
    "SweepVariable",
    "TallyFormatError",
    "averaged_correlation",
    "binary_entropy",
    "bloch_vector",
    "c_parameter",
    "conjugate_observable",
    "depolarize",
    "eigenstate",
    "equal_up_to_phase",
    "estimate",
    "eve_information",
    "expectation",
    "find_zero_threshold",
    "frame_rotation_unitary",
    "key_rate",
    "load_tally",
    "midpoint_grid",
    "mix_sessions",
    "pauli",
    "qber_basis",
    "qber_protocol",
    "rotated_axis_decomposition",
    "rotation_plate_composite",
    "run_session",
    "run_sweep",
    "sample_frame",
    "save_tally",
    "sinc",
    "waveplate_half",
    "waveplate_quarter",
]

__version__ = "1.0.0"
