"""Reciprocity calibration simulator for hybrid analog-digital beamforming arrays."""

from .array_model import (
    FULLY_CONNECTED,
    INTERLEAVED,
    SUBARRAY,
    TWO_SIDES,
    ArrayConfig,
    CalibrationMatrix,
    HardwareProfile,
    Partition,
    amp_imbalance_halfwidth,
    make_partition,
    merged_rx_response,
    merged_tx_response,
    sample_hardware_profile,
    true_calibration,
)
from .calibration import (
    BidirectionalEstimate,
    CalibrationSolution,
    QMatrix,
    align_scalar,
    bidirectional_measure,
    build_q,
    effective_group_channels,
    group_measurement_config,
    nmse_f,
    solve_calibration,
)
from .channel_model import (
    ChannelMatrix,
    IntraArrayChannelParams,
    intra_array_channel,
    rayleigh_channel,
)
from .config import ScenarioConfig, validate_scenario
from .csvio import (
    CSV_VERSION,
    channel_from_csv,
    channel_to_csv,
    measurements_to_csv,
    read_csv,
    solution_to_csv,
    write_csv,
)
from .dl_csit import (
    CsitErrorModel,
    beam_alignment,
    nmse_dl_closed_form,
    nmse_dl_expected,
    nmse_dl_monte_carlo,
    reconstruct_dl,
    ul_covariance,
)
from .effective_channel import (
    BeamWeightSet,
    MeasurementConfig,
    MeasurementSet,
    NoiseBudget,
    dbm_to_watts,
    ls_estimate_channel,
    random_beam_weights,
    simulate_measurements,
)
from .errors import (
    ConfigError,
    ContractViolationError,
    CsvFormatError,
    DegenerateSolutionWarning,
    InvalidInputError,
    InvalidParameterError,
    RecipcalError,
    SingularCalibrationError,
    SingularHardwareError,
    UnderdeterminedSystemError,
    UnsupportedArchitectureError,
    UnsupportedPartitionError,
)
from .fully_connected import (
    ReferenceCalibrationResult,
    calibrate_with_reference,
    composite_channel,
    effective_reference_channels,
    merged_branch_responses,
    reference_measurement_configs,
    summation_matrix,
    true_branch_calibration,
)

__version__ = "0.1.0"
