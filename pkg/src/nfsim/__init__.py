"""Simulator for nuclear forward scattering of pulsed x rays through one or
two resonant targets under dynamical magnetic switching, with spectral
analysis tools and an independent linear-response model."""

from .core import (
    ConfigurationError,
    FieldRecord,
    GridConfig,
    NuclearConstants,
    NumericalInstabilityError,
    PulseConfig,
    ScenarioConfig,
    SpectrumGridConfig,
    TargetConfig,
    TruncationWarning,
    angular_detuning,
    build_time_grid,
    gaussian_input,
)
from .configio import (
    ScheduleMeta,
    load_config,
    read_field_csv,
    scenario_from_text,
    scenario_to_text,
    write_field_csv,
    write_spectrum_csv,
)
from .presets import PRESET_NAMES, load_preset, preset_text
from .response import (
    DELTA_PULSE,
    DeltaResponse,
    ResponseParams,
    bessel_j1,
    rectified_max_field,
    response_w,
    scattered_field_one_target,
    scattered_field_two_target,
)
from .solver import (
    PropagationCoefficients,
    SlabState,
    run_chain,
    run_target,
    step_coherences,
    transport_field,
)
from .spectral import (
    PeakReport,
    PeakWindowError,
    SpectrogramRecord,
    SpectrumRecord,
    assemble_spectrogram,
    dtft,
    dtft_via_fft,
    normalized_spectrum,
    peak_metrics,
)
from .switching import (
    ScheduleOverlapWarning,
    SwitchSchedule,
    detect_nodes,
    filter_node_pairs,
    make_type_schedules,
    node_schedule,
    phase_integral,
    profile_value,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DELTA_PULSE",
    "DeltaResponse",
    "FieldRecord",
    "GridConfig",
    "NuclearConstants",
    "NumericalInstabilityError",
    "PRESET_NAMES",
    "PeakReport",
    "PeakWindowError",
    "PropagationCoefficients",
    "PulseConfig",
    "ResponseParams",
    "ScenarioConfig",
    "ScheduleMeta",
    "ScheduleOverlapWarning",
    "SlabState",
    "SpectrogramRecord",
    "SpectrumGridConfig",
    "SpectrumRecord",
    "SwitchSchedule",
    "TargetConfig",
    "TruncationWarning",
    "angular_detuning",
    "assemble_spectrogram",
    "bessel_j1",
    "build_time_grid",
    "detect_nodes",
    "dtft",
    "dtft_via_fft",
    "filter_node_pairs",
    "gaussian_input",
    "load_config",
    "load_preset",
    "make_type_schedules",
    "node_schedule",
    "normalized_spectrum",
    "peak_metrics",
    "phase_integral",
    "preset_text",
    "profile_value",
    "read_field_csv",
    "rectified_max_field",
    "response_w",
    "run_chain",
    "run_target",
    "scattered_field_one_target",
    "scattered_field_two_target",
    "scenario_from_text",
    "scenario_to_text",
    "step_coherences",
    "transport_field",
    "write_field_csv",
    "write_spectrum_csv",
]
