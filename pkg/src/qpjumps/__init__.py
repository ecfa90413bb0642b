"""Stochastic simulator and statistics pipeline for quasiparticle-driven
quantum jumps of a dispersively read-out two-level qubit."""

from .core import (
    ConfigError,
    MeasurementParams,
    Modulation,
    PeriodicPulses,
    Pulse,
    QubitParams,
    ScenarioConfig,
    ThermalParams,
    gap_frequency,
    junction_power,
    polarization_to_temperature,
    serialize_config,
    temperature_to_polarization,
    validate_config,
)
from .kinetics import (
    QpEventTrace,
    QpKineticsParams,
    evolve_ode,
    exponential_relaxation,
    relaxation_time,
    sample_birth_death,
    stationary_distribution,
    steady_state,
)
from .jumpsim import (
    IQRecord,
    TruthTrace,
    qp_generation_count,
    qp_generation_rate,
    qp_relaxation_rate,
    simulate_joint,
    snr_separation,
    synthesize_iq,
    thermal_decay_constant,
    thermal_excitation_rate,
    thermal_transient,
)
from .analysis import (
    DwellHistogram,
    FidelityReport,
    StateEstimate,
    cross_correlation,
    extract_dwells,
    fidelity,
    log_histogram,
    poisson_prediction,
    polarization,
    two_point_filter,
    windowed_report,
)
from .fitting import (
    PsdFit,
    RecoveryFit,
    ThermalFit,
    fit_power_law,
    fit_recovery,
    fit_thermal,
    periodogram,
)

__all__ = [name for name in dir() if not name.startswith("_")]
