"""Monte Carlo sensitivity simulations for dark matter searches with clocks.

The package simulates clock-based searches for ultralight scalar dark
matter with three interrogation protocols (differential spectroscopy,
narrowband and broadband dynamical decoupling), including the stochastic
field lineshape, flicker laser noise, and quantum projection noise, and
extracts 95%-confidence detectable oscillation amplitudes.
"""

from .analysis import (
    AmplitudeCalibration,
    FitResult,
    MeasuredSpectrum,
    ProbeRecord,
    X_DET_95,
    analysis_grid,
    coherent_combine,
    detectable_amplitude_95,
    expected_lineshape,
    fit_amplitude,
    ramsey_analytic_sensitivity,
    uncertainty_ratio,
)
from .campaign import (
    CampaignConfig,
    CampaignPartialFailure,
    ExclusionPoint,
    SensitivityResult,
    SignalInjection,
    export_csv,
    load_results,
    log_grid,
    run_campaign,
    run_grid_point,
    to_exclusion,
)
from .dmfield import (
    DmParameters,
    DmRealization,
    deterministic_realization,
    lineshape,
    probe_signal_phase,
    synthesize_realization,
    write_realization_csv,
)
from .engine import (
    build_probe_sequences,
    combine_spectrum,
    signal_phases,
    simulate_measurement,
)
from .noise import (
    MandelbrotModel,
    NoiseConfig,
    build_mandelbrot,
    ds_effective_noise,
    generate_noise,
    probe_noise_phase,
    sql_allan_deviation,
    step_noise,
)
from .sequences import (
    PulseSequence,
    QuadratureComponents,
    accumulate_phase,
    build_bbdd,
    build_nbdd,
    build_ramsey,
    complex_response,
    quadrature_components,
)
from .stability import (
    averaged_periodogram,
    log_psd_slope,
    overlapping_allan_deviation,
    periodogram,
)

__version__ = "0.1.0"
