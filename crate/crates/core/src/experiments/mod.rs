//! Experiment drivers: entanglement generation, spectrum widths,
//! noise sweeps, thresholds and fidelity-decay calibration.

mod config;
mod fit;
mod gamma;
mod generation;
mod noise_sweep;
mod spectrum;
mod threshold;

pub use config::{check_grid, linear_grid, log_grid, ExperimentConfig, Realizations, DEFAULT_STEPS};
pub use fit::{fit_exponential, fit_linear, fit_power_law, FitResult, MIN_FIT_POINTS};
pub use gamma::{
    calibrate_from_sweep, calibrate_gamma, fit_gamma, FidelityPoint, GammaCalibration, GateCountConvention,
    PERTURBATIVE_LIMIT,
};
pub use generation::{convergence_fit, run_generation, GenerationResult, GenerationSeries};
pub use noise_sweep::{
    initial_state, noise_point, run_noise_series, run_noise_sweep, trajectory_run, BoundEstimate,
    NoisePoint, NoiseSeries, NoiseSweep, DRIFT_TOLERANCE,
};
pub use spectrum::{haar_seed, run_spectrum, FamilySpectrum, SpectrumResult, StateFamily};
pub use threshold::{
    find_threshold, find_threshold_refined, threshold_from_curve, ThresholdMethod, ThresholdPoint,
    ThresholdResult,
};
