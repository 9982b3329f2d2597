use serde::{Deserialize, Serialize};

use super::fit::{fit_linear, FitResult};
use super::noise_sweep::{initial_state, trajectory_run, NoiseSweep};
use super::ExperimentConfig;
use crate::entanglement::REFERENCE_GAMMA;
use crate::noise::run_trajectories;
use crate::sawtooth::{build_step_circuit, reference_gate_count};
use crate::{Error, Result};

/// Largest `γ ε² n_g t` (with the reference `γ` and `n_g = 3n_q² + n_q`)
/// accepted by [`calibrate_gamma`].
pub const PERTURBATIVE_LIMIT: f64 = 0.5;

/// Gate-count convention used to define `γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateCountConvention {
    /// `n_g = 3n_q² + n_q`, the count `γ ≈ 0.28` refers to.
    Reference,
    /// Gates actually present in one step of the simulated circuit.
    Actual,
}

impl GateCountConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            GateCountConvention::Reference => "reference-3nq2+nq",
            GateCountConvention::Actual => "actual-circuit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub n_qubits: usize,
    pub steps: usize,
    pub epsilon: f64,
    pub mean_fidelity: f64,
    pub gate_count: usize,
    pub reference_gate_count: usize,
}

impl FidelityPoint {
    pub fn neg_log_fidelity(&self) -> f64 {
        -self.mean_fidelity.ln()
    }

    /// `ε² n_g t` under `convention`.
    pub fn exposure(&self, convention: GateCountConvention) -> f64 {
        let n_g = match convention {
            GateCountConvention::Reference => self.reference_gate_count,
            GateCountConvention::Actual => self.gate_count,
        };
        self.epsilon * self.epsilon * n_g as f64 * self.steps as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaCalibration {
    pub points: Vec<FidelityPoint>,
    /// Fit of `−ln F` against `ε² n_g t` with `n_g = 3n_q² + n_q`.
    pub reference_fit: FitResult,
    /// The same with the actual gate count.
    pub actual_fit: FitResult,
}

impl GammaCalibration {
    pub fn gamma(&self, convention: GateCountConvention) -> f64 {
        self.fit(convention).exponent_or_rate
    }

    pub fn fit(&self, convention: GateCountConvention) -> &FitResult {
        match convention {
            GateCountConvention::Reference => &self.reference_fit,
            GateCountConvention::Actual => &self.actual_fit,
        }
    }
}

/// Least-squares fit of `−ln F` against `ε² n_g t` (slope and intercept).
pub fn fit_gamma(points: &[FidelityPoint], convention: GateCountConvention) -> Result<FitResult> {
    let pts: Vec<_> = points
        .iter()
        .map(|p| (p.exposure(convention), p.neg_log_fidelity()))
        .collect();
    fit_linear(&pts)
}

/// Fidelity decay rate `γ` from trajectories over every `(n_q, t, ε)` with
/// `t` taken from `times` and `ε` from the configured grid.
pub fn calibrate_gamma(config: &ExperimentConfig, times: &[usize]) -> Result<GammaCalibration> {
    config.check_grid()?;
    if config.qubit_range.is_empty() || times.is_empty() {
        return Err(Error::InvalidParameter("γ calibration needs qubit counts and times".into()));
    }
    let eps_max = config.epsilon_grid.last().copied().unwrap_or(0.0);
    for &n in &config.qubit_range {
        for &t in times {
            let x = REFERENCE_GAMMA * eps_max * eps_max * reference_gate_count(n) as f64 * t as f64;
            if x > PERTURBATIVE_LIMIT {
                return Err(Error::OutOfRange(format!(
                    "γε²n_g t = {x:.3} at n_q = {n}, t = {t}, ε = {eps_max} exceeds {PERTURBATIVE_LIMIT}"
                )));
            }
        }
    }

    let mut points = Vec::new();
    for &n in &config.qubit_range {
        let params = config.map_params(n)?;
        let initial = initial_state(config, &params)?;
        let gate_count = build_step_circuit(&params).gate_count();
        for &t in times {
            let cfg = ExperimentConfig { steps: t, ..config.clone() };
            for &eps in &config.epsilon_grid {
                let mean_fidelity = if eps == 0.0 {
                    1.0
                } else {
                    run_trajectories(&trajectory_run(&cfg, params, &initial, eps)?)?.mean_fidelity()
                };
                points.push(FidelityPoint {
                    n_qubits: n,
                    steps: t,
                    epsilon: eps,
                    mean_fidelity,
                    gate_count,
                    reference_gate_count: reference_gate_count(n),
                });
            }
        }
    }
    Ok(GammaCalibration {
        reference_fit: fit_gamma(&points, GateCountConvention::Reference)?,
        actual_fit: fit_gamma(&points, GateCountConvention::Actual)?,
        points,
    })
}

/// Calibration from the fidelities already measured by a noise sweep,
/// keeping the points inside the perturbative regime.
pub fn calibrate_from_sweep(sweep: &NoiseSweep) -> Result<GammaCalibration> {
    let points: Vec<FidelityPoint> = sweep
        .series
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |p| FidelityPoint {
                n_qubits: s.n_qubits,
                steps: sweep.steps,
                epsilon: p.epsilon,
                mean_fidelity: p.mean_fidelity,
                gate_count: s.gate_count,
                reference_gate_count: s.reference_gate_count,
            })
        })
        .filter(|p| REFERENCE_GAMMA * p.exposure(GateCountConvention::Reference) <= PERTURBATIVE_LIMIT)
        .collect();
    Ok(GammaCalibration {
        reference_fit: fit_gamma(&points, GateCountConvention::Reference)?,
        actual_fit: fit_gamma(&points, GateCountConvention::Actual)?,
        points,
    })
}
