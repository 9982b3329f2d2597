use serde::{Deserialize, Serialize};

use super::fit::{fit_exponential_min, fit_linear, FitResult};
use super::ExperimentConfig;
use crate::entanglement::{page_value, pure_spectrum, stats};
use crate::quantum::StateVector;
use crate::sawtooth::{momentum_index, SplitOperator};
use crate::{Error, Result};

/// `⟨E_AB⟩(t)` for one qubit count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationSeries {
    pub n_qubits: usize,
    pub page_value: f64,
    /// Mean balanced entropy for `t = 0, 1, …, t_max`.
    pub mean_entropy: Vec<f64>,
    /// Standard deviation of `⟨E_AB⟩(t)` over the second half of the run.
    pub fluctuation_floor: f64,
    /// Exponential fit of `|⟨E_rand⟩ − ⟨E_AB⟩(t)|` over the convergence window.
    pub convergence: FitResult,
    /// Time scale `τ = 1/rate`.
    pub tau: f64,
}

impl GenerationSeries {
    pub fn gap(&self, t: usize) -> f64 {
        self.page_value - self.mean_entropy[t]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub series: Vec<GenerationSeries>,
    /// Straight-line fit of `τ` against `n_q`, when at least three sizes ran.
    pub tau_vs_qubits: Option<FitResult>,
}

/// Fits `|gap(t)| ~ a·e^{−t/τ}` from `t = 0` up to (not including) the first
/// step whose gap falls below the late-time fluctuation level, using at
/// least three points.
pub fn convergence_fit(mean_entropy: &[f64], page: f64) -> Result<(FitResult, f64)> {
    let t_max = mean_entropy.len().saturating_sub(1);
    if t_max < 3 {
        return Err(Error::InsufficientData("convergence fit needs t_max ≥ 3".into()));
    }
    let floor = late_fluctuation(mean_entropy);
    let gaps: Vec<f64> = mean_entropy.iter().map(|e| (page - e).abs()).collect();
    let end = (1..gaps.len()).find(|&t| gaps[t] < floor).unwrap_or(gaps.len());
    let points: Vec<(f64, f64)> = (0..end.max(3)).map(|t| (t as f64, gaps[t])).collect();
    let fit = fit_exponential_min(&points, 3)?;
    Ok((fit, floor))
}

fn late_fluctuation(values: &[f64]) -> f64 {
    let tail = &values[values.len() / 2..];
    let m = tail.iter().sum::<f64>() / tail.len() as f64;
    (tail.iter().map(|v| (v - m).powi(2)).sum::<f64>() / tail.len() as f64).sqrt()
}

/// Noiseless evolution from a momentum eigenstate, recording the mean
/// balanced-bipartition entropy after every step.
pub fn run_generation(config: &ExperimentConfig) -> Result<GenerationResult> {
    config.check_qubits(2)?;
    let series = config
        .qubit_range
        .iter()
        .map(|&n| {
            let params = config.map_params(n)?;
            let mut psi = StateVector::basis(n, momentum_index(&params, config.initial_level)?)?;
            let mut op = SplitOperator::new(params);
            let mut mean_entropy = Vec::with_capacity(config.steps + 1);
            for t in 0..=config.steps {
                if t > 0 {
                    op.step(&mut psi)?;
                }
                mean_entropy.push(stats(&pure_spectrum(&psi)?)?.mean);
            }
            let page = page_value(n);
            let (convergence, fluctuation_floor) = convergence_fit(&mean_entropy, page)?;
            Ok(GenerationSeries {
                n_qubits: n,
                page_value: page,
                mean_entropy,
                fluctuation_floor,
                tau: convergence.exponent_or_rate.recip(),
                convergence,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tau_vs_qubits = if series.len() >= 3 {
        let pts: Vec<_> = series.iter().map(|s| (s.n_qubits as f64, s.tau)).collect();
        Some(fit_linear(&pts)?)
    } else {
        None
    };
    Ok(GenerationResult { series, tau_vs_qubits })
}
