use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::derive_seed;
use super::fit::{fit_exponential, FitResult};
use super::ExperimentConfig;
use crate::entanglement::{
    haar_random_state, histogram, pure_spectrum, EntanglementSample, EntanglementStats, Histogram,
};
use crate::quantum::StateVector;
use crate::sawtooth::{momentum_index, SplitOperator};
use crate::{Error, Result};

const HAAR_FAMILY: u64 = 0x4841_4152;

/// Which kind of pure state a spectrum was taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StateFamily {
    Sawtooth,
    Haar,
}

impl StateFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateFamily::Sawtooth => "sawtooth",
            StateFamily::Haar => "haar",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpectrum {
    pub family: StateFamily,
    pub n_qubits: usize,
    /// For Haar states, the samples of every reference state in seed order.
    pub samples: Vec<EntanglementSample>,
    pub stats: EntanglementStats,
    pub histogram: Histogram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub steps: usize,
    pub sawtooth: Vec<FamilySpectrum>,
    pub haar: Vec<FamilySpectrum>,
    /// Exponential fit of `σ/⟨E⟩` against `n_q`.
    pub sawtooth_fit: FitResult,
    pub haar_fit: FitResult,
}

fn summarize(family: StateFamily, n_qubits: usize, samples: Vec<EntanglementSample>) -> Result<FamilySpectrum> {
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let stats = EntanglementStats::from_values(&values)?;
    let width = Histogram::default_bin_width(&values);
    Ok(FamilySpectrum {
        family,
        n_qubits,
        histogram: histogram(&values, width)?,
        stats,
        samples,
    })
}

/// Seed of the `index`-th Haar reference state with `n_qubits` qubits.
pub fn haar_seed(master_seed: u64, n_qubits: usize, index: usize) -> u64 {
    derive_seed(master_seed, HAAR_FAMILY ^ n_qubits as u64, index as u64)
}

/// Entanglement spectrum of the sawtooth state after `config.steps`
/// noiseless steps, alongside pooled spectra of Haar-random states.
pub fn run_spectrum(config: &ExperimentConfig) -> Result<SpectrumResult> {
    config.check_qubits(4)?;
    if config.qubit_range.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} qubit sizes, the width fit needs at least 3",
            config.qubit_range.len()
        )));
    }
    if config.haar_samples == 0 {
        return Err(Error::InvalidParameter("haar_samples must be positive".into()));
    }
    let mut sawtooth = Vec::new();
    let mut haar = Vec::new();
    for &n in &config.qubit_range {
        let params = config.map_params(n)?;
        let mut psi = StateVector::basis(n, momentum_index(&params, config.initial_level)?)?;
        let mut op = SplitOperator::new(params);
        for _ in 0..config.steps {
            op.step(&mut psi)?;
        }
        sawtooth.push(summarize(StateFamily::Sawtooth, n, pure_spectrum(&psi)?)?);

        let pooled = (0..config.haar_samples)
            .into_par_iter()
            .map(|i| pure_spectrum(&haar_random_state(n, haar_seed(config.master_seed, n, i))?))
            .collect::<Result<Vec<_>>>()?;
        haar.push(summarize(StateFamily::Haar, n, pooled.into_iter().flatten().collect())?);
    }
    let width_fit = |spectra: &[FamilySpectrum]| {
        let pts: Vec<_> = spectra
            .iter()
            .map(|s| (s.n_qubits as f64, s.stats.relative_std))
            .collect();
        fit_exponential(&pts)
    };
    Ok(SpectrumResult {
        steps: config.steps,
        sawtooth_fit: width_fit(&sawtooth)?,
        haar_fit: width_fit(&haar)?,
        sawtooth,
        haar,
    })
}
