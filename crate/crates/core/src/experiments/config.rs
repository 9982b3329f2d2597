use serde::{Deserialize, Serialize};

use crate::noise::{recommend_realizations, BoundKind, DEFAULT_BATCHES};
use crate::sawtooth::{MapParams, DEFAULT_K};
use crate::{Error, Result};

/// Default map iterations ("after 30 iterations").
pub const DEFAULT_STEPS: usize = 30;

/// Number of Monte-Carlo realizations per noise point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Realizations {
    /// Follow [`recommend_realizations`] for the bound being estimated.
    Auto,
    Fixed(usize),
}

impl Realizations {
    /// Count used for a run that estimates both bounds from one ensemble:
    /// the larger of the two recommendations.
    pub fn resolve(&self, n_qubits: usize) -> Result<usize> {
        match *self {
            Realizations::Fixed(0) => Err(Error::NoRealizations),
            Realizations::Fixed(n) => Ok(n),
            Realizations::Auto => recommend_realizations(n_qubits, BoundKind::Upper),
        }
    }

    pub fn resolve_for(&self, n_qubits: usize, kind: BoundKind) -> Result<usize> {
        match *self {
            Realizations::Auto => recommend_realizations(n_qubits, kind),
            _ => self.resolve(n_qubits),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Classical chaos parameter `K`.
    pub k_param: f64,
    /// Map iterations `t` (the last step for time series).
    pub steps: usize,
    pub epsilon_grid: Vec<f64>,
    pub realizations: Realizations,
    pub master_seed: u64,
    pub qubit_range: Vec<usize>,
    /// Haar-random reference states per qubit count.
    pub haar_samples: usize,
    /// Initial momentum eigenstate `|n⟩`.
    pub initial_level: i64,
    /// Trajectory batches for batch-means standard errors.
    pub batches: usize,
    /// Re-simulate at each interpolated threshold and interpolate again.
    pub refine_thresholds: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k_param: DEFAULT_K,
            steps: DEFAULT_STEPS,
            epsilon_grid: log_grid(1e-4, 1e-1, 19).expect("valid grid"),
            realizations: Realizations::Auto,
            master_seed: 0,
            qubit_range: vec![4, 6, 8],
            haar_samples: 100,
            initial_level: 0,
            batches: DEFAULT_BATCHES,
            refine_thresholds: false,
        }
    }
}

impl ExperimentConfig {
    pub fn map_params(&self, n_qubits: usize) -> Result<MapParams> {
        MapParams::new(n_qubits, self.k_param)
    }

    /// Qubit counts must be even and at least `min`.
    pub fn check_qubits(&self, min: usize) -> Result<()> {
        if self.qubit_range.is_empty() {
            return Err(Error::InvalidParameter("empty qubit range".into()));
        }
        for &n in &self.qubit_range {
            if n % 2 != 0 {
                return Err(Error::OddQubitCount(n));
            }
            if n < min {
                return Err(Error::OutOfRange(format!("n_q = {n} (minimum {min})")));
            }
        }
        Ok(())
    }

    /// The noise grid must be nonnegative and strictly increasing.
    pub fn check_grid(&self) -> Result<()> {
        check_grid(&self.epsilon_grid)
    }
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty ε grid".into()));
    }
    if grid.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter("ε grid has negative or non-finite entries".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("ε grid is not strictly increasing".into()));
    }
    Ok(())
}

/// `count` points from `lo` to `hi` inclusive, equally spaced in `ln ε`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || count < 2 {
        return Err(Error::InvalidParameter(format!("log grid {lo}:{hi}:{count}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    grid[count - 1] = hi;
    Ok(grid)
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(hi > lo) || count < 2 {
        return Err(Error::InvalidParameter(format!("linear grid {lo}:{hi}:{count}")));
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

/// Independent seed for item `index` of stream `family` under `master`.
pub(crate) fn derive_seed(master: u64, family: u64, index: u64) -> u64 {
    let mut z = master
        ^ family.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
