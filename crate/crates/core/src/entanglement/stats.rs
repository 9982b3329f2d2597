use serde::{Deserialize, Serialize};

use crate::quantum::Bipartition;
use crate::{Error, Result};

/// Default number of histogram bins across the sample range.
pub const DEFAULT_HISTOGRAM_BINS: usize = 25;

/// Entanglement of one bipartition, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSample {
    pub bipartition: Bipartition,
    pub value: f64,
}

/// Population moments over a set of bipartitions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementStats {
    pub mean: f64,
    pub std_dev: f64,
    /// `std_dev / mean`; zero when every value vanishes.
    pub relative_std: f64,
    pub count: usize,
}

impl EntanglementStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("no entanglement samples".into()));
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
        let std_dev = var.sqrt();
        // A spectrum that is identically zero has no relative spread.
        let relative_std = if mean > 0.0 {
            std_dev / mean
        } else if std_dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(Self { mean, std_dev, relative_std, count })
    }
}

pub fn stats(samples: &[EntanglementSample]) -> Result<EntanglementStats> {
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    EntanglementStats::from_values(&values)
}

/// Probability density on equal-width bins starting at `origin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub origin: f64,
    pub bin_width: f64,
    pub densities: Vec<f64>,
}

impl Histogram {
    pub fn bin_centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.densities.len()).map(|i| self.origin + (i as f64 + 0.5) * self.bin_width)
    }

    /// `Σ density · bin_width`, which is 1 by construction.
    pub fn total_probability(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width
    }

    /// Bin width giving [`DEFAULT_HISTOGRAM_BINS`] bins over the data range.
    pub fn default_bin_width(values: &[f64]) -> f64 {
        let (lo, hi) = min_max(values);
        let w = (hi - lo) / DEFAULT_HISTOGRAM_BINS as f64;
        if w > 0.0 { w } else { 1e-3 }
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Density histogram of `values`; the last bin is closed on the right.
pub fn histogram(values: &[f64], bin_width: f64) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::InsufficientData("histogram of no samples".into()));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidParameter(format!("bin width {bin_width}")));
    }
    let (lo, hi) = min_max(values);
    let bins = (((hi - lo) / bin_width).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; bins];
    for &v in values {
        let i = (((v - lo) / bin_width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let norm = values.len() as f64 * bin_width;
    Ok(Histogram {
        origin: lo,
        bin_width,
        densities: counts.into_iter().map(|c| c as f64 / norm).collect(),
    })
}
