use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::entanglement::{fano_entropy_bound, mixed_spectrum, EntanglementStats, MixedSpectrum};
use crate::noise::{run_trajectories, BoundKind, TrajectoryEnsemble, TrajectoryRun};
use crate::quantum::{DensityMatrix, ProjectorAccumulator, StateVector};
use crate::sawtooth::{momentum_index, reference_gate_count, MapParams};
use crate::{Error, Result};

/// Relative drift between the half and full ensembles above which the
/// realization count is flagged as insufficient.
pub const DRIFT_TOLERANCE: f64 = 0.02;

/// Monte-Carlo estimate of one bound family at one noise strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    /// Mean over bipartitions for the full ensemble.
    pub mean: f64,
    /// Spread over bipartitions.
    pub std_dev: f64,
    pub relative_std: f64,
    /// Standard error of `mean` from the spread of per-batch means.
    pub stderr: f64,
    /// Mean over bipartitions for the first half of the realizations.
    pub half_mean: f64,
}

impl BoundEstimate {
    fn exact(stats: &EntanglementStats) -> Self {
        Self {
            mean: stats.mean,
            std_dev: stats.std_dev,
            relative_std: stats.relative_std,
            stderr: 0.0,
            half_mean: stats.mean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub epsilon: f64,
    pub total_entropy: f64,
    pub mean_fidelity: f64,
    /// Fano bound on `S(ρ)` evaluated at `mean_fidelity`.
    pub fano_bound: f64,
    pub lower: BoundEstimate,
    pub upper: BoundEstimate,
    /// Per-bipartition values of both bounds for the full ensemble.
    pub spectrum: MixedSpectrum,
    /// `E_m ≤ E_M` holds on every bipartition.
    pub bounds_ordered: bool,
    /// Half-to-full drift exceeded [`DRIFT_TOLERANCE`] for either bound.
    pub insufficient_realizations: bool,
}

impl NoisePoint {
    pub fn bound(&self, kind: BoundKind) -> &BoundEstimate {
        match kind {
            BoundKind::Lower => &self.lower,
            BoundKind::Upper => &self.upper,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSeries {
    pub n_qubits: usize,
    pub n_realizations: usize,
    pub gate_count: usize,
    pub reference_gate_count: usize,
    /// Bounds of the noiseless state.
    pub reference: NoisePoint,
    /// One point per grid value, in grid order.
    pub points: Vec<NoisePoint>,
}

impl NoiseSeries {
    /// `(ε, mean, stderr)` of one bound along the grid.
    pub fn curve(&self, kind: BoundKind) -> Vec<(f64, f64, f64)> {
        self.points
            .iter()
            .map(|p| {
                let b = p.bound(kind);
                (p.epsilon, b.mean, b.stderr)
            })
            .collect()
    }

    /// Grid indices `i` where the mean rises from `i` to `i + 1` by more than
    /// `sigmas` combined standard errors.
    pub fn monotonicity_violations(&self, kind: BoundKind, sigmas: f64) -> Vec<usize> {
        let c = self.curve(kind);
        (0..c.len().saturating_sub(1))
            .filter(|&i| {
                let allowed = sigmas * (c[i].2.powi(2) + c[i + 1].2.powi(2)).sqrt();
                c[i + 1].1 > c[i].1 + allowed
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweep {
    pub steps: usize,
    pub epsilon_grid: Vec<f64>,
    pub series: Vec<NoiseSeries>,
}

impl NoiseSweep {
    pub fn series_for(&self, n_qubits: usize) -> Option<&NoiseSeries> {
        self.series.iter().find(|s| s.n_qubits == n_qubits)
    }

    /// True if any point was flagged for too few realizations.
    pub fn any_insufficient(&self) -> bool {
        self.series
            .iter()
            .flat_map(|s| &s.points)
            .any(|p| p.insufficient_realizations)
    }
}

fn mean_over_bipartitions(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let s = mixed_spectrum(rho)?;
    Ok((s.lower_stats.mean, s.upper_stats.mean))
}

fn batch_stderr(values: &[f64]) -> f64 {
    let b = values.len();
    if b < 2 {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

fn half_ensemble(ensemble: &TrajectoryEnsemble) -> Result<Option<DensityMatrix>> {
    let half = ensemble.batches.len() / 2;
    if half == 0 {
        return Ok(None);
    }
    let mut acc = ProjectorAccumulator::new(ensemble.ideal.n_qubits());
    for b in &ensemble.batches[..half] {
        acc.merge(&b.accumulator)?;
    }
    acc.normalized().map(Some)
}

fn relative_drift(half: f64, full: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        (half - full).abs() / reference
    } else {
        (half - full).abs()
    }
}

/// Bounds of the noise-averaged state for one `(n_q, ε)`.
pub fn noise_point(ensemble: &TrajectoryEnsemble, reference: Option<&NoisePoint>) -> Result<NoisePoint> {
    let spectrum = mixed_spectrum(&ensemble.rho)?;
    let mean_fidelity = ensemble.mean_fidelity();
    let n = ensemble.ideal.n_qubits();

    let (lower, upper) = if ensemble.epsilon == 0.0 {
        (BoundEstimate::exact(&spectrum.lower_stats), BoundEstimate::exact(&spectrum.upper_stats))
    } else {
        let batch_means = ensemble
            .batch_density_matrices()?
            .par_iter()
            .map(mean_over_bipartitions)
            .collect::<Result<Vec<_>>>()?;
        let (lo, up): (Vec<f64>, Vec<f64>) = batch_means.into_iter().unzip();
        let (half_lo, half_up) = match half_ensemble(ensemble)? {
            Some(rho) => mean_over_bipartitions(&rho)?,
            None => (spectrum.lower_stats.mean, spectrum.upper_stats.mean),
        };
        let estimate = |s: &EntanglementStats, batches: &[f64], half_mean: f64| BoundEstimate {
            mean: s.mean,
            std_dev: s.std_dev,
            relative_std: s.relative_std,
            stderr: batch_stderr(batches),
            half_mean,
        };
        (
            estimate(&spectrum.lower_stats, &lo, half_lo),
            estimate(&spectrum.upper_stats, &up, half_up),
        )
    };

    let insufficient_realizations = match reference {
        Some(r) => {
            relative_drift(lower.half_mean, lower.mean, r.lower.mean) > DRIFT_TOLERANCE
                || relative_drift(upper.half_mean, upper.mean, r.upper.mean) > DRIFT_TOLERANCE
        }
        None => false,
    };
    let bounds_ordered = spectrum
        .lower
        .iter()
        .zip(&spectrum.upper)
        .all(|(l, u)| l.value <= u.value + 1e-12);
    Ok(NoisePoint {
        epsilon: ensemble.epsilon,
        total_entropy: spectrum.total_entropy,
        mean_fidelity,
        fano_bound: fano_entropy_bound(mean_fidelity, n)?,
        lower,
        upper,
        spectrum,
        bounds_ordered,
        insufficient_realizations,
    })
}

/// Trajectory settings for one `(n_q, ε)` under `config`.
pub fn trajectory_run<'a>(
    config: &ExperimentConfig,
    params: MapParams,
    initial: &'a StateVector,
    epsilon: f64,
) -> Result<TrajectoryRun<'a>> {
    Ok(TrajectoryRun {
        steps: config.steps,
        epsilon,
        n_realizations: config.realizations.resolve(params.n_qubits())?,
        master_seed: config.master_seed,
        batches: config.batches,
        ..TrajectoryRun::new(params, initial)
    })
}

/// Initial momentum eigenstate of `config` for `n_qubits` qubits.
pub fn initial_state(config: &ExperimentConfig, params: &MapParams) -> Result<StateVector> {
    StateVector::basis(params.n_qubits(), momentum_index(params, config.initial_level)?)
}

/// One noise series: the noiseless reference and every grid point.
///
/// Realization `r` uses stream `r` of the master seed at every grid point,
/// so neighbouring points differ only through the noise amplitude.
pub fn run_noise_series(config: &ExperimentConfig, n_qubits: usize) -> Result<NoiseSeries> {
    let params = config.map_params(n_qubits)?;
    let initial = initial_state(config, &params)?;
    let reference_run = TrajectoryRun { n_realizations: 1, ..trajectory_run(config, params, &initial, 0.0)? };
    let reference_ensemble = run_trajectories(&reference_run)?;
    let reference = noise_point(&reference_ensemble, None)?;
    let points = config
        .epsilon_grid
        .iter()
        .map(|&eps| {
            if eps == 0.0 {
                return Ok(reference.clone());
            }
            let ensemble = run_trajectories(&trajectory_run(config, params, &initial, eps)?)?;
            noise_point(&ensemble, Some(&reference))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseSeries {
        n_qubits,
        n_realizations: config.realizations.resolve(n_qubits)?,
        gate_count: reference_ensemble.gate_count,
        reference_gate_count: reference_gate_count(n_qubits),
        reference,
        points,
    })
}

/// Distillable-entanglement bounds of the noise-averaged state at
/// `config.steps` for every `(n_q, ε)` of the configuration.
pub fn run_noise_sweep(config: &ExperimentConfig) -> Result<NoiseSweep> {
    config.check_qubits(2)?;
    config.check_grid()?;
    if config.batches == 0 {
        return Err(Error::InvalidParameter("batches must be positive".into()));
    }
    let series = config
        .qubit_range
        .iter()
        .map(|&n| run_noise_series(config, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseSweep {
        steps: config.steps,
        epsilon_grid: config.epsilon_grid.clone(),
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Realizations;

    fn small_config(grid: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            qubit_range: vec![4],
            epsilon_grid: grid,
            realizations: Realizations::Fixed(32),
            steps: 10,
            ..Default::default()
        }
    }

    #[test]
    fn zero_noise_reproduces_the_pure_state() {
        let sweep = run_noise_sweep(&small_config(vec![0.0, 1e-3])).unwrap();
        let s = &sweep.series[0];
        assert_eq!(s.points[0], s.reference);
        assert!(s.reference.total_entropy < 1e-9);
        assert!((s.reference.mean_fidelity - 1.0).abs() < 1e-12);
        let tiny = &s.points[1];
        assert!((tiny.lower.mean - s.reference.lower.mean).abs() < 0.02 * s.reference.lower.mean);
        assert!(tiny.bounds_ordered && !tiny.insufficient_realizations);
        assert!(tiny.lower.stderr > 0.0);
    }

    #[test]
    fn strong_noise_destroys_the_lower_bound() {
        let sweep = run_noise_sweep(&small_config(vec![0.3])).unwrap();
        let s = &sweep.series[0];
        assert!(s.points[0].lower.mean < 0.1 * s.reference.lower.mean);
        assert!(s.points[0].total_entropy <= s.points[0].fano_bound + 1e-9);
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = small_config(vec![1e-2, 3e-2]);
        assert_eq!(run_noise_sweep(&cfg).unwrap(), run_noise_sweep(&cfg).unwrap());
    }

    #[test]
    fn monotonicity_check_flags_rises() {
        let sweep = run_noise_sweep(&small_config(vec![1e-2])).unwrap();
        let mut s = sweep.series[0].clone();
        let mut second = s.points[0].clone();
        second.epsilon = 2e-2;
        second.lower.mean += 1.0;
        s.points.push(second);
        assert_eq!(s.monotonicity_violations(BoundKind::Lower, 2.0), vec![0]);
        assert!(s.monotonicity_violations(BoundKind::Upper, 2.0).is_empty());
    }

    #[test]
    fn grid_errors_propagate() {
        assert!(run_noise_sweep(&small_config(vec![1e-2, 1e-3])).is_err());
        let mut cfg = small_config(vec![1e-2]);
        cfg.realizations = Realizations::Fixed(0);
        assert_eq!(run_noise_sweep(&cfg).unwrap_err(), Error::NoRealizations);
    }
}
