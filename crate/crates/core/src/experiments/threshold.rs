use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, FitResult};
use super::noise_sweep::NoiseSweep;
use crate::noise::BoundKind;
use crate::{Error, Result};

/// How a threshold was located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMethod {
    /// Interpolation on the sweep grid.
    LogLinear,
    /// Interpolation after one extra simulation at the first estimate.
    Refined,
}

impl ThresholdMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ThresholdMethod::LogLinear => "log-linear",
            ThresholdMethod::Refined => "refined",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub n_qubits: usize,
    pub steps: usize,
    pub kind: BoundKind,
    pub epsilon: f64,
    pub method: ThresholdMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub kind: BoundKind,
    pub fraction: f64,
    pub points: Vec<ThresholdPoint>,
    /// `ε^(R) = a·n_q^b`, present when three or more sizes were bracketed.
    pub fit: Option<FitResult>,
}

/// First downward crossing of `target` between grid points `i` and `i + 1`.
fn bracket(curve: &[(f64, f64)], target: f64) -> Option<usize> {
    if curve.first()?.1 < target {
        return None;
    }
    curve.windows(2).position(|w| w[0].1 >= target && w[1].1 < target)
}

/// Interpolates `E(ε) = target` linearly in `ln ε` between the bracketing
/// grid points (linearly in `ε` when the left point is `ε = 0`).
fn interpolate(left: (f64, f64), right: (f64, f64), target: f64) -> f64 {
    let u = (target - left.1) / (right.1 - left.1);
    if left.0 > 0.0 {
        (left.0.ln() + u * (right.0.ln() - left.0.ln())).exp()
    } else {
        left.0 + u * (right.0 - left.0)
    }
}

/// Noise strength at which `curve` (pairs `(ε, E)` in increasing `ε`) first
/// falls below `fraction · reference`.
pub fn threshold_from_curve(curve: &[(f64, f64)], reference: f64, fraction: f64, n_qubits: usize) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold fraction {fraction}")));
    }
    let target = fraction * reference;
    let i = bracket(curve, target).ok_or(Error::NoBracket { n_q: n_qubits })?;
    Ok(interpolate(curve[i], curve[i + 1], target))
}

fn power_law_over(points: &[ThresholdPoint]) -> Result<Option<FitResult>> {
    if points.len() < 3 {
        return Ok(None);
    }
    let pts: Vec<_> = points.iter().map(|p| (p.n_qubits as f64, p.epsilon)).collect();
    fit_power_law(&pts).map(Some)
}

/// Thresholds of one bound for every series of `sweep`.
///
/// Any series whose grid does not bracket the crossing makes the whole call
/// fail with [`Error::NoBracket`].
pub fn find_threshold(sweep: &NoiseSweep, kind: BoundKind, fraction: f64) -> Result<ThresholdResult> {
    find_threshold_refined(sweep, kind, fraction, None::<fn(usize, f64) -> Result<f64>>)
}

/// As [`find_threshold`], optionally re-simulating once at each estimate.
///
/// `simulate(n_q, ε)` must return the mean of the bound at `ε`; the new
/// point splits the bracket and the crossing is interpolated again.
pub fn find_threshold_refined<F>(
    sweep: &NoiseSweep,
    kind: BoundKind,
    fraction: f64,
    mut simulate: Option<F>,
) -> Result<ThresholdResult>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    let mut points = Vec::with_capacity(sweep.series.len());
    for series in &sweep.series {
        let curve: Vec<(f64, f64)> = series.curve(kind).into_iter().map(|(e, m, _)| (e, m)).collect();
        let reference = series.reference.bound(kind).mean;
        let first = threshold_from_curve(&curve, reference, fraction, series.n_qubits)?;
        let (epsilon, method) = match simulate.as_mut() {
            None => (first, ThresholdMethod::LogLinear),
            Some(sim) => {
                let target = fraction * reference;
                let i = bracket(&curve, target).ok_or(Error::NoBracket { n_q: series.n_qubits })?;
                let mid = (first, sim(series.n_qubits, first)?);
                let refined = if mid.1 >= target {
                    interpolate(mid, curve[i + 1], target)
                } else {
                    interpolate(curve[i], mid, target)
                };
                (refined, ThresholdMethod::Refined)
            }
        };
        points.push(ThresholdPoint { n_qubits: series.n_qubits, steps: sweep.steps, kind, epsilon, method });
    }
    Ok(ThresholdResult { kind, fraction, fit: power_law_over(&points)?, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::log_grid;

    fn gaussian_curve(e0: f64, eps0: f64, grid: &[f64]) -> Vec<(f64, f64)> {
        grid.iter().map(|&e| (e, e0 * (-(e / eps0).powi(2)).exp())).collect()
    }

    #[test]
    fn gaussian_decay_threshold() {
        let grid = log_grid(1e-4, 1e-1, 31).unwrap();
        for eps0 in [3e-3, 1.1e-2, 4e-2] {
            let curve = gaussian_curve(2.5, eps0, &grid);
            let got = threshold_from_curve(&curve, 2.5, 0.5, 4).unwrap();
            let exact = eps0 * 2f64.ln().sqrt();
            assert!((got / exact - 1.0).abs() < 0.01, "{got} vs {exact}");
        }
    }

    #[test]
    fn refinement_tightens_the_estimate() {
        let grid = log_grid(1e-3, 1e-1, 5).unwrap();
        let eps0 = 0.02;
        let exact = eps0 * 2f64.ln().sqrt();
        let curve = gaussian_curve(1.0, eps0, &grid);
        let coarse = threshold_from_curve(&curve, 1.0, 0.5, 4).unwrap();
        let i = bracket(&curve, 0.5).unwrap();
        let mid = (coarse, (-(coarse / eps0).powi(2)).exp());
        let fine = if mid.1 >= 0.5 { interpolate(mid, curve[i + 1], 0.5) } else { interpolate(curve[i], mid, 0.5) };
        assert!((fine - exact).abs() < (coarse - exact).abs());
    }

    #[test]
    fn missing_bracket_is_reported() {
        let grid = log_grid(1e-4, 1e-3, 5).unwrap();
        let curve = gaussian_curve(1.0, 0.05, &grid);
        assert_eq!(threshold_from_curve(&curve, 1.0, 0.5, 6), Err(Error::NoBracket { n_q: 6 }));
        let above = gaussian_curve(0.3, 0.05, &grid);
        assert_eq!(threshold_from_curve(&above, 1.0, 0.5, 6), Err(Error::NoBracket { n_q: 6 }));
    }

    #[test]
    fn zero_grid_point_interpolates_linearly() {
        let curve = [(0.0, 1.0), (0.1, 0.0)];
        assert!((threshold_from_curve(&curve, 1.0, 0.5, 4).unwrap() - 0.05).abs() < 1e-15);
    }
}
