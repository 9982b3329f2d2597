//! Ordinary least-squares fits on transformed coordinates.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Result of a two-parameter fit.
///
/// For a power law `y = a·x^b`, `exponent_or_rate = b`; for an exponential
/// `y = a·e^{−r x}`, `exponent_or_rate = r` (positive for decay); for a
/// straight line `y = a + b x`, it is the slope and `prefactor` the intercept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent_or_rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub point_count: usize,
}

pub const MIN_FIT_POINTS: usize = 3;

/// `(slope, intercept, R²)` of `y = intercept + slope·x`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // A perfect fit, including flat data, has R² = 1.
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    (slope, intercept, r2)
}

fn check_len(points: &[(f64, f64)], min: usize) -> Result<()> {
    if points.len() < min {
        return Err(Error::InsufficientData(format!(
            "{} points, fit needs at least {min}",
            points.len()
        )));
    }
    Ok(())
}

fn positive(v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonPositive(v))
    }
}

/// Straight-line fit; allows two points for internal use.
pub(crate) fn fit_linear_min(points: &[(f64, f64)], min: usize) -> Result<FitResult> {
    check_len(points, min)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(FitResult {
        exponent_or_rate: slope,
        prefactor: intercept,
        r_squared,
        point_count: points.len(),
    })
}

pub fn fit_linear(points: &[(f64, f64)]) -> Result<FitResult> {
    fit_linear_min(points, MIN_FIT_POINTS)
}

/// `y = a·x^b` by least squares on `(ln x, ln y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    check_len(points, MIN_FIT_POINTS)?;
    let logs = points
        .iter()
        .map(|&(x, y)| Ok((positive(x)?.ln(), positive(y)?.ln())))
        .collect::<Result<Vec<_>>>()?;
    let line = fit_linear(&logs)?;
    Ok(FitResult {
        exponent_or_rate: line.exponent_or_rate,
        prefactor: line.prefactor.exp(),
        ..line
    })
}

pub(crate) fn fit_exponential_min(points: &[(f64, f64)], min: usize) -> Result<FitResult> {
    check_len(points, min)?;
    let logs = points
        .iter()
        .map(|&(x, y)| Ok((x, positive(y)?.ln())))
        .collect::<Result<Vec<_>>>()?;
    let line = fit_linear_min(&logs, min)?;
    Ok(FitResult {
        exponent_or_rate: -line.exponent_or_rate,
        prefactor: line.prefactor.exp(),
        ..line
    })
}

/// `y = a·e^{−r x}` by least squares on `(x, ln y)`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<FitResult> {
    fit_exponential_min(points, MIN_FIT_POINTS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = (1..=6).map(|i| (i as f64, 2.0 / i as f64)).collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.exponent_or_rate + 1.0).abs() < 1e-12);
        assert!((f.prefactor - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data_has_zero_exponent() {
        let pts: Vec<_> = (1..=5).map(|i| (i as f64, 3.0)).collect();
        assert_eq!(fit_power_law(&pts).unwrap().exponent_or_rate, 0.0);
        assert_eq!(fit_exponential(&pts).unwrap().exponent_or_rate, 0.0);
    }

    #[test]
    fn noisy_power_law_recovers_exponent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<_> = (2..=20)
            .map(|i| {
                let x = i as f64;
                (x, x.powf(-0.9) * (1.0 + rng.random_range(-0.01..0.01)))
            })
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.exponent_or_rate + 0.9).abs() < 0.05);
    }

    #[test]
    fn exact_exponential() {
        let pts: Vec<_> = (0..8).map(|i| (i as f64, (-(i as f64) / 2.0).exp())).collect();
        let f = fit_exponential(&pts).unwrap();
        assert!((f.exponent_or_rate - 0.5).abs() < 1e-12);
        assert!((f.prefactor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_exponential_recovers_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<_> = (4..=12)
            .map(|i| {
                let x = i as f64;
                (x, 3.0 * (-0.48 * x).exp() * (1.0 + rng.random_range(-0.02..0.02)))
            })
            .collect();
        let f = fit_exponential(&pts).unwrap();
        assert!((f.exponent_or_rate - 0.48).abs() < 0.03);
    }

    #[test]
    fn error_paths() {
        assert!(matches!(fit_power_law(&[(1.0, 1.0), (2.0, 1.0)]), Err(Error::InsufficientData(_))));
        assert!(matches!(
            fit_power_law(&[(1.0, 1.0), (0.0, 1.0), (2.0, 1.0)]),
            Err(Error::NonPositive(_))
        ));
        assert!(matches!(
            fit_exponential(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]),
            Err(Error::NonPositive(_))
        ));
    }
}
