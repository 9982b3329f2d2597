use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Chaotic working point of the map.
pub const DEFAULT_K: f64 = 1.5;

/// Discretisation of the map on the torus `0 ≤ θ < 2π`, `−π ≤ p < π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    n_qubits: usize,
    k_param: f64,
}

impl MapParams {
    pub fn new(n_qubits: usize, k_param: f64) -> Result<Self> {
        if !(1..=24).contains(&n_qubits) {
            return Err(Error::OutOfRange(format!("n_q = {n_qubits}")));
        }
        if !k_param.is_finite() {
            return Err(Error::InvalidParameter(format!("K = {k_param}")));
        }
        Ok(Self { n_qubits, k_param })
    }

    pub fn with_default_k(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, DEFAULT_K)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of levels `N = 2^n_q`.
    pub fn levels(&self) -> usize {
        1 << self.n_qubits
    }

    /// Classical chaos parameter `K = kT`.
    pub fn k_param(&self) -> f64 {
        self.k_param
    }

    /// Kick period `T = 2π/N`.
    pub fn period(&self) -> f64 {
        TAU / self.levels() as f64
    }

    /// Kick strength `k = K/T`.
    pub fn kick_strength(&self) -> f64 {
        self.k_param / self.period()
    }

    /// Phase `−T n²/2` of the free evolution on momentum level `n`.
    pub fn momentum_phase(&self, n: i64) -> Result<f64> {
        let half = (self.levels() / 2) as i64;
        if n < -half || n >= half {
            return Err(Error::OutOfRange(format!("momentum level {n}")));
        }
        Ok(-self.period() * (n * n) as f64 / 2.0)
    }

    /// Phase `k(θ_l − π)²/2` of the kick at grid point `θ_l = 2πl/N`.
    pub fn theta_phase(&self, l: usize) -> Result<f64> {
        if l >= self.levels() {
            return Err(Error::OutOfRange(format!("angle index {l}")));
        }
        let theta = TAU * l as f64 / self.levels() as f64;
        Ok(self.kick_strength() * (theta - PI).powi(2) / 2.0)
    }
}

/// Basis index of momentum level `n`.
pub fn momentum_index(params: &MapParams, n: i64) -> Result<usize> {
    let half = (params.levels() / 2) as i64;
    if n < -half || n >= half {
        return Err(Error::OutOfRange(format!("momentum level {n}")));
    }
    Ok((n + half) as usize)
}
