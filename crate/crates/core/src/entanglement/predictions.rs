use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fidelity-decay rate `γ` quoted for the original gate decomposition.
pub const REFERENCE_GAMMA: f64 = 0.28;

/// Mean balanced entanglement of a Haar-random state, `n_q/2 − 1/(2 ln 2)`.
pub fn page_value(n_qubits: usize) -> f64 {
    n_qubits as f64 / 2.0 - 1.0 / (2.0 * LN_2)
}

/// `h(x) = −x log₂ x − (1−x) log₂(1−x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!("binary entropy argument {x}")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Quantum Fano bound `h(F) + (1 − F) log₂(N² − 1)` on `S(ρ)`.
///
/// Fidelities within 1e-10 outside `[0, 1]` are clamped.
pub fn fano_entropy_bound(fidelity: f64, n_qubits: usize) -> Result<f64> {
    const SLACK: f64 = 1e-10;
    if !(-SLACK..=1.0 + SLACK).contains(&fidelity) {
        return Err(Error::OutOfRange(format!("fidelity {fidelity}")));
    }
    let f = fidelity.clamp(0.0, 1.0);
    let dim_sq = 4f64.powi(n_qubits as i32);
    Ok(binary_entropy(f)? + (1.0 - f) * (dim_sq - 1.0).log2())
}

/// Entropy predicted from `F ≃ e^{−γε²n_g t}` to first order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyPrediction {
    /// `x = γ ε² n_g t`.
    pub argument: f64,
    pub value: f64,
    /// False when `x ≥ 1`, outside the regime where the expansion holds.
    pub in_regime: bool,
}

/// `(2n_q x, x(−log₂ x + 1/ln 2))`: the dominant term and the rest.
pub fn predicted_entropy_terms(epsilon: f64, n_qubits: usize, steps: usize, gamma: f64, gate_count: usize) -> (f64, f64) {
    let x = gamma * epsilon * epsilon * gate_count as f64 * steps as f64;
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    (x * 2.0 * n_qubits as f64, x * (-x.log2() + 1.0 / LN_2))
}

/// `S ≤ x[−log₂ x + 2n_q + 1/ln 2]` with `x = γε²n_g t`.
pub fn predicted_entropy(epsilon: f64, n_qubits: usize, steps: usize, gamma: f64, gate_count: usize) -> EntropyPrediction {
    let argument = gamma * epsilon * epsilon * gate_count as f64 * steps as f64;
    let (lead, rest) = predicted_entropy_terms(epsilon, n_qubits, steps, gamma, gate_count);
    EntropyPrediction {
        argument,
        value: lead + rest,
        in_regime: argument < 1.0,
    }
}

/// `n_q/2 − 1/(2 ln 2) − 6γ n_q³ ε² t`; may be negative.
pub fn predicted_lower_bound(epsilon: f64, n_qubits: usize, steps: usize, gamma: f64) -> f64 {
    let n = n_qubits as f64;
    page_value(n_qubits) - 6.0 * gamma * n.powi(3) * epsilon * epsilon * steps as f64
}

/// Leading-order noise strength `1/√(24γ n_q² t)` at which the lower bound
/// halves.
pub fn analytic_threshold(n_qubits: usize, steps: usize, gamma: f64) -> f64 {
    let n = n_qubits as f64;
    (24.0 * gamma * n * n * steps as f64).sqrt().recip()
}
