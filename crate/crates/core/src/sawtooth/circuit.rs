use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::MapParams;
use crate::quantum::{Matrix2, StateVector};
use crate::{Result, C64};

/// Elementary gate of the map circuit. Every variant is unitary for any
/// parameter values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `cos(α/2) I − i sin(α/2) n̂·σ⃗`.
    Rotation { qubit: usize, axis: [f64; 3], angle: f64 },
    /// Hadamard, i.e. the π rotation about `(x̂ + ẑ)/√2` with the global
    /// phase chosen so that the matrix is `(X + Z)/√2`.
    Hadamard { qubit: usize },
    /// `diag(e^{iφ₀}, e^{iφ₁})`.
    Phase { qubit: usize, phases: [f64; 2] },
    /// Diagonal two-qubit gate; bits `(b1, b2)` on `(q1, q2)` pick up
    /// `e^{i phases[2·b1 + b2]}`.
    TwoQubitPhase { q1: usize, q2: usize, phases: [f64; 4] },
}

pub(crate) const HADAMARD_AXIS: [f64; 3] = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];

impl Gate {
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::Rotation { .. } => "one-qubit-rotation",
            Gate::Hadamard { .. } => "hadamard",
            Gate::Phase { .. } => "one-qubit-phase",
            Gate::TwoQubitPhase { .. } => "two-qubit-phase",
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Gate::Phase { .. } | Gate::TwoQubitPhase { .. })
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Rotation { qubit, .. } | Gate::Hadamard { qubit } | Gate::Phase { qubit, .. } => {
                vec![qubit]
            }
            Gate::TwoQubitPhase { q1, q2, .. } => vec![q1, q2],
        }
    }

    /// Inverse gate.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rotation { qubit, axis, angle } => Gate::Rotation { qubit, axis, angle: -angle },
            Gate::Hadamard { qubit } => Gate::Hadamard { qubit },
            Gate::Phase { qubit, phases } => Gate::Phase { qubit, phases: phases.map(|p| -p) },
            Gate::TwoQubitPhase { q1, q2, phases } => Gate::TwoQubitPhase {
                q1,
                q2,
                phases: phases.map(|p| -p),
            },
        }
    }

    /// Rotation axis and angle of the non-diagonal one-qubit gates.
    pub fn rotation(&self) -> Option<([f64; 3], f64)> {
        match *self {
            Gate::Rotation { axis, angle, .. } => Some((axis, angle)),
            Gate::Hadamard { .. } => Some((HADAMARD_AXIS, PI)),
            _ => None,
        }
    }

    /// Applies the ideal gate.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            Gate::Rotation { qubit, axis, angle } => {
                state.apply_one_qubit_gate(qubit, &rotation_matrix(axis, angle))
            }
            Gate::Hadamard { qubit } => state.apply_one_qubit_gate(qubit, &pauli_axis(HADAMARD_AXIS)),
            Gate::Phase { qubit, phases } => state.apply_one_qubit_phase(qubit, phases),
            Gate::TwoQubitPhase { q1, q2, phases } => state.apply_two_qubit_phase(q1, q2, phases),
        }
    }
}

/// `n̂·σ⃗` for a unit vector `n̂`; Hermitian and unitary.
pub(crate) fn pauli_axis(n: [f64; 3]) -> Matrix2 {
    Matrix2::new(
        C64::new(n[2], 0.0),
        C64::new(n[0], -n[1]),
        C64::new(n[0], n[1]),
        C64::new(-n[2], 0.0),
    )
}

pub(crate) fn rotation_matrix(axis: [f64; 3], angle: f64) -> Matrix2 {
    let (s, c) = (angle / 2.0).sin_cos();
    Matrix2::identity() * C64::new(c, 0.0) - pauli_axis(axis) * C64::new(0.0, s)
}

/// Ordered gate list realising one map step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSequence {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl GateSequence {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Self {
        Self { n_qubits, gates }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of gates `n_g` per map step.
    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        state.check_same_size(self.n_qubits)?;
        self.gates.iter().try_for_each(|g| g.apply(state))
    }
}

/// Reference gate count `3n_q² + n_q` quoted for the original decomposition.
pub fn reference_gate_count(n_qubits: usize) -> usize {
    3 * n_qubits * n_qubits + n_qubits
}

/// Quantum Fourier transform `|m⟩ → N^{-1/2} Σ_l e^{2πi ml/N} |l⟩` without the
/// final swaps: bit `j` of `l` ends up on qubit `n − 1 − j`.
fn fourier_without_swaps(n: usize) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(n * (n + 1) / 2);
    for target in (0..n).rev() {
        gates.push(Gate::Hadamard { qubit: target });
        for control in (0..target).rev() {
            let phase = PI / (1u64 << (target - control)) as f64;
            gates.push(Gate::TwoQubitPhase {
                q1: control,
                q2: target,
                phases: [0.0, 0.0, 0.0, phase],
            });
        }
    }
    gates
}

/// Diagonal gates for `e^{i c (x − N/2)²}` up to a global phase, with bit
/// `j` of `x` stored on qubit `qubit_of(j)`.
///
/// With `x = Σ a_j 2^j`:
/// `(x − N/2)² = Σ_j a_j 2^j (2^j − N) + Σ_{i<j} a_i a_j 2^{i+j+1} + N²/4`.
fn quadratic_phase(n: usize, coeff: f64, qubit_of: impl Fn(usize) -> usize) -> Vec<Gate> {
    let levels = (1u64 << n) as f64;
    let mut gates = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        let w = (1u64 << j) as f64;
        gates.push(Gate::Phase {
            qubit: qubit_of(j),
            phases: [0.0, wrap(coeff * w * (w - levels))],
        });
    }
    for j in 0..n {
        for i in 0..j {
            let w = (1u64 << (i + j + 1)) as f64;
            gates.push(Gate::TwoQubitPhase {
                q1: qubit_of(i),
                q2: qubit_of(j),
                phases: [0.0, 0.0, 0.0, wrap(coeff * w)],
            });
        }
    }
    gates
}

fn wrap(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p > PI {
        p - TAU
    } else {
        p
    }
}

/// Gate circuit for one step of the map in the momentum basis:
/// Fourier transform to θ, kick phases, inverse transform, free phases.
///
/// The transform's bit reversal is absorbed by relabelling the qubits the
/// kick phases act on, so no swap gates appear.
pub fn build_step_circuit(params: &MapParams) -> GateSequence {
    let n = params.n_qubits();
    let t = params.period();
    let qft = fourier_without_swaps(n);
    let mut gates = qft.clone();
    // k(θ−π)²/2 = (K T / 2)(l − N/2)²
    gates.extend(quadratic_phase(n, params.k_param() * t / 2.0, |j| n - 1 - j));
    gates.extend(qft.iter().rev().map(Gate::inverse));
    // −T(m − N/2)²/2
    gates.extend(quadratic_phase(n, -t / 2.0, |j| j));
    GateSequence::new(n, gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::is_unitary;

    #[test]
    fn hadamard_is_pi_rotation_up_to_phase() {
        let h = pauli_axis(HADAMARD_AXIS);
        let r = rotation_matrix(HADAMARD_AXIS, PI) * C64::new(0.0, 1.0);
        for (a, b) in h.iter().zip(r.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
        let s = FRAC_1_SQRT_2;
        assert!((h[(0, 0)].re - s).abs() < 1e-15 && (h[(1, 1)].re + s).abs() < 1e-15);
    }

    #[test]
    fn rotations_are_unitary() {
        let axis = [0.6, 0.0, 0.8];
        for angle in [0.0, 0.3, PI, 5.0] {
            assert!(is_unitary(&rotation_matrix(axis, angle), 1e-14));
        }
    }

    #[test]
    fn gate_count_is_quadratic() {
        for n in [1usize, 2, 4, 6, 8] {
            let params = MapParams::with_default_k(n).unwrap();
            assert_eq!(build_step_circuit(&params).gate_count(), 2 * n * n + 2 * n);
        }
        let count = |n| build_step_circuit(&MapParams::with_default_k(n).unwrap()).gate_count() as f64;
        for n in [4, 6, 8] {
            let ratio = count(2 * n) / count(n);
            assert!((3.5..=4.5).contains(&ratio), "n = {n}: {ratio}");
        }
    }

    #[test]
    fn quadratic_phase_matches_direct_evaluation() {
        let n = 5;
        let coeff = 0.37;
        let gates = quadratic_phase(n, coeff, |j| j);
        let levels = 1usize << n;
        let amps = vec![C64::new(1.0, 0.0); levels];
        let mut psi = StateVector::normalized(amps).unwrap();
        for g in &gates {
            g.apply(&mut psi).unwrap();
        }
        let scale = (levels as f64).sqrt();
        let reference = coeff * (levels as f64 / 2.0).powi(2);
        for (x, a) in psi.amplitudes().iter().enumerate() {
            let expected = coeff * (x as f64 - levels as f64 / 2.0).powi(2) - reference;
            let got = a * scale;
            assert!((got - C64::cis(expected)).norm() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn inverse_undoes_gate() {
        let g = Gate::Rotation { qubit: 1, axis: [0.0, 0.6, 0.8], angle: 0.7 };
        let mut psi = StateVector::normalized((0..4).map(|i| C64::new(1.0, i as f64)).collect()).unwrap();
        let before = psi.clone();
        g.apply(&mut psi).unwrap();
        g.inverse().apply(&mut psi).unwrap();
        assert!((psi.overlap(&before).unwrap() - 1.0).abs() < 1e-14);
    }
}
