use crate::{Error, Result, C64};

/// 2×2 complex matrix acting on one qubit.
pub type Matrix2 = nalgebra::Matrix2<C64>;

const NORM_TOLERANCE: f64 = 1e-10;
const UNITARY_TOLERANCE: f64 = 1e-10;

/// Pure state of `n_qubits` qubits as a dense amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || index >= dim {
            return Err(Error::OutOfRange(format!(
                "basis index {index} for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps an amplitude vector that must already have unit norm.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        let norm = norm_sqr(&amps);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        let norm = norm_sqr(&amps);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        let scale = norm.sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= scale);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_size(other.n_qubits)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    /// Applies `gate` to `qubit`. Unitarity is only checked in debug builds.
    pub fn apply_one_qubit_gate(&mut self, qubit: usize, gate: &Matrix2) -> Result<()> {
        self.check_qubit(qubit)?;
        if cfg!(debug_assertions) {
            check_unitary(gate)?;
        }
        let (g00, g01, g10, g11) = (gate[(0, 0)], gate[(0, 1)], gate[(1, 0)], gate[(1, 1)]);
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = g00 * x0 + g01 * x1;
                *a1 = g10 * x0 + g11 * x1;
            }
        }
        Ok(())
    }

    /// Multiplies the amplitude of every basis state by `e^{i phases[b]}`,
    /// where `b` is the bit of `qubit`.
    pub fn apply_one_qubit_phase(&mut self, qubit: usize, phases: [f64; 2]) -> Result<()> {
        self.check_qubit(qubit)?;
        let f = phases.map(C64::cis);
        let stride = 1usize << qubit;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.iter_mut().for_each(|a| *a *= f[0]);
            hi.iter_mut().for_each(|a| *a *= f[1]);
        }
        Ok(())
    }

    /// Diagonal two-qubit gate: basis states with bits `(b1, b2)` on
    /// `(q1, q2)` pick up `e^{i phases[2·b1 + b2]}`.
    pub fn apply_two_qubit_phase(&mut self, q1: usize, q2: usize, phases: [f64; 4]) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::RepeatedQubit(q1));
        }
        let f = phases.map(C64::cis);
        let skip_identity = phases.iter().all(|&p| p == 0.0);
        if skip_identity {
            return Ok(());
        }
        for (x, a) in self.amps.iter_mut().enumerate() {
            let b1 = (x >> q1) & 1;
            let b2 = (x >> q2) & 1;
            *a *= f[(b1 << 1) | b2];
        }
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_size(&self, n_qubits: usize) -> Result<()> {
        if n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: n_qubits,
            });
        }
        Ok(())
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "amplitude vector length {len} is not a power of two ≥ 2"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Largest entry of `|U†U − I|`.
fn unitarity_defect(gate: &Matrix2) -> f64 {
    let prod = gate.adjoint() * gate;
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn is_unitary(gate: &Matrix2, tol: f64) -> bool {
    unitarity_defect(gate) <= tol
}

fn check_unitary(gate: &Matrix2) -> Result<()> {
    let defect = unitarity_defect(gate);
    if defect > UNITARY_TOLERANCE {
        return Err(Error::NonUnitary(defect));
    }
    Ok(())
}
