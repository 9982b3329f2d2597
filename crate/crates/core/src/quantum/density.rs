use nalgebra::DMatrix;

use super::{hermitian_eigenvalues, scatter_table, Bipartition, StateVector};
use crate::{Error, Result, C64};

const HERMITIAN_TOLERANCE: f64 = 1e-10;
const TRACE_TOLERANCE: f64 = 1e-10;
const PSD_TOLERANCE: f64 = 1e-8;

/// Density operator on `n_qubits` qubits, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps `m` after checking Hermiticity, unit trace and positivity.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(m)?;
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "density matrix shape {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self {
            n_qubits: n.trailing_zeros() as usize,
            m,
        })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &StateVector) -> Self {
        let mut acc = ProjectorAccumulator::new(psi.n_qubits());
        acc.add(psi, 1.0).expect("matching dimensions");
        acc.into_density_matrix()
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 16 {
            return Err(Error::OutOfRange(format!("{n_qubits} qubits")));
        }
        let dim = 1usize << n_qubits;
        let m = DMatrix::<C64>::identity(dim, dim) / C64::new(dim as f64, 0.0);
        Ok(Self { n_qubits, m })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `max |ρ − ρ†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.m)
    }

    /// Checks the Hermitian, unit-trace and positive-semidefinite invariants.
    pub fn validate(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian(defect));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOLERANCE {
            return Err(Error::InvalidParameter(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues()?.first().copied().unwrap_or(0.0);
        if min < -PSD_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    fn check_parts(&self, part: &Bipartition) -> Result<()> {
        if part.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: part.n_qubits(),
            });
        }
        Ok(())
    }
}

/// Sources a reduced density matrix can be taken from.
pub trait PartialTrace {
    fn n_qubits(&self) -> usize;

    /// Traces out every qubit not in `keep_mask`.
    fn reduce_to(&self, keep_mask: u64) -> Result<DensityMatrix>;
}

fn check_keep_mask(n_qubits: usize, keep_mask: u64) -> Result<()> {
    let full = (1u64 << n_qubits) - 1;
    if keep_mask == 0 || keep_mask & !full != 0 {
        return Err(Error::InvalidBipartition {
            mask: keep_mask,
            n_qubits,
        });
    }
    Ok(())
}

impl PartialTrace for StateVector {
    fn n_qubits(&self) -> usize {
        StateVector::n_qubits(self)
    }

    fn reduce_to(&self, keep_mask: u64) -> Result<DensityMatrix> {
        let n = StateVector::n_qubits(self);
        check_keep_mask(n, keep_mask)?;
        let drop_mask = ((1u64 << n) - 1) & !keep_mask;
        // Ψ[a, b] = ψ(a ⊕ b), then ρ_A = Ψ Ψ†.
        let keep = scatter_table(keep_mask);
        let drop = scatter_table(drop_mask);
        let amps = self.amplitudes();
        let psi = DMatrix::from_fn(keep.len(), drop.len(), |a, b| amps[keep[a] | drop[b]]);
        let rho = &psi * psi.adjoint();
        DensityMatrix::from_matrix_unchecked(rho)
    }
}

impl PartialTrace for DensityMatrix {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn reduce_to(&self, keep_mask: u64) -> Result<DensityMatrix> {
        check_keep_mask(self.n_qubits, keep_mask)?;
        let drop_mask = ((1u64 << self.n_qubits) - 1) & !keep_mask;
        let keep = scatter_table(keep_mask);
        let drop = scatter_table(drop_mask);
        let rho = DMatrix::from_fn(keep.len(), keep.len(), |a, a2| {
            drop.iter()
                .map(|&b| self.m[(keep[a] | b, keep[a2] | b)])
                .sum::<C64>()
        });
        DensityMatrix::from_matrix_unchecked(rho)
    }
}

/// `ρ_A = Tr_B ρ` for the A side of `part`.
pub fn reduced_density_matrix<S: PartialTrace + ?Sized>(
    source: &S,
    part: &Bipartition,
) -> Result<DensityMatrix> {
    if part.n_qubits() != source.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: source.n_qubits(),
            found: part.n_qubits(),
        });
    }
    source.reduce_to(part.a_mask())
}

/// Transposes the B indices of `rho`:
/// `ρ^{T_B}[(a,b),(a',b')] = ρ[(a,b'),(a',b)]`.
pub fn partial_transpose(rho: &DensityMatrix, part: &Bipartition) -> Result<DMatrix<C64>> {
    rho.check_parts(part)?;
    Ok(partial_transpose_raw(&rho.m, part))
}

/// Applies the same B-transpose to a raw matrix (used for the involution
/// check, where the input need not be a valid state).
pub(crate) fn partial_transpose_raw(m: &DMatrix<C64>, part: &Bipartition) -> DMatrix<C64> {
    let a = part.a_mask() as usize;
    let b = part.b_mask() as usize;
    let n = m.nrows();
    DMatrix::from_fn(n, n, |x, y| m[((x & a) | (y & b), (y & a) | (x & b))])
}

/// `F = ⟨ψ|ρ|ψ⟩`.
pub fn fidelity(ideal: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    ideal.check_same_size(rho.n_qubits)?;
    let psi = ideal.amplitudes();
    let n = psi.len();
    let data = rho.m.as_slice();
    let mut f = C64::new(0.0, 0.0);
    for (j, col) in data.chunks_exact(n).enumerate() {
        let inner: C64 = col.iter().zip(psi).map(|(r, p)| p.conj() * r).sum();
        f += inner * psi[j];
    }
    Ok(f.re)
}

/// Running sum `Σ w_r |ψ_r⟩⟨ψ_r|`.
///
/// Partial accumulators over disjoint sets of states merge by addition, so
/// a fixed merge order gives reproducible results.
#[derive(Clone, Debug)]
pub struct ProjectorAccumulator {
    n_qubits: usize,
    sum: DMatrix<C64>,
    total_weight: f64,
    count: usize,
}

impl ProjectorAccumulator {
    pub fn new(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            sum: DMatrix::zeros(dim, dim),
            total_weight: 0.0,
            count: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `acc += weight · |ψ⟩⟨ψ|`.
    pub fn add(&mut self, psi: &StateVector, weight: f64) -> Result<()> {
        psi.check_same_size(self.n_qubits)?;
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("projector weight {weight}")));
        }
        let amps = psi.amplitudes();
        let n = amps.len();
        for (j, col) in self.sum.as_mut_slice().chunks_exact_mut(n).enumerate() {
            let c = amps[j].conj() * weight;
            for (r, a) in col.iter_mut().zip(amps) {
                *r += a * c;
            }
        }
        self.total_weight += weight;
        self.count += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &ProjectorAccumulator) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.sum += &other.sum;
        self.total_weight += other.total_weight;
        self.count += other.count;
        Ok(())
    }

    /// The accumulated sum as is.
    pub fn into_density_matrix(self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            m: self.sum,
        }
    }

    /// The accumulated sum divided by its total weight.
    pub fn normalized(&self) -> Result<DensityMatrix> {
        if self.total_weight <= 0.0 {
            return Err(Error::NoRealizations);
        }
        Ok(DensityMatrix {
            n_qubits: self.n_qubits,
            m: &self.sum / C64::new(self.total_weight, 0.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{trace_norm, von_neumann_entropy};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> StateVector {
        StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap()
    }

    fn assert_matrix_close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn product_state_reduces_to_pure_projector() {
        let psi = StateVector::basis(2, 0).unwrap();
        let part = Bipartition::new(2, 0b01).unwrap();
        let rho_a = reduced_density_matrix(&psi, &part).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_matrix_close(rho_a.matrix(), &expected, 1e-14);
    }

    #[test]
    fn bell_state_reduces_to_half_identity() {
        let part = Bipartition::new(2, 0b01).unwrap();
        let rho_a = reduced_density_matrix(&bell(), &part).unwrap();
        assert_matrix_close(rho_a.matrix(), &(DMatrix::identity(2, 2) * c(0.5)), 1e-14);
        let from_mixed = reduced_density_matrix(&DensityMatrix::pure(&bell()), &part).unwrap();
        assert_matrix_close(from_mixed.matrix(), rho_a.matrix(), 1e-14);
    }

    #[test]
    fn mismatched_partition_is_rejected() {
        let part = Bipartition::new(4, 0b0011).unwrap();
        assert!(matches!(
            reduced_density_matrix(&bell(), &part),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(partial_transpose(&DensityMatrix::pure(&bell()), &part).is_err());
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let rho = DensityMatrix::pure(&bell());
        let part = Bipartition::new(2, 0b01).unwrap();
        let pt = partial_transpose(&rho, &part).unwrap();
        let eig = hermitian_eigenvalues(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (e, x) in eig.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12);
        }
        assert!((trace_norm(&pt).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_partial_transpose_is_psd() {
        let plus = StateVector::normalized(vec![c(1.0), c(1.0), c(1.0), c(1.0)]).unwrap();
        let rho = DensityMatrix::pure(&plus);
        let part = Bipartition::new(2, 0b01).unwrap();
        let eig = hermitian_eigenvalues(&partial_transpose(&rho, &part).unwrap()).unwrap();
        assert!(eig[0] > -1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let psi = StateVector::normalized(
            (0..8).map(|i| C64::new(i as f64 - 3.0, (i * i) as f64 * 0.1)).collect(),
        )
        .unwrap();
        let rho = DensityMatrix::pure(&psi);
        let part = Bipartition::new(3, 0b101).unwrap();
        let once = partial_transpose(&rho, &part).unwrap();
        let twice = partial_transpose_raw(&once, &part);
        assert_matrix_close(&twice, rho.matrix(), 1e-15);
        assert!((once.trace() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn density_matrix_has_unit_trace_norm() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_cases() {
        let zero = StateVector::basis(2, 0).unwrap();
        let one = StateVector::basis(2, 1).unwrap();
        assert!((fidelity(&zero, &DensityMatrix::pure(&zero)).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&zero, &DensityMatrix::pure(&one)).unwrap().abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((fidelity(&bell(), &mixed).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn accumulator_cases() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();

        let mut acc = ProjectorAccumulator::new(1);
        acc.add(&zero, 0.5).unwrap();
        acc.add(&one, 0.5).unwrap();
        let rho = acc.into_density_matrix();
        rho.validate().unwrap();
        assert!((von_neumann_entropy(&rho).unwrap() - 1.0).abs() < 1e-12);

        let mut acc = ProjectorAccumulator::new(2);
        for _ in 0..7 {
            acc.add(&bell(), 1.0 / 7.0).unwrap();
        }
        let rho = acc.into_density_matrix();
        assert_matrix_close(rho.matrix(), DensityMatrix::pure(&bell()).matrix(), 1e-14);

        let mut acc = ProjectorAccumulator::new(2);
        assert!(acc.add(&zero, 1.0).is_err());
        assert!(acc.add(&bell(), 0.0).is_err());
    }

    #[test]
    fn merged_accumulators_match_sequential_sum() {
        let states: Vec<_> = (0..4).map(|i| StateVector::basis(2, i).unwrap()).collect();
        let mut whole = ProjectorAccumulator::new(2);
        let mut left = ProjectorAccumulator::new(2);
        let mut right = ProjectorAccumulator::new(2);
        for (i, s) in states.iter().enumerate() {
            whole.add(s, 0.25).unwrap();
            if i < 2 { left.add(s, 0.25).unwrap() } else { right.add(s, 0.25).unwrap() }
        }
        left.merge(&right).unwrap();
        assert_eq!(left.count(), 4);
        assert_matrix_close(left.normalized().unwrap().matrix(), whole.normalized().unwrap().matrix(), 1e-15);
    }
}
