//! Dense complex linear algebra for pure states and density matrices.
//!
//! Qubit `j` is bit `j` of the computational-basis index, so qubit 0 is the
//! least significant bit. Every mask in this module follows that convention.

mod bipartition;
mod density;
mod spectral;
mod state;

pub use bipartition::Bipartition;
pub use density::{
    fidelity, partial_transpose, reduced_density_matrix, DensityMatrix, PartialTrace,
    ProjectorAccumulator,
};
pub(crate) use density::partial_transpose_raw;
pub use spectral::{
    hermitian_eigenvalues, symmetrize_checked, trace_norm, von_neumann_entropy,
    entropy_from_spectrum, EIGENVALUE_CUTOFF, HERMITIAN_REPAIR_TOLERANCE,
};
pub use state::{is_unitary, Matrix2, StateVector};

/// For every basis index `x < 2^n_qubits`, the position of `x` inside the
/// subsystem selected by `mask` (the bits of `x` on `mask` packed together).
#[cfg(test)]
pub(crate) fn gather_table(mask: u64, n_qubits: usize) -> Vec<usize> {
    (0..1usize << n_qubits)
        .map(|x| gather_bits(x as u64, mask) as usize)
        .collect()
}

/// Inverse of [`gather_table`]: the basis index whose only set bits on
/// `mask` are the packed bits of `a`.
pub(crate) fn scatter_table(mask: u64) -> Vec<usize> {
    let k = mask.count_ones();
    (0..1u64 << k).map(|a| scatter_bits(a, mask) as usize).collect()
}

#[cfg(test)]
fn gather_bits(x: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut bit = 0;
    let mut m = mask;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if x & low != 0 {
            out |= 1 << bit;
        }
        bit += 1;
        m ^= low;
    }
    out
}

fn scatter_bits(a: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut bit = 0;
    let mut m = mask;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if a & (1 << bit) != 0 {
            out |= low;
        }
        bit += 1;
        m ^= low;
    }
    out
}
