use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Eigenvalues below this contribute nothing to an entropy (`0·log 0 = 0`).
pub const EIGENVALUE_CUTOFF: f64 = 1e-12;

/// Asymmetry `max |M − M†|` up to which a matrix is symmetrised before
/// diagonalisation; anything larger is rejected.
pub const HERMITIAN_REPAIR_TOLERANCE: f64 = 1e-9;

/// Returns `(M + M†)/2`, or an error when `M` is further than
/// [`HERMITIAN_REPAIR_TOLERANCE`] from Hermitian.
pub fn symmetrize_checked(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::NotHermitian(f64::INFINITY));
    }
    let mut worst = 0.0f64;
    let mut out = m.clone();
    for j in 0..n {
        for i in 0..=j {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            worst = worst.max((a - b).norm());
            let avg = (a + b) * 0.5;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    if !(worst <= HERMITIAN_REPAIR_TOLERANCE) {
        return Err(Error::NotHermitian(worst));
    }
    Ok(out)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let h = symmetrize_checked(m)?;
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    if eig.iter().any(|x| !x.is_finite()) {
        return Err(Error::NotHermitian(f64::NAN));
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `−Σ λ log₂ λ` over a probability spectrum. Eigenvalues are clipped to
/// `[0, 1]` and those below [`EIGENVALUE_CUTOFF`] are dropped.
pub fn entropy_from_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > EIGENVALUE_CUTOFF)
        .map(|l| -l * l.log2())
        .sum();
    s.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &super::DensityMatrix) -> Result<f64> {
    let eig = hermitian_eigenvalues(rho.matrix())?;
    Ok(entropy_from_spectrum(&eig).min(rho.n_qubits() as f64))
}

/// Trace norm `Tr √(M†M)` of a Hermitian matrix, i.e. `Σ |λ|`.
pub fn trace_norm(m: &DMatrix<C64>) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}
