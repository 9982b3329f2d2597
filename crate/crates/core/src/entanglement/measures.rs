use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{enumerate_balanced_bipartitions, EntanglementSample, EntanglementStats};
use crate::quantum::{
    entropy_from_spectrum, partial_transpose, reduced_density_matrix, trace_norm,
    von_neumann_entropy, Bipartition, DensityMatrix, PartialTrace, StateVector,
};
use crate::Result;

/// `S(ρ_A)` of a pure state in bits, computed on the smaller side.
pub fn pure_entropy(state: &StateVector, part: &Bipartition) -> Result<f64> {
    let keep = if part.a_size() <= part.b_size() { part.a_mask() } else { part.b_mask() };
    if part.n_qubits() != state.n_qubits() {
        // Let the shared helper produce the error.
        reduced_density_matrix(state, part)?;
    }
    let rho = state.reduce_to(keep)?;
    let s = entropy_from_spectrum(&rho.eigenvalues()?);
    Ok(s.min(part.a_size().min(part.b_size()) as f64))
}

/// Entanglement entropy of every balanced bipartition, in mask order.
pub fn pure_spectrum(state: &StateVector) -> Result<Vec<EntanglementSample>> {
    enumerate_balanced_bipartitions(state.n_qubits())?
        .into_par_iter()
        .map(|bipartition| {
            Ok(EntanglementSample {
                bipartition,
                value: pure_entropy(state, &bipartition)?,
            })
        })
        .collect()
}

/// Bounds on the distillable entanglement of one bipartition, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillableBounds {
    /// `max{S(ρ_A) − S(ρ), 0}`.
    pub lower: f64,
    /// `log₂ ‖ρ^{T_B}‖₁`, the logarithmic negativity.
    pub upper: f64,
}

fn bounds_given_entropy(rho: &DensityMatrix, part: &Bipartition, total_entropy: f64) -> Result<DistillableBounds> {
    let rho_a = reduced_density_matrix(rho, part)?;
    let lower = (von_neumann_entropy(&rho_a)? - total_entropy).max(0.0);
    let upper = trace_norm(&partial_transpose(rho, part)?)?.log2().max(0.0);
    Ok(DistillableBounds { lower, upper })
}

pub fn distillable_bounds(rho: &DensityMatrix, part: &Bipartition) -> Result<DistillableBounds> {
    let s = von_neumann_entropy(rho)?;
    bounds_given_entropy(rho, part, s)
}

/// Both bound families over all balanced bipartitions of a mixed state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedSpectrum {
    pub total_entropy: f64,
    pub lower: Vec<EntanglementSample>,
    pub upper: Vec<EntanglementSample>,
    pub lower_stats: EntanglementStats,
    pub upper_stats: EntanglementStats,
}

pub fn mixed_spectrum(rho: &DensityMatrix) -> Result<MixedSpectrum> {
    let parts = enumerate_balanced_bipartitions(rho.n_qubits())?;
    let total_entropy = von_neumann_entropy(rho)?;
    let bounds = parts
        .par_iter()
        .map(|p| bounds_given_entropy(rho, p, total_entropy))
        .collect::<Result<Vec<_>>>()?;
    let lower: Vec<_> = parts
        .iter()
        .zip(&bounds)
        .map(|(p, b)| EntanglementSample { bipartition: *p, value: b.lower })
        .collect();
    let upper: Vec<_> = parts
        .iter()
        .zip(&bounds)
        .map(|(p, b)| EntanglementSample { bipartition: *p, value: b.upper })
        .collect();
    Ok(MixedSpectrum {
        total_entropy,
        lower_stats: super::stats(&lower)?,
        upper_stats: super::stats(&upper)?,
        lower,
        upper,
    })
}
