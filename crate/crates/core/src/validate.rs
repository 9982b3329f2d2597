//! Self-contained property suite over the whole simulator.
//!
//! Every check runs on small systems with fixed seeds and finishes in a few
//! seconds; [`run_all`] collects the outcomes instead of stopping at the
//! first failure.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::entanglement::{
    balanced_bipartition_count, enumerate_balanced_bipartitions, fano_entropy_bound,
    haar_random_state, mixed_spectrum,
};
use crate::noise::{run_trajectories, TrajectoryEnsemble, TrajectoryRun};
use crate::quantum::{
    fidelity, partial_transpose, partial_transpose_raw, von_neumann_entropy, Bipartition,
    DensityMatrix, PartialTrace,
};
use crate::sawtooth::{build_step_circuit, evolve_circuit, evolve_exact, MapParams};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
    pub seconds: f64,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Outcome of one check: `Ok((passed, detail))`, or an error that counts as
/// a failure.
type Check = fn(u64) -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("state-norm", state_norm),
    ("density-matrix-invariants", density_invariants),
    ("reduced-state-invariants", reduced_invariants),
    ("pure-entropy-symmetry", entropy_symmetry),
    ("partial-transpose-involution", transpose_involution),
    ("bound-ordering", bound_ordering),
    ("bipartition-counts", bipartition_counts),
    ("seeded-determinism", determinism),
    ("oracle-equivalence", oracle_equivalence),
    ("fano-bound", fano_bound),
    ("fidelity-consistency", fidelity_consistency),
];

/// Runs every check with the given master seed.
pub fn run_all(seed: u64) -> ValidationReport {
    let start = Instant::now();
    let checks = CHECKS
        .iter()
        .map(|(name, check)| {
            let (passed, detail) = match check(seed) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome { name: (*name).to_string(), passed, detail }
        })
        .collect();
    ValidationReport { checks, seconds: start.elapsed().as_secs_f64() }
}

fn noisy_ensemble(n: usize, epsilon: f64, seed: u64) -> Result<TrajectoryEnsemble> {
    let initial = haar_random_state(n, seed)?;
    let run = TrajectoryRun {
        steps: 5,
        epsilon,
        n_realizations: 24,
        master_seed: seed,
        ..TrajectoryRun::new(MapParams::with_default_k(n)?, &initial)
    };
    run_trajectories(&run)
}

fn state_norm(seed: u64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let params = MapParams::with_default_k(n)?;
        let psi = haar_random_state(n, seed ^ n as u64)?;
        let mut stream = crate::noise::NoiseRealization::new(seed, n as u64)
            .stream(&crate::noise::NoiseModel::new(0.05)?);
        let out = evolve_circuit(&psi, &build_step_circuit(&params), 20, Some(&mut stream))?;
        worst = worst.max((out.norm_sqr() - 1.0).abs());
        worst = worst.max((evolve_exact(&psi, &params, 20)?.norm_sqr() - 1.0).abs());
    }
    Ok((worst < 1e-12, format!("max |‖ψ‖² − 1| = {worst:.2e}")))
}

fn density_invariants(seed: u64) -> Result<(bool, String)> {
    for n in [2, 4, 6] {
        let ens = noisy_ensemble(n, 0.05, seed)?;
        ens.rho.validate()?;
        for rho in ens.batch_density_matrices()? {
            rho.validate()?;
        }
    }
    Ok((true, "Hermitian, unit trace and positive for n_q = 2, 4, 6".into()))
}

fn reduced_invariants(seed: u64) -> Result<(bool, String)> {
    let ens = noisy_ensemble(6, 0.05, seed)?;
    let psi = haar_random_state(6, seed)?;
    for mask in 1..(1u64 << 6) - 1 {
        ens.rho.reduce_to(mask)?.validate()?;
        psi.reduce_to(mask)?.validate()?;
    }
    Ok((true, "all 62 proper reductions valid".into()))
}

fn entropy_symmetry(seed: u64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        let psi = haar_random_state(n, seed.wrapping_add(n as u64))?;
        let full = (1u64 << n) - 1;
        for mask in (1..full).step_by(3) {
            let a = von_neumann_entropy(&psi.reduce_to(mask)?)?;
            let b = von_neumann_entropy(&psi.reduce_to(full & !mask)?)?;
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst < 1e-9, format!("max |S(ρ_A) − S(ρ_B)| = {worst:.2e}")))
}

fn transpose_involution(seed: u64) -> Result<(bool, String)> {
    let ens = noisy_ensemble(4, 0.05, seed)?;
    let mut worst: f64 = 0.0;
    for mask in 0..7u64 {
        let part = Bipartition::new(4, mask * 2 + 1)?;
        let once = partial_transpose(&ens.rho, &part)?;
        let twice = partial_transpose_raw(&once, &part);
        worst = worst.max((twice - ens.rho.matrix()).camax());
        worst = worst.max((once.trace() - ens.rho.trace()).norm());
        worst = worst.max((&once - once.adjoint()).camax());
    }
    Ok((worst < 1e-14, format!("max deviation {worst:.2e}")))
}

fn bound_ordering(seed: u64) -> Result<(bool, String)> {
    let mut violations = 0;
    let mut total = 0;
    for (n, eps) in [(2, 0.05), (4, 0.02), (4, 0.1), (6, 0.03)] {
        let s = mixed_spectrum(&noisy_ensemble(n, eps, seed)?.rho)?;
        for (lo, up) in s.lower.iter().zip(&s.upper) {
            total += 1;
            if lo.value > up.value + 1e-12 || lo.value < 0.0 || up.value < 0.0 {
                violations += 1;
            }
        }
    }
    Ok((violations == 0, format!("{violations} of {total} bipartitions out of order")))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn bipartition_counts(_seed: u64) -> Result<(bool, String)> {
    for n in (2..=12).step_by(2) {
        let parts = enumerate_balanced_bipartitions(n)?;
        let expected = binomial(n, n / 2) / 2;
        let distinct: std::collections::BTreeSet<u64> = parts.iter().map(|p| p.a_mask()).collect();
        let shaped = parts.iter().all(|p| p.is_balanced() && p.a_mask() & 1 == 1);
        if parts.len() != expected
            || balanced_bipartition_count(n) != expected
            || distinct.len() != expected
            || !shaped
        {
            return Ok((false, format!("n_q = {n}: {} bipartitions, expected {expected}", parts.len())));
        }
    }
    Ok((true, "C(n, n/2)/2 for n_q = 2..12".into()))
}

fn determinism(seed: u64) -> Result<(bool, String)> {
    let a = noisy_ensemble(4, 0.03, seed)?;
    let b = noisy_ensemble(4, 0.03, seed)?;
    let c = noisy_ensemble(4, 0.03, seed.wrapping_add(1))?;
    let same = a.rho == b.rho && a.fidelities().eq(b.fidelities());
    let differs = a.rho != c.rho;
    let haar = haar_random_state(5, seed)? == haar_random_state(5, seed)?;
    Ok((
        same && differs && haar,
        format!("repeat identical: {same}, other seed differs: {differs}, Haar repeatable: {haar}"),
    ))
}

fn oracle_equivalence(seed: u64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        let params = MapParams::with_default_k(n)?;
        let psi = haar_random_state(n, seed.wrapping_mul(31).wrapping_add(n as u64))?;
        let exact = evolve_exact(&psi, &params, 30)?;
        let gates = evolve_circuit(&psi, &build_step_circuit(&params), 30, None)?;
        worst = worst.max(1.0 - exact.overlap(&gates)?);
    }
    Ok((worst < 1e-9, format!("max 1 − |⟨ψ_exact|ψ_circuit⟩|² = {worst:.2e}")))
}

fn fano_bound(seed: u64) -> Result<(bool, String)> {
    let mut worst = f64::NEG_INFINITY;
    for (n, eps) in [(2, 0.1), (4, 0.01), (4, 0.05), (6, 0.02)] {
        let ens = noisy_ensemble(n, eps, seed)?;
        let s = von_neumann_entropy(&ens.rho)?;
        worst = worst.max(s - fano_entropy_bound(ens.mean_fidelity(), n)?);
    }
    Ok((worst <= 1e-9, format!("max S(ρ) − bound = {worst:.3e}")))
}

fn fidelity_consistency(seed: u64) -> Result<(bool, String)> {
    let ens = noisy_ensemble(5, 0.04, seed)?;
    let direct = fidelity(&ens.ideal, &ens.rho)?;
    let pure = fidelity(&ens.ideal, &DensityMatrix::pure(&ens.ideal))?;
    let dev = (direct - ens.mean_fidelity()).abs().max((pure - 1.0).abs());
    Ok((dev < 1e-12, format!("|⟨ψ|ρ|ψ⟩ − mean F| = {dev:.2e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let report = run_all(0);
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert_eq!(report.checks.len(), CHECKS.len());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(4, 2), 6);
    }
}
