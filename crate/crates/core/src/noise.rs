//! Unitary gate noise and the Monte-Carlo average over noise realizations.
//!
//! Rotation-type gates (Hadamards, general rotations) get their axis tilted
//! by two angles; diagonal gates get an independent extra phase on each
//! computational basis state of the qubits they touch. Every parameter is
//! drawn uniformly from `[−ε, ε]`, afresh for every gate application.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quantum::{DensityMatrix, Matrix2, ProjectorAccumulator, StateVector};
use crate::sawtooth::{build_step_circuit, pauli_axis, rotation_matrix, evolve_circuit, Gate, GateSequence, MapParams};
use crate::{Error, Result, C64};

/// Default multiplier `c` in the `c·√N` / `c·N` realization rules.
pub const REALIZATION_MULTIPLIER: f64 = 4.0;

/// Number of contiguous trajectory batches used for batch-means errors.
pub const DEFAULT_BATCHES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    epsilon: f64,
}

impl NoiseModel {
    pub const TILT_PARAMETERS: usize = 2;
    pub const ONE_QUBIT_PHASE_PARAMETERS: usize = 2;
    pub const TWO_QUBIT_PHASE_PARAMETERS: usize = 4;

    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise amplitude ε = {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Noise parameters consumed by one application of `gate`.
    pub fn parameters_for(gate: &Gate) -> usize {
        match gate {
            Gate::Rotation { .. } | Gate::Hadamard { .. } => Self::TILT_PARAMETERS,
            Gate::Phase { .. } => Self::ONE_QUBIT_PHASE_PARAMETERS,
            Gate::TwoQubitPhase { .. } => Self::TWO_QUBIT_PHASE_PARAMETERS,
        }
    }

    /// Noise parameters `n_d` per map step.
    pub fn parameters_per_step(circuit: &GateSequence) -> usize {
        circuit.gates().iter().map(Self::parameters_for).sum()
    }
}

/// Identifies one noise configuration `ε_I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub master_seed: u64,
    pub realization_index: u64,
}

impl NoiseRealization {
    pub fn new(master_seed: u64, realization_index: u64) -> Self {
        Self { master_seed, realization_index }
    }

    /// Every realization index owns its own ChaCha stream under the master
    /// seed; draws inside it follow gate application order.
    pub fn stream(&self, model: &NoiseModel) -> NoiseStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.realization_index);
        NoiseStream {
            rng,
            epsilon: model.epsilon,
            draws: 0,
        }
    }
}

/// Source of `ε_i` draws for one trajectory.
#[derive(Clone, Debug)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    epsilon: f64,
    draws: u64,
}

impl NoiseStream {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of parameters drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Uniform draw in `[−ε, ε]`.
    pub fn draw(&mut self) -> f64 {
        self.draws += 1;
        if self.epsilon == 0.0 {
            return 0.0;
        }
        self.rng.random_range(-self.epsilon..=self.epsilon)
    }

    fn draw_array<const K: usize>(&mut self) -> [f64; K] {
        std::array::from_fn(|_| self.draw())
    }

    /// Applies one freshly perturbed copy of `gate`.
    pub fn apply_perturbed(&mut self, gate: &Gate, state: &mut StateVector) -> Result<()> {
        match *gate {
            Gate::Rotation { qubit, .. } | Gate::Hadamard { qubit } => {
                let u = perturb_one_qubit_gate(gate, self.draw_array())?;
                state.apply_one_qubit_gate(qubit, &u)
            }
            Gate::Phase { qubit, phases } => {
                let d: [f64; 2] = self.draw_array();
                state.apply_one_qubit_phase(qubit, [phases[0] + d[0], phases[1] + d[1]])
            }
            Gate::TwoQubitPhase { q1, q2, phases } => {
                let d: [f64; 4] = self.draw_array();
                let p = std::array::from_fn(|i| phases[i] + d[i]);
                state.apply_two_qubit_phase(q1, q2, p)
            }
        }
    }
}

/// Orthonormal frame `(e₁, e₂)` perpendicular to the unit vector `u`:
/// `e₁` points along increasing polar angle, `e₂` along increasing azimuth.
/// On the poles `e₁ = x̂`, `e₂ = ŷ`.
fn local_frame(u: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let rho = (u[0] * u[0] + u[1] * u[1]).sqrt();
    if rho < 1e-12 {
        let s = u[2].signum();
        return ([s, 0.0, 0.0], [0.0, 1.0, 0.0]);
    }
    let (cp, sp) = (u[0] / rho, u[1] / rho);
    ([u[2] * cp, u[2] * sp, -rho], [-sp, cp, 0.0])
}

fn normalize(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidParameter("zero rotation axis".into()));
    }
    Ok(v.map(|x| x / n))
}

/// Tilts `axis` by `draw[0]` towards its polar direction `e₁`, then by
/// `draw[1]` towards its azimuthal direction `e₂`. The result is a unit
/// vector exactly `|draw[0]|` then `|draw[1]|` radians away at each stage.
pub fn tilt_axis(axis: [f64; 3], draw: [f64; 2]) -> Result<[f64; 3]> {
    let u = normalize(axis)?;
    let (e1, e2) = local_frame(u);
    let (s1, c1) = draw[0].sin_cos();
    let (s2, c2) = draw[1].sin_cos();
    Ok(std::array::from_fn(|i| c2 * (c1 * u[i] + s1 * e1[i]) + s2 * e2[i]))
}

/// Rotation-type gate with its axis tilted by `draw`; the rotation angle is
/// unchanged.
pub fn perturb_one_qubit_gate(gate: &Gate, draw: [f64; 2]) -> Result<Matrix2> {
    match *gate {
        Gate::Hadamard { .. } => {
            let (axis, _) = gate.rotation().expect("hadamard is a rotation");
            Ok(pauli_axis(tilt_axis(axis, draw)?))
        }
        Gate::Rotation { axis, angle, .. } => Ok(rotation_matrix(tilt_axis(axis, draw)?, angle)),
        _ => Err(Error::WrongGateKind(gate.kind())),
    }
}

/// Diagonal of a phase gate with `draws[j]` added to the phase of basis
/// state `j` of the gate's qubits.
pub fn perturb_phase_gate(gate: &Gate, draws: &[f64]) -> Result<Vec<C64>> {
    let nominal: &[f64] = match gate {
        Gate::Phase { phases, .. } => phases,
        Gate::TwoQubitPhase { phases, .. } => phases,
        _ => return Err(Error::WrongGateKind(gate.kind())),
    };
    if draws.len() != nominal.len() {
        return Err(Error::InvalidParameter(format!(
            "{} gate takes {} phase draws, got {}",
            gate.kind(),
            nominal.len(),
            draws.len()
        )));
    }
    Ok(nominal
        .iter()
        .zip(draws)
        .map(|(p, d)| C64::cis(p + d))
        .collect())
}

/// Which distillable-entanglement bound a realization count is meant for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundKind {
    Lower,
    Upper,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
        }
    }
}

/// `⌈c√N⌉` for the lower bound, `⌈cN⌉` for the upper bound, with `c = 4`.
pub fn recommend_realizations(n_qubits: usize, kind: BoundKind) -> Result<usize> {
    if n_qubits < 2 {
        return Err(Error::OutOfRange(format!("n_q = {n_qubits}")));
    }
    let levels = (1u64 << n_qubits) as f64;
    let base = match kind {
        BoundKind::Lower => levels.sqrt(),
        BoundKind::Upper => levels,
    };
    Ok((REALIZATION_MULTIPLIER * base).ceil() as usize)
}

/// One contiguous block of trajectories.
#[derive(Clone, Debug)]
pub struct TrajectoryBatch {
    pub accumulator: ProjectorAccumulator,
    pub fidelities: Vec<f64>,
}

/// Outcome of [`run_trajectories`].
#[derive(Clone, Debug)]
pub struct TrajectoryEnsemble {
    pub ideal: StateVector,
    pub rho: DensityMatrix,
    pub batches: Vec<TrajectoryBatch>,
    pub epsilon: f64,
    pub steps: usize,
    pub gate_count: usize,
}

impl TrajectoryEnsemble {
    pub fn n_realizations(&self) -> usize {
        self.batches.iter().map(|b| b.fidelities.len()).sum()
    }

    /// Per-trajectory `|⟨ψ_t|ψ_{ε,t}⟩|²`, in realization order.
    pub fn fidelities(&self) -> impl Iterator<Item = f64> + '_ {
        self.batches.iter().flat_map(|b| b.fidelities.iter().copied())
    }

    /// Mean fidelity, equal to `⟨ψ_t|ρ|ψ_t⟩`.
    pub fn mean_fidelity(&self) -> f64 {
        self.fidelities().sum::<f64>() / self.n_realizations() as f64
    }

    /// Normalised density matrix of each batch.
    pub fn batch_density_matrices(&self) -> Result<Vec<DensityMatrix>> {
        self.batches.iter().map(|b| b.accumulator.normalized()).collect()
    }
}

/// Settings for [`run_trajectories`].
#[derive(Clone, Debug)]
pub struct TrajectoryRun<'a> {
    pub params: MapParams,
    pub steps: usize,
    pub epsilon: f64,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub initial: &'a StateVector,
    pub batches: usize,
}

impl<'a> TrajectoryRun<'a> {
    pub fn new(params: MapParams, initial: &'a StateVector) -> Self {
        Self {
            params,
            steps: 30,
            epsilon: 0.0,
            n_realizations: 1,
            master_seed: 0,
            initial,
            batches: DEFAULT_BATCHES,
        }
    }
}

/// Noise-averaged state `ρ = (1/𝒩) Σ_r |ψ_{ε_I(r),t}⟩⟨ψ_{ε_I(r),t}|`.
///
/// Realizations are split into at most `run.batches` contiguous blocks.
/// Blocks run in parallel, each accumulating in realization order, and are
/// merged in block order, so the result does not depend on the thread pool.
pub fn run_trajectories(run: &TrajectoryRun<'_>) -> Result<TrajectoryEnsemble> {
    if run.n_realizations == 0 {
        return Err(Error::NoRealizations);
    }
    let n = run.params.n_qubits();
    if run.initial.n_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: run.initial.n_qubits() });
    }
    let model = NoiseModel::new(run.epsilon)?;
    let circuit = build_step_circuit(&run.params);
    let ideal = evolve_circuit(run.initial, &circuit, run.steps, None)?;
    let weight = 1.0 / run.n_realizations as f64;

    let n_batches = run.batches.clamp(1, run.n_realizations);
    let bounds: Vec<(usize, usize)> = (0..n_batches)
        .map(|b| (b * run.n_realizations / n_batches, (b + 1) * run.n_realizations / n_batches))
        .collect();

    let batches = bounds
        .into_par_iter()
        .map(|(start, end)| -> Result<TrajectoryBatch> {
            let mut accumulator = ProjectorAccumulator::new(n);
            let mut fidelities = Vec::with_capacity(end - start);
            for r in start..end {
                let psi = if model.epsilon() == 0.0 {
                    ideal.clone()
                } else {
                    let mut stream = NoiseRealization::new(run.master_seed, r as u64).stream(&model);
                    evolve_circuit(run.initial, &circuit, run.steps, Some(&mut stream))?
                };
                fidelities.push(ideal.overlap(&psi)?);
                accumulator.add(&psi, weight)?;
            }
            Ok(TrajectoryBatch { accumulator, fidelities })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = ProjectorAccumulator::new(n);
    for b in &batches {
        total.merge(&b.accumulator)?;
    }
    Ok(TrajectoryEnsemble {
        ideal,
        rho: total.into_density_matrix(),
        batches,
        epsilon: run.epsilon,
        steps: run.steps,
        gate_count: circuit.gate_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::is_unitary;
    use crate::sawtooth::momentum_index;
    use std::f64::consts::PI;

    fn operator_distance(a: &Matrix2, b: &Matrix2) -> f64 {
        (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn zero_draw_gives_nominal_gate() {
        let h = Gate::Hadamard { qubit: 0 };
        let u = perturb_one_qubit_gate(&h, [0.0, 0.0]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let nominal = Matrix2::new(C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0));
        assert!(operator_distance(&u, &nominal) < 1e-15);

        let r = Gate::Rotation { qubit: 0, axis: [0.0, 0.0, 1.0], angle: 0.8 };
        let mut psi = StateVector::basis(1, 1).unwrap();
        let mut reference = psi.clone();
        psi.apply_one_qubit_gate(0, &perturb_one_qubit_gate(&r, [0.0, 0.0]).unwrap()).unwrap();
        r.apply(&mut reference).unwrap();
        assert!((psi.inner(&reference).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tilted_gates_stay_unitary() {
        let gates = [
            Gate::Hadamard { qubit: 0 },
            Gate::Rotation { qubit: 0, axis: [0.0, 0.0, 1.0], angle: 1.1 },
            Gate::Rotation { qubit: 0, axis: [0.3, -0.4, 0.5], angle: PI },
        ];
        let draws = [[0.01, -0.02], [0.5, 0.5], [-1.0, 0.3], [1e-6, 0.0]];
        for g in &gates {
            for d in draws {
                assert!(is_unitary(&perturb_one_qubit_gate(g, d).unwrap(), 1e-12));
            }
        }
    }

    #[test]
    fn tilt_moves_axis_by_the_drawn_angle() {
        let axis = [std::f64::consts::FRAC_1_SQRT_2, 0.0, std::f64::consts::FRAC_1_SQRT_2];
        for (d, expected) in [([0.01, 0.0], 0.01), ([0.0, -0.02], 0.02)] {
            let t = tilt_axis(axis, d).unwrap();
            let cos = t.iter().zip(axis).map(|(a, b)| a * b).sum::<f64>();
            assert!((cos.acos() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbation_is_linear_in_epsilon() {
        // ‖U(ε·d) − U(0)‖ / ε stays constant across three decades.
        let h = Gate::Hadamard { qubit: 0 };
        let nominal = perturb_one_qubit_gate(&h, [0.0, 0.0]).unwrap();
        for dir in [[1.0, 0.0], [0.6, -0.8], [-0.3, 0.2]] {
            let ratios: Vec<f64> = [1e-4, 1e-3, 1e-2]
                .iter()
                .map(|&eps| {
                    let u = perturb_one_qubit_gate(&h, [dir[0] * eps, dir[1] * eps]).unwrap();
                    operator_distance(&u, &nominal) / eps
                })
                .collect();
            assert!(ratios[0] > 0.1);
            for r in &ratios {
                assert!((r / ratios[0] - 1.0).abs() < 0.01, "{ratios:?}");
            }
        }
    }

    #[test]
    fn phase_perturbation_rules() {
        let cp = Gate::TwoQubitPhase { q1: 0, q2: 1, phases: [0.0, 0.0, 0.0, PI / 2.0] };
        let nominal = perturb_phase_gate(&cp, &[0.0; 4]).unwrap();
        assert!((nominal[3] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((nominal[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(perturb_phase_gate(&cp, &[0.0; 2]).is_err());
        assert_eq!(NoiseModel::parameters_for(&cp), 4);

        let a = perturb_phase_gate(&cp, &[0.01, -0.02, 0.003, 0.0]).unwrap();
        let b = perturb_phase_gate(&cp, &[-0.01, 0.005, 0.0, 0.007]).unwrap();
        for d in a.iter().chain(&b) {
            assert!((d.norm() - 1.0).abs() < 1e-15);
        }
        // Composition of diagonal gates is the elementwise product.
        let product: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let combined = perturb_phase_gate(&cp, &[0.0, -0.015, 0.003, PI / 2.0 + 0.007]).unwrap();
        for (p, c) in product.iter().zip(&combined) {
            assert!((p - c).norm() < 1e-14);
        }

        let h = Gate::Hadamard { qubit: 0 };
        assert!(matches!(perturb_phase_gate(&h, &[0.0, 0.0]), Err(Error::WrongGateKind(_))));
        let p = Gate::Phase { qubit: 0, phases: [0.0, 1.0] };
        assert!(matches!(perturb_one_qubit_gate(&p, [0.0, 0.0]), Err(Error::WrongGateKind(_))));
    }

    #[test]
    fn streams_are_deterministic_and_bounded() {
        let model = NoiseModel::new(0.05).unwrap();
        let draws = |idx| {
            let mut s = NoiseRealization::new(42, idx).stream(&model);
            (0..1000).map(|_| s.draw()).collect::<Vec<_>>()
        };
        let a = draws(3);
        assert_eq!(a, draws(3));
        assert_ne!(a, draws(4));
        assert!(a.iter().all(|x| x.abs() <= 0.05));
    }

    #[test]
    fn realization_recommendations() {
        assert_eq!(recommend_realizations(8, BoundKind::Lower).unwrap(), 64);
        assert_eq!(recommend_realizations(8, BoundKind::Upper).unwrap(), 1024);
        for kind in [BoundKind::Lower, BoundKind::Upper] {
            let counts: Vec<_> = (2..=12).map(|n| recommend_realizations(n, kind).unwrap()).collect();
            assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(recommend_realizations(1, BoundKind::Lower).is_err());
    }

    fn start(params: &MapParams) -> StateVector {
        StateVector::basis(params.n_qubits(), momentum_index(params, 0).unwrap()).unwrap()
    }

    #[test]
    fn noiseless_trajectories_give_the_pure_state() {
        let params = MapParams::with_default_k(4).unwrap();
        let psi0 = start(&params);
        let mut run = TrajectoryRun::new(params, &psi0);
        run.n_realizations = 5;
        run.steps = 10;
        let ens = run_trajectories(&run).unwrap();
        assert!((ens.mean_fidelity() - 1.0).abs() < 1e-12);
        let pure = DensityMatrix::pure(&ens.ideal);
        for (a, b) in ens.rho.matrix().iter().zip(pure.matrix().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_steps_ignore_noise() {
        let params = MapParams::with_default_k(3).unwrap();
        let psi0 = start(&params);
        let mut run = TrajectoryRun::new(params, &psi0);
        run.steps = 0;
        run.epsilon = 0.3;
        run.n_realizations = 4;
        let ens = run_trajectories(&run).unwrap();
        let pure = DensityMatrix::pure(&psi0);
        for (a, b) in ens.rho.matrix().iter().zip(pure.matrix().iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn noisy_ensemble_is_reproducible_and_valid() {
        let params = MapParams::with_default_k(4).unwrap();
        let psi0 = start(&params);
        let mut run = TrajectoryRun::new(params, &psi0);
        run.epsilon = 0.05;
        run.n_realizations = 20;
        run.master_seed = 9;
        let a = run_trajectories(&run).unwrap();
        let b = run_trajectories(&run).unwrap();
        assert_eq!(a.rho, b.rho);
        a.rho.validate().unwrap();
        assert!(a.mean_fidelity() < 1.0);
        let f = crate::quantum::fidelity(&a.ideal, &a.rho).unwrap();
        assert!((f - a.mean_fidelity()).abs() < 1e-12);
        assert_eq!(a.n_realizations(), 20);
        assert_eq!(a.batches.len(), DEFAULT_BATCHES);
    }

    #[test]
    fn zero_realizations_is_an_error() {
        let params = MapParams::with_default_k(2).unwrap();
        let psi0 = start(&params);
        let mut run = TrajectoryRun::new(params, &psi0);
        run.n_realizations = 0;
        assert_eq!(run_trajectories(&run).unwrap_err(), Error::NoRealizations);
    }
}
