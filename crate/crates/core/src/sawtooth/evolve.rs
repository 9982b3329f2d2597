use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{GateSequence, MapParams};
use crate::noise::NoiseStream;
use crate::quantum::StateVector;
use crate::{Error, Result, C64};

/// FFT-based evolution: kick diagonal in θ, free rotation diagonal in `n`.
pub struct SplitOperator {
    params: MapParams,
    to_theta: Arc<dyn Fft<f64>>,
    to_momentum: Arc<dyn Fft<f64>>,
    kick: Vec<C64>,
    free: Vec<C64>,
    scratch: Vec<C64>,
}

impl SplitOperator {
    pub fn new(params: MapParams) -> Self {
        let levels = params.levels();
        let mut planner = FftPlanner::new();
        let to_theta = planner.plan_fft_inverse(levels);
        let to_momentum = planner.plan_fft_forward(levels);
        let scratch_len = to_theta
            .get_inplace_scratch_len()
            .max(to_momentum.get_inplace_scratch_len());
        let half = (levels / 2) as i64;
        let kick = (0..levels)
            .map(|l| C64::cis(params.theta_phase(l).expect("l < N")))
            .collect();
        let free = (0..levels as i64)
            .map(|m| C64::cis(params.momentum_phase(m - half).expect("n in range")))
            .collect();
        Self {
            params,
            to_theta,
            to_momentum,
            kick,
            free,
            scratch: vec![C64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    /// One application of the map.
    pub fn step(&mut self, state: &mut StateVector) -> Result<()> {
        state.check_same_size(self.params.n_qubits())?;
        let scale = (self.params.levels() as f64).sqrt().recip();
        let amps = state.amplitudes_mut();
        self.to_theta.process_with_scratch(amps, &mut self.scratch);
        for (a, k) in amps.iter_mut().zip(&self.kick) {
            *a *= k * scale;
        }
        self.to_momentum.process_with_scratch(amps, &mut self.scratch);
        for (a, f) in amps.iter_mut().zip(&self.free) {
            *a *= f * scale;
        }
        Ok(())
    }
}

/// Applies the map `steps` times with the split-operator method.
pub fn evolve_exact(state: &StateVector, params: &MapParams, steps: usize) -> Result<StateVector> {
    let mut out = state.clone();
    if steps == 0 {
        state.check_same_size(params.n_qubits())?;
        return Ok(out);
    }
    let mut op = SplitOperator::new(*params);
    for _ in 0..steps {
        op.step(&mut out)?;
    }
    Ok(out)
}

/// Applies `circuit` `steps` times. With a noise stream every gate
/// application is replaced by a freshly perturbed copy.
pub fn evolve_circuit(
    state: &StateVector,
    circuit: &GateSequence,
    steps: usize,
    mut noise: Option<&mut NoiseStream>,
) -> Result<StateVector> {
    if circuit.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            found: state.n_qubits(),
        });
    }
    let mut out = state.clone();
    for _ in 0..steps {
        match noise.as_deref_mut() {
            Some(stream) => {
                for gate in circuit.gates() {
                    stream.apply_perturbed(gate, &mut out)?;
                }
            }
            None => circuit.apply(&mut out)?,
        }
    }
    Ok(out)
}
