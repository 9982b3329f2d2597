use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::quantum::StateVector;
use crate::{Error, Result, C64};

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalised.
pub fn haar_random_state(n_qubits: usize, seed: u64) -> Result<StateVector> {
    if !(1..=24).contains(&n_qubits) {
        return Err(Error::OutOfRange(format!("n_q = {n_qubits}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..1usize << n_qubits)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect();
    StateVector::normalized(amps)
}
