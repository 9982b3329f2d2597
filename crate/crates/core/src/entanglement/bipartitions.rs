use crate::quantum::Bipartition;
use crate::{Error, Result};

/// All balanced bipartitions of `n_qubits` in canonical form (qubit 0 in A),
/// ordered by increasing A mask.
pub fn enumerate_balanced_bipartitions(n_qubits: usize) -> Result<Vec<Bipartition>> {
    if n_qubits % 2 != 0 {
        return Err(Error::OddQubitCount(n_qubits));
    }
    if !(2..=30).contains(&n_qubits) {
        return Err(Error::OutOfRange(format!("n_q = {n_qubits}")));
    }
    let half = (n_qubits / 2) as u32;
    (1u64..1 << n_qubits)
        .step_by(2)
        .filter(|m| m.count_ones() == half)
        .map(|m| Bipartition::new(n_qubits, m))
        .collect()
}

/// `C(n, n/2) / 2`.
pub fn balanced_bipartition_count(n_qubits: usize) -> usize {
    let k = n_qubits / 2;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n_qubits - i) as u128 / (i + 1) as u128;
    }
    (c / 2) as usize
}
