use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Split of `n_qubits` qubits into subsystems A and B.
///
/// `a_mask` holds the qubits of A. The canonical representative of the
/// unordered pair {A, B} is the one with qubit 0 in A.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bipartition {
    n_qubits: usize,
    a_mask: u64,
}

impl Bipartition {
    /// Builds a canonical bipartition; `a_mask` must contain qubit 0.
    pub fn new(n_qubits: usize, a_mask: u64) -> Result<Self> {
        let full = full_mask(n_qubits)?;
        if a_mask == 0 || a_mask & !full != 0 || a_mask == full || a_mask & 1 == 0 {
            return Err(Error::InvalidBipartition { mask: a_mask, n_qubits });
        }
        Ok(Self { n_qubits, a_mask })
    }

    /// Canonical form of the split described by `mask`, taking the
    /// complement if `mask` does not contain qubit 0.
    pub fn canonical(n_qubits: usize, mask: u64) -> Result<Self> {
        let full = full_mask(n_qubits)?;
        let a = if mask & 1 == 0 { full & !mask } else { mask };
        if mask & !full != 0 {
            return Err(Error::InvalidBipartition { mask, n_qubits });
        }
        Self::new(n_qubits, a)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn a_mask(&self) -> u64 {
        self.a_mask
    }

    pub fn b_mask(&self) -> u64 {
        (1u64 << self.n_qubits) - 1 & !self.a_mask
    }

    pub fn a_size(&self) -> usize {
        self.a_mask.count_ones() as usize
    }

    pub fn b_size(&self) -> usize {
        self.n_qubits - self.a_size()
    }

    pub fn is_balanced(&self) -> bool {
        self.n_qubits % 2 == 0 && self.a_size() == self.n_qubits / 2
    }
}

fn full_mask(n_qubits: usize) -> Result<u64> {
    if !(2..64).contains(&n_qubits) {
        return Err(Error::OutOfRange(format!("bipartition of {n_qubits} qubits")));
    }
    Ok((1u64 << n_qubits) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_contains_qubit_zero() {
        let p = Bipartition::canonical(4, 0b1100).unwrap();
        assert_eq!(p.a_mask(), 0b0011);
        assert_eq!(p.b_mask(), 0b1100);
        assert!(p.is_balanced());
    }

    #[test]
    fn degenerate_masks_are_rejected() {
        assert!(Bipartition::new(4, 0).is_err());
        assert!(Bipartition::new(4, 0b1111).is_err());
        assert!(Bipartition::new(4, 0b0110).is_err());
        assert!(Bipartition::new(4, 0b10001).is_err());
        assert!(Bipartition::canonical(3, 0b111).is_err());
    }

    #[test]
    fn unbalanced_split_is_flagged() {
        let p = Bipartition::new(5, 0b00011).unwrap();
        assert!(!p.is_balanced());
        assert_eq!((p.a_size(), p.b_size()), (2, 3));
    }
}
