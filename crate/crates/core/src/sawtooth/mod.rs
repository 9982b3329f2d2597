//! The quantum sawtooth map `U = e^{−iT n̂²/2} e^{ik(θ̂−π)²/2}`.
//!
//! The computational basis is the momentum basis: basis index `m` stands for
//! the level `n = m − N/2`. One map step is built as a gate circuit
//! (Fourier transform, kick phases, inverse transform, free phases) and is
//! cross-checked against a split-operator evolution based on FFTs.

mod circuit;
mod evolve;
mod params;

pub(crate) use circuit::{pauli_axis, rotation_matrix};
pub use circuit::{build_step_circuit, reference_gate_count, Gate, GateSequence};
pub use evolve::{evolve_circuit, evolve_exact, SplitOperator};
pub use params::{momentum_index, MapParams, DEFAULT_K};
