//! Gate-level simulation of the quantum sawtooth map.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`]: dense pure states, density matrices, partial traces,
//!   partial transposes and the spectral quantities built on them.
//! * [`sawtooth`]: map parameters, the one-step gate circuit and an
//!   independent split-operator evolution used as an oracle.
//! * [`noise`]: unitary gate-noise model and Monte-Carlo averaging into a
//!   density matrix.
//! * [`entanglement`]: balanced bipartitions, entanglement spectra,
//!   distillable-entanglement bounds and the analytic fidelity predictions.
//! * [`experiments`]: experiment drivers and least-squares fits.
//! * [`validate`]: the self-contained property suite.

pub mod entanglement;
mod error;
pub mod experiments;
pub mod noise;
pub mod quantum;
pub mod sawtooth;
pub mod validate;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;
