//! Entanglement spectra over balanced bipartitions, distillable-entanglement
//! bounds, Haar-random reference states and the analytic predictions that
//! follow from the quantum Fano inequality.

mod bipartitions;
mod haar;
mod measures;
mod predictions;
mod stats;

pub use bipartitions::{balanced_bipartition_count, enumerate_balanced_bipartitions};
pub use haar::haar_random_state;
pub use measures::{
    distillable_bounds, mixed_spectrum, pure_entropy, pure_spectrum, DistillableBounds,
    MixedSpectrum,
};
pub use predictions::{
    analytic_threshold, binary_entropy, fano_entropy_bound, page_value, predicted_entropy,
    predicted_entropy_terms, predicted_lower_bound, EntropyPrediction, REFERENCE_GAMMA,
};
pub use stats::{histogram, stats, EntanglementSample, EntanglementStats, Histogram, DEFAULT_HISTOGRAM_BINS};
