//! Quantities used to compare model eigenstates with the analytic state.

mod correlation;
mod entropy;
mod overlap;
mod spectrum;

pub use correlation::{g2_curve, pair_correlation_matrix, CorrelationCurve};
pub use entropy::{block_entropy, entropy_curve, EntropyCurve};
pub use overlap::{overlap, OverlapReport};
pub use spectrum::{
    match_excited, multiplets, normalized_spectrum, ExcitedMatch, SpectrumReport, DEFAULT_DEG_TOL,
};
