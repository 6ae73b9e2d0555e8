//! Constant fits and verification reports.

mod gaussian;
mod regularity;
mod report;
mod scaling;

pub use gaussian::{
    collapse_csv, fit_gaussian_constants, lower_constant, original_quotient, upper_constant,
    verify_original_bounds, FitRegion, GaussianFitReport, WorstPoint,
};
pub use regularity::{
    l1_linf_constant, nash_exponent, near_diagonal_check, oscillation_contraction,
    ContractionReport, L1LinfReport, NashReport, NearDiagonal,
};
pub use report::{Check, Comparison, VerificationReport};
pub use scaling::{scaling_invariance_check, ScalingReport};
