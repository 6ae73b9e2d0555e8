//! Generalized principal eigenfunctions of `(a φ')' + (r - γ) φ = 0`.
//!
//! Eigenfunctions are represented only through the flux log-derivative
//! `w = a φ'/φ` and `ln φ` (normalized by `ln φ(0) = 0`), never through `φ`.

mod checks;
mod principal;
mod riccati;
mod spectral;

pub use checks::{
    convexity_check, corrector_identification_check, ConvexityResult, Identification,
};
pub use principal::{largest_eigenvalue, principal_value_estimate};
pub use riccati::{riccati_residual, solve_eigenfunction};
pub use spectral::{
    epsilon_gap, invariant_measure, phi_dot, spectral_summary, wronskian, InvariantMeasure, PhiDot,
    SpectralSummary, WronskianReport,
};

use serde::{Deserialize, Serialize};

use crate::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `φ(x) -> 0` as `x -> +inf`
    DecayRight,
    /// `φ̃(x) -> 0` as `x -> -inf`
    DecayLeft,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub gamma: f64,
    pub side: Side,
    pub grid: Grid,
    /// `a φ'/φ` at the nodes
    pub w: Vec<f64>,
    pub lnphi: Vec<f64>,
    /// `a` at the nodes
    pub a: Vec<f64>,
    /// Length of the discarded relaxation margin.
    pub burn_in: f64,
}

impl EigenPair {
    /// Log-derivative `φ'/φ`.
    pub fn log_derivative(&self) -> Vec<f64> {
        self.w.iter().zip(&self.a).map(|(w, a)| w / a).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenOptions {
    /// Magnus steps per grid segment.
    pub substeps: usize,
    /// Largest accepted relaxation margin.
    pub burn_in_cap: f64,
    /// Required distance between `γ` and the principal value estimate.
    pub min_gap: f64,
    /// Step of the γ-difference quotient; `None` means `1e-3 (γ - γ̲)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dgamma: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            substeps: 4,
            burn_in_cap: 1000.0,
            min_gap: 1e-2,
            dgamma: None,
        }
    }
}
