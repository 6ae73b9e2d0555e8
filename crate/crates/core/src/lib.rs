//! Numerical toolkit for one-dimensional heterogeneous parabolic operators
//!
//! ```text
//! nu(x) p_t - (nu(x) a(x) p_x)_x + W p_x = 0          (canonical form)
//! u_t - (a(x) u_x)_x = r(x) u                          (original form)
//! ```
//!
//! The crate builds the objects that control the heat kernels of these
//! equations (the linearly growing corrector `T`, its adjoint, the flows
//! along its level lines, generalized principal eigenfunctions and the
//! invariant measure they induce) and measures every quantitative estimate
//! relating them: two-sided Gaussian bounds, Hölder regularity, oscillation
//! decay, L1 to Linf smoothing and resolvent bounds.
//!
//! Modules, bottom-up:
//!
//! * [`grid`], [`fields`]: uniform grids and coefficient fields.
//! * [`medium`]: coefficients sampled onto a grid (cell and face averages).
//! * [`corrector`]: `T`, `T̃`, flows, effective diffusivity.
//! * [`eigen`]: principal value, Riccati eigenfunctions, Wronskian, `T_γ`.
//! * [`kernel`]: conservative Crank–Nicolson solver, fundamental solutions,
//!   killed kernels, Green functions.
//! * [`verify`]: constant fits and the verification report.

pub mod corrector;
pub mod eigen;
pub mod error;
pub mod fields;
pub mod grid;
pub mod kernel;
pub mod medium;
pub mod numerics;
pub mod verify;

pub use error::{Error, Result};
pub use grid::Grid;

/// Toolkit version recorded in every verification report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
