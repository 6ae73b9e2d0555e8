//! Fundamental solutions of the canonical equation
//!
//! ```text
//! nu p_t = (nu a p_x)_x - W p_x
//! ```
//!
//! and of the original equation `u_t = (a u_x)_x + r u`, killed kernels in
//! moving tubes, resolvents, and the duality and semigroup checks.

mod cache;
mod checks;
mod green;
mod heat;
mod killed;
mod original;
mod stepper;

pub use cache::{read_table, write_table, CACHE_VERSION};
pub use checks::{
    chapman_kolmogorov_check, duality_check, grid_convergence_check, supersolution_residual,
    SupersolutionResidual,
};
pub use green::{
    green_closed_form, green_elliptic, green_function, green_quadrature, green_sandwich,
    laplace_identity_check, GreenPair, GreenRoute, GreenSandwich, GreenTable, LaplaceRow,
};
pub use heat::{
    heat_kernel, KernelOptions, KernelTable, Problem, CONTAMINATION_LEVEL, MIN_RELIABLE_STEPS,
};
pub use killed::{killed_kernel, TubeSpec};
pub use original::{heat_kernel_original, induced_problem, OriginalKernel};
pub use stepper::{evolve, step_canonical, Evolution, Stepper, TimePolicy};
