//! Small numerical kernels shared by the solvers.

pub mod quad;
pub mod tridiag;

pub use tridiag::Tridiagonal;
