//! Tridiagonal systems (Thomas algorithm).

use crate::{Error, Result};

/// Tridiagonal matrix stored by diagonals. `lower[0]` and `upper[n-1]` are
/// ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            out[i] = s;
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.len();
        let mut t = Tridiagonal::zeros(n);
        t.diag.copy_from_slice(&self.diag);
        for i in 0..n.saturating_sub(1) {
            t.upper[i] = self.lower[i + 1];
            t.lower[i + 1] = self.upper[i];
        }
        t
    }

    /// Solves `A x = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        let mut scratch = vec![0.0; self.len()];
        self.solve_with_scratch(rhs, &mut scratch)
    }

    pub fn solve_with_scratch(&self, rhs: &mut [f64], scratch: &mut [f64]) -> Result<()> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Ok(());
        }
        let c = scratch;
        let mut beta = self.diag[0];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::SingularMatrix { row: 0 });
        }
        rhs[0] /= beta;
        for i in 1..n {
            c[i] = self.upper[i - 1] / beta;
            beta = self.diag[i] - self.lower[i] * c[i];
            if beta == 0.0 || !beta.is_finite() {
                return Err(Error::SingularMatrix { row: i });
            }
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= c[i + 1] * rhs[i + 1];
        }
        Ok(())
    }
}
