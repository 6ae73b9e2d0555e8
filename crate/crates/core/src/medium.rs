//! Coefficients sampled onto a grid, and the conservative flux stencil shared
//! by the time stepper, the Dirichlet corrector and the resolvent solver.
//!
//! Node `i` carries the control-volume average of `nu` (and of `r` when a
//! reaction term is present); face `i`, between nodes `i` and `i + 1`, carries
//! the harmonic mean of `a nu` over the segment. The stencil discretizes
//!
//! ```text
//! (D p_x)_x - W p_x (+ r p)
//! ```
//!
//! through the rightward face flux `F = -D (p_{i+1} - p_i)/h + W (cl p_i + cr p_{i+1})`,
//! centred while the cell Péclet number `|W| h / D` stays below 2 and blended
//! towards upwind beyond.

use crate::fields::Profile;
use crate::numerics::Tridiagonal;
use crate::{Error, Grid, Result};

const SUBSAMPLES: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Medium {
    grid: Grid,
    nu: Vec<f64>,
    diffusivity: Vec<f64>,
    reaction: Option<Vec<f64>>,
}

/// Average of `f` over `[lo, hi]` by the midpoint rule on `SUBSAMPLES` pieces.
fn mean_over(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let d = (hi - lo) / SUBSAMPLES as f64;
    (0..SUBSAMPLES)
        .map(|k| f(lo + (k as f64 + 0.5) * d))
        .sum::<f64>()
        / SUBSAMPLES as f64
}

impl Medium {
    /// Canonical medium for `nu p_t = (nu a p_x)_x - W p_x`.
    pub fn new(grid: Grid, a: &dyn Profile, nu: &dyn Profile) -> Self {
        let h = grid.spacing();
        let nu_cells = (0..grid.len())
            .map(|i| mean_over(|x| nu.eval(x), grid.x(i) - 0.5 * h, grid.x(i) + 0.5 * h))
            .collect();
        let diffusivity = (0..grid.len() - 1)
            .map(|i| 1.0 / mean_over(|x| 1.0 / (a.eval(x) * nu.eval(x)), grid.x(i), grid.x(i + 1)))
            .collect();
        Medium {
            grid,
            nu: nu_cells,
            diffusivity,
            reaction: None,
        }
    }

    /// Medium for the original equation `u_t = (a u_x)_x + r u` (unit weight).
    pub fn original(grid: Grid, a: &dyn Profile, r: &dyn Profile) -> Self {
        let h = grid.spacing();
        let one = |_: f64| 1.0;
        let mut m = Medium::new(grid, a, &one);
        m.reaction = Some(
            (0..grid.len())
                .map(|i| mean_over(|x| r.eval(x), grid.x(i) - 0.5 * h, grid.x(i) + 0.5 * h))
                .collect(),
        );
        m
    }

    pub fn from_parts(
        grid: Grid,
        nu: Vec<f64>,
        diffusivity: Vec<f64>,
        reaction: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = grid.len();
        if nu.len() != n
            || diffusivity.len() != n - 1
            || reaction.as_ref().is_some_and(|r| r.len() != n)
        {
            return Err(Error::InvalidArgument(
                "medium sample lengths do not match the grid".into(),
            ));
        }
        if nu
            .iter()
            .chain(&diffusivity)
            .any(|&v| !(v > 0.0 && v.is_finite()))
        {
            return Err(Error::EllipticityViolation(
                "non-positive weight or diffusivity".into(),
            ));
        }
        Ok(Medium {
            grid,
            nu,
            diffusivity,
            reaction,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Node weights (cell averages of `nu`).
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Face values of `a nu` (harmonic means), one per segment.
    pub fn diffusivity(&self) -> &[f64] {
        &self.diffusivity
    }

    pub fn reaction(&self) -> Option<&[f64]> {
        self.reaction.as_deref()
    }

    /// Mirror image under `x -> -x`.
    pub fn reflected(&self) -> Medium {
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        Medium {
            grid: self.grid,
            nu: rev(&self.nu),
            diffusivity: rev(&self.diffusivity),
            reaction: self.reaction.as_deref().map(rev),
        }
    }

    /// Weighted mass `sum nu_i p_i h`.
    pub fn mass(&self, p: &[f64]) -> f64 {
        self.grid.spacing() * self.nu.iter().zip(p).map(|(n, p)| n * p).sum::<f64>()
    }

    /// Rightward flux through face `i` for drift `w`.
    pub fn face_flux(&self, w: f64, p: &[f64], i: usize) -> f64 {
        let h = self.grid.spacing();
        let d = self.diffusivity[i];
        let (cl, cr) = blend(w, d, h);
        -d * (p[i + 1] - p[i]) / h + w * (cl * p[i] + cr * p[i + 1])
    }

    /// Fraction of faces on which the upwind blending is active.
    pub fn blended_fraction(&self, w: f64) -> f64 {
        let h = self.grid.spacing();
        let k = self
            .diffusivity
            .iter()
            .filter(|&&d| w.abs() * h / d > 2.0)
            .count();
        k as f64 / self.diffusivity.len() as f64
    }

    /// Stencil of `(D p_x)_x - w p_x (+ r p)`. Boundary rows are left empty;
    /// callers impose the boundary condition.
    pub fn operator(&self, w: f64) -> Tridiagonal {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let mut op = Tridiagonal::zeros(n);
        for i in 1..n - 1 {
            let (dm, dp) = (self.diffusivity[i - 1], self.diffusivity[i]);
            let (clm, crm) = blend(w, dm, h);
            let (clp, crp) = blend(w, dp, h);
            op.lower[i] = dm / (h * h) + w * clm / h;
            op.upper[i] = dp / (h * h) - w * crp / h;
            op.diag[i] = -(dm + dp) / (h * h) + w * (crm - clp) / h;
            if let Some(r) = &self.reaction {
                op.diag[i] += r[i];
            }
        }
        op
    }

    /// Largest step for which the explicit half of Crank–Nicolson keeps a
    /// nonnegative diagonal, i.e. the scheme maps nonnegative data to
    /// nonnegative data.
    pub fn positivity_step(&self, w: f64) -> f64 {
        let op = self.operator(w);
        let n = self.grid.len();
        (1..n - 1)
            .map(|i| {
                let d = -op.diag[i];
                if d > 0.0 {
                    2.0 * self.nu[i] / d
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Face weights `(cl, cr)` of the drift flux.
fn blend(w: f64, d: f64, h: f64) -> (f64, f64) {
    let pe = w.abs() * h / d;
    let theta = if pe > 2.0 { 1.0 - 2.0 / pe } else { 0.0 };
    let (up, down) = (0.5 * (1.0 + theta), 0.5 * (1.0 - theta));
    if w >= 0.0 {
        (up, down)
    } else {
        (down, up)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jumpy(x: f64) -> f64 {
        if x.floor() as i64 % 2 == 0 {
            0.5
        } else {
            2.0
        }
    }

    #[test]
    fn harmonic_faces_on_aligned_jumps() {
        let grid = Grid::with_spacing(3.0, 0.25).unwrap();
        let one = |_: f64| 1.0;
        let m = Medium::new(grid, &jumpy, &one);
        for (i, &d) in m.diffusivity().iter().enumerate() {
            assert_eq!(d, jumpy(grid.x(i) + 0.125));
        }
        // node on a jump averages both sides
        let k = grid.index_of(1.0).unwrap();
        assert!((m.nu()[k] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_mean_across_unaligned_jump() {
        let grid = Grid::with_spacing(1.0, 1.0).unwrap();
        let a = |x: f64| if x < 0.5 { 1.0 } else { 3.0 };
        let one = |_: f64| 1.0;
        let m = Medium::new(grid, &a, &one);
        assert!((m.diffusivity()[1] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn operator_annihilates_constants_without_drift() {
        let grid = Grid::with_spacing(3.0, 0.1).unwrap();
        let nu = |x: f64| 1.0 + 0.5 * x.sin();
        let m = Medium::new(grid, &jumpy, &nu);
        let op = m.operator(0.0);
        let p = vec![1.0; grid.len()];
        let mut out = vec![0.0; grid.len()];
        op.mul_vec(&p, &mut out);
        assert!(out[1..grid.len() - 1].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn columns_telescope_to_boundary_fluxes() {
        let grid = Grid::with_spacing(2.0, 0.1).unwrap();
        let m = Medium::new(grid, &jumpy, &|x: f64| 1.0 + 0.3 * x.cos());
        let n = grid.len();
        let mut p: Vec<f64> = (0..n).map(|i| (-grid.x(i).powi(2)).exp()).collect();
        p[0] = 0.0;
        p[n - 1] = 0.0;
        for w in [0.0, 1.0, -3.0, 80.0] {
            let mut out = vec![0.0; n];
            m.operator(w).mul_vec(&p, &mut out);
            let total: f64 = out.iter().sum::<f64>() * grid.spacing();
            let outflow = m.face_flux(w, &p, n - 2) - m.face_flux(w, &p, 0);
            assert!((total + outflow).abs() < 1e-12, "w = {w}");
        }
    }

    #[test]
    fn implicit_part_is_an_m_matrix() {
        let grid = Grid::with_spacing(2.0, 0.1).unwrap();
        let m = Medium::new(grid, &jumpy, &|_: f64| 1.0);
        for w in [0.5, 30.0, -30.0] {
            let op = m.operator(w);
            for i in 1..grid.len() - 1 {
                assert!(op.lower[i] >= 0.0 && op.upper[i] >= -1e-12);
            }
        }
        assert!(m.blended_fraction(30.0) > 0.0);
        assert_eq!(m.blended_fraction(0.5), 0.0);
    }

    #[test]
    fn reflection_is_an_involution() {
        let grid = Grid::with_spacing(2.0, 0.1).unwrap();
        let m = Medium::new(grid, &jumpy, &|x: f64| 1.0 + 0.2 * x);
        assert_eq!(m.reflected().reflected(), m);
        assert_eq!(m.reflected().nu()[0], m.nu()[grid.len() - 1]);
    }
}
