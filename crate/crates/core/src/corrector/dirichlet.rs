//! Dirichlet route: `T_R` solves the corrector equation on a bounded interval
//! with zero boundary values, discretized with the shared conservative stencil.

use super::{solve_corrector, CorrectorKind, CorrectorSolution, Route};
use crate::fields::{Profile, Reflected};
use crate::medium::Medium;
use crate::numerics::Tridiagonal;
use crate::verify::Check;
use crate::{Error, Grid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletCorrector {
    pub r: f64,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl DirichletCorrector {
    /// Value at the node closest to `x`.
    pub fn at(&self, x: f64) -> Option<f64> {
        let h = self.x[1] - self.x[0];
        let k = ((x - self.x[0]) / h).round();
        if k < 0.0 || k as usize >= self.x.len() {
            None
        } else {
            Some(self.t[k as usize])
        }
    }
}

/// Solves `-A T = W nu` on nodes `lo+1 ..= hi-1` with `T = 0` at `lo` and `hi`.
fn solve_window(medium: &Medium, w: f64, lo: usize, hi: usize) -> Result<Vec<f64>> {
    let op = medium.operator(w);
    let m = hi - lo - 1;
    let mut sys = Tridiagonal::zeros(m);
    let mut rhs = vec![0.0; m];
    for k in 0..m {
        let i = lo + 1 + k;
        sys.lower[k] = -op.lower[i];
        sys.diag[k] = -op.diag[i];
        sys.upper[k] = -op.upper[i];
        rhs[k] = w * medium.nu()[i];
    }
    sys.solve_in_place(&mut rhs)?;
    let mut t = vec![0.0; hi - lo + 1];
    t[1..=m].copy_from_slice(&rhs);
    Ok(t)
}

fn window_grid(h: f64, r: f64) -> Result<Grid> {
    let cells = r / h;
    if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "R = {r} is not a multiple of h = {h}"
        )));
    }
    Grid::with_spacing(r, h)
}

/// `T_R` on `[0, R]` with `T_R(0) = T_R(R) = 0`.
pub fn solve_corrector_dirichlet(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    h: f64,
    r: f64,
) -> Result<DirichletCorrector> {
    let grid = window_grid(h, r)?;
    let medium = Medium::new(grid, a, nu);
    let c = grid.center();
    let t = solve_window(&medium, w, c, grid.len() - 1)?;
    Ok(DirichletCorrector {
        r,
        x: (c..grid.len()).map(|i| grid.x(i)).collect(),
        t,
    })
}

/// Solve on `[-R, R]` with zero boundary values, shifted so that `T(0) = 0`.
/// Converges to `T` on compact sets of both half-lines.
pub fn solve_corrector_dirichlet_symmetric(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    h: f64,
    r: f64,
) -> Result<DirichletCorrector> {
    let grid = window_grid(h, r)?;
    let medium = Medium::new(grid, a, nu);
    let mut t = solve_window(&medium, w, 0, grid.len() - 1)?;
    let t0 = t[grid.center()];
    t.iter_mut().for_each(|v| *v -= t0);
    Ok(DirichletCorrector {
        r,
        x: grid.nodes(),
        t,
    })
}

/// Sup-relative difference between the flux-route corrector and the
/// symmetric Dirichlet window `[-R, R]` on `[0, R/2]`.
pub fn dual_route_check(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    h: f64,
    r: f64,
    mu: f64,
    threshold: f64,
) -> Result<Check> {
    let d = solve_corrector_dirichlet_symmetric(a, nu, w, h, r)?;
    let grid = window_grid(h, r)?;
    let flux = solve_corrector(a, nu, w, &grid, mu)?;
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for (i, &x) in d.x.iter().enumerate() {
        if (0.0..=0.5 * r + 1e-12).contains(&x) {
            diff = diff.max((d.t[i] - flux.t[i]).abs());
            scale = scale.max(flux.t[i].abs());
        }
    }
    let rel = if scale > 0.0 { diff / scale } else { diff };
    Ok(Check::at_most("corrector.dual_route", rel, threshold)
        .with_detail(format!("R={r} h={h} compared on [0, {}]", 0.5 * r)))
}

/// `T̃` through the symmetric Dirichlet construction on the reflected field.
pub fn adjoint_corrector_dirichlet(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    h: f64,
    r: f64,
) -> Result<DirichletCorrector> {
    let s = solve_corrector_dirichlet_symmetric(&Reflected(a), &Reflected(nu), w, h, r)?;
    Ok(DirichletCorrector {
        r,
        x: s.x.iter().rev().map(|x| -x).collect(),
        t: s.t.iter().rev().map(|v| -v).collect(),
    })
}

impl DirichletCorrector {
    /// Converts a symmetric solution to a [`CorrectorSolution`], with `T'` by
    /// central differences and `q = a nu T'`.
    pub fn to_solution(
        &self,
        a: &dyn Profile,
        nu: &dyn Profile,
        w: f64,
        kind: CorrectorKind,
    ) -> Result<CorrectorSolution> {
        let n = self.x.len();
        let h = self.x[1] - self.x[0];
        let grid = Grid::with_spacing(-self.x[0], h)
            .ok()
            .filter(|g| g.len() == n)
            .ok_or_else(|| Error::InvalidArgument("solution is not on a symmetric grid".into()))?;
        let tprime: Vec<f64> = (0..n)
            .map(|i| {
                let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (self.t[r] - self.t[l]) / (self.x[r] - self.x[l])
            })
            .collect();
        let q = (0..n)
            .map(|i| a.eval(self.x[i]) * nu.eval(self.x[i]) * tprime[i])
            .collect();
        Ok(CorrectorSolution::assemble(
            grid,
            self.t.clone(),
            tprime,
            q,
            w,
            Route::DirichletLimit,
            kind,
        ))
    }
}

/// Largest decrease of `T_R(x)` when `R` grows through `r_list`, over the
/// interior nodes shared by consecutive solutions (nonpositive if monotone).
pub fn dirichlet_monotone_in_r(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    h: f64,
    r_list: &[f64],
) -> Result<f64> {
    let sols = r_list
        .iter()
        .map(|&r| solve_corrector_dirichlet(a, nu, w, h, r))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = f64::NEG_INFINITY;
    for pair in sols.windows(2) {
        let (small, big) = (&pair[0], &pair[1]);
        for (k, &v) in small.t.iter().enumerate() {
            worst = worst.max(v - big.t[k]);
        }
    }
    Ok(worst)
}
