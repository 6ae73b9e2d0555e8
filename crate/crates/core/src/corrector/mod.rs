//! The corrector `T`: the linearly growing solution of
//!
//! ```text
//! -(a nu T')' + W T' = W nu,   T(0) = 0,
//! ```
//!
//! its adjoint `T̃` (divergence term with the opposite sign), the flows along
//! their level lines and the quantities derived from them.

mod dirichlet;
mod flow;
mod flux;
mod suite;

pub use dirichlet::{
    adjoint_corrector_dirichlet, dirichlet_monotone_in_r, dual_route_check,
    solve_corrector_dirichlet, solve_corrector_dirichlet_symmetric, DirichletCorrector,
};
pub use flow::FlowEvaluator;
pub use flux::{
    adjoint_corrector, corrector_from_flux, solve_corrector, solve_flux_profile, FluxProfile,
};
pub use suite::{
    corrector_invariant_suite, effective_diffusivity, flux_residual_check, EffectiveDiffusivity,
    SuiteOptions,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Grid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    FluxQuadrature,
    DirichletLimit,
    /// Wrapped samples of some other construction.
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectorKind {
    /// `-(a nu T')' + W T' = W nu`
    Direct,
    /// `(a nu T')' + W T' = W nu`
    Adjoint,
}

/// Sampled corrector on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectorSolution {
    pub grid: Grid,
    pub t: Vec<f64>,
    pub tprime: Vec<f64>,
    /// `a nu T'`
    pub q: Vec<f64>,
    /// `T(x) - x`
    pub chi: Vec<f64>,
    pub w: f64,
    pub route: Route,
    pub kind: CorrectorKind,
    pub m_hat: f64,
    pub big_m_hat: f64,
}

impl CorrectorSolution {
    pub(crate) fn assemble(
        grid: Grid,
        t: Vec<f64>,
        tprime: Vec<f64>,
        q: Vec<f64>,
        w: f64,
        route: Route,
        kind: CorrectorKind,
    ) -> Self {
        let chi = t.iter().enumerate().map(|(i, v)| v - grid.x(i)).collect();
        let m_hat = tprime.iter().copied().fold(f64::INFINITY, f64::min);
        let big_m_hat = tprime.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        CorrectorSolution {
            grid,
            t,
            tprime,
            q,
            chi,
            w,
            route,
            kind,
            m_hat,
            big_m_hat,
        }
    }

    /// Identity corrector `T(x) = x`, used for `W = 0`.
    pub fn identity(grid: Grid, a_nu: &[f64], kind: CorrectorKind) -> Self {
        let n = grid.len();
        CorrectorSolution::assemble(
            grid,
            grid.nodes(),
            vec![1.0; n],
            a_nu.to_vec(),
            0.0,
            Route::FluxQuadrature,
            kind,
        )
    }

    /// Wraps sampled values of a corrector-like function; `T'` by central
    /// differences and `q` unknown (NaN).
    pub fn from_values(grid: Grid, t: Vec<f64>, w: f64, kind: CorrectorKind) -> Result<Self> {
        let n = grid.len();
        if t.len() != n || n < 3 {
            return Err(Error::InvalidArgument(
                "corrector samples do not match the grid".into(),
            ));
        }
        let h = grid.spacing();
        let tprime = (0..n)
            .map(|i| {
                let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (t[hi] - t[lo]) / ((hi - lo) as f64 * h)
            })
            .collect();
        Ok(CorrectorSolution::assemble(
            grid,
            t,
            tprime,
            vec![f64::NAN; n],
            w,
            Route::Sampled,
            kind,
        ))
    }

    /// Piecewise-linear interpolation of `T`; `None` outside the grid.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let g = &self.grid;
        if !g.contains(x) {
            return None;
        }
        let h = g.spacing();
        let s = (x + g.half_width()) / h;
        let i = (s.floor() as usize).min(g.len() - 2);
        let f = s - i as f64;
        Some(self.t[i] + f * (self.t[i + 1] - self.t[i]))
    }

    /// Recomputes `m_hat`, `M_hat` and `chi` after the samples were edited.
    pub fn refresh(&mut self) {
        *self = CorrectorSolution::assemble(
            self.grid,
            std::mem::take(&mut self.t),
            std::mem::take(&mut self.tprime),
            std::mem::take(&mut self.q),
            self.w,
            self.route,
            self.kind,
        );
    }

    /// CSV with columns `x,T,Tprime,q,chi`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,T,Tprime,q,chi\n");
        for i in 0..self.grid.len() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                self.grid.x(i),
                self.t[i],
                self.tprime[i],
                self.q[i],
                self.chi[i]
            ));
        }
        s
    }
}
