//! Cross-checks of the spectral objects.

use super::riccati::solve_eigenfunction;
use super::{EigenOptions, Side};
use crate::corrector::{solve_corrector, CorrectorSolution};
use crate::fields::{CoefficientField, FieldRole, Profile};
use crate::verify::Check;
use crate::{Error, Grid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Identification {
    pub sup_rel_diff: f64,
    /// Corrector of the induced canonical problem, computed by the flux route.
    pub corrector: CorrectorSolution,
    pub check: Check,
}

/// Compares the spectral `T_γ` with the corrector of the canonical problem
/// `(a, ν_γ, W_γ)` on `|x| <= compare_half_width`. `ν_γ` enters as a
/// piecewise-constant field on the node control volumes.
pub fn corrector_identification_check(
    t_gamma: &[f64],
    a: &dyn Profile,
    nu_gamma: &[f64],
    w_gamma: f64,
    grid: &Grid,
    compare_half_width: f64,
    threshold: f64,
) -> Result<Identification> {
    let n = grid.len();
    if t_gamma.len() != n || nu_gamma.len() != n {
        return Err(Error::InvalidArgument(
            "samples do not match the grid".into(),
        ));
    }
    let mut mu = 1.0f64;
    for i in 0..n {
        let av = a.eval(grid.x(i));
        mu = mu
            .max(av)
            .max(1.0 / av)
            .max(nu_gamma[i])
            .max(1.0 / nu_gamma[i]);
    }
    let nu = CoefficientField::from_node_samples(grid, nu_gamma, mu, FieldRole::Canonical);
    let corrector = solve_corrector(a, &nu, w_gamma, grid, mu)?;
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for i in 0..n {
        if grid.x(i).abs() <= compare_half_width {
            diff = diff.max((t_gamma[i] - corrector.t[i]).abs());
            scale = scale.max(corrector.t[i].abs());
        }
    }
    if scale == 0.0 {
        return Err(Error::EmptyTrustRegion(format!(
            "no nodes within {compare_half_width} of the origin"
        )));
    }
    let sup_rel_diff = diff / scale;
    Ok(Identification {
        sup_rel_diff,
        check: Check::at_most("eigen.corrector_identification", sup_rel_diff, threshold)
            .with_detail(format!("|x| <= {compare_half_width}")),
        corrector,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityResult {
    /// `max_{x >= 0} ln φ_σ - (1-σ) ln φ_γ - σ ln φ_γ'`
    pub max_violation: f64,
    /// Same for the log-derivative at `x = 0`.
    pub derivative_violation: f64,
    /// Largest violation over `x < 0`, recorded only.
    pub negative_side: f64,
    pub check: Check,
}

/// Log-convexity of `γ -> φ_γ(x)` at the `σ`-combination of `gamma` and `gamma_prime`.
pub fn convexity_check(
    a: &dyn Profile,
    r: &dyn Profile,
    gamma: f64,
    gamma_prime: f64,
    sigma: f64,
    grid: &Grid,
    opts: &EigenOptions,
) -> Result<ConvexityResult> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidArgument(format!(
            "sigma = {sigma} outside [0, 1]"
        )));
    }
    let mid = (1.0 - sigma) * gamma + sigma * gamma_prime;
    let p0 = solve_eigenfunction(a, r, gamma, Side::DecayRight, grid, opts)?;
    let p1 = solve_eigenfunction(a, r, gamma_prime, Side::DecayRight, grid, opts)?;
    let pm = solve_eigenfunction(a, r, mid, Side::DecayRight, grid, opts)?;
    let c = grid.center();
    let excess = |i: usize| pm.lnphi[i] - (1.0 - sigma) * p0.lnphi[i] - sigma * p1.lnphi[i];
    let max_violation = (c..grid.len())
        .map(excess)
        .fold(f64::NEG_INFINITY, f64::max);
    let negative_side = (0..c).map(excess).fold(f64::NEG_INFINITY, f64::max);
    let derivative_violation = (pm.w[c] - (1.0 - sigma) * p0.w[c] - sigma * p1.w[c]) / pm.a[c];
    let worst = max_violation.max(derivative_violation);
    Ok(ConvexityResult {
        max_violation,
        derivative_violation,
        negative_side,
        check: Check::at_most("eigen.log_convexity", worst, 1e-8),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_case_convexity() {
        let one = |_: f64| 1.0;
        let zero = |_: f64| 0.0;
        let g = Grid::with_spacing(10.0, 0.05).unwrap();
        let opts = EigenOptions::default();
        let res = convexity_check(&one, &zero, 1.0, 4.0, 0.5, &g, &opts).unwrap();
        assert!(res.check.pass);
        // at x = 1: -sqrt(2.5) <= -(1 + 2)/2
        assert!(res.derivative_violation <= -(2.5f64.sqrt() - 1.5) + 1e-9);
        for sigma in [0.0, 1.0] {
            let res = convexity_check(&one, &zero, 1.0, 4.0, sigma, &g, &opts).unwrap();
            assert_eq!(res.max_violation, 0.0);
        }
    }

    #[test]
    fn free_case_identification() {
        let one = |_: f64| 1.0;
        let g = Grid::with_spacing(10.0, 0.05).unwrap();
        let t: Vec<f64> = g.nodes();
        let nu = vec![1.0; g.len()];
        let id = corrector_identification_check(&t, &one, &nu, 2.0, &g, 8.0, 1e-3).unwrap();
        assert!(id.sup_rel_diff < 1e-10);
        let wrong: Vec<f64> = nu.iter().map(|v| 1.1 * v).collect();
        let bad = corrector_identification_check(&t, &one, &wrong, 2.0, &g, 8.0, 1e-3).unwrap();
        assert!(!bad.check.pass);
    }
}
