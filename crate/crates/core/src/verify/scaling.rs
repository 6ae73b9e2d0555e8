use serde::{Deserialize, Serialize};

use super::Check;
use crate::corrector::solve_corrector;
use crate::fields::{Profile, Rescaled};
use crate::kernel::{heat_kernel, KernelOptions, Problem};
use crate::medium::Medium;
use crate::{Error, Grid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub sigma: f64,
    pub z: f64,
    /// Largest over times of `sup |P_σ - σ P(σ²t, ·)| / sup |σ P|` on the
    /// trust region of the rescaled solve.
    pub kernel_rel_diff: f64,
    /// `sup |T_σ(x) - (T(σ(x+z)) - T(σz))/σ| / sup |T_σ|` on the inner half.
    pub corrector_rel_diff: f64,
    pub points: usize,
}

impl ScalingReport {
    pub fn checks(&self, prefix: &str, tol: f64) -> Vec<Check> {
        vec![
            Check::at_most(format!("{prefix}.kernel"), self.kernel_rel_diff, tol)
                .with_detail(format!("sigma={} z={}", self.sigma, self.z)),
            Check::at_most(format!("{prefix}.corrector"), self.corrector_rel_diff, tol),
        ]
    }
}

/// Solves the problem with coefficients `x -> f(σ(x+z))` and drift `σW` on
/// `grid` and compares it with the original problem solved on the matching
/// grid of spacing `σh`. `z` must be a multiple of the spacing of `grid`.
#[allow(clippy::too_many_arguments)]
pub fn scaling_invariance_check(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    sigma: f64,
    z: f64,
    grid: &Grid,
    y: f64,
    times: &[f64],
    mu: f64,
    opts: &KernelOptions,
) -> Result<ScalingReport> {
    let h = grid.spacing();
    let shift = z / h;
    if !(sigma > 0.0) || (shift - shift.round()).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "need sigma > 0 and z on the grid (sigma {sigma}, z {z})"
        )));
    }
    let shift = shift.round() as i64;
    let cells = ((grid.half_width() + z.abs()) / h).ceil() as usize + 2;
    let outer = Grid::new(cells as f64 * sigma * h, 2 * cells + 1)?;

    let a_s = Rescaled {
        inner: a,
        scale: sigma,
        shift: z,
    };
    let nu_s = Rescaled {
        inner: nu,
        scale: sigma,
        shift: z,
    };
    let scaled = Problem::new(Medium::new(*grid, &a_s, &nu_s), sigma * w, mu)?;
    let original = Problem::new(Medium::new(outer, a, nu), w, mu)?;

    let map =
        |i: usize| -> usize { (i as i64 + shift + cells as i64 - grid.center() as i64) as usize };
    let j = scaled.source_index(y)?;
    let y_outer = outer.x(map(j));
    let long: Vec<f64> = times.iter().map(|t| sigma * sigma * t).collect();
    let ps = heat_kernel(&scaled, y, times, opts)?;
    let po = heat_kernel(&original, y_outer, &long, opts)?;
    if ps.boundary_contamination() || po.boundary_contamination() {
        return Err(Error::DomainTooSmall(
            "rescaled kernels reach the ends of the grid".into(),
        ));
    }

    let mut worst: f64 = 0.0;
    let mut points = 0;
    for k in 0..times.len() {
        if !ps.usable(k) {
            continue;
        }
        let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
        for i in 0..grid.len() {
            if !ps.trusted(k, i) {
                continue;
            }
            let reference = sigma * po.values[k][map(i)];
            diff = diff.max((ps.values[k][i] - reference).abs());
            scale = scale.max(reference.abs());
            points += 1;
        }
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        }
    }

    let ts = solve_corrector(&a_s, &nu_s, sigma * w, grid, mu)?;
    let to = solve_corrector(a, nu, w, &outer, mu)?;
    let anchor = to.t[map(grid.center())];
    let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
    for i in 0..grid.len() {
        if grid.x(i).abs() <= 0.5 * grid.half_width() {
            let reference = (to.t[map(i)] - anchor) / sigma;
            diff = diff.max((ts.t[i] - reference).abs());
            scale = scale.max(ts.t[i].abs());
        }
    }
    Ok(ScalingReport {
        sigma,
        z,
        kernel_rel_diff: worst,
        corrector_rel_diff: if scale > 0.0 { diff / scale } else { diff },
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_scaling_is_exact() {
        let a = |x: f64| 1.0 + 0.5 * (2.0 * x).cos();
        let nu = |_: f64| 1.0;
        let grid = Grid::with_spacing(6.0, 0.05).unwrap();
        let r = scaling_invariance_check(
            &a,
            &nu,
            1.0,
            1.0,
            0.0,
            &grid,
            0.0,
            &[0.2, 0.5],
            2.0,
            &KernelOptions::default(),
        )
        .unwrap();
        assert!(r.kernel_rel_diff < 1e-12, "{r:?}");
        assert!(r.corrector_rel_diff < 1e-12, "{r:?}");
    }

    #[test]
    fn constant_coefficients_scale_exactly() {
        let one = |_: f64| 1.0;
        let grid = Grid::with_spacing(6.0, 0.02).unwrap();
        let r = scaling_invariance_check(
            &one,
            &one,
            1.0,
            2.0,
            0.0,
            &grid,
            0.0,
            &[0.25, 0.5],
            1.0,
            &KernelOptions::default(),
        )
        .unwrap();
        assert!(r.kernel_rel_diff < 2e-3, "{r:?}");
        assert!(r.corrector_rel_diff < 1e-12, "{r:?}");
    }

    #[test]
    fn periodic_field_with_shift() {
        let a = |x: f64| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x).cos();
        let nu = |x: f64| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).sin();
        let grid = Grid::with_spacing(6.0, 0.02).unwrap();
        let r = scaling_invariance_check(
            &a,
            &nu,
            1.0,
            2.0,
            0.3,
            &grid,
            0.0,
            &[0.25, 0.5],
            2.0,
            &KernelOptions::default(),
        )
        .unwrap();
        assert!(r.kernel_rel_diff < 1e-2, "{r:?}");
        assert!(r.corrector_rel_diff < 1e-3, "{r:?}");
        assert!(scaling_invariance_check(
            &a,
            &nu,
            1.0,
            2.0,
            0.31,
            &grid,
            0.0,
            &[0.25],
            2.0,
            &KernelOptions::default()
        )
        .is_err());
    }
}
