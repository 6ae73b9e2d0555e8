use serde::{Deserialize, Serialize};

use super::Check;
use crate::corrector::{CorrectorKind, CorrectorSolution};
use crate::kernel::{KernelTable, OriginalKernel};
use crate::{Error, Result};

/// Which kernel samples enter a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRegion {
    /// Elapsed-time window.
    pub t_min: f64,
    pub t_max: f64,
    /// Keep `|z| <= z_factor sqrt(t)` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_factor: Option<f64>,
    /// Kernel values at or below this are not fitted.
    pub floor: f64,
}

impl Default for FitRegion {
    fn default() -> Self {
        FitRegion {
            t_min: 0.1,
            t_max: 1.0,
            z_factor: Some(6.0),
            floor: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstPoint {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianFitReport {
    pub c_up: f64,
    pub c_low: f64,
    /// Per output time, the point needing the largest constant.
    pub worst_up: Vec<WorstPoint>,
    pub worst_low: Vec<WorstPoint>,
    pub points: usize,
    pub region: FitRegion,
    /// Least-squares slope of `ln(P sqrt t)` against `z²/t`; `-1/4` for the
    /// free heat kernel.
    pub collapse_slope: f64,
    pub collapse_intercept: f64,
}

/// Smallest `c > 0` with `holds(c)`, for `holds` monotone in `c`, to relative
/// accuracy `1e-4`. The search brackets from `start` outwards.
fn smallest(start: f64, allow_below: bool, holds: impl Fn(f64) -> bool) -> f64 {
    let (mut lo, mut hi);
    if holds(start) {
        if !allow_below {
            return start;
        }
        hi = start;
        lo = start;
        while holds(lo) {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-12 {
                return hi;
            }
        }
    } else {
        lo = start;
        hi = 2.0 * start;
        while !holds(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > 1e15 {
                return f64::INFINITY;
            }
        }
    }
    while hi / lo > 1.0 + 1e-4 {
        let mid = (lo * hi).sqrt();
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Per-point constant for `P <= C t^{-1/2} e^{-z²/(C t)}`.
pub fn upper_constant(p: f64, t: f64, z: f64) -> f64 {
    let target = p.ln() + 0.5 * t.ln();
    let u = z * z / t;
    smallest(1.0, true, |c| c.ln() - u / c >= target)
}

/// Per-point constant for `P >= C^{-1} t^{-1/2} e^{-C z²/t}`, searched from 1.
pub fn lower_constant(p: f64, t: f64, z: f64) -> f64 {
    let target = p.ln() + 0.5 * t.ln();
    let u = z * z / t;
    smallest(1.0, false, |c| -c.ln() - c * u <= target)
}

/// Samples `(k, i, t, z, P)` of the fit region.
fn region_points(
    kernel: &KernelTable,
    corrector: &CorrectorSolution,
    region: &FitRegion,
) -> Result<Vec<(usize, usize, f64, f64, f64)>> {
    if corrector.grid != kernel.grid {
        return Err(Error::InvalidArgument(
            "corrector grid differs from the kernel grid".into(),
        ));
    }
    let ty = corrector.t[kernel.source];
    let mut pts = Vec::new();
    for k in 0..kernel.len() {
        let t = kernel.times[k] - kernel.start;
        if t < region.t_min - 1e-12 || t > region.t_max + 1e-12 {
            continue;
        }
        for i in 0..kernel.grid.len() {
            let p = kernel.values[k][i];
            if !kernel.trusted(k, i) || p <= region.floor {
                continue;
            }
            let z = corrector.t[i] - ty - kernel.w * t;
            if region.z_factor.is_some_and(|f| z.abs() > f * t.sqrt()) {
                continue;
            }
            pts.push((k, i, t, z, p));
        }
    }
    if pts.is_empty() {
        return Err(Error::EmptyTrustRegion(
            "no trusted kernel samples in the fit region".into(),
        ));
    }
    Ok(pts)
}

pub fn fit_gaussian_constants(
    kernel: &KernelTable,
    corrector: &CorrectorSolution,
    region: &FitRegion,
) -> Result<GaussianFitReport> {
    let pts = region_points(kernel, corrector, region)?;
    let mut worst_up: Vec<Option<WorstPoint>> = vec![None; kernel.len()];
    let mut worst_low: Vec<Option<WorstPoint>> = vec![None; kernel.len()];
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(k, i, t, z, p) in &pts {
        let x = kernel.grid.x(i);
        let cu = upper_constant(p, t, z);
        let cl = lower_constant(p, t, z);
        if worst_up[k].is_none_or(|w| cu > w.c) {
            worst_up[k] = Some(WorstPoint { t, x, z, c: cu });
        }
        if worst_low[k].is_none_or(|w| cl > w.c) {
            worst_low[k] = Some(WorstPoint { t, x, z, c: cl });
        }
        let (u, v) = (z * z / t, (p * t.sqrt()).ln());
        sx += u;
        sy += v;
        sxx += u * u;
        sxy += u * v;
    }
    let n = pts.len() as f64;
    let den = n * sxx - sx * sx;
    let slope = if den > 0.0 {
        (n * sxy - sx * sy) / den
    } else {
        f64::NAN
    };
    let worst_up: Vec<WorstPoint> = worst_up.into_iter().flatten().collect();
    let worst_low: Vec<WorstPoint> = worst_low.into_iter().flatten().collect();
    Ok(GaussianFitReport {
        c_up: worst_up.iter().map(|w| w.c).fold(0.0, f64::max),
        c_low: worst_low.iter().map(|w| w.c).fold(0.0, f64::max),
        worst_up,
        worst_low,
        points: pts.len(),
        region: *region,
        collapse_slope: slope,
        collapse_intercept: (sy - slope * sx) / n,
    })
}

impl GaussianFitReport {
    /// Largest relative change of either constant against `other`.
    pub fn relative_change(&self, other: &GaussianFitReport) -> f64 {
        ((self.c_up - other.c_up).abs() / other.c_up)
            .max((self.c_low - other.c_low).abs() / other.c_low)
    }

    /// How much worse this fit is than `baseline`: the larger growth factor
    /// of the two constants.
    pub fn degradation(&self, baseline: &GaussianFitReport) -> f64 {
        (self.c_up / baseline.c_up).max(self.c_low / baseline.c_low)
    }

    /// Exponent constant implied by the collapse slope.
    pub fn collapse_constant(&self) -> f64 {
        -1.0 / self.collapse_slope
    }

    pub fn checks(&self, prefix: &str) -> Vec<Check> {
        let finite = |c: f64| if c.is_finite() { c } else { f64::INFINITY };
        vec![
            Check::at_most(format!("{prefix}.c_up"), finite(self.c_up), 1e6)
                .with_detail(format!("{} points", self.points)),
            Check::at_most(format!("{prefix}.c_low"), finite(self.c_low), 1e6),
            Check::info(
                format!("{prefix}.collapse_constant"),
                self.collapse_constant(),
            ),
        ]
    }
}

/// `t,x,z2_over_t,ln_p_sqrt_t` for the points of the fit region.
pub fn collapse_csv(
    kernel: &KernelTable,
    corrector: &CorrectorSolution,
    region: &FitRegion,
) -> Result<String> {
    let mut s = String::from("t,x,z2_over_t,ln_p_sqrt_t\n");
    for (_, i, t, z, p) in region_points(kernel, corrector, region)? {
        s.push_str(&format!(
            "{t},{},{:.10e},{:.10e}\n",
            kernel.grid.x(i),
            z * z / t,
            (p * t.sqrt()).ln()
        ));
    }
    Ok(s)
}

/// Quotient `U φ(y) / (φ(x) e^{γt})` with `T_γ`, `W_γ` in place of `T`, `W`.
pub fn original_quotient(original: &OriginalKernel) -> Result<(KernelTable, CorrectorSolution)> {
    let s = &original.summary;
    let lnphi = &s.right.lnphi;
    let mut q = original.route_a.clone();
    let j = q.source;
    for (k, row) in q.values.iter_mut().enumerate() {
        let g = s.gamma * (q.times[k] - q.start);
        for (i, v) in row.iter_mut().enumerate() {
            *v *= (lnphi[j] - lnphi[i] - g).exp();
        }
    }
    q.w = s.w_gamma;
    let t_gamma = CorrectorSolution::from_values(
        q.grid,
        s.t_gamma.clone(),
        s.w_gamma,
        CorrectorKind::Direct,
    )?;
    Ok((q, t_gamma))
}

pub fn verify_original_bounds(
    original: &OriginalKernel,
    region: &FitRegion,
) -> Result<GaussianFitReport> {
    let (q, t_gamma) = original_quotient(original)?;
    fit_gaussian_constants(&q, &t_gamma, region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{heat_kernel, KernelOptions, Problem};
    use crate::medium::Medium;
    use crate::Grid;
    use proptest::prelude::*;

    fn unit_kernel(w: f64, h: f64) -> (KernelTable, CorrectorSolution) {
        let one = |_: f64| 1.0;
        let grid = Grid::with_spacing(20.0, h).unwrap();
        let p = Problem::new(Medium::new(grid, &one, &one), w, 1.0).unwrap();
        let times: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
        let table = heat_kernel(&p, 0.0, &times, &KernelOptions::default()).unwrap();
        let ones = vec![1.0; grid.len()];
        let mut corr = CorrectorSolution::identity(grid, &ones, CorrectorKind::Direct);
        corr.w = w;
        (table, corr)
    }

    #[test]
    fn exact_gaussian_constants() {
        let s4pi = (4.0 * std::f64::consts::PI).sqrt();
        // At z = 0 both constraints are tight at sqrt(4π)^{±1}.
        let p0 = 1.0 / s4pi;
        assert!((upper_constant(p0, 1.0, 0.0) - 1.0 / s4pi).abs() < 1e-4 / s4pi);
        assert!((lower_constant(p0, 1.0, 0.0) - s4pi).abs() < 1e-3);
        // Far out the upper constant creeps up towards 4.
        let c = |z: f64| upper_constant(p0 * (-z * z / 4.0f64).exp(), 1.0, z);
        assert!(c(10.0) < c(20.0) && c(20.0) < c(30.0));
        assert!(c(30.0) > 3.9 && c(30.0) < 4.0, "{}", c(30.0));
    }

    proptest! {
        #[test]
        fn per_point_constants_satisfy_their_bounds(lnp in -30.0f64..2.0, t in 0.05f64..5.0, z in -10.0f64..10.0) {
            let p = lnp.exp();
            let cu = upper_constant(p, t, z);
            prop_assert!(cu.ln() - 0.5 * t.ln() - z * z / (cu * t) >= lnp - 1e-9);
            let below = cu / (1.0 + 2e-4);
            prop_assert!(below.ln() - 0.5 * t.ln() - z * z / (below * t) < lnp + 1e-9);
            let cl = lower_constant(p, t, z);
            prop_assert!(cl >= 1.0);
            prop_assert!(-cl.ln() - 0.5 * t.ln() - cl * z * z / t <= lnp + 1e-9);
        }
    }

    #[test]
    fn constant_kernel_fit() {
        let (table, corr) = unit_kernel(1.0, 0.05);
        let fit = fit_gaussian_constants(&table, &corr, &FitRegion::default()).unwrap();
        let s4pi = (4.0 * std::f64::consts::PI).sqrt();
        assert!((fit.c_low - s4pi).abs() < 0.05 * s4pi, "{}", fit.c_low);
        assert!(fit.c_up > 3.0 && fit.c_up < 3.3, "{}", fit.c_up);
        assert!(
            (fit.collapse_slope + 0.25).abs() < 5e-3,
            "{}",
            fit.collapse_slope
        );
        assert_eq!(fit.worst_up.len(), 10);
        // Widening the region pushes the upper constant towards 4.
        let wide = FitRegion {
            z_factor: Some(8.0),
            ..FitRegion::default()
        };
        let fit_wide = fit_gaussian_constants(&table, &corr, &wide).unwrap();
        assert!(
            fit_wide.c_up > fit.c_up && fit_wide.c_up < 4.0,
            "{}",
            fit_wide.c_up
        );
    }

    #[test]
    fn misplaced_centre_degrades_fit() {
        let (table, corr) = unit_kernel(1.0, 0.05);
        let base = fit_gaussian_constants(&table, &corr, &FitRegion::default()).unwrap();
        let mut wrong = table.clone();
        wrong.w = -1.0;
        let bad = fit_gaussian_constants(&wrong, &corr, &FitRegion::default()).unwrap();
        assert!(bad.degradation(&base) > 2.0, "{}", bad.degradation(&base));
    }

    #[test]
    fn empty_region_is_an_error() {
        let (table, corr) = unit_kernel(0.0, 0.1);
        let r = FitRegion {
            t_min: 5.0,
            t_max: 6.0,
            ..FitRegion::default()
        };
        assert!(matches!(
            fit_gaussian_constants(&table, &corr, &r),
            Err(Error::EmptyTrustRegion(_))
        ));
    }

    #[test]
    fn collapse_csv_has_header_and_rows() {
        let (table, corr) = unit_kernel(0.0, 0.1);
        let csv = collapse_csv(&table, &corr, &FitRegion::default()).unwrap();
        assert!(csv.starts_with("t,x,z2_over_t,ln_p_sqrt_t\n"));
        assert!(csv.lines().count() > 100);
    }
}
