use super::heat::{heat_kernel, KernelOptions, Problem, MIN_RELIABLE_STEPS};
use crate::corrector::CorrectorSolution;
use crate::verify::Check;
use crate::{Error, Grid, Result};

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Compares `P(t, x, y)` from a solve started at `y` with `P̂(t, y, x)` from
/// the reversed-drift solve started at `x`.
pub fn duality_check(
    problem: &Problem,
    t: f64,
    x: f64,
    y: f64,
    opts: &KernelOptions,
) -> Result<Check> {
    let forward = heat_kernel(problem, y, &[t], opts)?;
    let backward = heat_kernel(&problem.adjoint(), x, &[t], opts)?;
    let p = forward.at(0, x).expect("x is a node");
    let q = backward.at(0, y).expect("y is a node");
    let mut check = Check::at_most("kernel.duality", rel(p, q), 1e-3)
        .with_detail(format!("t={t} x={x} y={y} P={p:.6e} P_adj={q:.6e}"));
    if forward.boundary_contamination() || backward.boundary_contamination() {
        check = check.with_detail(format!("t={t} x={x} y={y} boundary contamination"));
    }
    Ok(check)
}

/// Compares `P(t + s, x, y)` with `sum_z nu(z) P(t, x, z) P(s, z, y) h`.
/// `P(t, x, ·)` comes from the reversed-drift solve started at `x`.
pub fn chapman_kolmogorov_check(
    problem: &Problem,
    t: f64,
    s: f64,
    x: f64,
    y: f64,
    opts: &KernelOptions,
) -> Result<Check> {
    if !(t > 0.0 && s > 0.0) {
        return Err(Error::InvalidArgument(
            "semigroup check needs t, s > 0".into(),
        ));
    }
    let times = if (t - s).abs() < 1e-14 {
        vec![s, t + s]
    } else if s < t {
        vec![s, t, t + s]
    } else {
        vec![t, s, t + s]
    };
    let forward = heat_kernel(problem, y, &times, opts)?;
    let backward = heat_kernel(&problem.adjoint(), x, &[t], opts)?;
    let ks = forward.time_index(s).expect("s is an output");
    let kts = forward.time_index(t + s).expect("t + s is an output");
    let steps_s = forward.steps[ks];
    let steps_t = backward.steps[0];
    if steps_s < MIN_RELIABLE_STEPS || steps_t < MIN_RELIABLE_STEPS {
        return Ok(Check::info("kernel.chapman_kolmogorov", f64::NAN).with_detail(format!(
            "skipped: {steps_t} and {steps_s} steps, at least {MIN_RELIABLE_STEPS} needed to resolve the datum"
        )));
    }
    let h = problem.grid().spacing();
    let nu = problem.medium.nu();
    let composed: f64 = (0..nu.len())
        .map(|z| nu[z] * backward.values[0][z] * forward.values[ks][z])
        .sum::<f64>()
        * h;
    let direct = forward.at(kts, x).expect("x is a node");
    Ok(
        Check::at_most("kernel.chapman_kolmogorov", rel(direct, composed), 1e-2).with_detail(
            format!("t={t} s={s} x={x} y={y} direct={direct:.6e} composed={composed:.6e}"),
        ),
    )
}

/// Residual of the discrete adjoint operator applied to the Gaussian
/// barrier `rho(t, x) = exp(-(T̃(x) - (t - 1) W)² / (sigma (2 - t)))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupersolutionResidual {
    pub sigma: f64,
    /// Most negative residual over the sampled times and interior nodes.
    pub min_residual: f64,
    /// Largest magnitude of the time-derivative term, for scale.
    pub scale: f64,
    pub times: Vec<f64>,
}

impl SupersolutionResidual {
    /// Negative part of the residual relative to the scale, against `c h`.
    pub fn check(&self, h: f64, c: f64) -> Check {
        let violation = (-self.min_residual).max(0.0) / self.scale;
        Check::at_most("kernel.supersolution_residual", violation, c * h).with_detail(format!(
            "sigma={:.4} min_residual={:.3e}",
            self.sigma, self.min_residual
        ))
    }
}

/// Evaluates `-nu rho_t - (nu a rho_x)_x - W rho_x` with the flux stencil of
/// the reversed drift and the exact time derivative, at `samples` times in
/// `(0, 1)`, restricted to `|x| <= x_max`.
pub fn supersolution_residual(
    problem: &Problem,
    adjoint: &CorrectorSolution,
    samples: usize,
    x_max: f64,
) -> Result<SupersolutionResidual> {
    if adjoint.grid != *problem.grid() {
        return Err(Error::InvalidArgument(
            "corrector grid differs from the problem grid".into(),
        ));
    }
    let big_m = adjoint.big_m_hat;
    let sigma = 4.0 * big_m * big_m;
    let w = problem.w;
    let grid = problem.grid();
    let n = grid.len();
    let op = problem.medium.operator(-w);
    let nu = problem.medium.nu();
    let tt = &adjoint.t;
    let mut rho = vec![0.0; n];
    let mut a_rho = vec![0.0; n];
    let mut out = SupersolutionResidual {
        sigma,
        min_residual: f64::INFINITY,
        scale: 0.0,
        times: (1..=samples)
            .map(|k| k as f64 / (samples + 1) as f64)
            .collect(),
    };
    for &t in &out.times {
        let den = sigma * (2.0 - t);
        for i in 0..n {
            let z = tt[i] - (t - 1.0) * w;
            rho[i] = (-z * z / den).exp();
        }
        op.mul_vec(&rho, &mut a_rho);
        for i in 1..n - 1 {
            if grid.x(i).abs() > x_max {
                continue;
            }
            let z = tt[i] - (t - 1.0) * w;
            let rho_t = rho[i] * (2.0 * z * w / den - z * z / (den * (2.0 - t)));
            let r = -nu[i] * rho_t - a_rho[i];
            out.min_residual = out.min_residual.min(r);
            out.scale = out.scale.max((nu[i] * rho_t).abs());
        }
    }
    if out.scale == 0.0 {
        return Err(Error::DegenerateSample(
            "barrier vanishes on the sampled window".into(),
        ));
    }
    Ok(out)
}

/// Successive changes of `P(t, x, y)` at probe points under two halvings of
/// the spacing. Passes when the second change is smaller than the first.
pub fn grid_convergence_check(
    build: impl Fn(&Grid) -> Result<Problem>,
    grid: &Grid,
    y: f64,
    t: f64,
    probes: &[f64],
    opts: &KernelOptions,
) -> Result<Check> {
    let values = (0..3)
        .map(|k| {
            let g = grid.refined(k);
            let table = heat_kernel(&build(&g)?, y, &[t], opts)?;
            probes
                .iter()
                .map(|&x| {
                    table
                        .at(0, x)
                        .ok_or_else(|| Error::InvalidArgument(format!("probe {x} is not a node")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let change = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    };
    let first = change(&values[0], &values[1]);
    let second = change(&values[1], &values[2]);
    let ratio = if second > 0.0 {
        first / second
    } else {
        f64::INFINITY
    };
    Ok(
        Check::at_least("kernel.grid_convergence", ratio, 1.0).with_detail(format!(
            "changes {first:.3e} then {second:.3e}; observed order {:.2}",
            ratio.log2()
        )),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrector::adjoint_corrector;
    use crate::medium::Medium;

    fn unit(w: f64) -> Problem {
        let one = |_: f64| 1.0;
        Problem::new(
            Medium::new(Grid::with_spacing(10.0, 0.05).unwrap(), &one, &one),
            w,
            1.0,
        )
        .unwrap()
    }

    fn wavy(w: f64) -> (Problem, impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
        let a = |x: f64| 1.0 + 0.5 * (2.3 * x).cos();
        let nu = |x: f64| 1.0 + 0.4 * (1.7 * x).sin();
        let grid = Grid::with_spacing(12.0, 0.05).unwrap();
        (
            Problem::new(Medium::new(grid, &a, &nu), w, 2.0).unwrap(),
            a,
            nu,
        )
    }

    #[test]
    fn duality_is_exact_at_the_discrete_level() {
        let o = KernelOptions::default();
        assert!(
            duality_check(&unit(0.0), 0.5, 0.5, -0.3, &o)
                .unwrap()
                .measured
                < 1e-10
        );
        assert!(
            duality_check(&unit(1.0), 0.5, 0.5, -0.3, &o)
                .unwrap()
                .measured
                < 1e-3
        );
        let (p, _, _) = wavy(1.5);
        let c = duality_check(&p, 0.7, 1.0, 0.0, &o).unwrap();
        assert!(c.pass && c.measured < 1e-8, "{c:?}");
    }

    #[test]
    fn chapman_kolmogorov_holds() {
        let o = KernelOptions::default();
        let c = chapman_kolmogorov_check(&unit(1.0), 0.5, 0.5, 1.0, 0.0, &o).unwrap();
        assert!(c.measured < 1e-3, "{c:?}");
        let (p, _, _) = wavy(1.0);
        let c = chapman_kolmogorov_check(&p, 0.25, 0.4, 0.5, 0.0, &o).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn early_semigroup_check_is_skipped() {
        let o = KernelOptions::default();
        let c = chapman_kolmogorov_check(&unit(0.0), 1e-4, 0.5, 0.0, 0.0, &o).unwrap();
        assert!(c.pass && c.measured.is_nan());
        assert!(c.detail.unwrap().starts_with("skipped"));
    }

    #[test]
    fn barrier_is_a_supersolution() {
        let (p, a, nu) = wavy(1.0);
        let adj = adjoint_corrector(&a, &nu, 1.0, p.grid(), 2.0).unwrap();
        let r = supersolution_residual(&p, &adj, 19, 8.0).unwrap();
        let c = r.check(p.grid().spacing(), 1.0);
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn barrier_with_small_sigma_fails() {
        let (p, a, nu) = wavy(1.0);
        let mut adj = adjoint_corrector(&a, &nu, 1.0, p.grid(), 2.0).unwrap();
        adj.big_m_hat *= 0.3;
        let r = supersolution_residual(&p, &adj, 19, 8.0).unwrap();
        assert!(!r.check(p.grid().spacing(), 1.0).pass);
    }

    #[test]
    fn kernel_converges_under_refinement() {
        let a = |x: f64| 1.0 + 0.5 * (2.3 * x).cos();
        let nu = |x: f64| 1.0 + 0.4 * (1.7 * x).sin();
        let grid = Grid::with_spacing(8.0, 0.1).unwrap();
        let c = grid_convergence_check(
            |g| Problem::new(Medium::new(*g, &a, &nu), 1.0, 2.0),
            &grid,
            0.0,
            0.5,
            &[0.0, 0.5, 1.0],
            &KernelOptions::default(),
        )
        .unwrap();
        assert!(c.pass && c.measured > 2.5, "{c:?}");
    }
}
