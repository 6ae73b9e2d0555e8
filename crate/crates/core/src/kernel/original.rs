use super::heat::{heat_kernel, table_from, KernelOptions, KernelTable, Problem};
use crate::eigen::{spectral_summary, EigenOptions, SpectralSummary};
use crate::fields::{CoefficientField, FieldRole, Profile};
use crate::medium::Medium;
use crate::{Grid, Result};

/// Fundamental solution `U` of `u_t = (a u_x)_x + r u` by two routes.
#[derive(Clone, Debug)]
pub struct OriginalKernel {
    /// Direct solve with datum `delta_y`.
    pub route_a: KernelTable,
    /// `U` rebuilt from the canonical kernel.
    pub route_b: KernelTable,
    /// The canonical kernel `P` for `(nu_γ, W_γ)`.
    pub canonical: KernelTable,
    pub summary: SpectralSummary,
    /// Largest over usable times of `sup |U_A - U_B| / sup |U_A|` on the
    /// trust region.
    pub sup_rel_diff: f64,
}

/// Canonical problem induced by the eigenpair at `γ`.
pub fn induced_problem(a: &dyn Profile, summary: &SpectralSummary, grid: &Grid) -> Result<Problem> {
    let nu = &summary.nu_gamma.values;
    let mu = nu
        .iter()
        .zip(&summary.right.a)
        .flat_map(|(&n, &av)| [n, 1.0 / n, n * av, 1.0 / (n * av)])
        .fold(1.0, f64::max);
    let field = CoefficientField::from_node_samples(grid, nu, mu, FieldRole::Canonical);
    Problem::new(Medium::new(*grid, a, &field), summary.w_gamma, mu)
}

#[allow(clippy::too_many_arguments)]
pub fn heat_kernel_original(
    a: &dyn Profile,
    r: &dyn Profile,
    gamma: f64,
    y: f64,
    times: &[f64],
    grid: &Grid,
    mu: f64,
    opts: &KernelOptions,
    eigen_opts: &EigenOptions,
) -> Result<OriginalKernel> {
    let summary = spectral_summary(a, r, gamma, grid, eigen_opts)?;
    let direct = Problem::new(Medium::original(*grid, a, r), 0.0, mu)?;
    let j = direct.source_index(y)?;
    let route_a = table_from(
        &direct,
        y,
        j,
        direct.delta(j),
        0.0,
        times,
        opts,
        false,
        |_, _| Ok(()),
    )?;

    let induced = induced_problem(a, &summary, grid)?;
    let canonical = heat_kernel(&induced, y, times, opts)?;
    let lnphi = &summary.right.lnphi;
    let nu_y = induced.medium.nu()[j];
    let mut route_b = canonical.clone();
    for (k, row) in route_b.values.iter_mut().enumerate() {
        let growth = gamma * times[k];
        for (i, v) in row.iter_mut().enumerate() {
            *v *= nu_y * (lnphi[i] - lnphi[j] + growth).exp();
        }
    }
    route_b.mass = route_b
        .values
        .iter()
        .map(|p| direct.medium.mass(p))
        .collect();
    route_b.mu = route_a.mu.max(induced.mu);

    let mut worst: f64 = 0.0;
    for k in 0..times.len() {
        if !(route_a.usable(k) && canonical.usable(k)) {
            continue;
        }
        let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
        for i in 0..grid.len() {
            if route_a.trusted(k, i) && canonical.trusted(k, i) {
                diff = diff.max((route_a.values[k][i] - route_b.values[k][i]).abs());
                scale = scale.max(route_a.values[k][i].abs());
            }
        }
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        }
    }
    Ok(OriginalKernel {
        route_a,
        route_b,
        canonical,
        summary,
        sup_rel_diff: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(z: f64, t: f64) -> f64 {
        (-z * z / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt()
    }

    #[test]
    fn free_case_both_routes_give_heat_kernel() {
        let grid = Grid::with_spacing(14.0, 0.025).unwrap();
        let one = |_: f64| 1.0;
        let zero = |_: f64| 0.0;
        let times = [0.25, 0.5, 1.0];
        let out = heat_kernel_original(
            &one,
            &zero,
            1.0,
            0.0,
            &times,
            &grid,
            1.0,
            &KernelOptions::default(),
            &EigenOptions::default(),
        )
        .unwrap();
        assert!((out.summary.w_gamma - 2.0).abs() < 1e-6);
        for (k, &t) in times.iter().enumerate() {
            for (i, x) in grid.nodes().into_iter().enumerate() {
                if x.abs() <= 4.0 * t.sqrt() {
                    let e = gaussian(x, t);
                    assert!((out.route_a.values[k][i] - e).abs() < 1e-2 * e);
                    assert!((out.route_b.values[k][i] - e).abs() < 1e-2 * e, "{x} {t}");
                }
            }
        }
        assert!(out.sup_rel_diff < 1e-2, "{}", out.sup_rel_diff);
    }

    #[test]
    fn constant_rate_shifts_by_exponential() {
        let grid = Grid::with_spacing(10.0, 0.025).unwrap();
        let one = |_: f64| 1.0;
        let c = |_: f64| 0.5;
        let out = heat_kernel_original(
            &one,
            &c,
            1.5,
            0.0,
            &[0.5],
            &grid,
            1.0,
            &KernelOptions::default(),
            &EigenOptions::default(),
        )
        .unwrap();
        let i = grid.center();
        let e = (0.5f64 * 0.5).exp() * gaussian(0.0, 0.5);
        assert!((out.route_a.values[0][i] - e).abs() < 1e-3 * e);
        assert!((out.route_b.values[0][i] - e).abs() < 1e-3 * e);
    }
}
