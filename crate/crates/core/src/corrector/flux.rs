//! Flux route: `q = a nu T'` is the bounded solution of
//! `q' = (W/(a nu)) q - W nu`, obtained by integrating from the right.

use super::{CorrectorKind, CorrectorSolution, Route};
use crate::fields::{Profile, Reflected};
use crate::{Error, Grid, Result};

/// Frozen-coefficient pieces per grid segment.
const PIECES: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct FluxProfile {
    pub grid: Grid,
    pub q: Vec<f64>,
    pub w: f64,
    /// Length of the discarded relaxation margin beyond the right edge.
    pub burn_in: f64,
}

/// Exact integrals over one frozen piece `[x_hi - d, x_hi]`.
struct Piece {
    q_lo: f64,
    /// `int q/(a nu)`
    dt: f64,
    /// `int q^2/(a nu)`
    energy: f64,
}

fn piece(an: f64, nu: f64, w: f64, d: f64, q_hi: f64) -> Piece {
    let fixed = an * nu;
    let c = q_hi - fixed;
    let k = w / an;
    let kd = k * d;
    // (1 - e^{-kd})/k and (1 - e^{-2kd})/(2k), stable for small kd
    let g1 = if kd.abs() < 1e-8 {
        d * (1.0 - 0.5 * kd)
    } else {
        -(-kd).exp_m1() / k
    };
    let g2 = if kd.abs() < 1e-8 {
        d * (1.0 - kd)
    } else {
        -(-2.0 * kd).exp_m1() / (2.0 * k)
    };
    Piece {
        q_lo: fixed + c * (-kd).exp(),
        dt: (fixed * d + c * g1) / an,
        energy: (fixed * fixed * d + 2.0 * fixed * c * g1 + c * c * g2) / an,
    }
}

/// Integrates from `x_hi` down to `x_lo`; returns `(q(x_lo), int q/(a nu), int q^2/(a nu))`.
pub(crate) fn segment(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    x_lo: f64,
    x_hi: f64,
    q_hi: f64,
) -> (f64, f64, f64) {
    let d = (x_hi - x_lo) / PIECES as f64;
    let mut q = q_hi;
    let (mut t, mut e) = (0.0, 0.0);
    for k in (0..PIECES).rev() {
        let xm = x_lo + (k as f64 + 0.5) * d;
        let n = nu.eval(xm);
        let p = piece(a.eval(xm) * n, n, w, d, q);
        q = p.q_lo;
        t += p.dt;
        e += p.energy;
    }
    (q, t, e)
}

fn check_range(q: f64, x: f64, mu: f64) -> Result<()> {
    let (lo, hi) = (0.5 / mu.powi(3), 2.0 * mu.powi(3));
    if q.is_finite() && q >= lo && q <= hi {
        Ok(())
    } else {
        Err(Error::NonConvergence(format!(
            "flux q = {q} at x = {x} left [{lo}, {hi}]"
        )))
    }
}

/// Bounded flux profile for `W > 0`.
pub fn solve_flux_profile(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    grid: &Grid,
    mu: f64,
) -> Result<FluxProfile> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "flux route needs W > 0, got {w}"
        )));
    }
    let h = grid.spacing();
    let n = grid.len();
    let burn_in = ((10.0 * mu * mu / w).max(10.0) / h).ceil() * h;
    let right = grid.half_width();
    let start = right + burn_in;
    let (an, nn) = (a.eval(start) * nu.eval(start), nu.eval(start));
    let mut q = an * nn;
    let steps = (burn_in / h).round() as usize;
    for k in (0..steps).rev() {
        let lo = right + k as f64 * h;
        q = segment(a, nu, w, lo, lo + h, q).0;
    }
    let mut out = vec![0.0; n];
    out[n - 1] = q;
    check_range(q, right, mu)?;
    for i in (0..n - 1).rev() {
        q = segment(a, nu, w, grid.x(i), grid.x(i + 1), q).0;
        check_range(q, grid.x(i), mu)?;
        out[i] = q;
    }
    Ok(FluxProfile {
        grid: *grid,
        q: out,
        w,
        burn_in,
    })
}

/// Integrates `T' = q/(a nu)` from the origin, segment by segment with the
/// same frozen pieces that produced `q`.
pub fn corrector_from_flux(
    profile: &FluxProfile,
    a: &dyn Profile,
    nu: &dyn Profile,
) -> Result<CorrectorSolution> {
    let g = profile.grid;
    let n = g.len();
    let mut dts = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let (q_lo, dt, _) = segment(a, nu, profile.w, g.x(i), g.x(i + 1), profile.q[i + 1]);
        let r = (q_lo - profile.q[i]).abs() / profile.q[i].abs();
        if !(r < 1e-9) {
            return Err(Error::NonConvergence(format!(
                "flux samples inconsistent at x = {} (relative residual {r:e})",
                g.x(i)
            )));
        }
        dts[i] = dt;
    }
    let c = g.center();
    let mut t = vec![0.0; n];
    for i in c + 1..n {
        t[i] = t[i - 1] + dts[i - 1];
    }
    for i in (0..c).rev() {
        t[i] = t[i + 1] - dts[i];
    }
    let tprime = (0..n)
        .map(|i| {
            let x = g.x(i);
            profile.q[i] / (a.eval(x) * nu.eval(x))
        })
        .collect();
    Ok(CorrectorSolution::assemble(
        g,
        t,
        tprime,
        profile.q.clone(),
        profile.w,
        Route::FluxQuadrature,
        CorrectorKind::Direct,
    ))
}

fn node_products(a: &dyn Profile, nu: &dyn Profile, grid: &Grid) -> Vec<f64> {
    (0..grid.len())
        .map(|i| a.eval(grid.x(i)) * nu.eval(grid.x(i)))
        .collect()
}

fn mirror(sol: CorrectorSolution, w: f64, kind: CorrectorKind) -> CorrectorSolution {
    let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
    let t = sol.t.iter().rev().map(|v| -v).collect();
    CorrectorSolution::assemble(
        sol.grid,
        t,
        rev(&sol.tprime),
        rev(&sol.q),
        w,
        sol.route,
        kind,
    )
}

/// Corrector for any real `W`: reflection for `W < 0`, `T(x) = x` for `W = 0`.
pub fn solve_corrector(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    grid: &Grid,
    mu: f64,
) -> Result<CorrectorSolution> {
    if w == 0.0 {
        return Ok(CorrectorSolution::identity(
            *grid,
            &node_products(a, nu, grid),
            CorrectorKind::Direct,
        ));
    }
    if w < 0.0 {
        let (ra, rn) = (Reflected(a), Reflected(nu));
        let s = solve_corrector(&ra, &rn, -w, grid, mu)?;
        return Ok(mirror(s, w, CorrectorKind::Direct));
    }
    let profile = solve_flux_profile(a, nu, w, grid, mu)?;
    corrector_from_flux(&profile, a, nu)
}

/// Adjoint corrector `T̃(x) = -S(-x)`, with `S` the corrector of the
/// reflected field.
pub fn adjoint_corrector(
    a: &dyn Profile,
    nu: &dyn Profile,
    w: f64,
    grid: &Grid,
    mu: f64,
) -> Result<CorrectorSolution> {
    let (ra, rn) = (Reflected(a), Reflected(nu));
    let s = solve_corrector(&ra, &rn, w, grid, mu)?;
    Ok(mirror(s, w, CorrectorKind::Adjoint))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::integrate;

    fn grid() -> Grid {
        Grid::with_spacing(10.0, 0.05).unwrap()
    }

    fn cells(x: f64) -> f64 {
        if x.floor().rem_euclid(2.0) == 0.0 {
            0.5
        } else {
            2.0
        }
    }

    #[test]
    fn unit_coefficients_give_identity() {
        let one = |_: f64| 1.0;
        for w in [0.3, 1.0, 5.0] {
            let s = solve_corrector(&one, &one, w, &grid(), 1.0).unwrap();
            for i in 0..s.grid.len() {
                assert!((s.q[i] - 1.0).abs() < 1e-13);
                assert!((s.t[i] - s.grid.x(i)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn constant_weight_two() {
        let one = |_: f64| 1.0;
        let two = |_: f64| 2.0;
        let s = solve_corrector(&one, &two, 1.0, &grid(), 2.0).unwrap();
        for i in 0..s.grid.len() {
            assert!((s.q[i] - 4.0).abs() < 1e-12);
            assert!((s.tprime[i] - 2.0).abs() < 1e-12);
            assert!((s.t[i] - 2.0 * s.grid.x(i)).abs() < 1e-10);
        }
    }

    // q(x) = int_x^inf W nu(s) exp(-int_x^s W/(a nu)) ds, evaluated by adaptive quadrature
    fn q_oracle(a: &dyn Profile, w: f64, x: f64) -> f64 {
        let mut total = 0.0;
        let mut decay = 0.0;
        let mut lo = x;
        while decay < 60.0 {
            let hi = lo.floor() + 1.0;
            let hi = if hi - lo < 1e-12 { hi + 1.0 } else { hi };
            let k = w / a.eval(0.5 * (lo + hi));
            let (v, _) = integrate(|s| w * (-(decay + k * (s - lo))).exp(), lo, hi, 1e-14);
            total += v;
            decay += k * (hi - lo);
            lo = hi;
        }
        total
    }

    #[test]
    fn piecewise_flux_matches_quadrature() {
        let one = |_: f64| 1.0;
        let s = solve_corrector(&cells, &one, 1.0, &grid(), 2.0).unwrap();
        for &x in &[-7.3, -2.0, 0.0, 0.45, 3.5, 6.0] {
            let i = s.grid.nearest(x);
            let exact = q_oracle(&cells, 1.0, s.grid.x(i));
            assert!(
                (s.q[i] - exact).abs() / exact < 1e-4,
                "x = {x}: {} vs {exact}",
                s.q[i]
            );
        }
    }

    #[test]
    fn negative_drift_uses_reflection() {
        let one = |_: f64| 1.0;
        let nu = |x: f64| 1.0 + 0.3 * x.sin();
        let g = grid();
        let s = solve_corrector(&cells, &nu, -1.0, &g, 2.0).unwrap();
        assert_eq!(s.t[g.center()], 0.0);
        assert!(s.tprime.iter().all(|&v| v > 0.0));
        // W -> -W, x -> -x symmetry of the constant case
        let c = solve_corrector(&one, &one, -2.0, &g, 1.0).unwrap();
        assert!((c.t[0] - g.x(0)).abs() < 1e-10);
    }

    #[test]
    fn zero_drift_convention() {
        let s = solve_corrector(&cells, &cells, 0.0, &grid(), 2.0).unwrap();
        assert_eq!(s.t, s.grid.nodes());
        assert_eq!(s.m_hat, 1.0);
    }

    #[test]
    fn adjoint_of_unit_field_is_identity() {
        let one = |_: f64| 1.0;
        let s = adjoint_corrector(&one, &one, 1.0, &grid(), 1.0).unwrap();
        for i in 0..s.grid.len() {
            assert!((s.t[i] - s.grid.x(i)).abs() < 1e-11);
        }
    }

    #[test]
    fn wrong_bounds_are_reported() {
        let one = |_: f64| 1.0;
        let big = |_: f64| 6.0;
        assert!(matches!(
            solve_flux_profile(&one, &big, 1.0, &grid(), 1.0),
            Err(Error::NonConvergence(_))
        ));
        assert!(solve_flux_profile(&one, &one, 0.0, &grid(), 1.0).is_err());
    }
}
