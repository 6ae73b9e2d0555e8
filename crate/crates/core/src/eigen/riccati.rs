//! Decaying solutions by a fourth-order Magnus integrator for the linear
//! system `(φ, a φ')' = [[0, 1/a], [γ - r, 0]] (φ, a φ')`, carried in
//! normalized form so that neither growth nor decay can overflow.

use super::{EigenOptions, EigenPair, Side};
use crate::fields::Profile;
use crate::{Error, Grid, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Propagator over `[x, x + d]` (`d` may be negative).
fn propagator(a: &dyn Profile, r: &dyn Profile, gamma: f64, x: f64, d: f64) -> [f64; 4] {
    let x1 = x + d * (0.5 - SQRT3 / 6.0);
    let x2 = x + d * (0.5 + SQRT3 / 6.0);
    let (b1, b2) = (1.0 / a.eval(x1), 1.0 / a.eval(x2));
    let (g1, g2) = (gamma - r.eval(x1), gamma - r.eval(x2));
    let beta = 0.5 * d * (b1 + b2);
    let zeta = 0.5 * d * (g1 + g2);
    let kappa = SQRT3 * d * d / 12.0 * (b2 * g1 - b1 * g2);
    let s2 = kappa * kappa + beta * zeta;
    let (c, sh) = if s2 > 1e-8 {
        let s = s2.sqrt();
        (s.cosh(), s.sinh() / s)
    } else if s2 < -1e-8 {
        let s = (-s2).sqrt();
        (s.cos(), s.sin() / s)
    } else {
        (
            1.0 + s2 / 2.0 + s2 * s2 / 24.0,
            1.0 + s2 / 6.0 + s2 * s2 / 120.0,
        )
    };
    [c + sh * kappa, sh * beta, sh * zeta, c - sh * kappa]
}

struct State {
    p: f64,
    s: f64,
    log_scale: f64,
}

impl State {
    fn apply(&mut self, m: [f64; 4]) {
        let p = m[0] * self.p + m[1] * self.s;
        let s = m[2] * self.p + m[3] * self.s;
        let norm = p.hypot(s);
        self.p = p / norm;
        self.s = s / norm;
        self.log_scale += norm.ln();
    }
}

fn scan(f: &dyn Profile, grid: &Grid) -> (f64, f64) {
    let h = grid.spacing();
    (0..2 * grid.len() - 1)
        .map(|k| f.eval(-grid.half_width() + 0.5 * h * k as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// Decaying solution on the requested side, obtained by integrating towards
/// the grid from a relaxation margin beyond it, where the frozen-coefficient
/// decaying branch is used as the starting value.
pub fn solve_eigenfunction(
    a: &dyn Profile,
    r: &dyn Profile,
    gamma: f64,
    side: Side,
    grid: &Grid,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    let h = grid.spacing();
    let n = grid.len();
    let (a_lo, a_hi) = scan(a, grid);
    let (r_lo, r_hi) = scan(r, grid);
    let mu = a_hi.max(1.0 / a_lo);
    let gap = (gamma - r_hi).max(0.25 * (gamma - r_lo));
    if !(gap > 0.0) {
        return Err(Error::GammaBelowPrincipal {
            gamma,
            reason: format!("gamma does not exceed inf r = {r_lo}"),
        });
    }
    let burn_in = 20.0 / (gap / mu).sqrt();
    if burn_in > opts.burn_in_cap {
        return Err(Error::DomainTooSmall(format!(
            "relaxation margin {burn_in} exceeds the cap {}",
            opts.burn_in_cap
        )));
    }
    let burn_segments = (burn_in / h).ceil() as usize;
    let sub = opts.substeps.max(1);
    let d = h / sub as f64;
    let (dir, sign) = match side {
        Side::DecayRight => (-1.0, -1.0),
        Side::DecayLeft => (1.0, 1.0),
    };
    let edge = -dir * grid.half_width();
    let start = edge - dir * burn_segments as f64 * h;
    let w0 = sign * (a.eval(start) * (gamma - r.eval(start)).max(1e-3 * gap)).sqrt();
    let norm = 1f64.hypot(w0);
    let mut st = State {
        p: 1.0 / norm,
        s: w0 / norm,
        log_scale: norm.ln(),
    };
    let advance = |st: &mut State, x0: f64, check: bool| -> Result<()> {
        for k in 0..sub {
            let x = x0 + dir * k as f64 * d;
            st.apply(propagator(a, r, gamma, x, dir * d));
            if check && !(st.p > 0.0) {
                return Err(Error::GammaBelowPrincipal {
                    gamma,
                    reason: format!("eigenfunction changes sign near x = {x}"),
                });
            }
        }
        Ok(())
    };
    for k in 0..burn_segments {
        advance(&mut st, start + dir * k as f64 * h, false)?;
    }
    if st.p < 0.0 {
        st.p = -st.p;
        st.s = -st.s;
    }
    if st.p == 0.0 {
        return Err(Error::GammaBelowPrincipal {
            gamma,
            reason: "eigenfunction vanishes at the grid edge".into(),
        });
    }
    let order: Vec<usize> = match side {
        Side::DecayRight => (0..n).rev().collect(),
        Side::DecayLeft => (0..n).collect(),
    };
    let mut w = vec![0.0; n];
    let mut lnphi = vec![0.0; n];
    for (step, &i) in order.iter().enumerate() {
        if step > 0 {
            let prev = order[step - 1];
            advance(&mut st, grid.x(prev), true)?;
        }
        w[i] = st.s / st.p;
        lnphi[i] = st.log_scale + st.p.ln();
    }
    let l0 = lnphi[grid.center()];
    lnphi.iter_mut().for_each(|v| *v -= l0);
    Ok(EigenPair {
        gamma,
        side,
        grid: *grid,
        w,
        lnphi,
        a: grid.nodes().iter().map(|&x| a.eval(x)).collect(),
        burn_in: burn_segments as f64 * h,
    })
}

/// Sup over segments of the Riccati defect per unit length: `w` is carried
/// across each segment by an independent RK4 integration of
/// `w' = γ - r - w^2/a` (in the stable direction) and compared with the
/// stored value at the far end.
pub fn riccati_residual(pair: &EigenPair, a: &dyn Profile, r: &dyn Profile) -> f64 {
    const STEPS: usize = 16;
    let g = &pair.grid;
    let h = g.spacing();
    let gamma = pair.gamma;
    let mut worst = 0.0f64;
    for i in 0..g.len() - 1 {
        let (lo, hi) = (g.x(i), g.x(i + 1));
        let eps = 1e-9 * h;
        let f = |x: f64, w: f64| {
            let x = x.clamp(lo + eps, hi - eps);
            gamma - r.eval(x) - w * w / a.eval(x)
        };
        let (mut x, mut w, d, target) = match pair.side {
            Side::DecayRight => (hi, pair.w[i + 1], -h / STEPS as f64, pair.w[i]),
            Side::DecayLeft => (lo, pair.w[i], h / STEPS as f64, pair.w[i + 1]),
        };
        for _ in 0..STEPS {
            let k1 = f(x, w);
            let k2 = f(x + 0.5 * d, w + 0.5 * d * k1);
            let k3 = f(x + 0.5 * d, w + 0.5 * d * k2);
            let k4 = f(x + d, w + d * k3);
            w += d / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += d;
        }
        worst = worst.max((w - target).abs() / h);
    }
    worst
}
