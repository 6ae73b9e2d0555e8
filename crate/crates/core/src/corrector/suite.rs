//! Derived quantities and the invariant checks on a corrector pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::flow::FlowEvaluator;
use super::flux::segment;
use super::{CorrectorSolution, Route};
use crate::fields::Profile;
use crate::medium::Medium;
use crate::verify::Check;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveDiffusivity {
    /// Geometrically spaced abscissae, increasing.
    pub xs: Vec<f64>,
    /// `(1/x) int_0^x nu a (T')^2` at each abscissa.
    pub running: Vec<f64>,
    pub value: f64,
    /// Relative change of the running average over the last octave.
    pub last_octave_change: f64,
    pub converged: bool,
}

/// Running average of `nu a (T')^2 = q T'` over `[0, x]`.
pub fn effective_diffusivity(
    a: &dyn Profile,
    nu: &dyn Profile,
    corrector: &CorrectorSolution,
    x_max: f64,
) -> Result<EffectiveDiffusivity> {
    let g = corrector.grid;
    let h = g.spacing();
    if !(x_max > 2.0 * h && x_max <= g.half_width() * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "x_max = {x_max} must lie inside the grid"
        )));
    }
    let c = g.center();
    let last = c + (x_max / h).round() as usize;
    let exact = corrector.route == Route::FluxQuadrature && corrector.w != 0.0;
    let mut cumulative = vec![0.0; last - c + 1];
    for i in c..last {
        let e = if exact {
            segment(a, nu, corrector.w, g.x(i), g.x(i + 1), corrector.q[i + 1]).2
        } else {
            let inv: f64 = (0..8)
                .map(|k| {
                    let x = g.x(i) + (k as f64 + 0.5) * h / 8.0;
                    1.0 / (a.eval(x) * nu.eval(x))
                })
                .sum::<f64>()
                / 8.0;
            let slope = (corrector.t[i + 1] - corrector.t[i]) / h;
            slope * slope * h / inv
        };
        cumulative[i - c + 1] = cumulative[i - c] + e;
    }
    let mut xs = Vec::new();
    let mut x = g.x(last);
    while x >= (4.0 * h).max(1.0) {
        xs.push(x);
        x *= 0.5;
    }
    xs.reverse();
    let running: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let k = (x / h).round() as usize;
            cumulative[k] / (k as f64 * h)
        })
        .collect();
    let value = *running.last().unwrap_or(&f64::NAN);
    let last_octave_change = if running.len() >= 2 {
        (value - running[running.len() - 2]).abs() / value.abs()
    } else {
        f64::INFINITY
    };
    Ok(EffectiveDiffusivity {
        xs,
        running,
        value,
        last_octave_change,
        converged: last_octave_change < 0.01,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    pub mu: f64,
    pub samples: usize,
    pub seed: u64,
    pub t_max: f64,
    /// Sampled positions and offsets lie in `[-x_span, x_span]`.
    pub x_span: f64,
}

/// Bound envelopes, comparison of `T` with `T̃` and of the two flows, and the
/// smallest constant `C` with `|Δf| <= C |Δg| + C sqrt(t)` over random samples.
pub fn corrector_invariant_suite(
    corrector: &CorrectorSolution,
    adjoint: &CorrectorSolution,
    opts: &SuiteOptions,
) -> Vec<Check> {
    let mu = opts.mu;
    let (m, big_m) = (mu.powi(-5), mu.powi(5));
    let w = corrector.w;
    let mut out = vec![
        Check::at_least(
            "corrector.tprime_min",
            corrector.m_hat.min(adjoint.m_hat),
            m,
        ),
        Check::at_most(
            "corrector.tprime_max",
            corrector.big_m_hat.max(adjoint.big_m_hat),
            big_m,
        ),
    ];

    let fx = FlowEvaluator::new(corrector);
    let fy = FlowEvaluator::new(adjoint);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut lo_ratio, mut hi_ratio) = (f64::INFINITY, 0.0f64);
    let (mut xy, mut c_emp) = (0.0f64, 0.0f64);
    let mut skipped = 0usize;
    for _ in 0..opts.samples {
        let t = rng.random::<f64>() * opts.t_max;
        let y = rng.random_range(-opts.x_span..opts.x_span);
        let dx = rng.random_range(-opts.x_span..opts.x_span);
        let sample = || -> Result<(f64, f64, f64)> {
            let x_flow = fx.flow(t, y)?;
            let df = fx.t_at(dx + x_flow)? - w * t - fx.t_at(y)?;
            let sep = (x_flow - fy.flow(t, y)?).abs();
            let f = fx.t_at(y + dx)? - w * t - fx.t_at(y)?;
            let g = fy.t_at(y + dx)? - w * t - fy.t_at(y)?;
            Ok((df, sep, f.abs() / (g.abs() + t.sqrt())))
        };
        match sample() {
            Ok((df, sep, c)) => {
                if dx != 0.0 {
                    lo_ratio = lo_ratio.min(df.abs() / dx.abs());
                    hi_ratio = hi_ratio.max(df.abs() / dx.abs());
                }
                xy = xy.max(sep);
                c_emp = c_emp.max(c);
            }
            Err(_) => skipped += 1,
        }
    }
    let note = format!("{} samples, {skipped} left the grid", opts.samples);
    // The flows come from root finding; allow for its tolerance.
    let slack = 1e-9;
    out.push(
        Check::at_least("corrector.flow_sandwich_min", lo_ratio, m * (1.0 - slack))
            .with_detail(note.clone()),
    );
    out.push(
        Check::at_most(
            "corrector.flow_sandwich_max",
            hi_ratio,
            big_m * (1.0 + slack),
        )
        .with_detail(note.clone()),
    );

    if w != 0.0 {
        let tau = 4.0 * mu.powi(7) / w.abs();
        let diff = corrector
            .t
            .iter()
            .zip(&adjoint.t)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.push(Check::at_most("corrector.t_adjoint_gap", diff, tau));
        out.push(Check::at_most("corrector.flow_gap", xy, 2.0 * tau / m).with_detail(note.clone()));
    } else {
        out.push(Check::info("corrector.t_adjoint_gap", 0.0).with_detail("W = 0: not applicable"));
        out.push(Check::info("corrector.flow_gap", xy).with_detail("W = 0: not applicable"));
    }
    let c_theory = (big_m / m).max(2.0 * big_m / m * (4.0 * mu.powi(7)).sqrt());
    out.push(Check::at_most("corrector.f_g_constant", c_emp, c_theory).with_detail(note));
    out
}

/// `f(t, x) = T(x) - W t` in the discrete canonical operator: sup over
/// interior nodes of `|-(A T)_i - W nu_i| / (|W| max nu)`.
pub fn flux_residual_check(
    corrector: &CorrectorSolution,
    medium: &Medium,
    threshold: f64,
) -> Check {
    let w = corrector.w;
    if w == 0.0 {
        return Check::info("corrector.f_residual", 0.0).with_detail("W = 0: identity convention");
    }
    let n = corrector.grid.len();
    let mut at = vec![0.0; n];
    medium.operator(w).mul_vec(&corrector.t, &mut at);
    let scale = w.abs() * medium.nu().iter().copied().fold(0.0, f64::max);
    let worst = (1..n - 1)
        .map(|i| (-at[i] - w * medium.nu()[i]).abs())
        .fold(0.0, f64::max);
    Check::at_most("corrector.f_residual", worst / scale, threshold)
}
