use serde::{Deserialize, Serialize};

use super::heat::{KernelOptions, Problem};
use super::stepper::Stepper;
use crate::corrector::CorrectorSolution;
use crate::numerics::{quad, Tridiagonal};
use crate::{Error, Grid, Result};

/// Largest value tolerated next to the Dirichlet ends.
const EDGE_LEVEL: f64 = 1e-10;
/// Values below this are ignored when comparing routes or fitting constants.
const FLOOR: f64 = 1e-8;
const MAX_STEPS: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenRoute {
    EllipticSolve,
    TimeQuadrature,
}

impl GreenRoute {
    pub fn name(&self) -> &'static str {
        match self {
            GreenRoute::EllipticSolve => "elliptic-solve",
            GreenRoute::TimeQuadrature => "time-quadrature",
        }
    }
}

/// Resolvent `G_λ(x_i, y)` of `-(a nu G_x)_x + W G_x + λ W² nu G = nu delta_y`.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenTable {
    pub grid: Grid,
    pub lambda: f64,
    pub w: f64,
    pub y: f64,
    pub source: usize,
    pub values: Vec<f64>,
    pub route: GreenRoute,
}

impl GreenTable {
    /// `x,value,route`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,value,route\n");
        self.append_csv(&mut s);
        s
    }

    pub fn append_csv(&self, s: &mut String) {
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!(
                "{},{:.12e},{}\n",
                self.grid.x(i),
                v,
                self.route.name()
            ));
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenPair {
    pub elliptic: GreenTable,
    pub quadrature: GreenTable,
    /// Largest relative difference where both exceed `1e-8`.
    pub cross_diff: f64,
    /// Bound on the truncated time integral.
    pub tail_bound: f64,
}

fn validate(problem: &Problem, lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !(problem.w > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "resolvent needs lambda > 0 and W > 0 (got {lambda}, {})",
            problem.w
        )));
    }
    Ok(())
}

pub fn green_elliptic(problem: &Problem, lambda: f64, y: f64) -> Result<GreenTable> {
    validate(problem, lambda)?;
    let j = problem.source_index(y)?;
    let grid = *problem.grid();
    let n = grid.len();
    let h = grid.spacing();
    let c = lambda * problem.w * problem.w;
    let op = problem.medium.operator(problem.w);
    let nu = problem.medium.nu();
    let mut m = Tridiagonal::zeros(n);
    for i in 1..n - 1 {
        m.lower[i] = -op.lower[i];
        m.diag[i] = -op.diag[i] + c * nu[i];
        m.upper[i] = -op.upper[i];
    }
    m.diag[0] = 1.0;
    m.diag[n - 1] = 1.0;
    let mut g = vec![0.0; n];
    g[j] = nu[j] / h;
    m.solve_in_place(&mut g)?;
    let edge = g[1].abs().max(g[n - 2].abs());
    if edge > EDGE_LEVEL {
        return Err(Error::DomainTooSmall(format!(
            "resolvent is {edge:.3e} next to the ends"
        )));
    }
    Ok(GreenTable {
        grid,
        lambda,
        w: problem.w,
        y,
        source: j,
        values: g,
        route: GreenRoute::EllipticSolve,
    })
}

/// Time integral of the kernel against `e^{-λ W² t}`, trapezoid rule on the
/// stepping grid, stopped once the tail bound is below `1e-12` of the result.
pub fn green_quadrature(
    problem: &Problem,
    lambda: f64,
    y: f64,
    opts: &KernelOptions,
) -> Result<(GreenTable, f64)> {
    validate(problem, lambda)?;
    opts.policy.validate()?;
    let j = problem.source_index(y)?;
    let grid = *problem.grid();
    let c = lambda * problem.w * problem.w;
    let nu_y = problem.medium.nu()[j];
    let mut stepper = Stepper::new(&problem.medium, problem.w);
    let mut p = problem.delta(j);
    let mut prev = p.clone();
    let mut acc = vec![0.0; grid.len()];
    let mut t = 0.0;
    let mut tail = f64::INFINITY;
    for k in 0..MAX_STEPS {
        let dt = opts.policy.dt(k, &problem.medium, problem.w);
        prev.copy_from_slice(&p);
        stepper.step(&mut p, dt)?;
        let weight = 0.5 * dt * (-c * (t + 0.5 * dt)).exp();
        for ((s, a), b) in acc.iter_mut().zip(&prev).zip(&p) {
            *s += weight * (a + b);
        }
        t += dt;
        // The maximum of the kernel does not increase, so this bounds the rest.
        let sup = p.iter().copied().fold(0.0, f64::max);
        tail = nu_y * sup * (-c * t).exp() / c;
        let scale = nu_y * acc[j];
        if tail < 1e-12 * scale {
            break;
        }
    }
    if tail.is_infinite() || tail > 1e-6 * nu_y * acc[j] {
        return Err(Error::NonConvergence(format!(
            "time quadrature tail {tail:.3e} did not shrink"
        )));
    }
    let values = acc.into_iter().map(|v| v * nu_y).collect();
    Ok((
        GreenTable {
            grid,
            lambda,
            w: problem.w,
            y,
            source: j,
            values,
            route: GreenRoute::TimeQuadrature,
        },
        tail,
    ))
}

pub fn green_function(
    problem: &Problem,
    lambda: f64,
    y: f64,
    opts: &KernelOptions,
) -> Result<GreenPair> {
    let elliptic = green_elliptic(problem, lambda, y)?;
    let (quadrature, tail_bound) = green_quadrature(problem, lambda, y, opts)?;
    let cross_diff = elliptic
        .values
        .iter()
        .zip(&quadrature.values)
        .filter(|(a, b)| **a > FLOOR && **b > FLOOR)
        .map(|(a, b)| (a - b).abs() / a)
        .fold(0.0, f64::max);
    Ok(GreenPair {
        elliptic,
        quadrature,
        cross_diff,
        tail_bound,
    })
}

/// Resolvent of the unit-coefficient problem, a two-sided exponential.
pub fn green_closed_form(w: f64, lambda: f64, x: f64, y: f64) -> f64 {
    let root = (1.0 + 4.0 * lambda).sqrt();
    let rate = if x >= y {
        0.5 * w * (1.0 - root)
    } else {
        0.5 * w * (1.0 + root)
    };
    (rate * (x - y)).exp() / (w * root)
}

/// Smallest constants for which the two-sided exponential bounds in the
/// corrector variable hold on the sampled points with `T(x) >= T(y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenSandwich {
    pub c_low: f64,
    pub c_up: f64,
    pub points: usize,
}

fn ln_lower(c: f64, w: f64, lambda: f64, dt: f64) -> f64 {
    -(w * c * (lambda + c).sqrt()).ln() - 2.0 * w * c.sqrt() * ((lambda + c).sqrt() - c.sqrt()) * dt
}

fn ln_upper(c: f64, w: f64, lambda: f64, dt: f64) -> f64 {
    (c / (w * (lambda * c + 1.0).sqrt())).ln()
        - 2.0 * w / c * ((lambda * c + 1.0).sqrt() - 1.0) * dt
}

/// Smallest `c` in `[1e-8, 1e12]` with `holds(c)`, for `holds` monotone in `c`.
fn smallest(holds: impl Fn(f64) -> bool) -> f64 {
    let (mut lo, mut hi) = (1e-8f64.ln(), 1e12f64.ln());
    if holds(lo.exp()) {
        return lo.exp();
    }
    if !holds(hi.exp()) {
        return f64::INFINITY;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if holds(mid.exp()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.exp()
}

pub fn green_sandwich(table: &GreenTable, corrector: &CorrectorSolution) -> Result<GreenSandwich> {
    if corrector.grid != table.grid {
        return Err(Error::InvalidArgument(
            "corrector grid differs from the resolvent grid".into(),
        ));
    }
    let ty = corrector.t[table.source];
    let (w, lambda) = (table.w, table.lambda);
    let mut out = GreenSandwich {
        c_low: 0.0,
        c_up: 0.0,
        points: 0,
    };
    for (i, &g) in table.values.iter().enumerate() {
        let dt = corrector.t[i] - ty;
        if dt < 0.0 || g <= FLOOR {
            continue;
        }
        let lg = g.ln();
        out.c_low = out
            .c_low
            .max(smallest(|c| ln_lower(c, w, lambda, dt) <= lg));
        out.c_up = out.c_up.max(smallest(|c| ln_upper(c, w, lambda, dt) >= lg));
        out.points += 1;
    }
    if out.points == 0 {
        return Err(Error::DegenerateSample(
            "no resolvent values above the floor downstream".into(),
        ));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceRow {
    pub x: f64,
    pub quadrature: f64,
    pub closed_form: f64,
    pub rel_err: f64,
}

/// Compares `∫_0^∞ e^{-a t} e^{-b (X - t)² / t} t^{-1/2} dt` with
/// `sqrt(π/(a+b)) e^{-2 sqrt(b) (sqrt(a+b) - sqrt(b)) X}`.
pub fn laplace_identity_check(a: f64, b: f64, xs: &[f64]) -> Result<Vec<LaplaceRow>> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need a, b > 0 (got {a}, {b})"
        )));
    }
    Ok(xs
        .iter()
        .map(|&x| {
            // t = u², so dt / sqrt(t) = 2 du.
            let f = |u: f64| {
                if u == 0.0 {
                    return if x == 0.0 { 2.0 } else { 0.0 };
                }
                let t = u * u;
                2.0 * (-a * t - b * (x - t).powi(2) / t).exp()
            };
            let peak = x.abs().sqrt();
            let end = ((40.0 + 2.0 * b * x.abs()) / (a + b)).sqrt() + peak + 1.0;
            let mut cuts = vec![0.0, 0.5 * peak, peak, 2.0 * peak + 0.5, end];
            cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-15);
            let quadrature: f64 = cuts
                .windows(2)
                .map(|w| quad::integrate(f, w[0], w[1], 1e-14).0)
                .sum();
            let closed_form = (std::f64::consts::PI / (a + b)).sqrt()
                * (-2.0 * b.sqrt() * ((a + b).sqrt() - b.sqrt()) * x).exp();
            LaplaceRow {
                x,
                quadrature,
                closed_form,
                rel_err: (quadrature - closed_form).abs() / closed_form,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrector::solve_corrector;
    use crate::medium::Medium;

    fn unit(l: f64, h: f64, w: f64) -> Problem {
        let one = |_: f64| 1.0;
        Problem::new(
            Medium::new(Grid::with_spacing(l, h).unwrap(), &one, &one),
            w,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn closed_form_satisfies_resolvent_equation() {
        let (w, lambda): (f64, f64) = (1.3, 0.7);
        let root = (1.0 + 4.0 * lambda).sqrt();
        for side in [-1.0, 1.0] {
            let k = 0.5 * w * (1.0 + side * root);
            assert!((-k * k + w * k + lambda * w * w).abs() < 1e-12);
        }
        // Unit jump of -G' at the source.
        let e = 1e-7;
        let jump =
            (green_closed_form(w, lambda, e, 0.0) - green_closed_form(w, lambda, -e, 0.0)).abs();
        assert!(jump < 1e-6);
        let d = |x: f64| {
            (green_closed_form(w, lambda, x + e, 0.0) - green_closed_form(w, lambda, x - e, 0.0))
                / (2.0 * e)
        };
        assert!((d(1e-4) - d(-1e-4) + 1.0).abs() < 1e-3);
        assert!((green_closed_form(1.0, 1.0, 0.0, 0.0) - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn elliptic_route_matches_closed_form() {
        let p = unit(40.0, 0.02, 1.0);
        let g = green_elliptic(&p, 1.0, 0.0).unwrap();
        for (i, x) in p.grid().nodes().into_iter().enumerate() {
            if x.abs() < 5.0 {
                let e = green_closed_form(1.0, 1.0, x, 0.0);
                assert!(
                    (g.values[i] - e).abs() < 1e-3 * e,
                    "{x} {} {e}",
                    g.values[i]
                );
            }
        }
    }

    #[test]
    fn routes_agree() {
        let grid = Grid::with_spacing(40.0, 0.05).unwrap();
        let a = |x: f64| 1.0 + 0.4 * (3.0 * x).cos();
        let nu = |x: f64| 1.0 + 0.3 * (2.0 * x).sin();
        let p = Problem::new(Medium::new(grid, &a, &nu), 1.0, 2.0).unwrap();
        let pair = green_function(&p, 1.0, 0.0, &KernelOptions::default()).unwrap();
        assert!(pair.cross_diff < 5e-3, "{}", pair.cross_diff);
        assert!(pair.elliptic.values.iter().all(|&v| v >= 0.0));
        let corr = solve_corrector(&a, &nu, 1.0, &grid, 2.0).unwrap();
        let s = green_sandwich(&pair.elliptic, &corr).unwrap();
        assert!(s.c_low.is_finite() && s.c_up.is_finite() && s.points > 10);
    }

    #[test]
    fn bounds_are_monotone_in_c() {
        for (w, lambda, dt) in [(1.0, 1.0, 0.0), (0.5, 0.2, 2.0), (2.0, 3.0, 7.0)] {
            let cs: Vec<f64> = (0..60).map(|k| 1e-3 * 1.3f64.powi(k)).collect();
            for c in cs.windows(2) {
                assert!(ln_lower(c[1], w, lambda, dt) < ln_lower(c[0], w, lambda, dt));
                assert!(ln_upper(c[1], w, lambda, dt) > ln_upper(c[0], w, lambda, dt));
            }
        }
    }

    #[test]
    fn unit_sandwich_is_tight_at_fitted_constants() {
        let p = unit(40.0, 0.02, 1.0);
        let g = green_elliptic(&p, 1.0, 0.0).unwrap();
        let one = vec![1.0; p.grid().len()];
        let corr =
            CorrectorSolution::identity(*p.grid(), &one, crate::corrector::CorrectorKind::Direct);
        let s = green_sandwich(&g, &corr).unwrap();
        let j = g.source;
        let mut touch_low: f64 = f64::INFINITY;
        let mut touch_up: f64 = f64::INFINITY;
        for i in j..p.grid().len() {
            let v = g.values[i];
            if v > FLOOR {
                let dt = corr.t[i];
                assert!(ln_lower(s.c_low, 1.0, 1.0, dt) <= v.ln() + 1e-9);
                assert!(ln_upper(s.c_up, 1.0, 1.0, dt) >= v.ln() - 1e-9);
                touch_low = touch_low.min(v.ln() - ln_lower(s.c_low, 1.0, 1.0, dt));
                touch_up = touch_up.min(ln_upper(s.c_up, 1.0, 1.0, dt) - v.ln());
            }
        }
        assert!(touch_low < 1e-6 && touch_up < 1e-6);
        assert!(s.c_low > 1.0 && s.c_low < 10.0, "{}", s.c_low);
        assert!(s.c_up > 1.0 && s.c_up < 10.0, "{}", s.c_up);
    }

    #[test]
    fn small_domain_and_bad_lambda() {
        let p = unit(3.0, 0.05, 1.0);
        assert!(matches!(
            green_elliptic(&p, 1.0, 0.0),
            Err(Error::DomainTooSmall(_))
        ));
        assert!(green_elliptic(&p, 0.0, 0.0).is_err());
        assert!(green_elliptic(&unit(3.0, 0.05, 0.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn laplace_identity() {
        let rows = laplace_identity_check(1.0, 1.0, &[0.0, 1.0, 2.5, -1.0]).unwrap();
        let exact0 = (std::f64::consts::PI / 2.0).sqrt();
        assert!((rows[0].quadrature - exact0).abs() < 1e-10);
        let exact1 = exact0 * (-2.0 * (2f64.sqrt() - 1.0)).exp();
        assert!((rows[1].quadrature - exact1).abs() < 1e-6);
        assert!(rows[2].rel_err < 1e-8);
        // Negative shifts: the printed right side is not the integral.
        let mirror = exact0 * (-2.0 * 2f64.sqrt() - 2.0).exp();
        assert!((rows[3].quadrature - mirror).abs() < 1e-10);
        assert!(rows[3].rel_err > 0.9);
    }
}
