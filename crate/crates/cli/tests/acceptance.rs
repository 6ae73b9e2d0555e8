//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line per
//! measured item to stderr (outside the test harness capture) and the test
//! fails if any line fails.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use hetkern::corrector::{adjoint_corrector, dual_route_check, solve_corrector};
use hetkern::eigen::{
    corrector_identification_check, principal_value_estimate, spectral_summary, EigenOptions,
};
use hetkern::fields::{
    make_field, CoefficientField, FieldKindName, FieldParams, FieldRole, FieldSpec,
};
use hetkern::kernel::{heat_kernel, KernelOptions, Problem};
use hetkern::medium::Medium;
use hetkern::Grid;
use hetkern_cli::presets::presets;
use hetkern_cli::{execute, Report};

struct Run {
    name: &'static str,
    report: Report,
    elapsed: Duration,
}

/// Full pipeline of every preset, computed once and shared.
fn runs() -> &'static [Run] {
    static RUNS: OnceLock<Vec<Run>> = OnceLock::new();
    RUNS.get_or_init(|| {
        std::thread::scope(|s| {
            let handles: Vec<_> = presets()
                .into_iter()
                .map(|(name, cfg)| {
                    s.spawn(move || {
                        let start = Instant::now();
                        let outcome = execute(&cfg, false)
                            .unwrap_or_else(|e| panic!("{name}: {}", e.message()));
                        Run {
                            name,
                            report: outcome.report,
                            elapsed: start.elapsed(),
                        }
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    })
}

struct Criterion {
    id: &'static str,
    lines: Vec<(bool, String)>,
}

impl Criterion {
    fn new(id: &'static str) -> Self {
        Criterion {
            id,
            lines: Vec::new(),
        }
    }

    fn line(&mut self, pass: bool, text: String) {
        self.lines.push((pass, text));
    }

    fn at_most(&mut self, what: &str, measured: f64, bound: f64) {
        self.line(
            measured <= bound,
            format!("{what}: {measured:.4e} <= {bound:.3e}"),
        );
    }

    fn at_least(&mut self, what: &str, measured: f64, bound: f64) {
        self.line(
            measured >= bound,
            format!("{what}: {measured:.4e} >= {bound:.3e}"),
        );
    }

    fn within(&mut self, what: &str, measured: f64, lo: f64, hi: f64) {
        self.line(
            (lo..=hi).contains(&measured),
            format!("{what}: {measured:.4e} in [{lo}, {hi}]"),
        );
    }

    fn info(&mut self, what: &str, measured: f64) {
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "INFO [{}] {what}: {measured:.4e}", self.id);
    }

    /// Report entry of a preset run, compared against its own threshold.
    fn entry(&mut self, run: &Run, check: &str) -> f64 {
        let e = run
            .report
            .get(check)
            .unwrap_or_else(|| panic!("{}: no entry {check}", run.name));
        let op = match e.comparison {
            hetkern::verify::Comparison::AtMost => "<=",
            hetkern::verify::Comparison::AtLeast => ">=",
            hetkern::verify::Comparison::Info => "info",
        };
        let detail = e
            .detail
            .as_deref()
            .map(|d| format!(" ({d})"))
            .unwrap_or_default();
        self.line(
            e.pass,
            format!(
                "{} {check}: {:.4e} {op} {:.3e}{detail}",
                run.name, e.measured, e.threshold
            ),
        );
        e.measured
    }

    fn finish(self) {
        let mut err = std::io::stderr().lock();
        for (pass, text) in &self.lines {
            let _ = writeln!(
                err,
                "{} [{}] {text}",
                if *pass { "PASS" } else { "FAIL" },
                self.id
            );
        }
        let failed: Vec<&String> = self
            .lines
            .iter()
            .filter(|(p, _)| !p)
            .map(|(_, t)| t)
            .collect();
        assert!(
            failed.is_empty(),
            "criterion {} failed: {failed:?}",
            self.id
        );
    }
}

fn random_spec(seed: u64, values: [f64; 2]) -> FieldSpec {
    FieldSpec {
        kind: FieldKindName::PiecewiseRandom,
        mu: 2.0,
        seed: Some(seed),
        params: FieldParams {
            values: Some(values.to_vec()),
            cell_width: Some(1.0),
            ..Default::default()
        },
    }
}

fn random_field(seed: u64) -> CoefficientField {
    make_field(&random_spec(seed, [0.5, 2.0]), FieldRole::Canonical).unwrap()
}

fn grid() -> Grid {
    Grid::with_spacing(20.0, 0.02).unwrap()
}

#[test]
fn c01_constant_kernel_matches_gaussian() {
    let mut c = Criterion::new("1");
    let start = Instant::now();
    let g = grid();
    let one = |_: f64| 1.0;
    let times: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
    for w in [0.0, 1.0] {
        let p = Problem::new(Medium::new(g, &one, &one), w, 1.0).unwrap();
        let table = heat_kernel(&p, 0.0, &times, &KernelOptions::default()).unwrap();
        let mut worst = 0.0f64;
        for (k, &t) in times.iter().enumerate() {
            for i in 0..g.len() {
                let z = g.x(i) - w * t;
                if z.abs() <= 4.0 * t.sqrt() {
                    let exact =
                        (-z * z / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt();
                    worst = worst.max((table.values[k][i] - exact).abs() / exact);
                }
            }
        }
        c.at_most(
            &format!("W={w} relative error on |x-y-Wt| <= 4 sqrt(t)"),
            worst,
            1e-2,
        );
    }
    c.at_most("runtime [s]", start.elapsed().as_secs_f64(), 60.0);
    c.finish();
}

#[test]
fn c02_corrector_bounds_on_random_fields() {
    let mut c = Criterion::new("2");
    let g = grid();
    let (m, big_m) = (2f64.powi(-5), 2f64.powi(5));
    let tau = 4.0 * 2f64.powi(7) / 1.0 + 1e-3;
    for k in 1..=5u64 {
        let start = Instant::now();
        let (a, nu) = (random_field(2 * k - 1), random_field(2 * k));
        let t = solve_corrector(&a, &nu, 1.0, &g, 2.0).unwrap();
        let ta = adjoint_corrector(&a, &nu, 1.0, &g, 2.0).unwrap();
        let lo = t.m_hat.min(ta.m_hat);
        let hi = t.big_m_hat.max(ta.big_m_hat);
        let gap =
            t.t.iter()
                .zip(&ta.t)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
        c.at_least(&format!("field {k} min T'"), lo, m);
        c.at_most(&format!("field {k} max T'"), hi, big_m);
        c.at_most(&format!("field {k} sup |T - T~|"), gap, tau);
        c.at_most(
            &format!("field {k} runtime [s]"),
            start.elapsed().as_secs_f64(),
            10.0,
        );
    }
    c.finish();
}

#[test]
fn c03_dual_route_corrector_agreement() {
    let mut c = Criterion::new("3");
    for run in runs() {
        c.entry(run, "corrector.dual_route");
    }
    for k in 1..=5u64 {
        let (a, nu) = (random_field(2 * k - 1), random_field(2 * k));
        let r = dual_route_check(&a, &nu, 1.0, 0.02, 40.0, 2.0, 1e-3).unwrap();
        c.line(
            r.pass,
            format!("random field {k}: {:.4e} <= 1e-3", r.measured),
        );
    }
    c.finish();
}

#[test]
fn c04_explicit_spectral_case() {
    let mut c = Criterion::new("4");
    let g = grid();
    let one = |_: f64| 1.0;
    let zero = |_: f64| 0.0;
    let s = spectral_summary(&one, &zero, 1.0, &g, &EigenOptions::default()).unwrap();
    let inner: Vec<usize> = (0..g.len()).filter(|&i| g.x(i).abs() <= 10.0).collect();
    let sup = |f: &dyn Fn(usize) -> f64| inner.iter().map(|&i| f(i).abs()).fold(0.0, f64::max);
    c.at_most("sup |w + 1|", sup(&|i| s.right.w[i] + 1.0), 1e-4);
    c.at_most("|W_gamma - 2|", (s.w_gamma - 2.0).abs(), 1e-4);
    c.at_most(
        "sup |nu_gamma - 1|",
        sup(&|i| s.nu_gamma.values[i] - 1.0),
        1e-4,
    );
    c.at_most("sup |T_gamma - x|", sup(&|i| s.t_gamma[i] - g.x(i)), 1e-4);
    c.finish();
}

#[test]
fn c05_spectral_and_corrector_routes_agree() {
    let mut c = Criterion::new("5");
    let run = runs().iter().find(|r| r.name == "periodic").unwrap();
    c.entry(run, "eigen.corrector_identification");
    c.finish();
}

#[test]
fn c06_wronskian_constancy() {
    let mut c = Criterion::new("6");
    for run in runs() {
        c.entry(run, "eigen.wronskian_rel_std");
    }
    c.finish();
}

#[test]
fn c07_sandwich_fits_finite_and_stable() {
    let mut c = Criterion::new("7");
    for run in runs() {
        for check in [
            "verify.gaussian.c_up",
            "verify.gaussian.c_low",
            "verify.refinement.gaussian",
        ] {
            c.entry(run, check);
        }
        c.info(
            &format!("{} collapse constant", run.name),
            run.report
                .get("verify.gaussian.collapse_constant")
                .unwrap()
                .measured,
        );
        c.at_most(
            &format!("{} runtime [s]", run.name),
            run.elapsed.as_secs_f64(),
            300.0,
        );
    }
    c.finish();
}

#[test]
fn c07_constant_preset_upper_constant() {
    let mut c = Criterion::new("7");
    let run = runs().iter().find(|r| r.name == "constant-w1").unwrap();
    let c_up = run.report.get("verify.gaussian.c_up").unwrap().measured;
    c.within("constant-w1 C_up on |z| <= 6 sqrt(t)", c_up, 3.5, 4.5);
    c.finish();
}

#[test]
fn c07_constants_independent_of_drift() {
    let mut c = Criterion::new("7");
    for run in runs() {
        c.entry(run, "verify.w_sweep.c_up_ratio");
        c.entry(run, "verify.w_sweep.c_low_ratio");
    }
    c.finish();
}

#[test]
fn c08_semigroup_and_duality() {
    let mut c = Criterion::new("8");
    let run = runs().iter().find(|r| r.name == "random-mu2").unwrap();
    c.entry(run, "kernel.chapman_kolmogorov");
    c.entry(run, "kernel.duality");
    c.finish();
}

#[test]
fn c09_green_functions() {
    let mut c = Criterion::new("9");
    for run in runs() {
        for check in [
            "green.routes",
            "green.sandwich.c_up",
            "green.sandwich.c_low",
            "green.laplace_identity",
        ] {
            c.entry(run, check);
        }
    }
    let constant = runs().iter().find(|r| r.name == "constant-w1").unwrap();
    c.entry(constant, "green.closed_form");
    c.finish();
}

#[test]
fn c10_nash_exponent_and_contraction() {
    let mut c = Criterion::new("10");
    for run in runs() {
        c.entry(run, "verify.nash");
        c.entry(run, "verify.refinement.beta");
        c.entry(run, "verify.contraction");
    }
    c.finish();
}

#[test]
fn c11_corrupted_corrector_slope() {
    let mut c = Criterion::new("11");
    for run in runs() {
        let d = run.report.get("verify.negative.t_slope").unwrap().measured;
        c.at_least(
            &format!("{} fit degradation with T + 0.1x", run.name),
            d,
            2.0,
        );
    }
    c.finish();
}

#[test]
fn c11_wrong_drift() {
    let mut c = Criterion::new("11");
    for run in runs() {
        let d = run.report.get("verify.negative.w_sign").unwrap().measured;
        c.at_least(&format!("{} fit degradation with -W", run.name), d, 2.0);
    }
    c.finish();
}

#[test]
fn c11_wrong_invariant_measure() {
    let mut c = Criterion::new("11");
    let g = grid();
    for (name, cfg) in presets() {
        let o = cfg.original.unwrap();
        let a = make_field(&o.a, FieldRole::Canonical).unwrap();
        let r = make_field(&o.r, FieldRole::Original).unwrap();
        let gamma = match (o.gamma, o.gamma_offset) {
            (Some(gm), _) => gm,
            (None, Some(off)) => {
                principal_value_estimate(&a, &r, g.spacing(), &[g.half_width()]).unwrap()[0] + off
            }
            _ => unreachable!(),
        };
        let s = spectral_summary(&a, &r, gamma, &g, &o.eigen).unwrap();
        let ident = |nu: &[f64]| {
            corrector_identification_check(&s.t_gamma, &a, nu, s.w_gamma, &g, 10.0, 1e-3)
                .unwrap()
                .sup_rel_diff
        };
        let clean = ident(&s.nu_gamma.values);
        let wrong: Vec<f64> = s.nu_gamma.values.iter().map(|v| 1.1 * v).collect();
        c.at_least(
            &format!("{name} identification degradation with 1.1 nu_gamma"),
            ident(&wrong) / clean,
            2.0,
        );
    }
    c.finish();
}
