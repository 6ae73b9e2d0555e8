//! Stage execution: fields → corrector → eigen → kernel → green → verify.

use std::sync::OnceLock;

use hetkern::corrector::{
    adjoint_corrector, corrector_invariant_suite, dual_route_check, effective_diffusivity,
    flux_residual_check, solve_corrector, CorrectorKind, CorrectorSolution, SuiteOptions,
};
use hetkern::eigen::{
    corrector_identification_check, principal_value_estimate, riccati_residual, spectral_summary,
    SpectralSummary,
};
use hetkern::fields::{make_field, CoefficientField, FieldKind, FieldRole};
use hetkern::kernel::{
    chapman_kolmogorov_check, duality_check, green_closed_form, green_function, green_sandwich,
    grid_convergence_check, heat_kernel, heat_kernel_original, laplace_identity_check,
    supersolution_residual, KernelOptions, KernelTable, OriginalKernel, Problem,
};
use hetkern::medium::Medium;
use hetkern::verify::{
    collapse_csv, fit_gaussian_constants, l1_linf_constant, nash_exponent, near_diagonal_check,
    oscillation_contraction, scaling_invariance_check, verify_original_bounds, Check,
    GaussianFitReport, NashReport,
};
use hetkern::Grid;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{digest, Pipeline, RunConfig, Tolerances};
use crate::plots;

/// Window of the Dirichlet route in the dual-route corrector check.
pub const DUAL_ROUTE_WINDOW: f64 = 40.0;
/// Random samples of the flow comparisons in the corrector suite.
const SUITE_SAMPLES: usize = 400;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Core(hetkern::Error),
}

impl From<hetkern::Error> for RunError {
    fn from(e: hetkern::Error) -> Self {
        RunError::Core(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(e) if e.is_input_error() => 2,
            RunError::Core(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "ConfigError",
            RunError::Core(e) => e.kind(),
        }
    }

    pub fn message(&self) -> String {
        match self {
            RunError::Config(m) => m.clone(),
            RunError::Core(e) => e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub check: String,
    pub inputs_hash: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: hetkern::verify::Comparison,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub config_hash: String,
    pub pipeline: Pipeline,
    pub tolerances: Tolerances,
    pub entries: Vec<Entry>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.check == name)
    }
}

/// Report plus the files to write, relative to the output directory.
pub struct Outcome {
    pub report: Report,
    pub files: Vec<(String, String)>,
}

struct Canonical {
    a: CoefficientField,
    nu: CoefficientField,
    mu: f64,
    w: f64,
    sweep: Vec<f64>,
}

struct Original {
    a: CoefficientField,
    r: CoefficientField,
    mu: f64,
    cfg: crate::config::OriginalConfig,
}

struct Context<'c> {
    cfg: &'c RunConfig,
    grid: Grid,
    opts: KernelOptions,
    canonical: Option<Canonical>,
    original: Option<Original>,
    corrector: OnceLock<CorrectorSolution>,
    kernel: OnceLock<KernelTable>,
    summary: OnceLock<SpectralSummary>,
    original_kernel: OnceLock<OriginalKernel>,
    entries: Vec<Entry>,
    files: Vec<(String, String)>,
}

fn field(
    cfg: &RunConfig,
    spec: &hetkern::fields::FieldSpec,
    index: u64,
    role: FieldRole,
) -> Result<CoefficientField, RunError> {
    Ok(make_field(&cfg.resolved_field(spec, index), role)?)
}

fn is_unit(f: &CoefficientField) -> bool {
    matches!(f.kind(), FieldKind::Constant { value } if *value == 1.0)
}

impl<'c> Context<'c> {
    fn new(cfg: &'c RunConfig) -> Result<Self, RunError> {
        let grid = Grid::with_spacing(cfg.grid.half_width, cfg.grid.h)?;
        let canonical = match &cfg.canonical {
            Some(c) => Some(Canonical {
                a: field(cfg, &c.a, 0, FieldRole::Canonical)?,
                nu: field(cfg, &c.nu, 1, FieldRole::Canonical)?,
                mu: c.mu,
                w: c.w,
                sweep: c.w_sweep.clone(),
            }),
            None => None,
        };
        let original = match &cfg.original {
            Some(o) => Some(Original {
                a: field(cfg, &o.a, 2, FieldRole::Canonical)?,
                r: field(cfg, &o.r, 3, FieldRole::Original)?,
                mu: o.mu,
                cfg: o.clone(),
            }),
            None => None,
        };
        cfg.kernel.policy.validate()?;
        Ok(Context {
            cfg,
            grid,
            opts: KernelOptions {
                policy: cfg.kernel.policy,
            },
            canonical,
            original,
            corrector: OnceLock::new(),
            kernel: OnceLock::new(),
            summary: OnceLock::new(),
            original_kernel: OnceLock::new(),
            entries: Vec::new(),
            files: Vec::new(),
        })
    }

    fn record(&mut self, section: &str, checks: impl IntoIterator<Item = Check>) {
        let hash = self.section_hash(section);
        self.entries.extend(checks.into_iter().map(|c| Entry {
            check: c.check,
            inputs_hash: hash.clone(),
            measured: c.measured,
            threshold: c.threshold,
            comparison: c.comparison,
            pass: c.pass,
            detail: c.detail,
        }));
    }

    /// Hash of the configuration pieces a stage reads.
    fn section_hash(&self, section: &str) -> String {
        let c = self.cfg;
        let mut parts = vec![
            serde_json::to_string(&c.grid).unwrap(),
            format!("{:?}", c.seed),
        ];
        let canon = serde_json::to_string(&c.canonical).unwrap();
        let orig = serde_json::to_string(&c.original).unwrap();
        let kernel = serde_json::to_string(&c.kernel).unwrap();
        match section {
            "canonical" => parts.push(canon),
            "original" => parts.push(orig),
            "kernel" => parts.extend([canon, kernel]),
            "kernel-original" => parts.extend([orig, kernel]),
            "green" => parts.extend([canon, kernel, serde_json::to_string(&c.green).unwrap()]),
            "verify" => parts.extend([canon, kernel, serde_json::to_string(&c.verify).unwrap()]),
            _ => parts.extend([orig, kernel, serde_json::to_string(&c.verify).unwrap()]),
        }
        digest(&parts.join("\n"))
    }

    fn tol(&self) -> &Tolerances {
        &self.cfg.tolerances
    }

    fn canonical(&self) -> &Canonical {
        self.canonical.as_ref().expect("validated")
    }

    fn problem(&self, w: f64, grid: &Grid) -> Result<Problem, RunError> {
        let c = self.canonical();
        Ok(Problem::new(Medium::new(*grid, &c.a, &c.nu), w, c.mu)?)
    }

    fn corrector(&self) -> Result<&CorrectorSolution, RunError> {
        if self.corrector.get().is_none() {
            let c = self.canonical();
            let _ = self
                .corrector
                .set(solve_corrector(&c.a, &c.nu, c.w, &self.grid, c.mu)?);
        }
        Ok(self.corrector.get().unwrap())
    }

    fn kernel(&self) -> Result<&KernelTable, RunError> {
        if self.kernel.get().is_none() {
            let p = self.problem(self.canonical().w, &self.grid)?;
            let _ = self.kernel.set(heat_kernel(
                &p,
                self.cfg.kernel.y,
                &self.cfg.kernel.times,
                &self.opts,
            )?);
        }
        Ok(self.kernel.get().unwrap())
    }

    fn gamma(&self) -> Result<f64, RunError> {
        let o = self.original.as_ref().expect("validated");
        Ok(match (o.cfg.gamma, o.cfg.gamma_offset) {
            (Some(g), _) => g,
            (None, Some(off)) => {
                principal_value_estimate(
                    &o.a,
                    &o.r,
                    self.grid.spacing(),
                    &[self.grid.half_width()],
                )?[0]
                    + off
            }
            _ => unreachable!("validated"),
        })
    }

    fn summary(&self) -> Result<&SpectralSummary, RunError> {
        if self.summary.get().is_none() {
            let o = self.original.as_ref().expect("validated");
            let s = spectral_summary(&o.a, &o.r, self.gamma()?, &self.grid, &o.cfg.eigen)?;
            let _ = self.summary.set(s);
        }
        Ok(self.summary.get().unwrap())
    }

    fn original_kernel(&self) -> Result<&OriginalKernel, RunError> {
        if self.original_kernel.get().is_none() {
            let o = self.original.as_ref().expect("validated");
            let k = heat_kernel_original(
                &o.a,
                &o.r,
                self.gamma()?,
                self.cfg.kernel.y,
                &self.cfg.kernel.times,
                &self.grid,
                o.mu,
                &self.opts,
                &o.cfg.eigen,
            )?;
            let _ = self.original_kernel.set(k);
        }
        Ok(self.original_kernel.get().unwrap())
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }
}

/// Node closest to `x`, clamped to the interior.
fn snap(grid: &Grid, x: f64) -> f64 {
    let i = ((x + grid.half_width()) / grid.spacing()).round() as isize;
    grid.x(i.clamp(1, grid.len() as isize - 2) as usize)
}

fn corrector_stage(ctx: &mut Context) -> Result<(), RunError> {
    if ctx.canonical.is_none() {
        return Ok(());
    }
    let grid = ctx.grid;
    let corr = ctx.corrector()?.clone();
    let c = ctx.canonical();
    let adj = adjoint_corrector(&c.a, &c.nu, c.w, &grid, c.mu)?;
    let mut checks = corrector_invariant_suite(
        &corr,
        &adj,
        &SuiteOptions {
            mu: c.mu,
            samples: SUITE_SAMPLES,
            seed: ctx.cfg.seed.unwrap_or(0),
            t_max: 1.0,
            x_span: 0.25 * grid.half_width(),
        },
    );
    let medium = Medium::new(grid, &c.a, &c.nu);
    checks.push(flux_residual_check(
        &corr,
        &medium,
        ctx.tol().flux_residual_per_h * grid.spacing(),
    ));
    if c.w > 0.0 {
        checks.push(dual_route_check(
            &c.a,
            &c.nu,
            c.w,
            grid.spacing(),
            DUAL_ROUTE_WINDOW,
            c.mu,
            ctx.tol().dual_route,
        )?);
    }
    let eff = effective_diffusivity(&c.a, &c.nu, &corr, grid.half_width())?;
    checks.push(
        Check::info("corrector.effective_diffusivity", eff.value)
            .with_detail(format!("last octave change {:.3e}", eff.last_octave_change)),
    );
    ctx.record("canonical", checks);
    ctx.file("corrector.csv", corr.to_csv());
    ctx.file("adjoint_corrector.csv", adj.to_csv());
    Ok(())
}

fn eigen_stage(ctx: &mut Context) -> Result<(), RunError> {
    if ctx.original.is_none() {
        return Ok(());
    }
    let tol = *ctx.tol();
    let grid = ctx.grid;
    let s = ctx.summary()?.clone();
    let o = ctx.original.as_ref().unwrap();
    let residual =
        riccati_residual(&s.right, &o.a, &o.r).max(riccati_residual(&s.left, &o.a, &o.r));
    let ident = corrector_identification_check(
        &s.t_gamma,
        &o.a,
        &s.nu_gamma.values,
        s.w_gamma,
        &grid,
        0.5 * grid.half_width(),
        tol.identification,
    )?;
    let checks = vec![
        Check::info("eigen.gamma", s.gamma)
            .with_detail(format!("principal value estimate {:.6}", s.gamma_lower)),
        Check::info("eigen.w_gamma", s.w_gamma),
        Check::at_most(
            "eigen.wronskian_rel_std",
            s.wronskian.rel_std,
            tol.wronskian_rel_std,
        ),
        Check::at_most("eigen.riccati_residual", residual, tol.riccati_residual),
        ident.check,
        Check::at_most(
            "eigen.epsilon_consistency",
            (s.epsilon_gap - s.epsilon_from_measure).abs() / s.epsilon_gap.abs(),
            1e-6,
        ),
        Check::info("eigen.phi_dot_halving_change", s.phi_dot.halving_change),
    ];
    ctx.record("original", checks);
    ctx.file("eigen.csv", s.to_csv());
    Ok(())
}

fn kernel_stage(ctx: &mut Context) -> Result<(), RunError> {
    let tol = *ctx.tol();
    let kc = ctx.cfg.kernel.clone();
    if ctx.canonical.is_some() {
        let grid = ctx.grid;
        let table = ctx.kernel()?.clone();
        let w = ctx.canonical().w;
        let problem = ctx.problem(w, &grid)?;
        let (t, s) = (kc.semigroup_t, kc.semigroup_s);
        let y = snap(&grid, kc.y);
        let x = snap(&grid, y + w * (t + s));
        let retag = |c: Check, threshold: f64| {
            Check::at_most(c.check.clone(), c.measured, threshold)
                .with_detail(c.detail.unwrap_or_default())
        };
        let dual = duality_check(&problem, t, snap(&grid, y + w * t), y, &ctx.opts)?;
        let ck = chapman_kolmogorov_check(&problem, t, s, x, y, &ctx.opts)?;
        let ck = if ck.measured.is_nan() {
            ck
        } else {
            retag(ck, tol.chapman_kolmogorov)
        };
        let mut checks = vec![
            retag(dual, tol.duality),
            ck,
            Check::flag(
                "kernel.trust_region",
                (0..table.len()).any(|k| table.usable(k)),
                format!("contaminated from output {:?}", table.contaminated_from()),
            ),
            Check::info("kernel.min_value", table.min_value),
            Check::info("kernel.blended_fraction", table.blended_fraction),
        ];
        let adjoint = {
            let c = ctx.canonical();
            adjoint_corrector(&c.a, &c.nu, w, &grid, c.mu)?
        };
        if w > 0.0 {
            let sup = supersolution_residual(&problem, &adjoint, 8, 0.5 * grid.half_width())?;
            checks.push(sup.check(grid.spacing(), 1.0));
        }
        let probe_t = kc.times[kc.times.len() / 2];
        let coarse = Grid::with_spacing(grid.half_width(), 2.0 * grid.spacing())?;
        let centre = y + w * probe_t;
        let probes = [centre - 0.5, centre, centre + 0.5].map(|x| snap(&coarse, x));
        let build = |g: &Grid| {
            ctx.problem(w, g).map_err(|e| match e {
                RunError::Core(e) => e,
                RunError::Config(m) => hetkern::Error::InvalidArgument(m),
            })
        };
        checks.push(grid_convergence_check(
            build, &coarse, y, probe_t, &probes, &ctx.opts,
        )?);
        ctx.record("kernel", checks);
        ctx.file("kernel.csv", table.to_csv());
    }
    if ctx.original.is_some() {
        let ok = ctx.original_kernel()?.clone();
        let checks = vec![Check::at_most(
            "kernel.original_routes",
            ok.sup_rel_diff,
            tol.original_routes,
        )];
        ctx.record("kernel-original", checks);
        ctx.file("original_kernel.csv", ok.route_a.to_csv());
    }
    Ok(())
}

fn green_stage(ctx: &mut Context) -> Result<(), RunError> {
    if ctx.canonical.is_none() {
        return Ok(());
    }
    let tol = *ctx.tol();
    let gc = ctx.cfg.green.clone();
    let grid = Grid::with_spacing(gc.half_width, ctx.grid.spacing())?;
    let c = ctx.canonical();
    let w = c.w;
    let problem = ctx.problem(w, &grid)?;
    let pair = green_function(&problem, gc.lambda, gc.y, &ctx.opts)?;
    let corr = solve_corrector(&c.a, &c.nu, w, &grid, c.mu)?;
    let sandwich = green_sandwich(&pair.elliptic, &corr)?;
    let mut checks = vec![
        Check::at_most("green.routes", pair.cross_diff, tol.green_routes),
        Check::info("green.tail_bound", pair.tail_bound),
        Check::at_most("green.sandwich.c_up", sandwich.c_up, tol.constant_max)
            .with_detail(format!("{} points", sandwich.points)),
        Check::at_most("green.sandwich.c_low", sandwich.c_low, tol.constant_max),
    ];
    if is_unit(&c.a) && is_unit(&c.nu) {
        let j = pair.elliptic.source;
        let exact = green_closed_form(w, gc.lambda, grid.x(j), grid.x(j));
        checks.push(Check::at_most(
            "green.closed_form",
            (pair.elliptic.values[j] - exact).abs() / exact,
            1e-3,
        ));
    }
    let rows = laplace_identity_check(gc.laplace_a, gc.laplace_b, &gc.laplace_x)?;
    let worst = rows
        .iter()
        .filter(|r| r.x >= 0.0)
        .map(|r| r.rel_err)
        .fold(0.0, f64::max);
    checks.push(Check::at_most("green.laplace_identity", worst, tol.laplace));
    ctx.record("green", checks);
    let mut csv = pair.elliptic.to_csv();
    pair.quadrature.append_csv(&mut csv);
    ctx.file("green.csv", csv);
    Ok(())
}

struct Fit {
    gauss: GaussianFitReport,
    nash: NashReport,
}

fn fit_at(ctx: &Context, w: f64, grid: &Grid) -> Result<Fit, RunError> {
    let c = ctx.canonical();
    let v = &ctx.cfg.verify;
    let p = ctx.problem(w, grid)?;
    let table = heat_kernel(&p, ctx.cfg.kernel.y, &ctx.cfg.kernel.times, &ctx.opts)?;
    let corr = solve_corrector(&c.a, &c.nu, w, grid, c.mu)?;
    Ok(Fit {
        gauss: fit_gaussian_constants(&table, &corr, &v.region)?,
        nash: nash_exponent(&table, 1.0, v.region.t_min, v.nash_max_distance)?,
    })
}

fn gaussian_checks(prefix: &str, f: &GaussianFitReport, tol: &Tolerances) -> Vec<Check> {
    let finite = |c: f64| if c.is_finite() { c } else { f64::INFINITY };
    vec![
        Check::at_most(format!("{prefix}.c_up"), finite(f.c_up), tol.constant_max)
            .with_detail(format!("{} points", f.points)),
        Check::at_most(format!("{prefix}.c_low"), finite(f.c_low), tol.constant_max),
        Check::info(format!("{prefix}.collapse_constant"), f.collapse_constant()),
    ]
}

fn verify_stage(ctx: &mut Context) -> Result<(), RunError> {
    let tol = *ctx.tol();
    let v = ctx.cfg.verify.clone();
    if ctx.canonical.is_some() {
        let grid = ctx.grid;
        let c = ctx.canonical();
        let w = c.w;
        let table = ctx.kernel()?.clone();
        let corr = ctx.corrector()?.clone();
        let base = Fit {
            gauss: fit_gaussian_constants(&table, &corr, &v.region)?,
            nash: nash_exponent(&table, 1.0, v.region.t_min, v.nash_max_distance)?,
        };
        let mut checks = gaussian_checks("verify.gaussian", &base.gauss, &tol);
        checks.push(base.nash.check("verify.nash"));

        // W sweep and refinement fan out over the pool.
        let mut jobs: Vec<(f64, Grid)> = c.sweep.iter().map(|&ws| (ws, grid)).collect();
        let fine = Grid::with_spacing(grid.half_width(), 0.5 * grid.spacing())?;
        if v.refinement {
            jobs.push((w, fine));
        }
        let ctx_ref: &Context = ctx;
        let fits = jobs
            .par_iter()
            .map(|(ws, g)| fit_at(ctx_ref, *ws, g))
            .collect::<Vec<_>>();
        let mut fits = fits.into_iter().collect::<Result<Vec<_>, _>>()?;
        if v.refinement {
            let fine_fit = fits.pop().unwrap();
            checks.push(Check::at_most(
                "verify.refinement.gaussian",
                fine_fit.gauss.relative_change(&base.gauss),
                tol.refinement_change,
            ));
            checks.push(Check::at_most(
                "verify.refinement.beta",
                (fine_fit.nash.beta_hat - base.nash.beta_hat).abs(),
                tol.beta_refinement,
            ));
        }
        if !fits.is_empty() {
            let ratio = |get: fn(&GaussianFitReport) -> f64| {
                let vals: Vec<f64> = fits.iter().map(|f| get(&f.gauss)).collect();
                vals.iter().copied().fold(0.0, f64::max)
                    / vals.iter().copied().fold(f64::INFINITY, f64::min)
            };
            let detail = fits
                .iter()
                .zip(&c.sweep)
                .map(|(f, ws)| {
                    format!(
                        "W={ws}: C_up={:.4} C_low={:.4}",
                        f.gauss.c_up, f.gauss.c_low
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            checks.push(
                Check::at_most(
                    "verify.w_sweep.c_up_ratio",
                    ratio(|g| g.c_up),
                    tol.w_sweep_ratio,
                )
                .with_detail(detail),
            );
            checks.push(Check::at_most(
                "verify.w_sweep.c_low_ratio",
                ratio(|g| g.c_low),
                tol.w_sweep_ratio,
            ));
        }

        let cc = v.contraction;
        let con = oscillation_contraction(&table, &corr, cc.xi, cc.r, cc.s, cc.delta)?;
        checks.push(con.check("verify.contraction"));

        let problem = ctx.problem(w, &grid)?;
        let j = problem.source_index(ctx.cfg.kernel.y)?;
        let zero = vec![0.0; grid.len()];
        let l1 = l1_linf_constant(
            &problem,
            &problem.delta(j),
            &zero,
            &ctx.cfg.kernel.times,
            &ctx.opts,
        )?;
        checks.push(Check::at_most("verify.l1_linf", l1.c, tol.constant_max));

        let nd = near_diagonal_check(&table, &corr, v.near_diagonal_r, v.region.t_min)?;
        checks.push(
            Check::at_most("verify.near_diagonal", nd.c_implied, tol.constant_max).with_detail(
                format!(
                    "inf sqrt(t) P = {:.6e} over {} points",
                    nd.inf_scaled, nd.points
                ),
            ),
        );

        if let Some(sc) = v.scaling {
            let times: Vec<f64> = ctx
                .cfg
                .kernel
                .times
                .iter()
                .copied()
                .filter(|&t| t <= 0.5 + 1e-12)
                .collect();
            let z = (sc.z / grid.spacing()).round() * grid.spacing();
            let r = scaling_invariance_check(
                &c.a,
                &c.nu,
                w,
                sc.sigma,
                z,
                &grid,
                ctx.cfg.kernel.y,
                &times,
                c.mu,
                &ctx.opts,
            )?;
            checks.extend(r.checks("verify.scaling", tol.scaling));
        }

        checks.extend(negative_controls(ctx, &table, &corr, &base.gauss)?);
        ctx.record("verify", checks);
        let collapse = collapse_csv(&table, &corr, &v.region)?;
        ctx.file("collapse.csv", collapse);
    }
    if ctx.original.is_some() {
        let ok = ctx.original_kernel()?.clone();
        let fit = verify_original_bounds(&ok, &v.region)?;
        ctx.record(
            "verify-original",
            gaussian_checks("verify.original", &fit, &tol),
        );
    }
    Ok(())
}

/// Recorded as diagnostics: how much deliberately wrong inputs degrade the fit.
fn negative_controls(
    ctx: &Context,
    table: &KernelTable,
    corr: &CorrectorSolution,
    base: &GaussianFitReport,
) -> Result<Vec<Check>, RunError> {
    let region = &ctx.cfg.verify.region;
    let sloped = tilted_corrector(corr, 0.1)?;
    let bad_t = fit_gaussian_constants(table, &sloped, region)?;
    let mut wrong = table.clone();
    wrong.w = -table.w;
    let bad_w = fit_gaussian_constants(&wrong, corr, region)?;
    Ok(vec![
        Check::info("verify.negative.t_slope", bad_t.degradation(base)).with_detail("T + 0.1 x"),
        Check::info("verify.negative.w_sign", bad_w.degradation(base))
            .with_detail("drift sign reversed"),
    ])
}

/// `T + slope x`, the corrector with a corrupted slope.
pub fn tilted_corrector(
    corr: &CorrectorSolution,
    slope: f64,
) -> hetkern::Result<CorrectorSolution> {
    let g = corr.grid;
    let t = corr
        .t
        .iter()
        .enumerate()
        .map(|(i, v)| v + slope * g.x(i))
        .collect();
    CorrectorSolution::from_values(g, t, corr.w, CorrectorKind::Direct)
}

/// Runs the selected stages and collects the report and files.
pub fn execute(cfg: &RunConfig, emit_plots: bool) -> Result<Outcome, RunError> {
    let mut ctx = Context::new(cfg)?;
    for stage in cfg.pipeline.stages() {
        match stage {
            Pipeline::Corrector => corrector_stage(&mut ctx)?,
            Pipeline::Eigen => eigen_stage(&mut ctx)?,
            Pipeline::Kernel => kernel_stage(&mut ctx)?,
            Pipeline::Green => green_stage(&mut ctx)?,
            Pipeline::Verify => verify_stage(&mut ctx)?,
            Pipeline::All => unreachable!(),
        }
    }
    if emit_plots {
        let names: Vec<String> = ctx.files.iter().map(|(n, _)| n.clone()).collect();
        for (name, script) in plots::scripts(&names) {
            ctx.file(&name, script);
        }
    }
    let report = Report {
        version: hetkern::VERSION.to_string(),
        config_hash: cfg.hash(),
        pipeline: cfg.pipeline,
        tolerances: cfg.tolerances,
        entries: ctx.entries,
    };
    Ok(Outcome {
        report,
        files: ctx.files,
    })
}
