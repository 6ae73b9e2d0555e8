//! Run configuration: TOML, strict schema.

use std::path::PathBuf;

use hetkern::eigen::EigenOptions;
use hetkern::fields::{FieldKindName, FieldSpec};
use hetkern::kernel::TimePolicy;
use hetkern::verify::FitRegion;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Corrector,
    Eigen,
    Kernel,
    Green,
    Verify,
    All,
}

impl Pipeline {
    /// Stages run for this selection, in dependency order.
    pub fn stages(self) -> &'static [Pipeline] {
        use Pipeline::*;
        match self {
            Corrector => &[Corrector],
            Eigen => &[Eigen],
            Kernel => &[Kernel],
            Green => &[Green],
            Verify => &[Verify],
            All => &[Corrector, Eigen, Kernel, Green, Verify],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: Pipeline,
    /// Replaces the seeds of all random fields when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonicalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original: Option<OriginalConfig>,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub green: GreenConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub h: f64,
}

/// `nu p_t = (nu a p_x)_x - W p_x`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalConfig {
    pub mu: f64,
    pub w: f64,
    pub a: FieldSpec,
    pub nu: FieldSpec,
    /// Extra drifts for the W-independence study.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub w_sweep: Vec<f64>,
}

/// `u_t = (a u_x)_x + r u`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginalConfig {
    pub mu: f64,
    pub a: FieldSpec,
    pub r: FieldSpec,
    /// Absolute `γ`; exclusive with `gamma_offset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// `γ` as an offset above the principal value estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_offset: Option<f64>,
    #[serde(default)]
    pub eigen: EigenOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub y: f64,
    pub times: Vec<f64>,
    pub policy: TimePolicy,
    /// Times `t`, `s` of the semigroup and duality checks.
    pub semigroup_t: f64,
    pub semigroup_s: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            y: 0.0,
            times: (1..=10).map(|k| 0.1 * k as f64).collect(),
            policy: TimePolicy::default(),
            semigroup_t: 0.25,
            semigroup_s: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    pub lambda: f64,
    pub y: f64,
    /// Half-width of the resolvent grid; the resolvent decays slowly downstream.
    pub half_width: f64,
    /// Rates `a`, `b` and arguments of the Laplace-transform identity.
    pub laplace_a: f64,
    pub laplace_b: f64,
    pub laplace_x: Vec<f64>,
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig {
            lambda: 1.0,
            y: 0.0,
            half_width: 60.0,
            laplace_a: 1.0,
            laplace_b: 1.0,
            laplace_x: vec![0.0, 0.5, 1.0, 2.0, 5.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionConfig {
    pub xi: f64,
    pub r: f64,
    pub s: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub sigma: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub region: FitRegion,
    /// Refit with `h/2` and compare.
    pub refinement: bool,
    /// Largest pair distance of the Hölder regression.
    pub nash_max_distance: f64,
    pub contraction: ContractionConfig,
    /// Tube half-width of the near-diagonal bound, in units of `sqrt(t)`.
    pub near_diagonal_r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingConfig>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            region: FitRegion::default(),
            refinement: true,
            nash_max_distance: 1.0,
            contraction: ContractionConfig {
                xi: 0.0,
                r: 1.0,
                s: 0.1,
                delta: 0.5,
            },
            near_diagonal_r: 1.0,
            scaling: None,
        }
    }
}

/// Pass/fail thresholds. Every value in force is written into the report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub dual_route: f64,
    /// Residual of `T - Wt` in the discrete operator, per unit of `h`.
    pub flux_residual_per_h: f64,
    pub wronskian_rel_std: f64,
    pub riccati_residual: f64,
    pub identification: f64,
    pub original_routes: f64,
    pub duality: f64,
    pub chapman_kolmogorov: f64,
    pub green_routes: f64,
    pub laplace: f64,
    /// Largest accepted fitted constant ("finite").
    pub constant_max: f64,
    pub w_sweep_ratio: f64,
    pub refinement_change: f64,
    pub beta_refinement: f64,
    pub scaling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dual_route: 1e-3,
            flux_residual_per_h: 4.0,
            wronskian_rel_std: 1e-5,
            riccati_residual: 1e-6,
            identification: 1e-3,
            original_routes: 1e-2,
            duality: 1e-2,
            chapman_kolmogorov: 1e-2,
            green_routes: 5e-3,
            laplace: 1e-6,
            constant_max: 1e6,
            w_sweep_ratio: 1.5,
            refinement_change: 0.1,
            beta_refinement: 0.05,
            scaling: 1e-2,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        digest(&self.to_toml())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if !(self.grid.half_width > 0.0 && self.grid.h > 0.0) {
            return bad("grid.half_width and grid.h must be positive".into());
        }
        if let Some(o) = &self.original {
            if o.gamma.is_some() == o.gamma_offset.is_some() {
                return bad("original: set exactly one of gamma and gamma_offset".into());
            }
        }
        let (c, o) = (self.canonical.is_some(), self.original.is_some());
        let ok = match self.pipeline {
            Pipeline::Corrector | Pipeline::Green => c,
            Pipeline::Eigen => o,
            Pipeline::Kernel | Pipeline::Verify | Pipeline::All => c || o,
        };
        if !ok {
            return bad(format!(
                "pipeline {:?} lacks the [canonical] or [original] section it needs",
                self.pipeline
            ));
        }
        let k = &self.kernel;
        if k.times.is_empty() || k.times.windows(2).any(|w| w[1] <= w[0]) || k.times[0] <= 0.0 {
            return bad("kernel.times must be positive and increasing".into());
        }
        Ok(())
    }

    /// Applies command-line overrides.
    pub fn apply_overrides(&mut self, seed: Option<u64>, grid_refine: u32) {
        if seed.is_some() {
            self.seed = seed;
        }
        self.grid.h /= 2f64.powi(grid_refine as i32);
    }

    /// Field specs with the global seed applied: field `k` of
    /// `[a, nu, original a, r]` gets seed `seed + k`.
    pub fn resolved_field(&self, spec: &FieldSpec, index: u64) -> FieldSpec {
        let mut s = spec.clone();
        if let (Some(seed), FieldKindName::PiecewiseRandom) = (self.seed, s.kind) {
            s.seed = Some(seed.wrapping_add(index));
        }
        s
    }
}

pub fn digest(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
