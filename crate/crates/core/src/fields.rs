//! Coefficient fields and their ellipticity bounds.
//!
//! A [`CoefficientField`] is a pure function of `(params, seed, x)`. Canonical
//! coefficients (`a`, `nu`) must satisfy `1/mu <= f(x) <= mu`; zero-order
//! coefficients (`r`) must satisfy `|f(x)| <= mu`.

use serde::{Deserialize, Serialize};

use crate::{Error, Grid, Result};

/// Anything that can be evaluated pointwise on the real line.
pub trait Profile: Send + Sync {
    fn eval(&self, x: f64) -> f64;
}

impl<F> Profile for F
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// `x -> inner(-x)`.
pub struct Reflected<'a>(pub &'a dyn Profile);

impl Profile for Reflected<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.0.eval(-x)
    }
}

/// `x -> inner(scale * (x + shift))`.
pub struct Rescaled<'a> {
    pub inner: &'a dyn Profile,
    pub scale: f64,
    pub shift: f64,
}

impl Profile for Rescaled<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.inner.eval(self.scale * (x + self.shift))
    }
}

/// `x -> factor * inner(x)`.
pub struct Scaled<'a> {
    pub inner: &'a dyn Profile,
    pub factor: f64,
}

impl Profile for Scaled<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.factor * self.inner.eval(x)
    }
}

/// Which hypothesis the field has to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldRole {
    /// Diffusivity or weight: `1/mu <= f <= mu`.
    Canonical,
    /// Zero-order coefficient: `|f| <= mu`.
    Original,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKindName {
    Constant,
    PeriodicTrig,
    PiecewisePeriodic,
    Quasiperiodic,
    PiecewiseRandom,
    Tabulated,
}

/// Kind-specific parameters as they appear in a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<f64>>,
}

/// Field description: the `{kind, mu, seed, params}` table of a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: FieldKindName,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: FieldParams,
}

impl FieldSpec {
    pub fn constant(value: f64, mu: f64) -> Self {
        FieldSpec {
            kind: FieldKindName::Constant,
            mu,
            seed: None,
            params: FieldParams {
                value: Some(value),
                ..Default::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldKind {
    Constant {
        value: f64,
    },
    /// `mean + amplitude * cos(2 pi x / period + phase)`
    PeriodicTrig {
        mean: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
    /// `values[k mod len]` on `[offset + k w, offset + (k+1) w)`
    PiecewisePeriodic {
        values: Vec<f64>,
        cell_width: f64,
        offset: f64,
    },
    /// `mean + amplitude * sum_j cos(omega_j x)`
    Quasiperiodic {
        mean: f64,
        amplitude: f64,
        frequencies: Vec<f64>,
    },
    /// i.i.d. draws from `values`, one per cell, keyed by `(seed, cell)`.
    PiecewiseRandom {
        values: Vec<f64>,
        cell_width: f64,
        offset: f64,
    },
    /// `values[i]` on `[knots[i-1], knots[i])`, with `values.len() == knots.len() + 1`.
    Tabulated {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    kind: FieldKind,
    mu: f64,
    seed: u64,
    role: FieldRole,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_hash(seed: u64, cell: i64) -> u64 {
    splitmix64(splitmix64(seed) ^ (cell as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

impl CoefficientField {
    /// Builds a field without checking the declared bounds.
    pub fn from_kind(kind: FieldKind, mu: f64, seed: u64, role: FieldRole) -> Self {
        CoefficientField {
            kind,
            mu,
            seed,
            role,
        }
    }

    pub fn constant(value: f64) -> Self {
        let mu = if value > 0.0 {
            value.max(1.0 / value)
        } else {
            value.abs().max(1.0)
        };
        CoefficientField::from_kind(FieldKind::Constant { value }, mu, 0, FieldRole::Canonical)
    }

    /// Constant zero-order coefficient.
    pub fn constant_rate(value: f64) -> Self {
        CoefficientField::from_kind(
            FieldKind::Constant { value },
            value.abs().max(1e-300),
            0,
            FieldRole::Original,
        )
    }

    /// Piecewise-constant field holding `samples[i]` on the control volume of node `i`.
    pub fn from_node_samples(grid: &Grid, samples: &[f64], mu: f64, role: FieldRole) -> Self {
        let h = grid.spacing();
        let knots = (0..grid.len() - 1).map(|i| grid.x(i) + 0.5 * h).collect();
        CoefficientField::from_kind(
            FieldKind::Tabulated {
                knots,
                values: samples.to_vec(),
            },
            mu,
            0,
            role,
        )
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn role(&self) -> FieldRole {
        self.role
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            FieldKind::Constant { value } => *value,
            FieldKind::PeriodicTrig {
                mean,
                amplitude,
                period,
                phase,
            } => mean + amplitude * (std::f64::consts::TAU * x / period + phase).cos(),
            FieldKind::PiecewisePeriodic {
                values,
                cell_width,
                offset,
            } => {
                let k = ((x - offset) / cell_width).floor() as i64;
                values[k.rem_euclid(values.len() as i64) as usize]
            }
            FieldKind::Quasiperiodic {
                mean,
                amplitude,
                frequencies,
            } => mean + amplitude * frequencies.iter().map(|w| (w * x).cos()).sum::<f64>(),
            FieldKind::PiecewiseRandom {
                values,
                cell_width,
                offset,
            } => {
                let k = ((x - offset) / cell_width).floor() as i64;
                values[(cell_hash(self.seed, k) % values.len() as u64) as usize]
            }
            FieldKind::Tabulated { knots, values } => values[knots.partition_point(|&k| k <= x)],
        }
    }

    /// Bounds implied by the parameters alone.
    pub fn declared_range(&self) -> (f64, f64) {
        fn min_max(v: &[f64]) -> (f64, f64) {
            v.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                })
        }
        match &self.kind {
            FieldKind::Constant { value } => (*value, *value),
            FieldKind::PeriodicTrig {
                mean, amplitude, ..
            } => (mean - amplitude.abs(), mean + amplitude.abs()),
            FieldKind::Quasiperiodic {
                mean,
                amplitude,
                frequencies,
            } => {
                let s = amplitude.abs() * frequencies.len() as f64;
                (mean - s, mean + s)
            }
            FieldKind::PiecewisePeriodic { values, .. }
            | FieldKind::PiecewiseRandom { values, .. }
            | FieldKind::Tabulated { values, .. } => min_max(values),
        }
    }
}

impl Profile for CoefficientField {
    fn eval(&self, x: f64) -> f64 {
        CoefficientField::eval(self, x)
    }
}

fn require(v: Option<f64>, name: &str, kind: FieldKindName) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidSpec(format!("{kind:?} field requires `{name}`")))
}

fn require_vec(v: &Option<Vec<f64>>, name: &str, kind: FieldKindName) -> Result<Vec<f64>> {
    match v {
        Some(v) if !v.is_empty() => Ok(v.clone()),
        _ => Err(Error::InvalidSpec(format!(
            "{kind:?} field requires a nonempty `{name}`"
        ))),
    }
}

fn positive(v: f64, name: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidSpec(format!(
            "`{name}` must be positive, got {v}"
        )))
    }
}

/// Validates a field description and builds the field.
pub fn make_field(spec: &FieldSpec, role: FieldRole) -> Result<CoefficientField> {
    let k = spec.kind;
    let p = &spec.params;
    if !(spec.mu.is_finite() && spec.mu > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "mu must be positive, got {}",
            spec.mu
        )));
    }
    let kind = match k {
        FieldKindName::Constant => FieldKind::Constant {
            value: require(p.value, "value", k)?,
        },
        FieldKindName::PeriodicTrig => FieldKind::PeriodicTrig {
            mean: require(p.mean, "mean", k)?,
            amplitude: require(p.amplitude, "amplitude", k)?,
            period: positive(require(p.period, "period", k)?, "period")?,
            phase: p.phase.unwrap_or(0.0),
        },
        FieldKindName::PiecewisePeriodic => FieldKind::PiecewisePeriodic {
            values: require_vec(&p.values, "values", k)?,
            cell_width: positive(require(p.cell_width, "cell_width", k)?, "cell_width")?,
            offset: p.offset.unwrap_or(0.0),
        },
        FieldKindName::Quasiperiodic => FieldKind::Quasiperiodic {
            mean: require(p.mean, "mean", k)?,
            amplitude: require(p.amplitude, "amplitude", k)?,
            frequencies: require_vec(&p.frequencies, "frequencies", k)?,
        },
        FieldKindName::PiecewiseRandom => {
            if spec.seed.is_none() {
                return Err(Error::InvalidSpec(
                    "piecewise-random field requires a seed".into(),
                ));
            }
            FieldKind::PiecewiseRandom {
                values: require_vec(&p.values, "values", k)?,
                cell_width: positive(require(p.cell_width, "cell_width", k)?, "cell_width")?,
                offset: p.offset.unwrap_or(0.0),
            }
        }
        FieldKindName::Tabulated => {
            let knots = p.knots.clone().unwrap_or_default();
            let values = require_vec(&p.values, "values", k)?;
            if values.len() != knots.len() + 1 {
                return Err(Error::InvalidSpec(format!(
                    "tabulated field needs {} values for {} knots",
                    knots.len() + 1,
                    knots.len()
                )));
            }
            if knots.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidSpec("tabulated knots must increase".into()));
            }
            FieldKind::Tabulated { knots, values }
        }
    };
    let field = CoefficientField::from_kind(kind, spec.mu, spec.seed.unwrap_or(0), role);
    let (lo, hi) = field.declared_range();
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidSpec("non-finite field values".into()));
    }
    let slack = 1e-12 * spec.mu;
    let ok = match role {
        FieldRole::Canonical => lo >= 1.0 / spec.mu - slack && hi <= spec.mu + slack,
        FieldRole::Original => lo >= -spec.mu - slack && hi <= spec.mu + slack,
    };
    if !ok {
        return Err(Error::EllipticityViolation(format!(
            "{k:?} field range [{lo}, {hi}] violates the declared mu = {}",
            spec.mu
        )));
    }
    Ok(field)
}

/// Outcome of scanning a field on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub min: f64,
    pub max: f64,
    /// Smallest `mu` compatible with the scanned values for the field's role.
    pub effective_mu: f64,
    pub declared_mu: f64,
    pub violates_declared: bool,
}

/// Scans the field at every node and four sub-points per cell.
pub fn ellipticity_check(field: &CoefficientField, grid: &Grid) -> Result<EllipticityReport> {
    let h = grid.spacing();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        let mut visit = |x: f64| {
            let v = field.eval(x);
            lo = lo.min(v);
            hi = hi.max(v);
        };
        visit(grid.x(i));
        if i + 1 < grid.len() {
            for s in 0..4 {
                visit(grid.x(i) + (s as f64 + 0.5) * h / 4.0);
            }
        }
    }
    let effective_mu = match field.role() {
        FieldRole::Canonical => {
            if lo <= 0.0 {
                return Err(Error::EllipticityViolation(format!(
                    "field reaches {lo} <= 0 on the grid"
                )));
            }
            hi.max(1.0 / lo)
        }
        FieldRole::Original => lo.abs().max(hi.abs()),
    };
    Ok(EllipticityReport {
        min: lo,
        max: hi,
        effective_mu,
        declared_mu: field.mu(),
        violates_declared: effective_mu > field.mu() * (1.0 + 1e-12),
    })
}

/// Result of removing a drift term `b u_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftElimination {
    /// Zero-order coefficient of the drift-free equation.
    pub r_tilde: Vec<f64>,
    /// `w(x) = int_0^x b/(2a)`; the drift-free unknown is `v = u e^{w}`.
    pub weight: Vec<f64>,
    /// `b'` was not supplied and was approximated by finite differences.
    pub used_fd_derivative: bool,
}

/// Removes the drift from `u_t = (a u_x)_x + b u_x + r u`.
///
/// With `v = u exp(int_0^x b/(2a))`, `v` solves `v_t = (a v_x)_x + r~ v` where
/// `r~ = r - b'/2 - b^2/(4a)`. Inputs are node samples on `grid`.
pub fn eliminate_drift(
    grid: &Grid,
    a: &[f64],
    b: &[f64],
    r: &[f64],
    b_prime: Option<&[f64]>,
) -> Result<DriftElimination> {
    let n = grid.len();
    if a.len() != n || b.len() != n || r.len() != n || b_prime.is_some_and(|d| d.len() != n) {
        return Err(Error::InvalidArgument(
            "sample lengths must match the grid".into(),
        ));
    }
    let h = grid.spacing();
    let fd;
    let db = match b_prime {
        Some(d) => d,
        None => {
            fd = (0..n)
                .map(|i| {
                    if i == 0 {
                        (b[1] - b[0]) / h
                    } else if i == n - 1 {
                        (b[n - 1] - b[n - 2]) / h
                    } else {
                        (b[i + 1] - b[i - 1]) / (2.0 * h)
                    }
                })
                .collect::<Vec<_>>();
            &fd
        }
    };
    let r_tilde = (0..n)
        .map(|i| r[i] - 0.5 * db[i] - b[i] * b[i] / (4.0 * a[i]))
        .collect();
    let c = grid.center();
    let mut weight = vec![0.0; n];
    for i in c + 1..n {
        weight[i] = weight[i - 1] + 0.25 * h * (b[i] / a[i] + b[i - 1] / a[i - 1]);
    }
    for i in (0..c).rev() {
        weight[i] = weight[i + 1] - 0.25 * h * (b[i] / a[i] + b[i + 1] / a[i + 1]);
    }
    Ok(DriftElimination {
        r_tilde,
        weight,
        used_fd_derivative: b_prime.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_spec(seed: u64) -> FieldSpec {
        FieldSpec {
            kind: FieldKindName::PiecewiseRandom,
            mu: 2.0,
            seed: Some(seed),
            params: FieldParams {
                values: Some(vec![0.5, 2.0]),
                cell_width: Some(1.0),
                ..Default::default()
            },
        }
    }

    #[test]
    fn constant_field_is_constant() {
        let f = make_field(&FieldSpec::constant(1.0, 1.0), FieldRole::Canonical).unwrap();
        for i in -50..50 {
            assert_eq!(f.eval(i as f64 * 0.37), 1.0);
        }
    }

    #[test]
    fn random_field_is_deterministic() {
        let f = make_field(&random_spec(7), FieldRole::Canonical).unwrap();
        let g = make_field(&random_spec(7), FieldRole::Canonical).unwrap();
        let xs: Vec<f64> = (-200..200).map(|i| i as f64 * 0.13).collect();
        let a: Vec<u64> = xs.iter().map(|&x| f.eval(x).to_bits()).collect();
        let b: Vec<u64> = xs.iter().map(|&x| g.eval(x).to_bits()).collect();
        assert_eq!(a, b);
        // both values occur, constant on unit cells
        assert!(xs.iter().any(|&x| f.eval(x) == 0.5));
        assert!(xs.iter().any(|&x| f.eval(x) == 2.0));
        assert_eq!(f.eval(3.01), f.eval(3.99));
        let other = make_field(&random_spec(8), FieldRole::Canonical).unwrap();
        assert!(xs.iter().any(|&x| other.eval(x) != f.eval(x)));
    }

    #[test]
    fn quasiperiodic_scan() {
        let spec = FieldSpec {
            kind: FieldKindName::Quasiperiodic,
            mu: 2.5,
            seed: None,
            params: FieldParams {
                mean: Some(1.5),
                amplitude: Some(0.4),
                frequencies: Some(vec![1.0, 2f64.sqrt()]),
                ..Default::default()
            },
        };
        let f = make_field(&spec, FieldRole::Canonical).unwrap();
        let grid = Grid::with_spacing(50.0, 1e-3).unwrap();
        let rep = ellipticity_check(&f, &grid).unwrap();
        assert!(rep.min >= 0.7);
        // the maximum 2.3 is attained at x = 0, so mu = 2 is too small
        assert!((rep.max - 2.3).abs() < 1e-12);
        assert!((rep.effective_mu - 2.3).abs() < 1e-12);
        assert!(!rep.violates_declared);
        let strict = FieldSpec { mu: 2.0, ..spec };
        assert!(matches!(
            make_field(&strict, FieldRole::Canonical),
            Err(Error::EllipticityViolation(_))
        ));
    }

    #[test]
    fn effective_mu_of_simple_fields() {
        let grid = Grid::with_spacing(10.0, 0.05).unwrap();
        let one = CoefficientField::constant(1.0);
        assert_eq!(ellipticity_check(&one, &grid).unwrap().effective_mu, 1.0);
        let f = make_field(&random_spec(3), FieldRole::Canonical).unwrap();
        assert_eq!(ellipticity_check(&f, &grid).unwrap().effective_mu, 2.0);
    }

    #[test]
    fn zero_in_table_is_rejected() {
        let grid = Grid::with_spacing(2.0, 0.1).unwrap();
        let f = CoefficientField::from_kind(
            FieldKind::Tabulated {
                knots: vec![-0.5, 0.5],
                values: vec![1.0, 0.0, 1.0],
            },
            2.0,
            0,
            FieldRole::Canonical,
        );
        assert!(matches!(
            ellipticity_check(&f, &grid),
            Err(Error::EllipticityViolation(_))
        ));
    }

    #[test]
    fn declared_mu_too_small_is_rejected() {
        let spec = FieldSpec {
            mu: 1.0,
            ..random_spec(1)
        };
        assert!(matches!(
            make_field(&spec, FieldRole::Canonical),
            Err(Error::EllipticityViolation(_))
        ));
        let mut missing = random_spec(1);
        missing.seed = None;
        assert!(matches!(
            make_field(&missing, FieldRole::Canonical),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn zero_order_role_uses_absolute_bound() {
        let spec = FieldSpec {
            kind: FieldKindName::PeriodicTrig,
            mu: 2.0,
            seed: None,
            params: FieldParams {
                mean: Some(0.0),
                amplitude: Some(1.5),
                period: Some(3.0),
                ..Default::default()
            },
        };
        let r = make_field(&spec, FieldRole::Original).unwrap();
        let grid = Grid::with_spacing(6.0, 0.01).unwrap();
        let rep = ellipticity_check(&r, &grid).unwrap();
        assert!((rep.effective_mu - 1.5).abs() < 1e-9);
        assert!(make_field(&spec, FieldRole::Canonical).is_err());
    }

    #[test]
    fn tabulated_from_samples_is_piecewise_constant() {
        let grid = Grid::with_spacing(1.0, 0.5).unwrap();
        let f = CoefficientField::from_node_samples(
            &grid,
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            5.0,
            FieldRole::Canonical,
        );
        assert_eq!(f.eval(-1.0), 1.0);
        assert_eq!(f.eval(0.2), 3.0);
        assert_eq!(f.eval(0.3), 4.0);
        assert_eq!(f.eval(9.0), 5.0);
    }

    #[test]
    fn zero_drift_is_identity() {
        let grid = Grid::with_spacing(2.0, 0.5).unwrap();
        let a = vec![1.3; 9];
        let r: Vec<f64> = (0..9).map(|i| i as f64 * 0.1).collect();
        let out = eliminate_drift(&grid, &a, &vec![0.0; 9], &r, None).unwrap();
        assert_eq!(out.r_tilde, r);
        assert!(out.used_fd_derivative);
        assert!(out.weight.iter().all(|&w| w == 0.0));
    }
}
