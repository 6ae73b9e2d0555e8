//! Built-in run configurations.

use hetkern::eigen::EigenOptions;
use hetkern::fields::{FieldKindName, FieldParams, FieldSpec};

use crate::config::{
    CanonicalConfig, GreenConfig, GridConfig, KernelConfig, OriginalConfig, Pipeline, RunConfig,
    ScalingConfig, Tolerances, VerifyConfig,
};

fn periodic(mean: f64, amplitude: f64, period: f64, mu: f64) -> FieldSpec {
    FieldSpec {
        kind: FieldKindName::PeriodicTrig,
        mu,
        seed: None,
        params: FieldParams {
            mean: Some(mean),
            amplitude: Some(amplitude),
            period: Some(period),
            ..Default::default()
        },
    }
}

fn quasiperiodic(mean: f64, amplitude: f64, frequencies: Vec<f64>, mu: f64) -> FieldSpec {
    FieldSpec {
        kind: FieldKindName::Quasiperiodic,
        mu,
        seed: None,
        params: FieldParams {
            mean: Some(mean),
            amplitude: Some(amplitude),
            frequencies: Some(frequencies),
            ..Default::default()
        },
    }
}

fn cells(
    kind: FieldKindName,
    values: Vec<f64>,
    width: f64,
    seed: Option<u64>,
    mu: f64,
) -> FieldSpec {
    FieldSpec {
        kind,
        mu,
        seed,
        params: FieldParams {
            values: Some(values),
            cell_width: Some(width),
            ..Default::default()
        },
    }
}

fn base(canonical: CanonicalConfig, original: OriginalConfig, scaling: ScalingConfig) -> RunConfig {
    RunConfig {
        pipeline: Pipeline::All,
        seed: None,
        out: None,
        grid: GridConfig {
            half_width: 20.0,
            h: 0.02,
        },
        canonical: Some(canonical),
        original: Some(original),
        kernel: KernelConfig::default(),
        green: GreenConfig::default(),
        verify: VerifyConfig {
            scaling: Some(scaling),
            ..VerifyConfig::default()
        },
        tolerances: Tolerances::default(),
    }
}

/// Named presets: constant, periodic, quasiperiodic and random coefficients.
pub fn presets() -> Vec<(&'static str, RunConfig)> {
    let sweep = vec![0.5, 1.0, 2.0];
    let scaling = |z| ScalingConfig { sigma: 2.0, z };
    vec![
        (
            "constant-w1",
            base(
                CanonicalConfig {
                    mu: 1.0,
                    w: 1.0,
                    a: FieldSpec::constant(1.0, 1.0),
                    nu: FieldSpec::constant(1.0, 1.0),
                    w_sweep: sweep.clone(),
                },
                OriginalConfig {
                    mu: 1.0,
                    a: FieldSpec::constant(1.0, 1.0),
                    r: FieldSpec::constant(0.0, 1.0),
                    gamma: Some(1.0),
                    gamma_offset: None,
                    eigen: EigenOptions::default(),
                },
                scaling(0.0),
            ),
        ),
        (
            "periodic",
            base(
                CanonicalConfig {
                    mu: 2.0,
                    w: 1.0,
                    a: periodic(1.0, 0.5, 1.0, 2.0),
                    nu: cells(
                        FieldKindName::PiecewisePeriodic,
                        vec![0.5, 2.0],
                        0.5,
                        None,
                        2.0,
                    ),
                    w_sweep: sweep.clone(),
                },
                OriginalConfig {
                    mu: 2.0,
                    a: periodic(1.0, 0.5, 1.0, 2.0),
                    r: periodic(0.0, 1.0, 1.0, 2.0),
                    gamma: None,
                    gamma_offset: Some(1.0),
                    eigen: EigenOptions::default(),
                },
                scaling(0.3),
            ),
        ),
        (
            "quasiperiodic",
            base(
                CanonicalConfig {
                    mu: 2.5,
                    w: 1.0,
                    a: quasiperiodic(1.5, 0.4, vec![1.0, 2f64.sqrt()], 2.5),
                    nu: quasiperiodic(1.0, 0.2, vec![1.0, 3f64.sqrt()], 2.5),
                    w_sweep: sweep.clone(),
                },
                OriginalConfig {
                    mu: 2.5,
                    a: quasiperiodic(1.5, 0.4, vec![1.0, 2f64.sqrt()], 2.5),
                    r: quasiperiodic(0.0, 0.5, vec![1.0, 2f64.sqrt()], 2.5),
                    gamma: None,
                    gamma_offset: Some(1.0),
                    eigen: EigenOptions::default(),
                },
                scaling(0.3),
            ),
        ),
        (
            "random-mu2",
            base(
                CanonicalConfig {
                    mu: 2.0,
                    w: 1.0,
                    a: cells(
                        FieldKindName::PiecewiseRandom,
                        vec![0.5, 2.0],
                        1.0,
                        Some(1),
                        2.0,
                    ),
                    nu: cells(
                        FieldKindName::PiecewiseRandom,
                        vec![0.5, 2.0],
                        1.0,
                        Some(2),
                        2.0,
                    ),
                    w_sweep: sweep,
                },
                OriginalConfig {
                    mu: 2.0,
                    a: cells(
                        FieldKindName::PiecewiseRandom,
                        vec![0.5, 2.0],
                        1.0,
                        Some(3),
                        2.0,
                    ),
                    r: cells(
                        FieldKindName::PiecewiseRandom,
                        vec![-1.0, 1.0],
                        1.0,
                        Some(4),
                        2.0,
                    ),
                    gamma: None,
                    gamma_offset: Some(1.0),
                    eigen: EigenOptions::default(),
                },
                scaling(0.3),
            ),
        ),
    ]
}

pub fn preset(name: &str) -> Option<RunConfig> {
    presets()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hetkern::fields::{make_field, FieldRole};

    #[test]
    fn names_and_fields() {
        let all = presets();
        let names: Vec<&str> = all.iter().map(|(n, _)| *n).collect();
        assert_eq!(
            names,
            ["constant-w1", "periodic", "quasiperiodic", "random-mu2"]
        );
        for (name, cfg) in &all {
            cfg.validate().unwrap();
            let c = cfg.canonical.as_ref().unwrap();
            let o = cfg.original.as_ref().unwrap();
            for s in [&c.a, &c.nu, &o.a] {
                make_field(s, FieldRole::Canonical).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
            make_field(&o.r, FieldRole::Original).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("constant-w1").is_some());
        assert!(preset("nope").is_none());
    }
}
