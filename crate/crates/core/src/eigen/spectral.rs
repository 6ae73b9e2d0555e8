//! Wronskian, invariant measure, γ-derivative and the induced corrector.

use rayon::prelude::*;

use super::principal::principal_value_estimate;
use super::riccati::solve_eigenfunction;
use super::{EigenOptions, EigenPair, Side};
use crate::fields::Profile;
use crate::{Error, Grid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WronskianReport {
    pub values: Vec<f64>,
    pub mean: f64,
    pub rel_std: f64,
    pub min: f64,
}

fn same_problem(right: &EigenPair, left: &EigenPair) -> Result<()> {
    if right.side != Side::DecayRight || left.side != Side::DecayLeft {
        return Err(Error::InvalidArgument(
            "expected a decay-right and a decay-left pair".into(),
        ));
    }
    if right.gamma != left.gamma || right.grid != left.grid {
        return Err(Error::InvalidArgument(
            "pairs must share gamma and grid".into(),
        ));
    }
    Ok(())
}

/// `W = a φ̃' φ - a φ' φ̃ = φ φ̃ (w̃ - w)` at every node.
pub fn wronskian(right: &EigenPair, left: &EigenPair) -> Result<WronskianReport> {
    same_problem(right, left)?;
    let values: Vec<f64> = (0..right.w.len())
        .map(|i| (right.lnphi[i] + left.lnphi[i]).exp() * (left.w[i] - right.w[i]))
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NonPositiveWronskian(min));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(WronskianReport {
        mean,
        rel_std: var.sqrt() / mean,
        min,
        values,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantMeasure {
    pub values: Vec<f64>,
    pub inf: f64,
    pub sup: f64,
}

/// `ν_γ = φ φ̃`.
pub fn invariant_measure(right: &EigenPair, left: &EigenPair) -> Result<InvariantMeasure> {
    same_problem(right, left)?;
    let values: Vec<f64> = right
        .lnphi
        .iter()
        .zip(&left.lnphi)
        .map(|(a, b)| (a + b).exp())
        .collect();
    let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
    let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(InvariantMeasure { values, inf, sup })
}

/// `inf (φ̃'/φ̃ - φ'/φ)`.
pub fn epsilon_gap(right: &EigenPair, left: &EigenPair) -> f64 {
    (0..right.w.len())
        .map(|i| (left.w[i] - right.w[i]) / right.a[i])
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiDot {
    /// Richardson-extrapolated `φ̇/φ`.
    pub ratio: Vec<f64>,
    /// `-W_γ φ̇/φ`
    pub t_gamma: Vec<f64>,
    pub w_gamma: f64,
    pub dgamma: f64,
    /// `sup |D(dγ/2) - D(dγ)| / sup |D(dγ/2)|` for the plain difference quotients.
    pub halving_change: f64,
}

fn quotient(plus: &EigenPair, minus: &EigenPair, dg: f64) -> Vec<f64> {
    plus.lnphi
        .iter()
        .zip(&minus.lnphi)
        .map(|(p, m)| (p - m) / (2.0 * dg))
        .collect()
}

/// `φ̇/φ` by central differences of `ln φ` in `γ` with one Richardson step;
/// `T_γ = -W_γ φ̇/φ`.
pub fn phi_dot(
    a: &dyn Profile,
    r: &dyn Profile,
    gamma: f64,
    dgamma: f64,
    grid: &Grid,
    opts: &EigenOptions,
) -> Result<PhiDot> {
    if !(dgamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dgamma must be positive, got {dgamma}"
        )));
    }
    let jobs = [
        (gamma, Side::DecayRight),
        (gamma, Side::DecayLeft),
        (gamma + dgamma, Side::DecayRight),
        (gamma - dgamma, Side::DecayRight),
        (gamma + 0.5 * dgamma, Side::DecayRight),
        (gamma - 0.5 * dgamma, Side::DecayRight),
    ];
    let pairs = jobs
        .par_iter()
        .map(|&(g, s)| solve_eigenfunction(a, r, g, s, grid, opts))
        .collect::<Result<Vec<_>>>()?;
    let w_gamma = wronskian(&pairs[0], &pairs[1])?.mean;
    Ok(from_pairs(&pairs[2..], dgamma, w_gamma))
}

fn from_pairs(shifted: &[EigenPair], dgamma: f64, w_gamma: f64) -> PhiDot {
    let coarse = quotient(&shifted[0], &shifted[1], dgamma);
    let fine = quotient(&shifted[2], &shifted[3], 0.5 * dgamma);
    let ratio: Vec<f64> = fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| f + (f - c) / 3.0)
        .collect();
    let scale = fine.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let change = fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (f - c).abs())
        .fold(0.0, f64::max);
    PhiDot {
        t_gamma: ratio.iter().map(|v| -w_gamma * v).collect(),
        ratio,
        w_gamma,
        dgamma,
        halving_change: if scale > 0.0 { change / scale } else { 0.0 },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSummary {
    pub gamma: f64,
    pub gamma_lower: f64,
    pub right: EigenPair,
    pub left: EigenPair,
    pub wronskian: WronskianReport,
    pub w_gamma: f64,
    pub nu_gamma: InvariantMeasure,
    pub phi_dot: PhiDot,
    pub t_gamma: Vec<f64>,
    pub epsilon_gap: f64,
    /// `inf W_γ / (a ν_γ)`, which must agree with `epsilon_gap`.
    pub epsilon_from_measure: f64,
}

/// Everything the original-equation pipeline needs at one `γ`.
pub fn spectral_summary(
    a: &dyn Profile,
    r: &dyn Profile,
    gamma: f64,
    grid: &Grid,
    opts: &EigenOptions,
) -> Result<SpectralSummary> {
    let gamma_lower = principal_value_estimate(a, r, grid.spacing(), &[grid.half_width()])?[0];
    if gamma < gamma_lower + opts.min_gap {
        return Err(Error::GammaBelowPrincipal {
            gamma,
            reason: format!(
                "principal value estimate {gamma_lower} plus margin {} not exceeded",
                opts.min_gap
            ),
        });
    }
    let dgamma = opts.dgamma.unwrap_or(1e-3 * (gamma - gamma_lower));
    let jobs = [
        (gamma, Side::DecayRight),
        (gamma, Side::DecayLeft),
        (gamma + dgamma, Side::DecayRight),
        (gamma - dgamma, Side::DecayRight),
        (gamma + 0.5 * dgamma, Side::DecayRight),
        (gamma - 0.5 * dgamma, Side::DecayRight),
    ];
    let mut pairs = jobs
        .par_iter()
        .map(|&(g, s)| solve_eigenfunction(a, r, g, s, grid, opts))
        .collect::<Result<Vec<_>>>()?;
    let shifted = pairs.split_off(2);
    let left = pairs.pop().unwrap();
    let right = pairs.pop().unwrap();
    let wr = wronskian(&right, &left)?;
    let nu = invariant_measure(&right, &left)?;
    let pd = from_pairs(&shifted, dgamma, wr.mean);
    let eps = epsilon_gap(&right, &left);
    let eps_nu = (0..nu.values.len())
        .map(|i| wr.mean / (right.a[i] * nu.values[i]))
        .fold(f64::INFINITY, f64::min);
    Ok(SpectralSummary {
        gamma,
        gamma_lower,
        w_gamma: wr.mean,
        t_gamma: pd.t_gamma.clone(),
        wronskian: wr,
        nu_gamma: nu,
        phi_dot: pd,
        epsilon_gap: eps,
        epsilon_from_measure: eps_nu,
        right,
        left,
    })
}

impl SpectralSummary {
    /// CSV with columns `x,w_right,w_left,lnphi_right,lnphi_left,nu_gamma,T_gamma`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,w_right,w_left,lnphi_right,lnphi_left,nu_gamma,T_gamma\n");
        let g = &self.right.grid;
        for i in 0..g.len() {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                g.x(i),
                self.right.w[i],
                self.left.w[i],
                self.right.lnphi[i],
                self.left.lnphi[i],
                self.nu_gamma.values[i],
                self.t_gamma[i]
            ));
        }
        s
    }
}
