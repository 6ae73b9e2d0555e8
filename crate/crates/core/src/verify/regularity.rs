use serde::{Deserialize, Serialize};

use super::Check;
use crate::corrector::CorrectorSolution;
use crate::kernel::{evolve, KernelOptions, KernelTable, Problem};
use crate::{Error, Result};

/// Number of exponents scanned in `[0.05, 0.95]`.
const BETA_GRID: usize = 64;
const OSC_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    /// Largest scanned exponent not exceeding the fitted small-distance
    /// slope; zero when none qualifies.
    pub beta_hat: f64,
    pub c_hat: f64,
    /// Slope of `ln|p(t,x) - p(t,x')| + (1+β)/2 ln t` against `ln|x - x'|`.
    pub slope: f64,
    pub samples: usize,
}

impl NashReport {
    pub fn check(&self, name: &str) -> Check {
        let ok = self.beta_hat > 0.0 && self.beta_hat < 1.0 && self.c_hat.is_finite();
        Check::flag(
            name,
            ok,
            format!(
                "beta_hat={:.4} C_hat={:.4e} slope={:.4}",
                self.beta_hat, self.c_hat, self.slope
            ),
        )
    }
}

/// Hölder exponent and constant of a solution with datum of weighted `L¹`
/// norm `l1`, from pairs at distances `h, 2h, 4h, …` up to `max_distance`
/// around the bulk of the solution at each usable time past `t_min`.
pub fn nash_exponent(
    table: &KernelTable,
    l1: f64,
    t_min: f64,
    max_distance: f64,
) -> Result<NashReport> {
    let h = table.grid.spacing();
    let n = table.grid.len();
    // (ln d, ln t, ln osc)
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    for k in 0..table.len() {
        let t = table.times[k] - table.start;
        if t < t_min || !table.usable(k) {
            continue;
        }
        let row = &table.values[k];
        let peak = row.iter().copied().fold(0.0, f64::max);
        let core: Vec<usize> = (0..n)
            .filter(|&i| table.trusted(k, i) && row[i] > 1e-3 * peak)
            .collect();
        let stride = (core.len() / 40).max(1);
        for &i in core.iter().step_by(stride) {
            let mut m = 1;
            while m as f64 * h <= max_distance + 1e-12 {
                if i + m < n && table.trusted(k, i + m) {
                    let osc = (row[i + m] - row[i]).abs();
                    if osc > OSC_FLOOR {
                        samples.push(((m as f64 * h).ln(), t.ln(), (osc / l1).ln()));
                    }
                }
                m *= 2;
            }
        }
    }
    if samples.len() < 3 {
        return Err(Error::DegenerateSample(
            "oscillations all below the floor".into(),
        ));
    }
    let slope_for = |beta: f64| {
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .map(|&(ld, lt, lo)| (ld, lo + 0.5 * (1.0 + beta) * lt))
            .collect();
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (sxx, sxy) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
        (m * sxy - sx * sy) / (m * sxx - sx * sx)
    };
    let c_for = |beta: f64| {
        samples
            .iter()
            .map(|&(ld, lt, lo)| (lo + 0.5 * (1.0 + beta) * lt - beta * ld).exp())
            .fold(0.0, f64::max)
    };
    let mut best = None;
    for j in 0..BETA_GRID {
        let beta = 0.05 + 0.9 * j as f64 / (BETA_GRID - 1) as f64;
        let s = slope_for(beta);
        if s >= beta {
            best = Some((beta, s));
        }
    }
    Ok(match best {
        Some((beta, s)) => NashReport {
            beta_hat: beta,
            c_hat: c_for(beta),
            slope: s,
            samples: samples.len(),
        },
        None => NashReport {
            beta_hat: 0.0,
            c_hat: f64::INFINITY,
            slope: slope_for(0.05),
            samples: samples.len(),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub osc_small: f64,
    pub osc_large: f64,
    pub rho: f64,
    pub nodes_small: usize,
    pub nodes_large: usize,
}

impl ContractionReport {
    pub fn check(&self, name: &str) -> Check {
        Check::at_most(name, self.rho, 1.0).with_detail(format!(
            "osc {:.4e} over {} nodes against {:.4e} over {}",
            self.osc_small, self.nodes_small, self.osc_large, self.nodes_large
        ))
    }
}

/// Oscillation of the table over the discrete tube of half-width `r` from
/// time `s` to `s + r²`.
fn tube_oscillation(
    table: &KernelTable,
    corrector: &CorrectorSolution,
    t_xi: f64,
    r: f64,
    s: f64,
) -> (f64, usize) {
    let (mut lo, mut hi, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for k in 0..table.len() {
        let t = table.times[k];
        if t < s - 1e-12 || t > s + r * r + 1e-12 || !table.usable(k) {
            continue;
        }
        for i in 0..table.grid.len() {
            if (corrector.t[i] - t_xi - table.w * t).abs() < r {
                let v = table.values[k][i];
                lo = lo.min(v);
                hi = hi.max(v);
                count += 1;
            }
        }
    }
    (hi - lo, count)
}

/// Ratio of oscillations over the tubes of half-widths `delta r` and `r`.
pub fn oscillation_contraction(
    table: &KernelTable,
    corrector: &CorrectorSolution,
    xi: f64,
    r: f64,
    s: f64,
    delta: f64,
) -> Result<ContractionReport> {
    if !(delta > 0.0 && delta < 1.0 && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < delta < 1 and R > 0 (got {delta}, {r})"
        )));
    }
    if corrector.grid != table.grid {
        return Err(Error::InvalidArgument(
            "corrector grid differs from the kernel grid".into(),
        ));
    }
    let t_xi = corrector
        .eval(xi)
        .ok_or_else(|| Error::EmptyTube(format!("anchor {xi} is off the grid")))?;
    let (osc_small, nodes_small) = tube_oscillation(table, corrector, t_xi, delta * r, s);
    let (osc_large, nodes_large) = tube_oscillation(table, corrector, t_xi, r, s);
    if nodes_small == 0 || nodes_large == 0 {
        return Err(Error::EmptyTube(format!(
            "no usable samples in the tube around {xi} from t = {s}"
        )));
    }
    Ok(ContractionReport {
        osc_small,
        osc_large,
        rho: if osc_large > 0.0 {
            osc_small / osc_large
        } else {
            1.0
        },
        nodes_small,
        nodes_large,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1LinfReport {
    pub c: f64,
    /// `sqrt(t) |p - q|_∞ / |p0 - q0|_1` per time.
    pub per_time: Vec<f64>,
}

/// Fits `sup_t sqrt(t) |p(t) - q(t)|_∞ / |p0 - q0|_{L¹(ν)}`.
pub fn l1_linf_constant(
    problem: &Problem,
    p0: &[f64],
    q0: &[f64],
    times: &[f64],
    opts: &KernelOptions,
) -> Result<L1LinfReport> {
    let diff0: Vec<f64> = p0.iter().zip(q0).map(|(a, b)| (a - b).abs()).collect();
    let norm = problem.medium.mass(&diff0);
    if !(norm > 0.0) {
        return Err(Error::DegenerateSample("identical initial data".into()));
    }
    let run = |d: &[f64]| {
        evolve(
            &problem.medium,
            problem.w,
            d.to_vec(),
            0.0,
            times,
            opts.policy,
            |_, _| Ok(()),
        )
    };
    let (ep, eq) = (run(p0)?, run(q0)?);
    let per_time: Vec<f64> = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let sup = ep.snapshots[k]
                .iter()
                .zip(&eq.snapshots[k])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            t.sqrt() * sup / norm
        })
        .collect();
    Ok(L1LinfReport {
        c: per_time.iter().copied().fold(0.0, f64::max),
        per_time,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearDiagonal {
    /// `inf sqrt(t) P` over trusted samples with `|z| <= r sqrt(t)`.
    pub inf_scaled: f64,
    /// `1 / inf_scaled`
    pub c_implied: f64,
    pub points: usize,
}

pub fn near_diagonal_check(
    table: &KernelTable,
    corrector: &CorrectorSolution,
    r: f64,
    t_min: f64,
) -> Result<NearDiagonal> {
    if corrector.grid != table.grid {
        return Err(Error::InvalidArgument(
            "corrector grid differs from the kernel grid".into(),
        ));
    }
    let ty = corrector.t[table.source];
    let mut inf = f64::INFINITY;
    let mut points = 0;
    for k in 0..table.len() {
        let t = table.times[k] - table.start;
        if t < t_min {
            continue;
        }
        for i in 0..table.grid.len() {
            let z = corrector.t[i] - ty - table.w * t;
            if table.trusted(k, i) && z.abs() <= r * t.sqrt() {
                inf = inf.min(t.sqrt() * table.values[k][i]);
                points += 1;
            }
        }
    }
    if points == 0 {
        return Err(Error::EmptyTrustRegion(format!(
            "no trusted samples within {r} sqrt(t) of the flow"
        )));
    }
    Ok(NearDiagonal {
        inf_scaled: inf,
        c_implied: 1.0 / inf,
        points,
    })
}
