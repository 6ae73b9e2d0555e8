use serde::{Deserialize, Serialize};

use super::stepper::{evolve, TimePolicy};
use crate::medium::Medium;
use crate::{Error, Grid, Result};

/// Absorbed mass beyond which the truncated domain is considered felt.
pub const CONTAMINATION_LEVEL: f64 = 1e-6;
/// Outputs reached in fewer steps than this have not resolved the delta.
pub const MIN_RELIABLE_STEPS: usize = 10;

/// A discretized canonical problem `nu p_t = (nu a p_x)_x - W p_x`, or the
/// original equation when the medium carries a reaction term and `w = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub medium: Medium,
    pub w: f64,
    /// Ellipticity constant, used to size the trust region.
    pub mu: f64,
}

impl Problem {
    pub fn new(medium: Medium, w: f64, mu: f64) -> Result<Self> {
        if !w.is_finite() || !(mu >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "bad problem w = {w}, mu = {mu}"
            )));
        }
        Ok(Problem { medium, w, mu })
    }

    pub fn grid(&self) -> &Grid {
        self.medium.grid()
    }

    /// The same medium with the drift reversed.
    pub fn adjoint(&self) -> Problem {
        Problem {
            medium: self.medium.clone(),
            w: -self.w,
            mu: self.mu,
        }
    }

    /// Discrete unit mass at node `j`.
    pub fn delta(&self, j: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.grid().len()];
        p[j] = 1.0 / (self.grid().spacing() * self.medium.nu()[j]);
        p
    }

    /// Index of `y`, which must be an interior node.
    pub fn source_index(&self, y: f64) -> Result<usize> {
        match self.grid().index_of(y) {
            Some(j) if j > 0 && j + 1 < self.grid().len() => Ok(j),
            _ => Err(Error::InvalidArgument(format!(
                "{y} is not an interior grid node"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    pub policy: TimePolicy,
}

/// `P(t_k, x_i, y)` on a grid, with bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    pub grid: Grid,
    pub y: f64,
    pub source: usize,
    pub w: f64,
    pub mu: f64,
    /// Time at which the datum is imposed.
    pub start: f64,
    pub times: Vec<f64>,
    /// `values[k][i]`, unclipped.
    pub values: Vec<Vec<f64>>,
    pub mass: Vec<f64>,
    pub boundary_flux: Vec<f64>,
    pub steps: Vec<usize>,
    pub min_value: f64,
    /// Fraction of faces with upwind blending.
    pub blended_fraction: f64,
}

impl KernelTable {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// First output index at which the ends have absorbed noticeable mass.
    pub fn contaminated_from(&self) -> Option<usize> {
        self.boundary_flux
            .iter()
            .position(|&f| f > CONTAMINATION_LEVEL)
    }

    pub fn boundary_contamination(&self) -> bool {
        self.contaminated_from().is_some()
    }

    /// Péclet blending active on more than a tenth of the faces.
    pub fn cfl_advisory(&self) -> bool {
        self.blended_fraction > 0.1
    }

    pub fn reliable(&self, k: usize) -> bool {
        self.steps[k] >= MIN_RELIABLE_STEPS
    }

    /// Whether output `k` is usable at all, i.e. reliable and uncontaminated.
    pub fn usable(&self, k: usize) -> bool {
        self.reliable(k) && self.contaminated_from().is_none_or(|c| k < c)
    }

    /// Trust region: away from the ends by `5 sqrt(t mu)` and before the ends
    /// have absorbed noticeable mass.
    pub fn trusted(&self, k: usize, i: usize) -> bool {
        let elapsed = self.times[k] - self.start;
        self.usable(k)
            && self.grid.x(i).abs() <= self.grid.half_width() - 5.0 * (elapsed * self.mu).sqrt()
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    /// Value at time index `k` and node `x`.
    pub fn at(&self, k: usize, x: f64) -> Option<f64> {
        self.grid.index_of(x).map(|i| self.values[k][i])
    }

    /// Long format `t,x,value,mass`, negative round-off clipped to zero.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,value,mass\n");
        for (k, row) in self.values.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{:.12e},{:.12}\n",
                    self.times[k],
                    self.grid.x(i),
                    v.max(0.0),
                    self.mass[k]
                ));
            }
        }
        s
    }
}

/// Evolves an arbitrary datum, recording it as a kernel table.
pub(crate) fn table_from(
    problem: &Problem,
    y: f64,
    source: usize,
    p0: Vec<f64>,
    start: f64,
    times: &[f64],
    opts: &KernelOptions,
    removal: bool,
    after_step: impl FnMut(f64, &mut [f64]) -> Result<()>,
) -> Result<KernelTable> {
    let m0 = problem.medium.mass(&p0);
    let ev = evolve(
        &problem.medium,
        problem.w,
        p0,
        start,
        times,
        opts.policy,
        after_step,
    )?;
    let mass: Vec<f64> = ev
        .snapshots
        .iter()
        .map(|p| problem.medium.mass(p))
        .collect();
    // With a removal hook, everything missing counts as absorbed; otherwise
    // the flux through the ends is tracked independently of the mass.
    let boundary_flux = if removal {
        mass.iter().map(|m| m0 - m).collect()
    } else {
        ev.absorbed
    };
    Ok(KernelTable {
        grid: *problem.grid(),
        y,
        source,
        w: problem.w,
        mu: problem.mu,
        start,
        times: times.to_vec(),
        values: ev.snapshots,
        mass,
        boundary_flux,
        steps: ev.steps,
        min_value: ev.min_value,
        blended_fraction: problem.medium.blended_fraction(problem.w),
    })
}

/// Fundamental solution with datum `delta_y / nu(y)` at time 0.
pub fn heat_kernel(
    problem: &Problem,
    y: f64,
    times: &[f64],
    opts: &KernelOptions,
) -> Result<KernelTable> {
    let j = problem.source_index(y)?;
    table_from(
        problem,
        y,
        j,
        problem.delta(j),
        0.0,
        times,
        opts,
        false,
        |_, _| Ok(()),
    )
}
