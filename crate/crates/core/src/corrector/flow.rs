//! Flows along the level lines of a corrector: `X(t; y)` solves
//! `T(X) - W t = T(y)`. Built on an adjoint corrector, the same evaluator
//! gives `Y(t; y)`.

use super::CorrectorSolution;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct FlowEvaluator<'a> {
    corrector: &'a CorrectorSolution,
}

impl<'a> FlowEvaluator<'a> {
    pub fn new(corrector: &'a CorrectorSolution) -> Self {
        FlowEvaluator { corrector }
    }

    pub fn corrector(&self) -> &'a CorrectorSolution {
        self.corrector
    }

    /// Interpolated corrector value.
    pub fn t_at(&self, x: f64) -> Result<f64> {
        self.corrector
            .eval(x)
            .ok_or_else(|| Error::DomainTooSmall(format!("x = {x} is outside the grid")))
    }

    /// Point where the interpolated corrector takes the value `level`.
    pub fn inverse(&self, level: f64) -> Result<f64> {
        let c = self.corrector;
        let t = &c.t;
        let n = t.len();
        if !(level >= t[0] && level <= t[n - 1]) {
            return Err(Error::DomainTooSmall(format!(
                "level {level} outside the sampled range [{}, {}]",
                t[0],
                t[n - 1]
            )));
        }
        let k = t.partition_point(|&v| v < level);
        if t[k] == level {
            return Ok(c.grid.x(k));
        }
        let j = k - 1;
        let f = (level - t[j]) / (t[k] - t[j]);
        Ok(c.grid.x(j) + f * c.grid.spacing())
    }

    /// `X(t; y)`.
    pub fn flow(&self, t: f64, y: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(y);
        }
        self.inverse(self.t_at(y)? + self.corrector.w * t)
    }
}
