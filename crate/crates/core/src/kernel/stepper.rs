//! Crank–Nicolson stepping of `nu p_t = (D p_x)_x - W p_x (+ r p)` with zero
//! Dirichlet ends.

use serde::{Deserialize, Serialize};

use crate::medium::Medium;
use crate::numerics::Tridiagonal;
use crate::{Error, Result};

/// How the step size is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TimePolicy {
    /// `h²/4` for `fine_steps` steps, then `h/4`.
    Ramp {
        fine_steps: usize,
    },
    /// `safety` times the largest step keeping the explicit half monotone,
    /// capped at `h/4`.
    Positivity {
        safety: f64,
    },
    Fixed {
        dt: f64,
    },
}

impl Default for TimePolicy {
    fn default() -> Self {
        TimePolicy::ramp()
    }
}

impl TimePolicy {
    pub fn ramp() -> Self {
        TimePolicy::Ramp { fine_steps: 50 }
    }

    /// Step size for step number `k` (zero based).
    pub fn dt(&self, k: usize, medium: &Medium, w: f64) -> f64 {
        let h = medium.grid().spacing();
        match *self {
            TimePolicy::Ramp { fine_steps } => {
                if k < fine_steps {
                    0.25 * h * h
                } else {
                    0.25 * h
                }
            }
            TimePolicy::Positivity { safety } => (safety * medium.positivity_step(w)).min(0.25 * h),
            TimePolicy::Fixed { dt } => dt,
        }
    }

    /// Step size that does not depend on the step number, if any.
    fn uniform(&self, medium: &Medium, w: f64) -> Option<f64> {
        match self {
            TimePolicy::Ramp { .. } => None,
            _ => Some(self.dt(0, medium, w)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TimePolicy::Ramp { .. } => true,
            TimePolicy::Positivity { safety } => safety > 0.0 && safety <= 1.0,
            TimePolicy::Fixed { dt } => dt > 0.0 && dt.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad time policy {self:?}")))
        }
    }
}

/// Reusable Crank–Nicolson stepper for one medium and drift.
pub struct Stepper<'a> {
    medium: &'a Medium,
    w: f64,
    op: Tridiagonal,
    lhs: Tridiagonal,
    lhs_dt: f64,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(medium: &'a Medium, w: f64) -> Self {
        let n = medium.grid().len();
        Stepper {
            medium,
            w,
            op: medium.operator(w),
            lhs: Tridiagonal::zeros(n),
            lhs_dt: f64::NAN,
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    pub fn medium(&self) -> &'a Medium {
        self.medium
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Net rate at which mass leaves through the two end faces.
    pub fn outflow(&self, p: &[f64]) -> f64 {
        let n = p.len();
        self.medium.face_flux(self.w, p, n - 2) - self.medium.face_flux(self.w, p, 0)
    }

    fn prepare(&mut self, dt: f64) {
        if self.lhs_dt == dt {
            return;
        }
        let n = self.op.len();
        let nu = self.medium.nu();
        for i in 1..n - 1 {
            self.lhs.lower[i] = -0.5 * dt * self.op.lower[i];
            self.lhs.diag[i] = nu[i] - 0.5 * dt * self.op.diag[i];
            self.lhs.upper[i] = -0.5 * dt * self.op.upper[i];
        }
        self.lhs.diag[0] = 1.0;
        self.lhs.upper[0] = 0.0;
        self.lhs.diag[n - 1] = 1.0;
        self.lhs.lower[n - 1] = 0.0;
        self.lhs_dt = dt;
    }

    /// Advances `p` by `dt` in place; returns the mass that left through the
    /// ends during the step.
    pub fn step(&mut self, p: &mut [f64], dt: f64) -> Result<f64> {
        if !(dt > 0.0) || p.len() != self.op.len() {
            return Err(Error::InvalidArgument(
                "step needs dt > 0 and a state on the grid".into(),
            ));
        }
        self.prepare(dt);
        let before = self.outflow(p);
        self.op.mul_vec(p, &mut self.rhs);
        let nu = self.medium.nu();
        let n = p.len();
        for i in 1..n - 1 {
            self.rhs[i] = nu[i] * p[i] + 0.5 * dt * self.rhs[i];
        }
        self.rhs[0] = 0.0;
        self.rhs[n - 1] = 0.0;
        self.lhs
            .solve_with_scratch(&mut self.rhs, &mut self.scratch)?;
        p.copy_from_slice(&self.rhs);
        Ok(0.5 * dt * (before + self.outflow(p)))
    }
}

/// One Crank–Nicolson step of the canonical equation.
pub fn step_canonical(state: &[f64], dt: f64, medium: &Medium, w: f64) -> Result<Vec<f64>> {
    let mut p = state.to_vec();
    Stepper::new(medium, w).step(&mut p, dt)?;
    Ok(p)
}

/// Snapshots of an evolution at requested output times.
#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    /// Mass that left through the ends up to each output time.
    pub absorbed: Vec<f64>,
    /// Steps taken up to each output time.
    pub steps: Vec<usize>,
    /// Most negative value seen at any step.
    pub min_value: f64,
}

/// Evolves `p0` from `t0` through the sorted output `times`, landing on each
/// exactly. `after_step(t, p)` runs after every step and may modify `p`.
pub fn evolve(
    medium: &Medium,
    w: f64,
    p0: Vec<f64>,
    t0: f64,
    times: &[f64],
    policy: TimePolicy,
    mut after_step: impl FnMut(f64, &mut [f64]) -> Result<()>,
) -> Result<Evolution> {
    policy.validate()?;
    if times.windows(2).any(|w| w[1] <= w[0]) || times.first().is_some_and(|&t| t <= t0) {
        return Err(Error::InvalidArgument(
            "output times must increase and exceed the start time".into(),
        ));
    }
    let mut stepper = Stepper::new(medium, w);
    let uniform = policy.uniform(medium, w);
    let mut p = p0;
    let mut t = t0;
    let mut k = 0usize;
    let mut absorbed = 0.0;
    let mut min_value = p.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = Evolution {
        times: times.to_vec(),
        snapshots: Vec::with_capacity(times.len()),
        absorbed: Vec::with_capacity(times.len()),
        steps: Vec::with_capacity(times.len()),
        min_value: 0.0,
    };
    for &target in times {
        while t < target {
            let mut dt = uniform.unwrap_or_else(|| policy.dt(k, medium, w));
            // Avoid a sliver step just before an output time.
            if t + 1.01 * dt >= target {
                dt = target - t;
            }
            absorbed += stepper.step(&mut p, dt)?;
            t = if (target - t - dt).abs() <= 1e-14 * target.abs().max(1.0) {
                target
            } else {
                t + dt
            };
            k += 1;
            after_step(t, &mut p)?;
            min_value = p.iter().copied().fold(min_value, f64::min);
        }
        out.snapshots.push(p.clone());
        out.absorbed.push(absorbed);
        out.steps.push(k);
    }
    out.min_value = min_value;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid;

    fn unit(grid: Grid) -> Medium {
        let one = |_: f64| 1.0;
        Medium::new(grid, &one, &one)
    }

    fn gaussian(x: f64, t: f64) -> f64 {
        (-x * x / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt()
    }

    #[test]
    fn advected_gaussian_second_order() {
        // Start from the exact kernel at t = 0.25 and advance to 0.5.
        let err = |h: f64| {
            let grid = Grid::with_spacing(12.0, h).unwrap();
            let m = unit(grid);
            let p0: Vec<f64> = grid.nodes().iter().map(|&x| gaussian(x, 0.25)).collect();
            let policy = TimePolicy::Fixed { dt: h / 4.0 };
            let ev = evolve(&m, 1.0, p0, 0.25, &[0.5], policy, |_, _| Ok(())).unwrap();
            grid.nodes()
                .iter()
                .zip(&ev.snapshots[0])
                .map(|(&x, p)| (p - gaussian(x - 0.25, 0.5)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.04), err(0.02));
        assert!(e2 < 2e-4, "{e2}");
        assert!(e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn mass_plus_outflow_is_conserved() {
        let grid = Grid::with_spacing(3.0, 0.05).unwrap();
        let a = |x: f64| 1.5 + (3.0 * x).sin();
        let nu = |x: f64| 1.0 + 0.5 * (x * x).cos();
        let m = Medium::new(grid, &a, &nu);
        let mut p: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| gaussian(x - 1.0, 0.3))
            .collect();
        p[0] = 0.0;
        *p.last_mut().unwrap() = 0.0;
        let m0 = m.mass(&p);
        let mut s = Stepper::new(&m, 2.0);
        let mut out = 0.0;
        for _ in 0..200 {
            let before = m.mass(&p) + out;
            out += s.step(&mut p, 0.01).unwrap();
            assert!((m.mass(&p) + out - before).abs() < 1e-12);
        }
        assert!(out > 1e-3);
        assert!((m.mass(&p) + out - m0).abs() < 1e-10);
    }

    #[test]
    fn lands_on_output_times() {
        let grid = Grid::with_spacing(4.0, 0.1).unwrap();
        let m = unit(grid);
        let mut p0 = vec![0.0; grid.len()];
        p0[grid.center()] = 10.0;
        let mut last = 0.0;
        let ev = evolve(
            &m,
            0.0,
            p0,
            0.0,
            &[0.013, 0.5],
            TimePolicy::ramp(),
            |t, _| {
                assert!(t > last);
                last = t;
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(last, 0.5);
        assert_eq!(ev.snapshots.len(), 2);
        assert!(ev.steps[0] < ev.steps[1]);
    }

    #[test]
    fn positivity_policy_keeps_sign() {
        let grid = Grid::with_spacing(5.0, 0.05).unwrap();
        let a = |x: f64| 2.0 + 1.5 * (7.0 * x).cos();
        let m = Medium::new(grid, &a, &|_: f64| 1.0);
        let mut p0 = vec![0.0; grid.len()];
        p0[grid.center()] = 20.0;
        let ev = evolve(
            &m,
            3.0,
            p0,
            0.0,
            &[0.1, 1.0],
            TimePolicy::Positivity { safety: 0.9 },
            |_, _| Ok(()),
        )
        .unwrap();
        assert!(ev.min_value >= 0.0, "{}", ev.min_value);
    }

    #[test]
    fn rejects_bad_times() {
        let grid = Grid::with_spacing(1.0, 0.1).unwrap();
        let m = unit(grid);
        let p0 = vec![0.0; grid.len()];
        assert!(evolve(
            &m,
            0.0,
            p0.clone(),
            0.0,
            &[0.5, 0.2],
            TimePolicy::ramp(),
            |_, _| Ok(())
        )
        .is_err());
        assert!(evolve(
            &m,
            0.0,
            p0,
            0.0,
            &[0.5],
            TimePolicy::Fixed { dt: -1.0 },
            |_, _| Ok(())
        )
        .is_err());
    }
}
