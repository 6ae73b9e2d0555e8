use serde::{Deserialize, Serialize};

use super::heat::{table_from, KernelOptions, KernelTable, Problem};
use crate::corrector::CorrectorSolution;
use crate::{Error, Result};

/// The moving tube `|T(x) - T(xi) - W t| < r` for `t >= s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    pub xi: f64,
    pub r: f64,
    pub s: f64,
}

impl TubeSpec {
    pub fn new(xi: f64, r: f64, s: f64) -> Result<Self> {
        if !(r > 0.0) || !xi.is_finite() || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad tube xi = {xi}, R = {r}, s = {s}"
            )));
        }
        Ok(TubeSpec { xi, r, s })
    }

    /// Offset of `T(x)` from the tube centre at time `t`.
    fn offset(&self, t_x: f64, t_xi: f64, w: f64, t: f64) -> f64 {
        t_x - t_xi - w * t
    }
}

/// Kernel killed on the boundary of a moving tube, started at time `tube.s`
/// from `delta_y / nu(y)`. Output times are absolute and must exceed `s`.
pub fn killed_kernel(
    problem: &Problem,
    corrector: &CorrectorSolution,
    tube: &TubeSpec,
    y: f64,
    times: &[f64],
    opts: &KernelOptions,
) -> Result<KernelTable> {
    let grid = *problem.grid();
    if corrector.grid != grid {
        return Err(Error::InvalidArgument(
            "corrector grid differs from the problem grid".into(),
        ));
    }
    let j = problem.source_index(y)?;
    let w = problem.w;
    let t = &corrector.t;
    let t_xi = corrector
        .eval(tube.xi)
        .ok_or_else(|| Error::DomainTooSmall(format!("tube anchor {} is off the grid", tube.xi)))?;
    let inside = |i: usize, time: f64| tube.offset(t[i], t_xi, w, time).abs() < tube.r;
    if !inside(j, tube.s) {
        return Err(Error::InvalidArgument(format!(
            "{y} is not inside the tube at time {}",
            tube.s
        )));
    }
    let n = grid.len();
    let mask = move |time: f64, p: &mut [f64]| -> Result<()> {
        // T is increasing, so the tube is an interval of nodes.
        if inside(0, time) || inside(n - 1, time) {
            return Err(Error::DomainTooSmall(format!(
                "tube reaches the end of the grid at t = {time}"
            )));
        }
        for (i, v) in p.iter_mut().enumerate() {
            if !inside(i, time) {
                *v = 0.0;
            }
        }
        Ok(())
    };
    table_from(
        problem,
        y,
        j,
        problem.delta(j),
        tube.s,
        times,
        opts,
        true,
        mask,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrector::solve_corrector;
    use crate::kernel::heat_kernel;
    use crate::medium::Medium;
    use crate::Grid;

    fn setup(w: f64) -> (Problem, CorrectorSolution) {
        let grid = Grid::with_spacing(12.0, 0.04).unwrap();
        let a = |x: f64| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x).cos();
        let nu = |x: f64| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * x).sin();
        let medium = Medium::new(grid, &a, &nu);
        let corr = solve_corrector(&a, &nu, w, &grid, 2.0).unwrap();
        (Problem::new(medium, w, 2.0).unwrap(), corr)
    }

    #[test]
    fn killed_below_free_and_mass_decreases() {
        let (p, corr) = setup(1.0);
        let tube = TubeSpec::new(0.0, 1.5, 0.0).unwrap();
        let times = [0.1, 0.3, 0.6, 1.0, 1.5];
        let opts = KernelOptions::default();
        let killed = killed_kernel(&p, &corr, &tube, 0.0, &times, &opts).unwrap();
        let free = heat_kernel(&p, 0.0, &times, &opts).unwrap();
        for k in 0..times.len() {
            for i in 0..p.grid().len() {
                assert!(killed.values[k][i] <= free.values[k][i] + 1e-12);
            }
        }
        assert!(killed.mass.windows(2).all(|m| m[1] < m[0]));
        assert!(killed.mass[4] < 0.9 * free.mass[4]);
        assert!(killed.min_value >= 0.0);
    }

    #[test]
    fn tube_follows_drift() {
        let (p, corr) = setup(2.0);
        let tube = TubeSpec::new(0.0, 1.0, 0.0).unwrap();
        let killed =
            killed_kernel(&p, &corr, &tube, 0.0, &[1.0], &KernelOptions::default()).unwrap();
        // Mass sits to the right, around T = W t.
        let grid = p.grid();
        let centre: f64 = (0..grid.len())
            .map(|i| grid.x(i) * killed.values[0][i])
            .sum::<f64>()
            / killed.values[0].iter().sum::<f64>();
        assert!(centre > 1.0, "{centre}");
        for i in 0..grid.len() {
            if (corr.t[i] - 2.0).abs() >= 1.0 {
                assert_eq!(killed.values[0][i], 0.0);
            }
        }
    }

    #[test]
    fn start_outside_or_escaping_tube_is_rejected() {
        let (p, corr) = setup(1.0);
        let tube = TubeSpec::new(0.0, 0.5, 0.0).unwrap();
        let o = KernelOptions::default();
        assert!(killed_kernel(&p, &corr, &tube, 2.0, &[0.5], &o).is_err());
        let far = TubeSpec::new(0.0, 0.5, 0.0).unwrap();
        let e = killed_kernel(&p, &corr, &far, 0.0, &[30.0], &o).unwrap_err();
        assert!(matches!(e, Error::DomainTooSmall(_)));
        assert!(TubeSpec::new(0.0, 0.0, 0.0).is_err());
    }
}
