//! Principal value `γ̲` through Dirichlet truncations: the largest eigenvalue
//! of the symmetric discretization of `φ -> (a φ')' + r φ` on `[-L, L]`.

use crate::fields::Profile;
use crate::medium::Medium;
use crate::numerics::Tridiagonal;
use crate::{Error, Grid, Result};

/// Number of eigenvalues of the symmetric tridiagonal matrix `(d, e)` below `lambda`.
fn count_below(d: &[f64], e: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - lambda - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + lambda.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal `d`
/// and off-diagonal `e` (`e.len() == d.len() - 1`): Sturm bisection, then
/// shifted inverse iteration with Rayleigh quotients.
pub fn largest_eigenvalue(d: &[f64], e: &[f64]) -> Result<f64> {
    let m = d.len();
    if m == 0 || e.len() + 1 != m {
        return Err(Error::InvalidArgument(
            "inconsistent tridiagonal sizes".into(),
        ));
    }
    let radius = |i: usize| {
        (if i > 0 { e[i - 1].abs() } else { 0.0 }) + (if i + 1 < m { e[i].abs() } else { 0.0 })
    };
    let mut lo = (0..m)
        .map(|i| d[i] - radius(i))
        .fold(f64::INFINITY, f64::min);
    let mut hi = (0..m)
        .map(|i| d[i] + radius(i))
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    hi += 1e-12 * scale;
    lo -= 1e-12 * scale;
    for _ in 0..200 {
        if hi - lo <= 1e-10 * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if count_below(d, e, mid) == m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let shift = hi + 1e-9 * scale;
    let mut sys = Tridiagonal::zeros(m);
    for i in 0..m {
        sys.diag[i] = d[i] - shift;
        if i > 0 {
            sys.lower[i] = e[i - 1];
        }
        if i + 1 < m {
            sys.upper[i] = e[i];
        }
    }
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut rho = 0.5 * (lo + hi);
    let mut scratch = vec![0.0; m];
    let mut tv = vec![0.0; m];
    for _ in 0..50 {
        sys.solve_with_scratch(&mut v, &mut scratch)?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        for i in 0..m {
            tv[i] = d[i] * v[i]
                + if i > 0 { e[i - 1] * v[i - 1] } else { 0.0 }
                + if i + 1 < m { e[i] * v[i + 1] } else { 0.0 };
        }
        let next: f64 = v.iter().zip(&tv).map(|(a, b)| a * b).sum();
        if (next - rho).abs() <= 1e-13 * scale {
            return Ok(next);
        }
        rho = next;
    }
    Err(Error::NonConvergence(
        "inverse iteration did not settle".into(),
    ))
}

/// Principal value estimates on `[-L, L]` for each `L` in `l_list`.
pub fn principal_value_estimate(
    a: &dyn Profile,
    r: &dyn Profile,
    h: f64,
    l_list: &[f64],
) -> Result<Vec<f64>> {
    if l_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("L values must increase".into()));
    }
    l_list
        .iter()
        .map(|&l| {
            let grid = Grid::with_spacing(l, h)?;
            let medium = Medium::original(grid, a, r);
            let op = medium.operator(0.0);
            let n = grid.len();
            let d = op.diag[1..n - 1].to_vec();
            let e = op.upper[1..n - 2].to_vec();
            largest_eigenvalue(&d, &e)
        })
        .collect()
}
