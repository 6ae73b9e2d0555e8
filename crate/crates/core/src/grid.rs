use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform symmetric grid on `[-L, L]` with an odd number of nodes, so that
/// `x = 0` is always the centre node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDef", into = "GridDef")]
pub struct Grid {
    half_width: f64,
    n: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDef {
    half_width: f64,
    spacing: f64,
}

impl TryFrom<GridDef> for Grid {
    type Error = Error;
    fn try_from(d: GridDef) -> Result<Self> {
        Grid::with_spacing(d.half_width, d.spacing)
    }
}

impl From<Grid> for GridDef {
    fn from(g: Grid) -> Self {
        GridDef {
            half_width: g.half_width,
            spacing: g.spacing(),
        }
    }
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width {half_width} must be positive"
            )));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "point count {n} must be odd and >= 3"
            )));
        }
        Ok(Grid { half_width, n })
    }

    /// Grid with the requested spacing; `2L/h` must be an even integer.
    pub fn with_spacing(half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing {spacing} must be positive"
            )));
        }
        let cells = 2.0 * half_width / spacing;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "half width {half_width} is not a multiple of spacing {spacing}"
            )));
        }
        Grid::new(half_width, rounded as usize + 1)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.center() as f64) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the node at `x`, if `x` is (within round-off) a node.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let s = x / self.spacing() + self.center() as f64;
        let r = s.round();
        if (s - r).abs() < 1e-7 && r >= 0.0 && (r as usize) < self.n {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let s = (x / self.spacing() + self.center() as f64).round();
        s.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Same extent, spacing halved `k` times.
    pub fn refined(&self, k: u32) -> Grid {
        let cells = (self.n - 1) << k;
        Grid {
            half_width: self.half_width,
            n: cells + 1,
        }
    }

    /// Same spacing, different half width (rounded to whole cells).
    pub fn resized(&self, half_width: f64) -> Result<Grid> {
        let h = self.spacing();
        let half_cells = (half_width / h).round().max(1.0) as usize;
        Grid::new(half_cells as f64 * h, 2 * half_cells + 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        x.abs() <= self.half_width * (1.0 + 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_is_exactly_zero() {
        let g = Grid::with_spacing(20.0, 0.02).unwrap();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.x(g.center()), 0.0);
        assert!((g.x(0) + 20.0).abs() < 1e-12);
        assert!((g.x(g.len() - 1) - 20.0).abs() < 1e-12);
        assert_eq!(g.index_of(0.6), Some(g.center() + 30));
        assert_eq!(g.index_of(0.61), None);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1.0, 4).is_err());
        assert!(Grid::new(-1.0, 5).is_err());
        assert!(Grid::with_spacing(1.0, 0.3).is_err());
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = Grid::with_spacing(5.0, 0.1).unwrap();
        let r = g.refined(1);
        assert!((r.spacing() - 0.05).abs() < 1e-15);
        assert_eq!(r.x(r.center()), 0.0);
    }
}
