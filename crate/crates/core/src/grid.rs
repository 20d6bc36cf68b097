//! Uniform cell-centred discretization of `(0, L)` and sampled densities.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 8;

/// `N` cells of width `dx = L / N`; the nodes are the cell centres
/// `x_i = (i + ½) dx`, so no node sits on a wall.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    length: f64,
    cells: usize,
}

impl SpatialGrid {
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::config("L > 0 required"));
        }
        if cells < MIN_CELLS {
            return Err(Error::config("N >= 8 required"));
        }
        Ok(Self { length, cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.node(i)).collect()
    }
}

/// A density sampled at the nodes of a [`SpatialGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl Field {
    /// Checked constructor: length must match and every value must be finite.
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::GridMismatch {
                expected: grid.cells(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for internal results whose finiteness is tested
    /// by the caller (e.g. blow-up detection in the stepper).
    pub(crate) fn from_raw(grid: SpatialGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cells());
        Self { grid, values }
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.cells()],
        }
    }

    pub fn constant(grid: SpatialGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.cells()],
        }
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_grid(&self, grid: &SpatialGrid) -> Result<()> {
        if self.grid != *grid {
            return Err(Error::GridMismatch {
                expected: grid.cells(),
                found: self.grid.cells(),
            });
        }
        Ok(())
    }

    /// `sqrt(Σ u_i² dx)`
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values, self.grid.dx())
    }

    /// `max |u_i|`
    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    /// Total mass `Σ u_i dx`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    /// Fraction of cells with `u ≥ 0`.
    pub fn positive_fraction(&self) -> f64 {
        let nonneg = self.values.iter().filter(|&&v| v >= 0.0).count();
        nonneg as f64 / self.values.len() as f64
    }

    /// `self − other`, failing on grid mismatch.
    pub fn difference(&self, other: &Field) -> Result<Field> {
        other.check_grid(&self.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Field::from_raw(self.grid, values))
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        other.check_grid(&self.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Field::from_raw(self.grid, values))
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| v * factor).collect())
    }
}

pub(crate) fn l2_norm(values: &[f64], dx: f64) -> f64 {
    libm::sqrt(values.iter().map(|v| v * v).sum::<f64>() * dx)
}

pub(crate) fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    #[test]
    fn grid_invariants() {
        for &(l, n) in &[(1.0, 8), (1.0, 256), (3.7, 1000), (0.1, 17)] {
            let g = SpatialGrid::new(l, n).unwrap();
            assert!((g.dx() * n as f64 - l).abs() <= f64::EPSILON * l);
            let nodes = g.nodes();
            assert!(nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(nodes[0] > 0.0 && *nodes.last().unwrap() < l);
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(SpatialGrid::new(0.0, 16).is_err());
        assert!(SpatialGrid::new(-1.0, 16).is_err());
        assert!(SpatialGrid::new(f64::NAN, 16).is_err());
        assert!(SpatialGrid::new(1.0, 7).is_err());
    }

    #[test]
    fn field_rejects_mismatch_and_nan() {
        let g = SpatialGrid::new(1.0, 8).unwrap();
        assert!(matches!(
            Field::new(g, vec![0.0; 7]),
            Err(Error::GridMismatch { .. })
        ));
        let mut v = vec![0.0; 8];
        v[3] = f64::INFINITY;
        assert!(matches!(Field::new(g, v), Err(Error::NonFinite { index: 3 })));
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = SpatialGrid::new(1.0, 64).unwrap();
        assert_relative_eq!(Field::constant(g, 1.0).l2_norm(), 1.0, epsilon = 1e-14);
        assert_eq!(Field::zeros(g).l2_norm(), 0.0);
        assert_eq!(Field::zeros(g).sup_norm(), 0.0);
        assert_relative_eq!(Field::constant(g, -2.5).sup_norm(), 2.5);
    }

    #[test]
    fn first_cosine_mode_has_unit_norm() {
        // The midpoint sum of cos² over cell centres is exact, so the
        // deviation is round-off rather than O(dx²).
        for &n in &[16, 64, 256] {
            let g = SpatialGrid::new(1.0, n).unwrap();
            let phi1 = Field::from_fn(g, |x| libm::sqrt(2.0) * libm::cos(PI * x)).unwrap();
            assert!((phi1.l2_norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn mass_and_positivity() {
        let g = SpatialGrid::new(2.0, 8).unwrap();
        let f = Field::new(g, vec![1.0, -1.0, 2.0, 0.0, 1.0, 1.0, -3.0, 1.0]).unwrap();
        assert_relative_eq!(f.mass(), 2.0 * 0.25);
        assert_relative_eq!(f.positive_fraction(), 6.0 / 8.0);
    }
}
