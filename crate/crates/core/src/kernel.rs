//! The attraction kernel `G` and the convolution `g_G(u) = G ∗ u⁰`.
//!
//! `G(x) = (|x| − r₁)(|x| − r₀)` on `r₀ ≤ |x| ≤ r₁` and zero elsewhere. It is
//! even, continuous, and non-positive on its support. The convolution uses the
//! zero extension `u⁰` of the density outside `(0, L)`; on the cell-centred
//! grid that is simply a sum over interior nodes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};

/// Kernel value for radii `r0 < r1`; total in `x`.
pub fn kernel_value(r0: f64, r1: f64, x: f64) -> f64 {
    let a = x.abs();
    if a < r0 || a > r1 {
        0.0
    } else {
        (a - r1) * (a - r0)
    }
}

/// Radii of `G` plus the dense quadrature matrix `M[i][j] = G(x_i − x_j)·dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    r0: f64,
    r1: f64,
    grid: SpatialGrid,
    matrix: Vec<f64>,
}

impl KernelSpec {
    pub fn new(r0: f64, r1: f64, grid: SpatialGrid) -> Result<Self> {
        let mut problems = Vec::new();
        if !(r0 > 0.0) {
            problems.push("r0 > 0 required");
        }
        if !(r0 < r1) {
            problems.push("r0 < r1 required");
        }
        if !(r1 < grid.length()) {
            problems.push("r1 < L required");
        }
        if !problems.is_empty() {
            return Err(Error::config(problems.join("; ")));
        }
        let n = grid.cells();
        let dx = grid.dx();
        let mut matrix = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // Node offsets are exact multiples of dx, so the matrix is
                // symmetric bit for bit.
                let offset = (i as f64 - j as f64) * dx;
                matrix.push(kernel_value(r0, r1, offset) * dx);
            }
        }
        Ok(Self {
            r0,
            r1,
            grid,
            matrix,
        })
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn eval(&self, x: f64) -> f64 {
        kernel_value(self.r0, self.r1, x)
    }

    /// `|G|_∞ = (r₁ − r₀)²/4`, attained at the midpoint of the support.
    pub fn sup_abs(&self) -> f64 {
        let h = self.r1 - self.r0;
        h * h / 4.0
    }

    /// `∫ G = −(r₁ − r₀)³/3`.
    pub fn integral(&self) -> f64 {
        let h = self.r1 - self.r0;
        -h * h * h / 3.0
    }

    pub fn matrix_entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.grid.cells() + j]
    }

    /// `v(x_i) = Σ_j G(x_i − x_j) u(x_j) dx`
    pub fn convolve(&self, u: &Field) -> Result<Field> {
        u.check_grid(&self.grid)?;
        Ok(Field::from_raw(self.grid, self.convolve_values(u.values())))
    }

    pub(crate) fn convolve_values(&self, u: &[f64]) -> Vec<f64> {
        let n = self.grid.cells();
        // entries further than r1 from the diagonal are exact zeros
        let band = (self.r1 / self.grid.dx()) as usize + 1;
        self.matrix
            .chunks_exact(n)
            .enumerate()
            .map(|(i, row)| {
                let lo = i.saturating_sub(band);
                let hi = (i + band + 1).min(n);
                row[lo..hi].iter().zip(&u[lo..hi]).map(|(g, v)| g * v).sum()
            })
            .collect()
    }
}
