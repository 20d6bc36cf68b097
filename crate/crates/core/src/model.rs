//! Model parameters and the chemotactic drift `B[u · g_G(u)]`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};
use crate::kernel::KernelSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Diffusion coefficient `D > 0`.
    pub diffusion: f64,
    /// Branching rate `λ ≥ 0`.
    pub lambda: f64,
    /// Attraction kernel; `None` switches the chemotaxis term off.
    pub kernel: Option<KernelSpec>,
    /// Initial density, non-negative.
    pub u0: Field,
}

impl ModelParams {
    pub fn new(diffusion: f64, lambda: f64, kernel: Option<KernelSpec>, u0: Field) -> Result<Self> {
        let params = Self {
            diffusion,
            lambda,
            kernel,
            u0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems: Vec<&str> = Vec::new();
        if !(self.diffusion.is_finite() && self.diffusion > 0.0) {
            problems.push("D > 0 required");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            problems.push("lambda >= 0 required");
        }
        if self.u0.values().iter().any(|&v| !(v >= 0.0)) {
            problems.push("u0 >= 0 required");
        }
        if let Some(k) = &self.kernel {
            if k.grid() != self.u0.grid() {
                problems.push("kernel and u0 must share the grid");
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::config(problems.join("; ")))
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.u0.grid()
    }

    /// `d/dx (u · g_G(u))`, or zero when the kernel is off.
    pub fn drift_term(&self, u: &Field) -> Result<Field> {
        u.check_grid(self.grid())?;
        match &self.kernel {
            Some(k) => drift_term(k, u),
            None => Ok(Field::zeros(*self.grid())),
        }
    }
}

/// `d/dx (u · g_G(u))` with second-order differences: central in the interior,
/// one-sided three-point stencils in the two boundary cells.
pub fn drift_term(kernel: &KernelSpec, u: &Field) -> Result<Field> {
    u.check_grid(kernel.grid())?;
    let values = drift_values(kernel, u.values(), u.grid().dx());
    Ok(Field::from_raw(*u.grid(), values))
}

pub(crate) fn drift_values(kernel: &KernelSpec, u: &[f64], dx: f64) -> Vec<f64> {
    let velocity = kernel.convolve_values(u);
    let flux: Vec<f64> = u.iter().zip(&velocity).map(|(a, b)| a * b).collect();
    derivative(&flux, dx)
}

/// Second-order finite-difference derivative of cell-centred samples.
pub fn derivative(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "derivative needs at least three samples");
    let inv = 0.5 / dx;
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv);
    for i in 1..n - 1 {
        out.push((values[i + 1] - values[i - 1]) * inv);
    }
    out.push((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv);
    out
}
