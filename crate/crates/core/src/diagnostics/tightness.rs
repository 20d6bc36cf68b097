//! Tail profiles of ensemble norms and Hölder functionals of recorded
//! stochastic convolutions.

use alloc::vec::Vec;

use super::holder::{grr_functional, holder_norm_estimate, HolderNorm, HolderSpec, SpectralPath};
use crate::error::{Error, Result};
use crate::semigroup::EigenBasis;
use crate::solver::Trajectory;
use crate::stats::mean;

#[derive(Clone, Debug, PartialEq)]
pub struct TailProfile {
    pub radii: Vec<f64>,
    /// Empirical `P(X/s > R)`.
    pub tail: Vec<f64>,
    pub scale: f64,
    /// `E[(X/s)²]`, the constant in the Chebyshev bound `c/R²`.
    pub markov_constant: f64,
    /// `max_R R²·P(X/s > R)`
    pub fitted_constant: f64,
}

impl TailProfile {
    /// Whether the tail sits below `c/R²` at every radius.
    pub fn within(&self, c: f64) -> bool {
        self.radii
            .iter()
            .zip(&self.tail)
            .all(|(r, p)| *p <= c / (r * r))
    }
}

/// Tail of `norms / scale` at the given radii.
pub fn tail_profile(norms: &[f64], scale: f64, radii: &[f64]) -> Result<TailProfile> {
    if norms.is_empty() {
        return Err(Error::config("empty ensemble"));
    }
    if !(scale > 0.0) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::config("scale and radii must be positive"));
    }
    let scaled: Vec<f64> = norms.iter().map(|x| x / scale).collect();
    let n = scaled.len() as f64;
    let tail: Vec<f64> = radii
        .iter()
        .map(|r| scaled.iter().filter(|&&x| x > *r).count() as f64 / n)
        .collect();
    let sq: Vec<f64> = scaled.iter().map(|x| x * x).collect();
    let fitted_constant = radii
        .iter()
        .zip(&tail)
        .map(|(r, p)| r * r * p)
        .fold(0.0, f64::max);
    Ok(TailProfile {
        radii: radii.to_vec(),
        tail,
        scale,
        markov_constant: mean(&sq),
        fitted_constant,
    })
}

fn convolution_path<'a>(traj: &'a Trajectory, basis: &'a EigenBasis) -> Result<SpectralPath<'a>> {
    let conv = traj
        .stochastic_convolution
        .as_ref()
        .ok_or_else(|| Error::config("trajectory has no stochastic convolution record"))?;
    SpectralPath::new(traj.snapshot_times.clone(), conv, basis)
}

/// Discrete `C^{δ̄}([0, T]; D(B))` norm of the recorded stochastic
/// convolution.
pub fn convolution_holder_norm(traj: &Trajectory, basis: &EigenBasis, delta_bar: f64) -> Result<HolderNorm> {
    holder_norm_estimate(&convolution_path(traj, basis)?, delta_bar)
}

/// GRR functional of the recorded stochastic convolution in `D(B)`.
pub fn convolution_grr(traj: &Trajectory, basis: &EigenBasis, spec: &HolderSpec) -> Result<f64> {
    grr_functional(&convolution_path(traj, basis)?, spec)
}
