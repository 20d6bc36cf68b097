//! Garsia–Rodemich–Rumsey functionals and discrete Hölder norms of sampled
//! paths.

use alloc::vec::Vec;

use super::trial::TrialSampler;
use crate::error::{Error, Result};
use crate::semigroup::{b_norm, EigenBasis, SpectralCoeffs};

/// A path sampled on a uniform time grid, with a metric between samples.
pub trait PathMetric {
    fn len(&self) -> usize;
    fn time(&self, i: usize) -> f64;
    fn norm(&self, i: usize) -> f64;
    fn distance(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScalarPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::config("times and values differ in length"));
        }
        Ok(Self { times, values })
    }
}

impl PathMetric for ScalarPath {
    fn len(&self) -> usize {
        self.values.len()
    }
    fn time(&self, i: usize) -> f64 {
        self.times[i]
    }
    fn norm(&self, i: usize) -> f64 {
        self.values[i].abs()
    }
    fn distance(&self, i: usize, j: usize) -> f64 {
        (self.values[i] - self.values[j]).abs()
    }
}

/// A `D(B)`-valued path given by spectral coefficients.
#[derive(Clone, Debug)]
pub struct SpectralPath<'a> {
    times: Vec<f64>,
    coeffs: &'a [SpectralCoeffs],
    wavenumbers: &'a [f64],
}

impl<'a> SpectralPath<'a> {
    pub fn new(times: Vec<f64>, coeffs: &'a [SpectralCoeffs], basis: &'a EigenBasis) -> Result<Self> {
        if times.len() != coeffs.len() {
            return Err(Error::config("times and coefficients differ in length"));
        }
        if coeffs.iter().any(|c| c.len() != basis.modes()) {
            return Err(Error::config("coefficient length must equal the mode count"));
        }
        Ok(Self {
            times,
            coeffs,
            wavenumbers: basis.wavenumbers(),
        })
    }

    fn db(c: &[f64], k: &[f64]) -> f64 {
        b_norm(c, k) + libm::sqrt(c.iter().map(|v| v * v).sum::<f64>())
    }
}

impl PathMetric for SpectralPath<'_> {
    fn len(&self) -> usize {
        self.coeffs.len()
    }
    fn time(&self, i: usize) -> f64 {
        self.times[i]
    }
    fn norm(&self, i: usize) -> f64 {
        Self::db(self.coeffs[i].values(), self.wavenumbers)
    }
    fn distance(&self, i: usize, j: usize) -> f64 {
        let d: Vec<f64> = self.coeffs[i]
            .values()
            .iter()
            .zip(self.coeffs[j].values())
            .map(|(a, b)| a - b)
            .collect();
        Self::db(&d, self.wavenumbers)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderSpec {
    /// GRR exponent.
    pub gamma: f64,
    /// Hölder exponent of the target norm, `0 < δ̄ < γ`.
    pub delta_bar: f64,
    /// Noise regularity, `0 ≤ η ≤ ½`.
    pub eta: f64,
}

impl HolderSpec {
    pub fn new(gamma: f64, delta_bar: f64, eta: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::config("gamma > 0 required"));
        }
        if !(delta_bar > 0.0 && delta_bar < gamma) {
            return Err(Error::config("0 < delta_bar < gamma required"));
        }
        if !(0.0..=0.5).contains(&eta) {
            return Err(Error::config("eta must lie in [0, 1/2]"));
        }
        Ok(Self {
            gamma,
            delta_bar,
            eta,
        })
    }

    /// Largest GRR exponent for which the functional of the stochastic
    /// convolution has finite expectation.
    pub fn gamma_ceiling(&self) -> f64 {
        (self.eta + 1.0) / 2.0
    }
}

fn check_uniform(path: &impl PathMetric) -> Result<f64> {
    let n = path.len();
    if n < 3 {
        return Err(Error::config("at least three samples required"));
    }
    let h = (path.time(n - 1) - path.time(0)) / (n - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::config("sample times must increase"));
    }
    for i in 1..n {
        let step = path.time(i) - path.time(i - 1);
        if (step - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::config("sample times must be uniform"));
        }
    }
    Ok(h)
}

/// `∫∫ |y(t) − y(t′)|² / |t − t′|^{2γ} dt dt′` by the trapezoid rule, with
/// the diagonal left out.
pub fn grr_functional(path: &impl PathMetric, spec: &HolderSpec) -> Result<f64> {
    let h = check_uniform(path)?;
    let n = path.len();
    let w = |i: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..i {
            let d = path.distance(i, j);
            let gap = path.time(i) - path.time(j);
            row += w(j) * d * d / libm::pow(gap, 2.0 * spec.gamma);
        }
        total += w(i) * row;
    }
    Ok(2.0 * total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrrCheck {
    pub functional: f64,
    pub pairs: usize,
    pub violations: usize,
    /// Largest `|y(t) − y(s)|` over its bound.
    pub worst_ratio: f64,
}

/// Tests `|y(t) − y(s)| ≤ 16√B·γ/(γ − 1)·|t − s|^{γ−1}` on sampled pairs.
/// Needs `γ > 1`.
pub fn grr_bound_check(
    path: &impl PathMetric,
    spec: &HolderSpec,
    pairs: usize,
    seed: u64,
) -> Result<GrrCheck> {
    if !(spec.gamma > 1.0) {
        return Err(Error::domain("the pointwise bound needs gamma > 1"));
    }
    let b = grr_functional(path, spec)?;
    let c = 16.0 * libm::sqrt(b) * spec.gamma / (spec.gamma - 1.0);
    let n = path.len();
    let mut sampler = TrialSampler::new(seed, 6);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let i = sampler.index(n);
        let mut j = sampler.index(n - 1);
        if j >= i {
            j += 1;
        }
        let gap = (path.time(i) - path.time(j)).abs();
        let d = path.distance(i, j);
        let ratio = if d == 0.0 {
            0.0
        } else {
            d / (c * libm::pow(gap, spec.gamma - 1.0))
        };
        if !(ratio <= 1.0) {
            violations += 1;
        }
        worst = worst.max(ratio);
    }
    Ok(GrrCheck {
        functional: b,
        pairs,
        violations,
        worst_ratio: worst,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderNorm {
    pub sup: f64,
    pub quotient: f64,
}

impl HolderNorm {
    pub fn total(&self) -> f64 {
        self.sup + self.quotient
    }
}

/// `sup_t |y(t)| + sup_{s≠t} |y(t) − y(s)| / |t − s|^{δ̄}` over all sample
/// pairs.
pub fn holder_norm_estimate(path: &impl PathMetric, delta_bar: f64) -> Result<HolderNorm> {
    if !(0.0..=1.0).contains(&delta_bar) {
        return Err(Error::config("delta_bar must lie in [0, 1]"));
    }
    let n = path.len();
    if n < 2 {
        return Err(Error::config("at least two samples required"));
    }
    let sup = (0..n).map(|i| path.norm(i)).fold(0.0, f64::max);
    let mut quotient = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            let gap = path.time(i) - path.time(j);
            quotient = quotient.max(path.distance(i, j) / libm::pow(gap, delta_bar));
        }
    }
    Ok(HolderNorm { sup, quotient })
}
