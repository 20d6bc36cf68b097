//! Random trial functions for the estimate suites.
//!
//! Band-limited fields draw `c₀ ~ N(0, 1)` and `c_j ~ N(0, j^{-2.5})`, which
//! keeps `Σ (jπ)² c_j²` finite, so every trial lies in `D(B)`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::grid::{Field, SpatialGrid};
use crate::semigroup::SpectralCoeffs;

pub const COEFFICIENT_DECAY: f64 = 2.5;

#[derive(Clone, Debug)]
pub struct TrialSampler {
    rng: ChaCha8Rng,
}

impl TrialSampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn band_limited(&mut self, modes: usize) -> SpectralCoeffs {
        let values: Vec<f64> = (0..modes)
            .map(|j| {
                let sd = if j == 0 {
                    1.0
                } else {
                    libm::pow(j as f64, -0.5 * COEFFICIENT_DECAY)
                };
                sd * self.normal()
            })
            .collect();
        SpectralCoeffs::from_raw(values)
    }

    /// Independent `N(0, 1)` cell values.
    pub fn white_field(&mut self, grid: SpatialGrid) -> Field {
        let values = (0..grid.cells()).map(|_| self.normal()).collect();
        Field::from_raw(grid, values)
    }

    /// `Σ_{k≤K} a_k sin(2πkt) + b_k cos(2πkt)` with `a_k, b_k ~ N(0, k⁻²)`,
    /// sampled at `times`.
    pub fn trig_polynomial(&mut self, degree: usize, times: &[f64]) -> Vec<f64> {
        let coeffs: Vec<(f64, f64)> = (1..=degree)
            .map(|k| {
                let s = 1.0 / k as f64;
                (s * self.normal(), s * self.normal())
            })
            .collect();
        times
            .iter()
            .map(|&t| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let w = 2.0 * core::f64::consts::PI * (i + 1) as f64 * t;
                        a * libm::sin(w) + b * libm::cos(w)
                    })
                    .sum()
            })
            .collect()
    }
}
