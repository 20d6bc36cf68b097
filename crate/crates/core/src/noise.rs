//! Space-time white noise on the grid and the Lipschitz coefficients `aₙ`.
//!
//! A cell increment `ξ_i ~ N(0, dt/dx)` makes `Σ_i f(x_i) ξ_i dx` a discrete
//! `∫ f dW` with variance `dt·∫f²`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::diagnostics::report::{EstimateReport, Witness};
use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};
use crate::semigroup::EigenBasis;

/// Seed and stream index of one noise realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NoiseSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl NoiseSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    pub fn stream(&self) -> NoiseStream {
        NoiseStream::new(*self)
    }
}

/// ChaCha8 keystream selected by `(seed, stream_id)`; streams with different
/// ids never overlap.
#[derive(Clone, Debug)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(spec: NoiseSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(spec.stream_id);
        Self { rng }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn sample_increment(&mut self, grid: SpatialGrid, dt: f64) -> Result<NoiseIncrement> {
        check_dt(dt)?;
        let mut xi = vec![0.0; grid.cells()];
        self.fill(libm::sqrt(dt / grid.dx()), &mut xi);
        Ok(NoiseIncrement { grid, dt, xi })
    }

    pub(crate) fn fill(&mut self, sd: f64, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = sd * self.standard_normal();
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("dt > 0 required"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseIncrement {
    pub grid: SpatialGrid,
    pub dt: f64,
    pub xi: Vec<f64>,
}

/// Increments for a whole horizon, generated up front so that several
/// solvers can consume the same realization.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    grid: SpatialGrid,
    dt: f64,
    steps: usize,
    xi: Vec<f64>,
}

impl NoisePath {
    pub fn generate(spec: NoiseSpec, grid: SpatialGrid, dt: f64, steps: usize) -> Result<Self> {
        check_dt(dt)?;
        let n = grid.cells();
        let mut stream = spec.stream();
        let mut xi = vec![0.0; n * steps];
        let sd = libm::sqrt(dt / grid.dx());
        for chunk in xi.chunks_exact_mut(n) {
            stream.fill(sd, chunk);
        }
        Ok(Self {
            grid,
            dt,
            steps,
            xi,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn increment(&self, k: usize) -> &[f64] {
        let n = self.grid.cells();
        &self.xi[k * n..(k + 1) * n]
    }

    /// Sums `factor` consecutive increments: the same Brownian path seen with
    /// step `factor·dt`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.steps.is_multiple_of(factor) {
            return Err(Error::config("coarsening factor must divide the step count"));
        }
        let n = self.grid.cells();
        let steps = self.steps / factor;
        let mut xi = vec![0.0; n * steps];
        for (k, out) in xi.chunks_exact_mut(n).enumerate() {
            for j in 0..factor {
                for (o, v) in out.iter_mut().zip(self.increment(k * factor + j)) {
                    *o += v;
                }
            }
        }
        Ok(Self {
            grid: self.grid,
            dt: self.dt * factor as f64,
            steps,
            xi,
        })
    }
}

/// `aₙ(u)`: zero for `u < 0`, linear on `[0, 1/n)`, `√(λu)` from `1/n` on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxCoefficient {
    pub n: u32,
    pub lambda: f64,
    /// Slope `√(λn)` on the linear branch (continuous); otherwise `√n`.
    pub continuity_fix: bool,
}

impl ApproxCoefficient {
    pub fn new(n: u32, lambda: f64) -> Result<Self> {
        Self::with_fix(n, lambda, true)
    }

    pub fn with_fix(n: u32, lambda: f64, continuity_fix: bool) -> Result<Self> {
        let mut problems = Vec::new();
        if n == 0 {
            problems.push("n >= 1 required");
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            problems.push("lambda >= 0 required");
        }
        if !problems.is_empty() {
            return Err(Error::config(problems.join("; ")));
        }
        Ok(Self {
            n,
            lambda,
            continuity_fix,
        })
    }

    pub fn slope(&self) -> f64 {
        let n = self.n as f64;
        if self.continuity_fix {
            libm::sqrt(self.lambda * n)
        } else {
            libm::sqrt(n)
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let threshold = 1.0 / self.n as f64;
        if u < 0.0 {
            0.0
        } else if u < threshold {
            self.slope() * u
        } else {
            libm::sqrt(self.lambda * u)
        }
    }

    /// True when `aₙ ≡ 0`, which lets solvers skip the noise entirely.
    pub fn is_zero(&self) -> bool {
        self.slope() == 0.0 && self.lambda == 0.0
    }

    /// Global Lipschitz constant, `None` when the verbatim variant jumps at
    /// `1/n`.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        if self.continuity_fix || self.lambda == 1.0 {
            Some(self.slope())
        } else {
            None
        }
    }

    /// `sup_u |aₙ(u) − √(λu₊)| = √λ/(4√n)`, attained at `u = 1/(4n)`.
    pub fn sup_gap_closed_form(&self) -> f64 {
        libm::sqrt(self.lambda) / (4.0 * libm::sqrt(self.n as f64))
    }

    /// Dense scan of `|aₙ(u) − √(λu₊)|` over `[−1/n, 2/n]`, where every
    /// nonzero gap lives.
    pub fn measure_sup_gap(&self, points: usize) -> f64 {
        let n = self.n as f64;
        let (lo, hi) = (-1.0 / n, 2.0 / n);
        let mut best: f64 = 0.0;
        for i in 0..=points {
            let u = lo + (hi - lo) * i as f64 / points as f64;
            let exact = libm::sqrt(self.lambda * u.max(0.0));
            best = best.max((self.eval(u) - exact).abs());
        }
        best
    }

    pub fn apply(&self, u: &Field) -> Field {
        let values = u.values().iter().map(|&v| self.eval(v)).collect();
        Field::from_raw(*u.grid(), values)
    }
}

/// Pointwise `aₙ(u(x_i))`.
pub fn apply_coefficient(coef: &ApproxCoefficient, u: &Field) -> Field {
    coef.apply(u)
}

/// `‖J‖₂² = Σ_{j<J} 1/(1 + jπ/L)²`, the Hilbert-Schmidt norm of the
/// embedding `D(B) ↪ X` restricted to the retained modes.
pub fn embedding_norm_sq(basis: &EigenBasis) -> f64 {
    basis
        .wavenumbers()
        .iter()
        .map(|k| 1.0 / ((1.0 + k) * (1.0 + k)))
        .sum()
}

/// HS norm of multiplication by `m(x)` with respect to the `D(B)`-normalized
/// modes `e_j = φ_j / (1 + jπ/L)`.
pub fn hs_norm_of_multiplier(m: &[f64], basis: &EigenBasis) -> Result<f64> {
    let n = basis.grid().cells();
    if m.len() != n {
        return Err(Error::GridMismatch {
            expected: n,
            found: m.len(),
        });
    }
    let dx = basis.grid().dx();
    let mut total = 0.0;
    for (j, &k) in basis.wavenumbers().iter().enumerate() {
        let w = 1.0 / ((1.0 + k) * (1.0 + k));
        let s: f64 = basis
            .mode(j)
            .iter()
            .zip(m)
            .map(|(p, a)| a * a * p * p)
            .sum::<f64>()
            * dx;
        total += w * s;
    }
    Ok(libm::sqrt(total))
}

/// `(Σ_j ‖aₙ(u) e_j‖²)^{1/2}`
pub fn hs_norm_multiplication(coef: &ApproxCoefficient, u: &Field, basis: &EigenBasis) -> Result<f64> {
    u.check_grid(basis.grid())?;
    hs_norm_of_multiplier(coef.apply(u).values(), basis)
}

/// `S_K = 1 + Σ_{1≤k≤K} 1/(1 + kπ/L)²`
pub fn embedding_partial_sum(length: f64, k_max: usize) -> f64 {
    let mut s = 0.0;
    // small terms first
    for k in (1..=k_max).rev() {
        let d = 1.0 + k as f64 * core::f64::consts::PI / length;
        s += 1.0 / (d * d);
    }
    1.0 + s
}

/// Integral-comparison bound `S_∞ − S_K ≤ L²/(π²K)`.
pub fn embedding_tail_bound(length: f64, k: usize) -> f64 {
    let pi = core::f64::consts::PI;
    length * length / (pi * pi * k as f64)
}

/// Checks that `S_K` is nondecreasing and Cauchy: `S_{2K} − S_K` stays below
/// the tail bound at every doubling up to `k_max`. The constant reported is
/// the limit estimate `S_{k_max}` plus half the remaining tail bound.
pub fn hs_embedding_check(length: f64, k_max: usize) -> Result<EstimateReport> {
    if k_max < 2 {
        return Err(Error::config("K_max >= 2 required"));
    }
    let mut violations = 0;
    let mut k = 1;
    let mut prev = embedding_partial_sum(length, k);
    while 2 * k <= k_max {
        let next = embedding_partial_sum(length, 2 * k);
        let gap = next - prev;
        if !(gap >= 0.0 && gap <= embedding_tail_bound(length, k)) {
            violations += 1;
        }
        prev = next;
        k *= 2;
    }
    let s = embedding_partial_sum(length, k_max);
    let tail = embedding_tail_bound(length, k_max);
    let estimate = s + 0.5 * tail;
    Ok(EstimateReport::new(
        "hs_embedding",
        estimate,
        k_max,
        Witness {
            scalars: vec![length, k_max as f64],
            ..Witness::default()
        },
        Some(s + tail),
        violations,
    ))
}
