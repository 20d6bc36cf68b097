//! Neumann cosine eigenbasis, the heat semigroup `T(t)`, the derivative `B`
//! and the graph norm `|u|_{D(B)} = ‖Bu‖ + ‖u‖`.
//!
//! On the cell-centred grid the sampled cosines are exactly orthonormal under
//! the midpoint rule (DCT-II) and the sampled sines are exactly orthogonal
//! (DST-II), so projection, synthesis and the spectral `D(B)` norm agree with
//! their physical-space counterparts to round-off.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::diagnostics::report::{EstimateReport, Witness};
use crate::diagnostics::trial::TrialSampler;
use crate::error::{Error, Result};
use crate::grid::{l2_norm, Field, SpatialGrid};

/// Cosine coefficients `c_j = ⟨u, φ_j⟩`, `j < J`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs {
    values: Vec<f64>,
}

impl SpectralCoeffs {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { values })
    }

    pub fn zeros(modes: usize) -> Self {
        Self {
            values: vec![0.0; modes],
        }
    }

    /// Unit vector `e_j`.
    pub fn unit(modes: usize, j: usize) -> Self {
        let mut c = Self::zeros(modes);
        c.values[j] = 1.0;
        c
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖Σ c_j φ_j‖ = |c|₂`
    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|c| c * c).sum())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    grid: SpatialGrid,
    diffusion: f64,
    modes: usize,
    wavenumbers: Vec<f64>,
    omega_sq: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

impl EigenBasis {
    pub fn new(grid: SpatialGrid, diffusion: f64, modes: usize) -> Result<Self> {
        let n = grid.cells();
        if modes == 0 || modes > n {
            return Err(Error::config("1 <= J <= N required"));
        }
        if !(diffusion.is_finite() && diffusion > 0.0) {
            return Err(Error::config("D > 0 required"));
        }
        let l = grid.length();
        let wavenumbers: Vec<f64> = (0..modes).map(|j| j as f64 * PI / l).collect();
        let omega_sq = wavenumbers.iter().map(|k| diffusion * k * k).collect();
        let mut phi = Vec::with_capacity(modes * n);
        let mut dphi = Vec::with_capacity(modes * n);
        let amp = libm::sqrt(2.0 / l);
        for (j, &k) in wavenumbers.iter().enumerate() {
            for i in 0..n {
                let x = grid.node(i);
                if j == 0 {
                    phi.push(1.0 / libm::sqrt(l));
                    dphi.push(0.0);
                } else {
                    phi.push(amp * libm::cos(k * x));
                    dphi.push(-amp * k * libm::sin(k * x));
                }
            }
        }
        Ok(Self {
            grid,
            diffusion,
            modes,
            wavenumbers,
            omega_sq,
            phi,
            dphi,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `jπ/L`
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Eigenvalues `D (jπ/L)²` of `−A`.
    pub fn omega_sq(&self) -> &[f64] {
        &self.omega_sq
    }

    /// Samples of `φ_j` at the nodes.
    pub fn mode(&self, j: usize) -> &[f64] {
        let n = self.grid.cells();
        &self.phi[j * n..(j + 1) * n]
    }

    pub fn mode_field(&self, j: usize) -> Field {
        Field::from_raw(self.grid, self.mode(j).to_vec())
    }

    pub fn to_spectral(&self, u: &Field) -> Result<SpectralCoeffs> {
        u.check_grid(&self.grid)?;
        let mut c = vec![0.0; self.modes];
        self.project_into(u.values(), &mut c);
        Ok(SpectralCoeffs::from_raw(c))
    }

    pub fn from_spectral(&self, c: &SpectralCoeffs) -> Result<Field> {
        self.check_modes(c)?;
        let mut u = vec![0.0; self.grid.cells()];
        self.synthesize_into(c.values(), &mut u);
        Ok(Field::from_raw(self.grid, u))
    }

    /// `c'_j = exp(−ω_j² t) c_j`
    pub fn apply_semigroup(&self, c: &SpectralCoeffs, t: f64) -> Result<SpectralCoeffs> {
        self.check_modes(c)?;
        if !(t >= 0.0) {
            return Err(Error::domain("semigroup time must be >= 0"));
        }
        let values = c
            .values()
            .iter()
            .zip(&self.omega_sq)
            .map(|(c, w)| libm::exp(-w * t) * c)
            .collect();
        Ok(SpectralCoeffs::from_raw(values))
    }

    /// `Σ c_j φ_j'` sampled at the nodes.
    pub fn apply_b_spectral(&self, c: &SpectralCoeffs) -> Result<Field> {
        self.check_modes(c)?;
        let n = self.grid.cells();
        let mut out = vec![0.0; n];
        for (row, &cj) in self.dphi.chunks_exact(n).zip(c.values()) {
            if cj != 0.0 {
                for (o, d) in out.iter_mut().zip(row) {
                    *o += cj * d;
                }
            }
        }
        Ok(Field::from_raw(self.grid, out))
    }

    /// `‖B Σ c_j φ_j‖ = (Σ (jπ/L)² c_j²)^{1/2}`
    pub fn b_norm_spectral(&self, c: &SpectralCoeffs) -> f64 {
        b_norm(c.values(), &self.wavenumbers)
    }

    /// Graph norm of the band-limited field with coefficients `c`.
    pub fn db_norm_spectral(&self, c: &SpectralCoeffs) -> f64 {
        self.b_norm_spectral(c) + c.l2_norm()
    }

    /// `‖B P_J u‖ + ‖u‖`, with `B` applied to the `J`-mode projection.
    pub fn db_norm(&self, u: &Field) -> Result<f64> {
        let c = self.to_spectral(u)?;
        Ok(self.b_norm_spectral(&c) + u.l2_norm())
    }

    pub(crate) fn project_into(&self, u: &[f64], c: &mut [f64]) {
        let n = self.grid.cells();
        let dx = self.grid.dx();
        for (cj, row) in c.iter_mut().zip(self.phi.chunks_exact(n)) {
            *cj = row.iter().zip(u).map(|(p, v)| p * v).sum::<f64>() * dx;
        }
    }

    pub(crate) fn synthesize_into(&self, c: &[f64], u: &mut [f64]) {
        let n = self.grid.cells();
        u.iter_mut().for_each(|v| *v = 0.0);
        for (row, &cj) in self.phi.chunks_exact(n).zip(c) {
            for (v, p) in u.iter_mut().zip(row) {
                *v += cj * p;
            }
        }
    }

    fn check_modes(&self, c: &SpectralCoeffs) -> Result<()> {
        if c.len() != self.modes {
            return Err(Error::config("coefficient count must equal J"));
        }
        Ok(())
    }
}

pub(crate) fn b_norm(c: &[f64], wavenumbers: &[f64]) -> f64 {
    libm::sqrt(c.iter().zip(wavenumbers).map(|(c, k)| k * k * c * c).sum())
}

/// The mode-wise maximum of `√t·y·exp(−D y² t)` over `y, t > 0`: `1/√(2eD)`.
pub fn smoothing_bound(diffusion: f64) -> f64 {
    1.0 / libm::sqrt(2.0 * core::f64::consts::E * diffusion)
}

/// `√t ‖B T(t) u‖ / ‖u‖`
pub fn smoothing_ratio(basis: &EigenBasis, u: &Field, t: f64) -> Result<f64> {
    let c = basis.to_spectral(u)?;
    let ct = basis.apply_semigroup(&c, t)?;
    Ok(libm::sqrt(t) * basis.b_norm_spectral(&ct) / u.l2_norm())
}

pub const SMOOTHING_SLACK: f64 = 0.02;

/// Empirical sup of [`smoothing_ratio`] over random unit-norm fields and the
/// given times. Trial fields cycle through white noise, single modes and
/// band-limited fields with `j^{-2.5}` variances.
pub fn verify_smoothing(
    basis: &EigenBasis,
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if t_grid.is_empty() {
        return Err(Error::config("empty time grid"));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::domain("smoothing times must be > 0"));
    }
    let bound = smoothing_bound(basis.diffusion()) * (1.0 + SMOOTHING_SLACK);
    let mut sampler = TrialSampler::new(seed, 0);
    let mut best = 0.0;
    let mut witness = Witness::default();
    let mut violations = 0;
    for trial in 0..trials {
        let u = match trial % 3 {
            0 => sampler.white_field(*basis.grid()),
            1 => basis.mode_field(1 + sampler.index(basis.modes() - 1)),
            _ => basis.from_spectral(&sampler.band_limited(basis.modes()))?,
        };
        let norm = u.l2_norm();
        if norm == 0.0 {
            continue;
        }
        let u = u.scaled(1.0 / norm);
        for &t in t_grid {
            let r = smoothing_ratio(basis, &u, t)?;
            if r > bound {
                violations += 1;
            }
            if r > best {
                best = r;
                witness = Witness {
                    scalars: vec![t],
                    u: u.values().to_vec(),
                    v: Vec::new(),
                };
            }
        }
    }
    Ok(EstimateReport::new(
        "smoothing",
        best,
        trials,
        witness,
        Some(bound),
        violations,
    ))
}

/// Values of one of the two Hölder integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderIntegrals {
    /// `∫₀ˢ |T(t−u) − T(s−u)|² du`
    pub increment: f64,
    /// `∫ₛᵗ |T(t−u)|² du`
    pub tail: f64,
}

/// Per-mode exact time integrals summed over the retained modes.
fn holder_series(basis: &EigenBasis, s: f64, t: f64) -> HolderIntegrals {
    let h = t - s;
    let mut increment = 0.0;
    let mut tail = 0.0;
    for &w in basis.omega_sq() {
        if w == 0.0 {
            tail += h;
            continue;
        }
        let d = 1.0 - libm::exp(-w * h);
        increment += d * d * (-libm::expm1(-2.0 * w * s)) / (2.0 * w);
        tail += -libm::expm1(-2.0 * w * h) / (2.0 * w);
    }
    HolderIntegrals { increment, tail }
}

fn check_holder_args(s: f64, t: f64, eta: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&eta) {
        return Err(Error::domain("eta must lie in [0, 1/2]"));
    }
    if !(s >= 0.0 && t >= s) {
        return Err(Error::domain("0 <= s <= t required"));
    }
    Ok(())
}

/// Largest graph-norm weight over the retained modes.
fn sup_weight(basis: &EigenBasis, with_b: bool) -> f64 {
    basis
        .wavenumbers()
        .iter()
        .map(|k| {
            let g = (1.0 + k) * (1.0 + k);
            if with_b {
                k * k * g
            } else {
                g
            }
        })
        .fold(0.0, f64::max)
}

/// Hölder integrals of `T` in the `D(B)` operator norm: the largest per-mode
/// graph-norm weight `(1 + jπ/L)²` times the exact mode series.
pub fn holder_integral_a1(basis: &EigenBasis, s: f64, t: f64, eta: f64) -> Result<HolderIntegrals> {
    check_holder_args(s, t, eta)?;
    let w = sup_weight(basis, false);
    let series = holder_series(basis, s, t);
    Ok(HolderIntegrals {
        increment: w * series.increment,
        tail: w * series.tail,
    })
}

/// As [`holder_integral_a1`] with the extra `B` factor, weight
/// `(jπ/L)²(1 + jπ/L)²`.
pub fn holder_integral_a2(basis: &EigenBasis, s: f64, t: f64, eta: f64) -> Result<HolderIntegrals> {
    check_holder_args(s, t, eta)?;
    let w = sup_weight(basis, true);
    let series = holder_series(basis, s, t);
    Ok(HolderIntegrals {
        increment: w * series.increment,
        tail: w * series.tail,
    })
}

/// Ratios `value / h^η` along a sweep of increments `h = t − s`.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderScaling {
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `max ratio / min ratio`
    pub variation: f64,
}

impl HolderScaling {
    pub fn bounded_within(&self, factor: f64) -> bool {
        self.variation.is_finite() && self.variation <= factor
    }
}

/// Dyadic sweep `h = 2^{-3} … 2^{-10}` with `s` fixed.
pub fn dyadic_increments() -> Vec<f64> {
    (3..=10).map(|p| libm::ldexp(1.0, -p)).collect()
}

pub fn holder_scaling(
    values: impl Fn(f64) -> Result<f64>,
    increments: &[f64],
    eta: f64,
) -> Result<HolderScaling> {
    let mut ratios = Vec::with_capacity(increments.len());
    for &h in increments {
        ratios.push(values(h)? / libm::pow(h, eta));
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    Ok(HolderScaling {
        increments: increments.to_vec(),
        ratios,
        variation: max / min,
    })
}

/// Partial sums `Σ_{1≤j≤K} ω_j^{−(2−4λ̃)}` with `ω_j = √D·jπ/L`, one per
/// cutoff `K`.
pub fn mode_decay_partial_sums(
    diffusion: f64,
    length: f64,
    lambda_tilde: f64,
    cutoffs: &[usize],
) -> Vec<f64> {
    let p = 2.0 - 4.0 * lambda_tilde;
    let max = cutoffs.iter().copied().max().unwrap_or(0);
    let mut running = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    running.push(acc);
    for j in 1..=max {
        let w = libm::sqrt(diffusion) * j as f64 * PI / length;
        acc += libm::pow(w, -p);
        running.push(acc);
    }
    cutoffs.iter().map(|&k| running[k]).collect()
}

/// `‖u‖` of a physical field against its spectral representation; used by
/// tests to tie the two norms together.
pub fn projection_residual(basis: &EigenBasis, u: &Field) -> Result<f64> {
    let back = basis.from_spectral(&basis.to_spectral(u)?)?;
    Ok(l2_norm(back.difference(u)?.values(), basis.grid().dx()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::vec::Vec;

    fn desk() -> EigenBasis {
        EigenBasis::new(SpatialGrid::new(1.0, 256).unwrap(), 1.0, 128).unwrap()
    }

    #[test]
    fn rejects_too_many_modes() {
        let g = SpatialGrid::new(1.0, 16).unwrap();
        assert!(matches!(EigenBasis::new(g, 1.0, 17), Err(Error::Config(_))));
        assert!(EigenBasis::new(g, 1.0, 0).is_err());
        assert!(EigenBasis::new(g, 1.0, 16).is_ok());
    }

    #[test]
    fn eigenvalues_are_increasing_from_zero() {
        let b = desk();
        assert_eq!(b.omega_sq()[0], 0.0);
        assert!(b.omega_sq().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn discrete_orthonormality() {
        let b = EigenBasis::new(SpatialGrid::new(2.0, 64).unwrap(), 1.0, 64).unwrap();
        let dx = b.grid().dx();
        for i in 0..64 {
            for j in 0..64 {
                let ip: f64 = b.mode(i).iter().zip(b.mode(j)).map(|(a, c)| a * c).sum::<f64>() * dx;
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-12, "{i} {j} {ip}");
            }
        }
    }

    #[test]
    fn modes_have_zero_neumann_flux() {
        let b = desk();
        let l = b.grid().length();
        let amp = libm::sqrt(2.0 / l);
        for (j, &k) in b.wavenumbers().iter().enumerate().skip(1) {
            // φ_j'(0) and φ_j'(L) evaluated from the closed form
            assert_eq!(-amp * k * libm::sin(0.0), 0.0);
            assert!((amp * k * libm::sin(k * l)).abs() < 1e-11 * k, "mode {j}");
        }
    }

    #[test]
    fn projections_of_basis_fields() {
        let b = desk();
        let c = b.to_spectral(&b.mode_field(2)).unwrap();
        for (j, v) in c.values().iter().enumerate() {
            let expected = if j == 2 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-13);
        }
        let c = b.to_spectral(&Field::constant(*b.grid(), 1.0)).unwrap();
        assert_relative_eq!(c.values()[0], 1.0, epsilon = 1e-13);
        assert!(c.values()[1..].iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn full_round_trip_matches_gram_projection() {
        let g = SpatialGrid::new(1.0, 64).unwrap();
        let b = EigenBasis::new(g, 1.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = Field::new(g, (0..64).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        // Oracle: solve the Gram system G c = Φ u dx explicitly.
        let n = 64;
        let dx = g.dx();
        let mut gram = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            for j in 0..n {
                gram[i][j] = b.mode(i).iter().zip(b.mode(j)).map(|(a, c)| a * c).sum::<f64>() * dx;
            }
            gram[i][n] = b.mode(i).iter().zip(u.values()).map(|(a, c)| a * c).sum::<f64>() * dx;
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&a, &c| gram[a][col].abs().partial_cmp(&gram[c][col].abs()).unwrap())
                .unwrap();
            gram.swap(col, piv);
            for r in 0..n {
                if r != col {
                    let f = gram[r][col] / gram[col][col];
                    for k in col..=n {
                        gram[r][k] -= f * gram[col][k];
                    }
                }
            }
        }
        let oracle: Vec<f64> = (0..n).map(|i| gram[i][n] / gram[i][i]).collect();
        let c = b.to_spectral(&u).unwrap();
        for (a, o) in c.values().iter().zip(&oracle) {
            assert!((a - o).abs() < 1e-12);
        }
        let back = b.from_spectral(&c).unwrap();
        let rel = back.difference(&u).unwrap().l2_norm() / u.l2_norm();
        assert!(rel < 1e-10, "{rel}");
    }

    #[test]
    fn projection_is_idempotent() {
        let b = desk();
        let mut s = TrialSampler::new(1, 0);
        let u = s.white_field(*b.grid());
        let p1 = b.from_spectral(&b.to_spectral(&u).unwrap()).unwrap();
        assert!(projection_residual(&b, &p1).unwrap() < 1e-12);
    }

    #[test]
    fn semigroup_examples() {
        let b = EigenBasis::new(SpatialGrid::new(1.0, 64).unwrap(), 1.0, 32).unwrap();
        let c = SpectralCoeffs::unit(32, 1);
        assert_eq!(b.apply_semigroup(&c, 0.0).unwrap(), c);
        let out = b.apply_semigroup(&c, 1.0).unwrap();
        assert_relative_eq!(out.values()[1], libm::exp(-PI * PI), max_relative = 1e-15);
        assert_relative_eq!(out.values()[1], 5.17e-5, max_relative = 1e-3);
        let c0 = SpectralCoeffs::unit(32, 0);
        assert_eq!(b.apply_semigroup(&c0, 123.0).unwrap(), c0);
        assert!(matches!(b.apply_semigroup(&c, -1e-3), Err(Error::Domain(_))));
    }

    #[test]
    fn b_of_basis_modes() {
        let b = desk();
        let zero = b.apply_b_spectral(&SpectralCoeffs::unit(128, 0)).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let d1 = b.apply_b_spectral(&SpectralCoeffs::unit(128, 1)).unwrap();
        for (x, v) in b.grid().nodes().into_iter().zip(d1.values()) {
            let exact = -libm::sqrt(2.0) * PI * libm::sin(PI * x);
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn b_matches_finite_differences() {
        let mut errs = Vec::new();
        for n in [128, 256] {
            let b = EigenBasis::new(SpatialGrid::new(1.0, n).unwrap(), 1.0, 64).unwrap();
            let mut c = SpectralCoeffs::zeros(64);
            for (j, v) in c.values_mut().iter_mut().enumerate().take(6) {
                *v = 1.0 / (1.0 + j as f64);
            }
            let u = b.from_spectral(&c).unwrap();
            let bu = b.apply_b_spectral(&c).unwrap();
            let fd = crate::model::derivative(u.values(), b.grid().dx());
            errs.push(bu.difference(&Field::new(*b.grid(), fd).unwrap()).unwrap().sup_norm());
        }
        assert!(errs[1] < 2e-2, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn db_norm_of_modes() {
        let b = desk();
        assert_eq!(b.db_norm(&Field::zeros(*b.grid())).unwrap(), 0.0);
        let mut last = 0.0;
        for j in 1..10 {
            let v = b.db_norm(&b.mode_field(j)).unwrap();
            assert_relative_eq!(v, j as f64 * PI + 1.0, max_relative = 1e-12);
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn spectral_b_norm_matches_sampled_derivative() {
        let b = desk();
        let mut s = TrialSampler::new(3, 0);
        for _ in 0..5 {
            let c = s.band_limited(128);
            let sampled = b.apply_b_spectral(&c).unwrap().l2_norm();
            assert_relative_eq!(sampled, b.b_norm_spectral(&c), max_relative = 1e-11);
        }
    }

    #[test]
    fn tlemcen_identity_per_mode() {
        let b = desk();
        for j in 0..128 {
            let c = SpectralCoeffs::unit(128, j);
            let bnorm = b.b_norm_spectral(&c);
            let lhs = b.diffusion() * bnorm * bnorm;
            let rhs = b.omega_sq()[j] * c.l2_norm() * c.l2_norm();
            if rhs == 0.0 {
                assert_eq!(lhs, 0.0);
            } else {
                assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn single_mode_smoothing_scan() {
        // dense scan over (j, t) against the analytic maximum
        let bound = smoothing_bound(1.0);
        let mut best: f64 = 0.0;
        for j in 1..200 {
            let k = j as f64 * PI;
            for p in 0..400 {
                let t = libm::pow(10.0, -6.0 + 6.0 * p as f64 / 399.0);
                best = best.max(libm::sqrt(t) * k * libm::exp(-k * k * t));
            }
        }
        assert!(best <= bound);
        assert!(best > 0.999 * bound);
        assert_relative_eq!(bound, 0.4289, max_relative = 1e-3);
    }

    #[test]
    fn smoothing_ratio_vanishes_for_large_t() {
        let b = desk();
        let r = smoothing_ratio(&b, &b.mode_field(1), 10.0).unwrap();
        assert!(r < 1e-30);
    }

    #[test]
    fn verify_smoothing_small() {
        let b = desk();
        let ts: Vec<f64> = (0..20).map(|i| libm::pow(10.0, -4.0 + 4.0 * i as f64 / 19.0)).collect();
        let rep = verify_smoothing(&b, &ts, 30, 9).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.violations, 0);
        assert!(rep.empirical_constant > 0.3);
        assert!(verify_smoothing(&b, &[], 10, 0).is_err());
    }

    #[test]
    fn holder_integrals_basic() {
        let b = desk();
        let same = holder_integral_a1(&b, 0.3, 0.3, 0.4).unwrap();
        assert_eq!(same.increment, 0.0);
        assert_eq!(same.tail, 0.0);
        assert!(matches!(holder_integral_a1(&b, 0.0, 0.1, 0.6), Err(Error::Domain(_))));
        assert!(matches!(holder_integral_a2(&b, 0.0, 0.1, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn single_mode_tail_closed_form() {
        let b = EigenBasis::new(SpatialGrid::new(1.0, 8).unwrap(), 1.0, 2).unwrap();
        let (s, t) = (0.2, 0.45);
        let w1 = PI * PI;
        let series = holder_series(&b, s, t);
        let mode1 = series.tail - (t - s);
        assert_relative_eq!(mode1, (1.0 - libm::exp(-2.0 * w1 * (t - s))) / (2.0 * w1), max_relative = 1e-14);
    }

    #[test]
    fn series_matches_riemann_quadrature() {
        // midpoint rule in time for the truncated series
        let b = EigenBasis::new(SpatialGrid::new(1.0, 64).unwrap(), 1.0, 16).unwrap();
        let (s, t) = (0.3, 0.3 + 1.0 / 16.0);
        let m = 200_000;
        let (mut inc, mut tail) = (0.0, 0.0);
        let hs = s / m as f64;
        let ht = (t - s) / m as f64;
        for i in 0..m {
            let u = (i as f64 + 0.5) * hs;
            let r = s + (i as f64 + 0.5) * ht;
            for &w in b.omega_sq() {
                let d = libm::exp(-w * (t - u)) - libm::exp(-w * (s - u));
                inc += d * d * hs;
                tail += libm::exp(-2.0 * w * (t - r)) * ht;
            }
        }
        let exact = holder_series(&b, s, t);
        assert_relative_eq!(exact.increment, inc, max_relative = 1e-6);
        assert_relative_eq!(exact.tail, tail, max_relative = 1e-6);
    }

    #[test]
    fn holder_scaling_at_desk_scale() {
        let b = desk();
        let s = 0.5;
        for with_b in [false, true] {
            let f = |part: usize| {
                holder_scaling(
                    |h| {
                        let v = if with_b {
                            holder_integral_a2(&b, s, s + h, 0.4)?
                        } else {
                            holder_integral_a1(&b, s, s + h, 0.4)?
                        };
                        Ok(if part == 0 { v.increment } else { v.tail })
                    },
                    &dyadic_increments(),
                    0.4,
                )
                .unwrap()
            };
            assert!(f(0).bounded_within(5.0), "{:?}", f(0));
            assert!(f(1).bounded_within(5.0), "{:?}", f(1));
        }
    }

    #[test]
    fn mode_decay_partial_sums_are_cauchy() {
        for &lt in &[0.0, 0.1, 0.2] {
            let ks = [100, 200, 400, 800, 1600, 3200];
            let s = mode_decay_partial_sums(1.0, 1.0, lt, &ks);
            assert!(s.windows(2).all(|w| w[1] >= w[0]));
            let d: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
            assert!(d.windows(2).all(|w| w[1] < w[0]), "{lt} {d:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn semigroup_law(s in 0.0f64..0.5, t in 0.0f64..0.5, seed in any::<u64>()) {
            let b = EigenBasis::new(SpatialGrid::new(1.0, 64).unwrap(), 1.0, 32).unwrap();
            let c = TrialSampler::new(seed, 0).band_limited(32);
            let two = b.apply_semigroup(&b.apply_semigroup(&c, s).unwrap(), t).unwrap();
            let one = b.apply_semigroup(&c, s + t).unwrap();
            for (x, y) in two.values().iter().zip(one.values()) {
                prop_assert!((x - y).abs() <= 1e-14 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn contraction_in_x_and_db(t in 0.0f64..2.0, seed in any::<u64>()) {
            let b = EigenBasis::new(SpatialGrid::new(1.0, 64).unwrap(), 1.0, 32).unwrap();
            let c = TrialSampler::new(seed, 1).band_limited(32);
            let ct = b.apply_semigroup(&c, t).unwrap();
            for (x, y) in ct.values().iter().zip(c.values()) {
                prop_assert!(x.abs() <= y.abs());
            }
            prop_assert!(ct.l2_norm() <= c.l2_norm());
            prop_assert!(b.db_norm_spectral(&ct) <= b.db_norm_spectral(&c));
        }
    }
}
