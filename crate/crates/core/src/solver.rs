//! Exponential Euler time stepping of the mild equation and the Picard
//! iteration on a frozen noise path.
//!
//! One step reads
//!
//! ```text
//! u_{k+1} = T(dt) [ u_k − dt·B[u_k g_G(u_k)] + aₙ(u_k) ξ_k ]
//! ```
//!
//! After the first step the state lies in the span of the retained modes, so
//! it is carried as cosine coefficients and synthesized once per step for the
//! nonlinear terms. With the drift and the noise both off the update is a
//! plain per-mode multiplication by `exp(−ω_j² dt)`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostics::report::{self, EstimateReport};
use crate::error::{Error, Result};
use crate::grid::{l2_norm, Field, SpatialGrid};
use crate::kernel::KernelSpec;
use crate::model::{drift_values, ModelParams};
use crate::noise::{ApproxCoefficient, NoisePath, NoiseSpec, NoiseStream};
use crate::semigroup::{b_norm, EigenBasis, SpectralCoeffs};

/// Largest admissible `dt·max|g_G(u)|/dx`.
pub const COURANT_LIMIT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMode {
    ExponentialEuler,
    /// Same discrete scheme, solved by successive approximation in
    /// [`picard_solve`].
    Picard,
    /// Noise off regardless of `λ`.
    Deterministic,
}

/// Optional per-run records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecordOptions {
    /// Raw stochastic increments `aₙ(u_k)ξ_k` and their quadratic variation.
    pub martingale: bool,
    /// Spectral coefficients of the stochastic convolution at snapshots.
    pub stochastic_convolution: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub params: ModelParams,
    pub coefficient: ApproxCoefficient,
    pub dt: f64,
    pub t_end: f64,
    /// Retained modes `J`.
    pub modes: usize,
    pub noise: NoiseSpec,
    pub snapshot_every: usize,
    pub mode: SolverMode,
    pub record: RecordOptions,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let params = self.params.validate().err().map(|e| match e {
            Error::Config(msg) => msg,
            other => alloc::format!("{other}"),
        });
        if let Some(msg) = &params {
            problems.push(msg.as_str());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push("dt > 0 required");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            problems.push("t_end > 0 required");
        }
        if self.dt > self.t_end {
            problems.push("dt <= t_end required");
        } else if self.dt > 0.0 && self.t_end > 0.0 {
            let ratio = self.t_end / self.dt;
            if (ratio - libm::round(ratio)).abs() > 1e-9 * ratio.max(1.0) {
                problems.push("t_end must be a whole number of steps");
            }
        }
        if self.snapshot_every == 0 {
            problems.push("snapshot_every >= 1 required");
        }
        if self.modes == 0 || self.modes > self.params.grid().cells() {
            problems.push("1 <= J <= N required");
        }
        if self.coefficient.lambda != self.params.lambda {
            problems.push("coefficient rate must equal lambda");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::config(problems.join("; ")))
        }
    }

    pub fn steps(&self) -> usize {
        libm::round(self.t_end / self.dt) as usize
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.params.grid()
    }

    pub fn basis(&self) -> Result<EigenBasis> {
        EigenBasis::new(*self.grid(), self.params.diffusion, self.modes)
    }

    /// The coefficient actually applied, `None` when the noise is off.
    pub fn active_coefficient(&self) -> Option<ApproxCoefficient> {
        if self.mode == SolverMode::Deterministic || self.coefficient.is_zero() {
            None
        } else {
            Some(self.coefficient)
        }
    }
}

/// `dt·max|g_G(u)|/dx`
pub fn courant_number(kernel: &KernelSpec, u: &[f64], dt: f64) -> f64 {
    let g = kernel.convolve_values(u);
    dt * crate::grid::sup_norm(&g) / kernel.grid().dx()
}

/// Quadratic-variation bookkeeping for the martingale part.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleRecord {
    /// `M_K(x_i) = Σ_k aₙ(u_k(x_i)) ξ_k(x_i)`
    pub accumulated: Vec<f64>,
    /// `Σ_k (aₙ(u_k(x_i)) ξ_k(x_i))²`
    pub realized_qv: Vec<f64>,
    /// `Σ_k aₙ(u_k(x_i))² dt/dx`
    pub predicted_qv: Vec<f64>,
    pub steps: usize,
}

impl MartingaleRecord {
    fn new(n: usize) -> Self {
        Self {
            accumulated: vec![0.0; n],
            realized_qv: vec![0.0; n],
            predicted_qv: vec![0.0; n],
            steps: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: SpatialGrid,
    pub dt: f64,
    /// One row per step, including `t = 0`.
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub positivity: Vec<f64>,
    pub db_norm: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub martingale: Option<MartingaleRecord>,
    /// Coefficients of `∫₀ᵗ T(t−s) aₙ(u(s)) dW(s)` at the snapshot times.
    pub stochastic_convolution: Option<Vec<SpectralCoeffs>>,
}

impl Trajectory {
    fn new(grid: SpatialGrid, dt: f64, record: RecordOptions) -> Self {
        Self {
            grid,
            dt,
            times: Vec::new(),
            mass: Vec::new(),
            positivity: Vec::new(),
            db_norm: Vec::new(),
            snapshot_times: Vec::new(),
            snapshots: Vec::new(),
            martingale: record.martingale.then(|| MartingaleRecord::new(grid.cells())),
            stochastic_convolution: record.stochastic_convolution.then(Vec::new),
        }
    }

    fn push_row(&mut self, t: f64, u: &[f64], c: &[f64], wavenumbers: &[f64]) {
        let dx = self.grid.dx();
        let l2 = l2_norm(u, dx);
        self.times.push(t);
        self.mass.push(u.iter().sum::<f64>() * dx);
        self.positivity
            .push(u.iter().filter(|&&v| v >= 0.0).count() as f64 / u.len() as f64);
        self.db_norm.push(b_norm(c, wavenumbers) + l2);
    }

    fn push_snapshot(&mut self, t: f64, u: &[f64], conv: Option<&[f64]>) {
        self.snapshot_times.push(t);
        self.snapshots.push(Field::from_raw(self.grid, u.to_vec()));
        if let (Some(list), Some(c)) = (self.stochastic_convolution.as_mut(), conv) {
            list.push(SpectralCoeffs::from_raw(c.to_vec()));
        }
    }

    pub(crate) fn empty(grid: SpatialGrid, dt: f64) -> Self {
        Self::new(grid, dt, RecordOptions::default())
    }

    pub fn steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn final_field(&self) -> Option<&Field> {
        self.snapshots.last()
    }
}

/// Scratch space and precomputed factors for [`SolverConfig`] steps.
pub struct Stepper<'a> {
    basis: &'a EigenBasis,
    kernel: Option<&'a KernelSpec>,
    coefficient: Option<ApproxCoefficient>,
    dt: f64,
    decay: Vec<f64>,
    forcing: Vec<f64>,
    noise_term: Vec<f64>,
    coef_values: Vec<f64>,
    proj: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(cfg: &'a SolverConfig, basis: &'a EigenBasis) -> Self {
        let n = basis.grid().cells();
        let decay = basis
            .omega_sq()
            .iter()
            .map(|w| libm::exp(-w * cfg.dt))
            .collect();
        Self {
            basis,
            kernel: cfg.params.kernel.as_ref(),
            coefficient: cfg.active_coefficient(),
            dt: cfg.dt,
            decay,
            forcing: vec![0.0; n],
            noise_term: vec![0.0; n],
            coef_values: vec![0.0; n],
            proj: vec![0.0; basis.modes()],
        }
    }

    pub fn noisy(&self) -> bool {
        self.coefficient.is_some()
    }

    /// `state ← T(dt)[state + P(−dt·f(v) + aₙ(v)ξ)]` with the nonlinear terms
    /// evaluated at `at`. `conv`, when present, is advanced as
    /// `conv ← T(dt)[conv + P(aₙ(v)ξ)]`.
    pub fn advance(
        &mut self,
        state: &mut [f64],
        at: &[f64],
        xi: Option<&[f64]>,
        conv: Option<&mut [f64]>,
    ) {
        let has_drift = self.kernel.is_some();
        if let Some(kernel) = self.kernel {
            let drift = drift_values(kernel, at, self.basis.grid().dx());
            for (f, d) in self.forcing.iter_mut().zip(&drift) {
                *f = -self.dt * d;
            }
        }
        let has_noise = match (self.coefficient, xi) {
            (Some(coef), Some(xi)) => {
                for (((nt, a), &v), &x) in self
                    .noise_term
                    .iter_mut()
                    .zip(self.coef_values.iter_mut())
                    .zip(at)
                    .zip(xi)
                {
                    *a = coef.eval(v);
                    *nt = *a * x;
                }
                true
            }
            _ => false,
        };
        if let (true, Some(conv)) = (has_noise, conv) {
            self.basis.project_into(&self.noise_term, &mut self.proj);
            for ((c, p), d) in conv.iter_mut().zip(&self.proj).zip(&self.decay) {
                *c = (*c + p) * d;
            }
            if has_drift {
                self.basis.project_into(&self.forcing, &mut self.proj);
                for (s, p) in state.iter_mut().zip(&self.proj) {
                    *s += p;
                }
            }
            self.basis.project_into(&self.noise_term, &mut self.proj);
            for (s, p) in state.iter_mut().zip(&self.proj) {
                *s += p;
            }
        } else if has_drift || has_noise {
            if has_drift && has_noise {
                for (f, nt) in self.forcing.iter_mut().zip(&self.noise_term) {
                    *f += nt;
                }
                self.basis.project_into(&self.forcing, &mut self.proj);
            } else if has_drift {
                self.basis.project_into(&self.forcing, &mut self.proj);
            } else {
                self.basis.project_into(&self.noise_term, &mut self.proj);
            }
            for (s, p) in state.iter_mut().zip(&self.proj) {
                *s += p;
            }
        }
        for (s, d) in state.iter_mut().zip(&self.decay) {
            *s *= d;
        }
    }

    /// `aₙ(v)ξ` from the last noisy [`Stepper::advance`].
    pub fn noise_term(&self) -> &[f64] {
        &self.noise_term
    }

    /// `aₙ(v)` from the last noisy [`Stepper::advance`].
    pub fn coefficient_values(&self) -> &[f64] {
        &self.coef_values
    }
}

trait NoiseSource {
    fn increment(&mut self, k: usize) -> Result<&[f64]>;
}

struct StreamSource {
    stream: NoiseStream,
    sd: f64,
    buf: Vec<f64>,
}

impl NoiseSource for StreamSource {
    fn increment(&mut self, _k: usize) -> Result<&[f64]> {
        self.stream.fill(self.sd, &mut self.buf);
        Ok(&self.buf)
    }
}

struct PathSource<'a> {
    path: &'a NoisePath,
}

impl NoiseSource for PathSource<'_> {
    fn increment(&mut self, k: usize) -> Result<&[f64]> {
        if k >= self.path.steps() {
            return Err(Error::config("noise path shorter than the horizon"));
        }
        Ok(self.path.increment(k))
    }
}

/// Runs the configured scheme with a fresh noise stream.
pub fn simulate(cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = *cfg.grid();
    let mut source = StreamSource {
        stream: cfg.noise.stream(),
        sd: libm::sqrt(cfg.dt / grid.dx()),
        buf: vec![0.0; grid.cells()],
    };
    run(cfg, &mut source)
}

/// Runs the configured scheme on pregenerated increments with the same `dt`.
pub fn simulate_on_path(cfg: &SolverConfig, path: &NoisePath) -> Result<Trajectory> {
    cfg.validate()?;
    check_path(cfg, path)?;
    run(cfg, &mut PathSource { path })
}

fn check_path(cfg: &SolverConfig, path: &NoisePath) -> Result<()> {
    if path.grid() != cfg.grid() {
        return Err(Error::GridMismatch {
            expected: cfg.grid().cells(),
            found: path.grid().cells(),
        });
    }
    if (path.dt() - cfg.dt).abs() > 1e-12 * cfg.dt {
        return Err(Error::config("noise path step differs from dt"));
    }
    if path.steps() < cfg.steps() {
        return Err(Error::config("noise path shorter than the horizon"));
    }
    Ok(())
}

fn check_courant(cfg: &SolverConfig, u: &[f64], step: usize) -> Result<()> {
    if let Some(kernel) = &cfg.params.kernel {
        let courant = courant_number(kernel, u, cfg.dt);
        if !(courant <= COURANT_LIMIT) {
            return Err(Error::Stability {
                step,
                courant,
                limit: COURANT_LIMIT,
            });
        }
    }
    Ok(())
}

fn run(cfg: &SolverConfig, source: &mut dyn NoiseSource) -> Result<Trajectory> {
    let basis = cfg.basis()?;
    let grid = *cfg.grid();
    let steps = cfg.steps();
    let dx = grid.dx();
    let mut stepper = Stepper::new(cfg, &basis);
    let mut u = cfg.params.u0.values().to_vec();
    let mut c = vec![0.0; basis.modes()];
    basis.project_into(&u, &mut c);
    let mut conv = cfg
        .record
        .stochastic_convolution
        .then(|| vec![0.0; basis.modes()]);

    check_courant(cfg, &u, 0)?;
    let mut traj = Trajectory::new(grid, cfg.dt, cfg.record);
    traj.push_row(0.0, &u, &c, basis.wavenumbers());
    traj.push_snapshot(0.0, &u, conv.as_deref());

    for k in 0..steps {
        let xi = if stepper.noisy() {
            Some(source.increment(k)?)
        } else {
            None
        };
        stepper.advance(&mut c, &u, xi, conv.as_deref_mut());
        if stepper.noisy() {
            if let Some(m) = traj.martingale.as_mut() {
                let scale = cfg.dt / dx;
                for i in 0..u.len() {
                    let nt = stepper.noise_term()[i];
                    let a = stepper.coefficient_values()[i];
                    m.accumulated[i] += nt;
                    m.realized_qv[i] += nt * nt;
                    m.predicted_qv[i] += a * a * scale;
                }
                m.steps += 1;
            }
        }
        basis.synthesize_into(&c, &mut u);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                step: k + 1,
                partial: Box::new(traj),
            });
        }
        let t = (k + 1) as f64 * cfg.dt;
        traj.push_row(t, &u, &c, basis.wavenumbers());
        if (k + 1) % cfg.snapshot_every == 0 || k + 1 == steps {
            traj.push_snapshot(t, &u, conv.as_deref());
            check_courant(cfg, &u, k + 1)?;
        }
    }
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardLogEntry {
    pub iteration: usize,
    /// `h = sup_t |v^{m+1}(t) − v^m(t)|²_{D(B)}`
    pub h: f64,
    /// `h_{m+1}/h_m`
    pub ratio: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PicardStatus {
    Converged { iterations: usize },
    MaxIterations { last_ratio: Option<f64> },
    Diverged { iteration: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardOutcome {
    pub times: Vec<f64>,
    /// Final iterate at every step.
    pub path: Vec<Field>,
    pub log: Vec<PicardLogEntry>,
    pub status: PicardStatus,
}

impl PicardOutcome {
    /// Length of the initial run of strictly decreasing `h`.
    pub fn monotone_decreases(&self) -> usize {
        self.log.windows(2).take_while(|w| w[1].h < w[0].h).count()
    }

    pub fn converged(&self) -> bool {
        matches!(self.status, PicardStatus::Converged { .. })
    }
}

/// Successive approximation of the discrete mild equation on one frozen
/// noise path, starting from `v⁰(t) ≡ u₀`:
///
/// ```text
/// v^{m+1}_{k+1} = T(dt) [ v^{m+1}_k − dt·B[v^m_k g_G(v^m_k)] + aₙ(v^m_k) ξ_k ]
/// ```
///
/// which unrolls to the left-endpoint discretization of both integrals. Its
/// fixed point is the exponential Euler path on the same increments.
pub fn picard_solve(
    cfg: &SolverConfig,
    path: &NoisePath,
    m_max: usize,
    tol: f64,
) -> Result<PicardOutcome> {
    cfg.validate()?;
    check_path(cfg, path)?;
    if m_max < 2 {
        return Err(Error::config("m_max >= 2 required"));
    }
    let basis = cfg.basis()?;
    let n = cfg.grid().cells();
    let j = basis.modes();
    let steps = cfg.steps();
    let dx = cfg.grid().dx();
    let mut stepper = Stepper::new(cfg, &basis);
    check_courant(cfg, cfg.params.u0.values(), 0)?;

    let u0 = cfg.params.u0.values();
    let mut c0 = vec![0.0; j];
    basis.project_into(u0, &mut c0);
    let mut old_u: Vec<f64> = u0.iter().copied().cycle().take(n * (steps + 1)).collect();
    let mut old_c: Vec<f64> = c0.iter().copied().cycle().take(j * (steps + 1)).collect();
    let mut new_u = old_u.clone();
    let mut new_c = old_c.clone();
    let mut diff_c = vec![0.0; j];
    let mut diff_u = vec![0.0; n];

    let mut log: Vec<PicardLogEntry> = Vec::new();
    let mut status = PicardStatus::MaxIterations { last_ratio: None };
    for m in 1..=m_max {
        let mut c = c0.clone();
        for k in 0..steps {
            let xi = stepper.noisy().then(|| path.increment(k));
            stepper.advance(&mut c, &old_u[k * n..(k + 1) * n], xi, None);
            new_c[(k + 1) * j..(k + 2) * j].copy_from_slice(&c);
            basis.synthesize_into(&c, &mut new_u[(k + 1) * n..(k + 2) * n]);
        }
        if new_u.iter().any(|v| !v.is_finite()) {
            status = PicardStatus::Diverged { iteration: m };
            break;
        }
        let mut h: f64 = 0.0;
        for k in 0..=steps {
            for i in 0..j {
                diff_c[i] = new_c[k * j + i] - old_c[k * j + i];
            }
            for i in 0..n {
                diff_u[i] = new_u[k * n + i] - old_u[k * n + i];
            }
            let db = b_norm(&diff_c, basis.wavenumbers()) + l2_norm(&diff_u, dx);
            h = h.max(db * db);
        }
        let ratio = log.last().map(|prev| h / prev.h);
        log.push(PicardLogEntry {
            iteration: m,
            h,
            ratio,
        });
        core::mem::swap(&mut old_u, &mut new_u);
        core::mem::swap(&mut old_c, &mut new_c);
        if h <= tol {
            status = PicardStatus::Converged { iterations: m };
            break;
        }
        status = PicardStatus::MaxIterations { last_ratio: ratio };
    }
    let grid = *cfg.grid();
    let path_fields = old_u
        .chunks_exact(n)
        .map(|u| Field::from_raw(grid, u.to_vec()))
        .collect();
    Ok(PicardOutcome {
        times: (0..=steps).map(|k| k as f64 * cfg.dt).collect(),
        path: path_fields,
        log,
        status,
    })
}

/// The constants entering the smallness condition on the horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionConstants {
    /// Lipschitz constant of the drift on `D(B)` balls.
    pub m: f64,
    /// Smoothing constant `‖BT(t)‖ ≤ C/√t`.
    pub c: f64,
    /// Uniform bound of `T(t)` on `D(B)`.
    pub c1: f64,
    /// Lipschitz constant of `u ↦ aₙ(u)` into HS operators.
    pub k: f64,
}

impl ConditionConstants {
    pub fn from_reports(reports: &[EstimateReport]) -> Result<Self> {
        let find = |name: &str| {
            reports
                .iter()
                .find(|r| r.name == name)
                .map(|r| r.empirical_constant)
        };
        let names = [
            report::DRIFT_LIPSCHITZ,
            report::SMOOTHING,
            report::SEMIGROUP_DB_BOUND,
            report::LIPSCHITZ_HS,
        ];
        let values: Vec<Option<f64>> = names.iter().map(|n| find(n)).collect();
        let missing: Vec<&str> = names
            .iter()
            .zip(&values)
            .filter(|(_, v)| v.is_none())
            .map(|(n, _)| *n)
            .collect();
        if !missing.is_empty() {
            return Err(Error::config(alloc::format!(
                "missing estimates: {}",
                missing.join(", ")
            )));
        }
        Ok(Self {
            m: values[0].unwrap_or_default(),
            c: values[1].unwrap_or_default(),
            c1: values[2].unwrap_or_default(),
            k: values[3].unwrap_or_default(),
        })
    }

    /// `2[M²R²(T + 2√T·C)² + C₁²K²T]`
    pub fn value(&self, r: f64, t: f64) -> f64 {
        let a = t + 2.0 * libm::sqrt(t) * self.c;
        2.0 * (self.m * self.m * r * r * a * a + self.c1 * self.c1 * self.k * self.k * t)
    }

    /// Largest `T = 2^{-p}`, `p ≤ max_power`, with [`Self::value`] `< ½`.
    pub fn largest_dyadic_horizon(&self, r: f64, max_power: i32) -> Option<f64> {
        (0..=max_power)
            .map(|p| libm::ldexp(1.0, -p))
            .find(|&t| self.value(r, t) < 0.5)
    }
}

/// Left-hand side of the smallness condition with constants read from the
/// named reports.
pub fn check_condition_t(reports: &[EstimateReport], r: f64, t: f64) -> Result<f64> {
    Ok(ConditionConstants::from_reports(reports)?.value(r, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::report::Witness;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn config(lambda: f64, kernel: bool, u0: Field) -> SolverConfig {
        let grid = *u0.grid();
        let kernel = kernel.then(|| KernelSpec::new(0.05, 0.25, grid).unwrap());
        SolverConfig {
            params: ModelParams::new(1.0, lambda, kernel, u0).unwrap(),
            coefficient: ApproxCoefficient::new(16, lambda).unwrap(),
            dt: 1e-3,
            t_end: 0.1,
            modes: grid.cells() / 2,
            noise: NoiseSpec::new(11, 0),
            snapshot_every: 10,
            mode: SolverMode::ExponentialEuler,
            record: RecordOptions::default(),
        }
    }

    fn bump(grid: SpatialGrid) -> Field {
        Field::from_fn(grid, |x| libm::exp(-((x - 0.5) * (x - 0.5)) / 0.02)).unwrap()
    }

    #[test]
    fn validation_reports_everything() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let mut cfg = config(1.0, false, bump(g));
        cfg.dt = 0.3;
        cfg.t_end = 1.0;
        cfg.snapshot_every = 0;
        cfg.modes = 40;
        let msg = alloc::format!("{}", cfg.validate().unwrap_err());
        assert!(msg.contains("whole number"), "{msg}");
        assert!(msg.contains("snapshot_every"), "{msg}");
        assert!(msg.contains("J <= N"), "{msg}");
    }

    #[test]
    fn pure_diffusion_is_exact() {
        let g = SpatialGrid::new(1.0, 64).unwrap();
        let b = EigenBasis::new(g, 1.0, 32).unwrap();
        let u0 = Field::from_fn(g, |x| 2.0 + libm::sqrt(2.0) * libm::cos(PI * x)).unwrap();
        let cfg = config(0.0, false, u0);
        let traj = simulate(&cfg).unwrap();
        for (t, snap) in traj.snapshot_times.iter().zip(&traj.snapshots) {
            let c = b.to_spectral(snap).unwrap();
            assert_relative_eq!(c.values()[1], libm::exp(-PI * PI * t), max_relative = 1e-12);
            assert_relative_eq!(c.values()[0], 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn zero_state_is_absorbing() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let cfg = config(1.0, true, Field::zeros(g));
        let traj = simulate(&cfg).unwrap();
        assert!(traj
            .snapshots
            .iter()
            .all(|s| s.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn constant_state_changes_only_near_walls() {
        let g = SpatialGrid::new(1.0, 128).unwrap();
        let mut cfg = config(0.0, true, Field::constant(g, 1.0));
        cfg.dt = 1e-4;
        cfg.t_end = 1e-4;
        let traj = simulate(&cfg).unwrap();
        let end = traj.final_field().unwrap();
        // step 1 projects u₀ ≡ 1 exactly; the only interior change is the
        // truncated-series image of the boundary-layer drift
        let dx = g.dx();
        let interior: f64 = g
            .nodes()
            .iter()
            .zip(end.values())
            .filter(|(x, _)| **x > 0.35 && **x < 0.65)
            .map(|(_, v)| (v - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(interior < 1e-4 * dx.max(1e-2), "{interior}");
    }

    #[test]
    fn deterministic_mode_matches_zero_rate_bitwise() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let zero = config(0.0, true, bump(g));
        let mut det = config(1.0, true, bump(g));
        det.mode = SolverMode::Deterministic;
        let a = simulate(&zero).unwrap();
        let b = simulate(&det).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
        assert_eq!(a.db_norm, b.db_norm);
    }

    #[test]
    fn reruns_are_bitwise_identical() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let mut cfg = config(1.0, true, bump(g));
        cfg.record = RecordOptions {
            martingale: true,
            stochastic_convolution: true,
        };
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    }

    #[test]
    fn stream_and_pregenerated_path_agree() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let cfg = config(1.0, true, bump(g));
        let path = NoisePath::generate(cfg.noise, g, cfg.dt, cfg.steps()).unwrap();
        assert_eq!(simulate(&cfg).unwrap(), simulate_on_path(&cfg, &path).unwrap());
    }

    #[test]
    fn rows_and_snapshots() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let cfg = config(1.0, true, bump(g));
        let traj = simulate(&cfg).unwrap();
        assert_eq!(traj.times.len(), cfg.steps() + 1);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(traj.snapshots.len(), cfg.steps() / 10 + 1);
        assert_eq!(traj.mass.len(), traj.times.len());
    }

    #[test]
    fn noise_vanishes_where_density_is_nonpositive() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let b = EigenBasis::new(g, 1.0, 16).unwrap();
        let mut cfg = config(1.0, false, Field::constant(g, 0.0));
        cfg.t_end = cfg.dt;
        let mut stepper = Stepper::new(&cfg, &b);
        let at: Vec<f64> = (0..32).map(|i| if i % 2 == 0 { -0.5 } else { 0.5 }).collect();
        let xi = vec![1.0; 32];
        let mut state = vec![0.0; 16];
        stepper.advance(&mut state, &at, Some(&xi), None);
        for (i, v) in stepper.noise_term().iter().enumerate() {
            if i % 2 == 0 {
                assert_eq!(*v, 0.0);
            } else {
                assert!(*v > 0.0);
            }
        }
    }

    #[test]
    fn blow_up_carries_partial_trajectory() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        // λu overflows, so the very first noise term is infinite
        let mut cfg = config(1e300, false, Field::constant(g, 1e10));
        cfg.coefficient = ApproxCoefficient::new(16, 1e300).unwrap();
        match simulate(&cfg) {
            Err(Error::BlowUp { step, partial }) => {
                assert!(step >= 1);
                assert_eq!(partial.steps(), step - 1);
            }
            other => panic!("expected blow-up, got {:?}", other.map(|t| t.steps())),
        }
    }

    #[test]
    fn courant_guard_trips() {
        let g = SpatialGrid::new(1.0, 64).unwrap();
        let mut cfg = config(0.0, true, Field::constant(g, 1e4));
        cfg.dt = 0.05;
        cfg.t_end = 0.1;
        assert!(matches!(simulate(&cfg), Err(Error::Stability { step: 0, .. })));
    }

    #[test]
    fn picard_heat_flow_converges_immediately() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let cfg = config(0.0, false, Field::constant(g, 0.7));
        let path = NoisePath::generate(cfg.noise, g, cfg.dt, cfg.steps()).unwrap();
        let out = picard_solve(&cfg, &path, 5, 1e-20).unwrap();
        assert!(out.log[0].h < 1e-20);
        assert_eq!(out.status, PicardStatus::Converged { iterations: 1 });
    }

    #[test]
    fn picard_fixed_point_matches_stepper() {
        let g = SpatialGrid::new(1.0, 32).unwrap();
        let mut cfg = config(1.0, true, bump(g));
        cfg.t_end = 0.01;
        let path = NoisePath::generate(cfg.noise, g, cfg.dt, cfg.steps()).unwrap();
        let out = picard_solve(&cfg, &path, 30, 1e-24).unwrap();
        assert!(out.converged(), "{:?}", out.log);
        let traj = simulate_on_path(&cfg, &path).unwrap();
        let end = out.path.last().unwrap();
        let d = end.difference(traj.final_field().unwrap()).unwrap().l2_norm();
        assert!(d < 1e-11, "{d}");
        assert!(picard_solve(&cfg, &path, 1, 0.0).is_err());
    }

    fn named(name: &str, v: f64) -> EstimateReport {
        EstimateReport::new(name, v, 1, Witness::default(), None, 0)
    }

    #[test]
    fn condition_t_monotone_and_vanishing() {
        let reports = [
            named(report::DRIFT_LIPSCHITZ, 0.05),
            named(report::SMOOTHING, 0.43),
            named(report::SEMIGROUP_DB_BOUND, 1.0),
            named(report::LIPSCHITZ_HS, 4.2),
        ];
        let small = check_condition_t(&reports, 2.0, 1e-12).unwrap();
        assert!(small < 1e-9);
        let mut last = 0.0;
        for p in (0..20).rev() {
            let v = check_condition_t(&reports, 2.0, libm::ldexp(1.0, -p)).unwrap();
            assert!(v > last);
            last = v;
        }
        let t = 0.01;
        assert!(check_condition_t(&reports, 3.0, t).unwrap() > check_condition_t(&reports, 2.0, t).unwrap());
        let err = check_condition_t(&reports[..2], 2.0, t).unwrap_err();
        assert!(alloc::format!("{err}").contains(report::LIPSCHITZ_HS));
    }

    #[test]
    fn largest_dyadic_horizon_by_bisection() {
        let k = ConditionConstants {
            m: 0.05,
            c: 0.43,
            c1: 1.0,
            k: 4.2,
        };
        let t = k.largest_dyadic_horizon(2.0, 40).unwrap();
        assert!(k.value(2.0, t) < 0.5);
        assert!(k.value(2.0, 2.0 * t) >= 0.5);
        // bisection on the continuous threshold
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if k.value(2.0, mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(t <= lo && 2.0 * t > lo);
    }
}
