//! Empirical constants for the drift, convolution, semigroup and noise
//! estimates, plus replay of report witnesses.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::report::{self, EstimateReport, Witness};
use super::trial::TrialSampler;
use crate::error::{Error, Result};
use crate::grid::{l2_norm, sup_norm, Field};
use crate::kernel::KernelSpec;
use crate::model::{derivative, drift_values};
use crate::noise::{embedding_norm_sq, hs_embedding_check, hs_norm_of_multiplier, ApproxCoefficient};
use crate::semigroup::{b_norm, smoothing_ratio, EigenBasis, SpectralCoeffs};

/// Relative slack granted to the explicit-constant inequalities.
pub const QUADRATURE_SLACK: f64 = 0.01;

/// Largest allowed ratio between the estimate after `2·trials` and after
/// `trials`.
pub const DOUBLING_TOLERANCE: f64 = 1.2;

#[derive(Clone, Copy, Debug)]
pub struct EstimateContext<'a> {
    pub basis: &'a EigenBasis,
    pub kernel: &'a KernelSpec,
    /// Number of cosine modes in each random trial field.
    pub trial_modes: usize,
}

impl<'a> EstimateContext<'a> {
    pub fn new(basis: &'a EigenBasis, kernel: &'a KernelSpec) -> Result<Self> {
        if basis.grid() != kernel.grid() {
            return Err(Error::config("basis and kernel must share the grid"));
        }
        Ok(Self {
            basis,
            kernel,
            trial_modes: basis.modes(),
        })
    }

    pub fn with_trial_modes(self, modes: usize) -> Result<Self> {
        if modes == 0 || modes > self.basis.modes() {
            return Err(Error::config("trial modes must lie in 1..=J"));
        }
        Ok(Self {
            trial_modes: modes,
            ..self
        })
    }

    fn dx(&self) -> f64 {
        self.basis.grid().dx()
    }

    /// A band-limited trial field.
    pub fn trial_field(&self, sampler: &mut TrialSampler) -> Vec<f64> {
        let mut c = vec![0.0; self.basis.modes()];
        let drawn = sampler.band_limited(self.trial_modes);
        c[..self.trial_modes].copy_from_slice(drawn.values());
        let mut u = vec![0.0; self.basis.grid().cells()];
        self.basis.synthesize_into(&c, &mut u);
        u
    }

    /// `‖B P_J u‖ + ‖u‖`
    pub fn graph_norm(&self, u: &[f64]) -> f64 {
        let mut c = vec![0.0; self.basis.modes()];
        self.basis.project_into(u, &mut c);
        b_norm(&c, self.basis.wavenumbers()) + l2_norm(u, self.dx())
    }

    fn drift(&self, u: &[f64]) -> Vec<f64> {
        drift_values(self.kernel, u, self.dx())
    }

    /// `‖B[u g(u)] − B[v g(v)]‖ / (max(|u|, |v|)·|u − v|)` in the graph norm;
    /// `None` when the denominator vanishes.
    pub fn drift_lipschitz_ratio(&self, u: &[f64], v: &[f64]) -> Option<f64> {
        let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        let denom = self.graph_norm(u).max(self.graph_norm(v)) * self.graph_norm(&diff);
        if denom == 0.0 {
            return None;
        }
        let fu = self.drift(u);
        let fv = self.drift(v);
        let num: Vec<f64> = fu.iter().zip(&fv).map(|(a, b)| a - b).collect();
        Some(l2_norm(&num, self.dx()) / denom)
    }

    /// `‖B[u g(u)]‖ / (|u|_{D(B)}·‖u‖)`
    pub fn drift_growth_ratio(&self, u: &[f64]) -> Option<f64> {
        let denom = self.graph_norm(u) * l2_norm(u, self.dx());
        if denom == 0.0 {
            return None;
        }
        Some(l2_norm(&self.drift(u), self.dx()) / denom)
    }

    /// `|g(u)|_{D(B)} / |u|_{D(B)}`
    pub fn cont_ratio(&self, u: &[f64]) -> Option<f64> {
        let denom = self.graph_norm(u);
        if denom == 0.0 {
            return None;
        }
        Some(self.graph_norm(&self.kernel.convolve_values(u)) / denom)
    }

    fn explicit_constant(&self) -> f64 {
        libm::sqrt(self.basis.grid().length()) * self.kernel.sup_abs()
    }

    /// `sup|g(u)| / (√L·|G|_∞·‖u‖)`
    pub fn conv_sup_ratio(&self, u: &[f64]) -> Option<f64> {
        let denom = self.explicit_constant() * l2_norm(u, self.dx());
        if denom == 0.0 {
            return None;
        }
        Some(sup_norm(&self.kernel.convolve_values(u)) / denom)
    }

    /// `sup|B g(u)| / (√L·|G|_∞·|u|_{D(B)})`, with `B g` by second-order
    /// differences.
    pub fn conv_derivative_ratio(&self, u: &[f64]) -> Option<f64> {
        let denom = self.explicit_constant() * self.graph_norm(u);
        if denom == 0.0 {
            return None;
        }
        let bg = derivative(&self.kernel.convolve_values(u), self.dx());
        Some(sup_norm(&bg) / denom)
    }
}

/// Running maximum with its witness.
struct Sup {
    value: f64,
    witness: Witness,
    violations: usize,
}

impl Sup {
    fn new() -> Self {
        Self {
            value: 0.0,
            witness: Witness::default(),
            violations: 0,
        }
    }

    fn offer(&mut self, r: Option<f64>, bound: Option<f64>, witness: impl FnOnce() -> Witness) {
        let Some(r) = r else { return };
        if bound.is_some_and(|b| !(r <= b)) {
            self.violations += 1;
        }
        if r > self.value || r.is_nan() {
            self.value = r;
            self.witness = witness();
        }
    }

    fn report(self, name: &str, trials: usize, bound: Option<f64>) -> EstimateReport {
        EstimateReport::new(name, self.value, trials, self.witness, bound, self.violations)
    }
}

fn scaled_to(ctx: &EstimateContext, mut u: Vec<f64>, radius: f64) -> Vec<f64> {
    let n = ctx.graph_norm(&u);
    if n > 0.0 {
        u.iter_mut().for_each(|v| *v *= radius / n);
    }
    u
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftEstimates {
    pub m: EstimateReport,
    pub q: EstimateReport,
    /// Estimate after `2·trials` over the estimate after `trials`.
    pub m_doubling: f64,
    pub q_doubling: f64,
}

/// Drift estimates over random pairs in the `D(B)` ball of radius `radius`.
/// Pairs cycle through independent fields, small perturbations `v = u + εw`
/// and `v = 0`. The reports cover `2·trials` samples; the first `trials`
/// are a prefix, which gives the doubling ratios.
pub fn estimate_drift_constants(
    ctx: &EstimateContext,
    trials: usize,
    radius: f64,
    seed: u64,
) -> Result<DriftEstimates> {
    if trials < 100 {
        return Err(Error::config("at least 100 trials required"));
    }
    if !(radius > 0.0) {
        return Err(Error::config("radius > 0 required"));
    }
    let mut sampler = TrialSampler::new(seed, 2);
    let mut m = Sup::new();
    let mut q = Sup::new();
    let (mut m_half, mut q_half) = (0.0, 0.0);
    for trial in 0..2 * trials {
        if trial == trials {
            m_half = m.value;
            q_half = q.value;
        }
        let r_u = radius * (0.1 + 0.9 * sampler.uniform());
        let u = scaled_to(ctx, ctx.trial_field(&mut sampler), r_u);
        let v = match trial % 3 {
            0 => {
                let r_v = radius * (0.1 + 0.9 * sampler.uniform());
                scaled_to(ctx, ctx.trial_field(&mut sampler), r_v)
            }
            1 => {
                let eps = 1e-2 * r_u;
                let w = scaled_to(ctx, ctx.trial_field(&mut sampler), eps);
                u.iter().zip(&w).map(|(a, b)| a + b).collect()
            }
            _ => vec![0.0; u.len()],
        };
        m.offer(ctx.drift_lipschitz_ratio(&u, &v), None, || Witness {
            scalars: Vec::new(),
            u: u.clone(),
            v: v.clone(),
        });
        q.offer(ctx.drift_growth_ratio(&u), None, || Witness {
            scalars: Vec::new(),
            u: u.clone(),
            v: Vec::new(),
        });
    }
    let m_doubling = m.value / m_half;
    let q_doubling = q.value / q_half;
    let mut m = m.report(report::DRIFT_LIPSCHITZ, 2 * trials, None);
    let mut q = q.report(report::DRIFT_GROWTH, 2 * trials, None);
    m.passed &= m_doubling <= DOUBLING_TOLERANCE;
    q.passed &= q_doubling <= DOUBLING_TOLERANCE;
    Ok(DriftEstimates {
        m,
        q,
        m_doubling,
        q_doubling,
    })
}

/// The continuity constant `δ` and the two explicit-constant inequalities,
/// in that order.
pub fn estimate_conv_bounds(ctx: &EstimateContext, trials: usize, seed: u64) -> Vec<EstimateReport> {
    let mut sampler = TrialSampler::new(seed, 3);
    let bound = Some(1.0 + QUADRATURE_SLACK);
    let mut cont = Sup::new();
    let mut h1 = Sup::new();
    let mut h2 = Sup::new();
    for _ in 0..trials {
        let u = ctx.trial_field(&mut sampler);
        let w = || Witness {
            scalars: Vec::new(),
            u: u.clone(),
            v: Vec::new(),
        };
        cont.offer(ctx.cont_ratio(&u), None, w);
        h1.offer(ctx.conv_sup_ratio(&u), bound, w);
        h2.offer(ctx.conv_derivative_ratio(&u), bound, w);
    }
    vec![
        cont.report(report::CONV_GRAPH_BOUND, trials, None),
        h1.report(report::CONV_SUP_BOUND, trials, bound),
        h2.report(report::CONV_DERIVATIVE_BOUND, trials, bound),
    ]
}

/// `|T(t)u|_{D(B)} / |u|_{D(B)}` for band-limited `u` given by coefficients.
pub fn semigroup_db_ratio(basis: &EigenBasis, c: &[f64], t: f64) -> Result<f64> {
    let c = SpectralCoeffs::new(c.to_vec())?;
    let ct = basis.apply_semigroup(&c, t)?;
    Ok(basis.db_norm_spectral(&ct) / basis.db_norm_spectral(&c))
}

/// Uniform bound of `T(t)` on `D(B)`, held against `C₁ = 1`. `t = 0` is
/// always included.
pub fn estimate_semigroup_db_bound(
    basis: &EigenBasis,
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let mut sampler = TrialSampler::new(seed, 4);
    let bound = Some(1.0 + 1e-12);
    let mut sup = Sup::new();
    for _ in 0..trials {
        let c = sampler.band_limited(basis.modes());
        for &t in core::iter::once(&0.0).chain(t_grid) {
            let r = semigroup_db_ratio(basis, c.values(), t)?;
            sup.offer(Some(r), bound, || Witness {
                scalars: vec![t],
                u: c.values().to_vec(),
                v: Vec::new(),
            });
        }
    }
    Ok(sup.report(report::SEMIGROUP_DB_BOUND, trials, bound))
}

/// `‖aₙ(u) − aₙ(v)‖₂ / ‖u − v‖` with `‖·‖₂` the HS norm on `D(B)`-normalized
/// modes.
pub fn lipschitz_hs_ratio(
    basis: &EigenBasis,
    coef: &ApproxCoefficient,
    u: &[f64],
    v: &[f64],
) -> Result<Option<f64>> {
    let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let denom = l2_norm(&diff, basis.grid().dx());
    if denom == 0.0 {
        return Ok(None);
    }
    let m: Vec<f64> = u
        .iter()
        .zip(v)
        .map(|(&a, &b)| coef.eval(a) - coef.eval(b))
        .collect();
    Ok(Some(hs_norm_of_multiplier(&m, basis)? / denom))
}

/// `√(λn)·‖J‖₂`
pub fn lipschitz_hs_bound(basis: &EigenBasis, coef: &ApproxCoefficient) -> Option<f64> {
    coef.lipschitz_constant()
        .map(|l| l * libm::sqrt(embedding_norm_sq(basis)))
}

/// Random pairs with cell values uniform on `[−1/n, 3/n]`, which exercises
/// all three branches of `aₙ`.
pub fn estimate_lipschitz_hs(
    basis: &EigenBasis,
    coef: &ApproxCoefficient,
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let mut sampler = TrialSampler::new(seed, 5);
    let bound = lipschitz_hs_bound(basis, coef).map(|b| b * (1.0 + 1e-12));
    let scale = 1.0 / coef.n as f64;
    let n = basis.grid().cells();
    let mut sup = Sup::new();
    for _ in 0..trials {
        let mut draw = || -> Vec<f64> {
            (0..n)
                .map(|_| scale * (4.0 * sampler.uniform() - 1.0))
                .collect()
        };
        let u = draw();
        let v = draw();
        let r = lipschitz_hs_ratio(basis, coef, &u, &v)?;
        sup.offer(r, bound, || Witness {
            scalars: vec![coef.n as f64, coef.lambda, f64::from(u8::from(coef.continuity_fix))],
            u: u.clone(),
            v: v.clone(),
        });
    }
    Ok(sup.report(report::LIPSCHITZ_HS, trials, bound))
}

/// Re-evaluates the ratio stored in a report's witness.
pub fn replay(report: &EstimateReport, ctx: &EstimateContext) -> Result<f64> {
    let w = &report.witness;
    let need = |r: Option<f64>| r.ok_or_else(|| Error::domain("degenerate witness"));
    match report.name.as_str() {
        report::SMOOTHING => {
            let u = Field::new(*ctx.basis.grid(), w.u.clone())?;
            smoothing_ratio(ctx.basis, &u, scalar(w, 0)?)
        }
        report::DRIFT_LIPSCHITZ => need(ctx.drift_lipschitz_ratio(&w.u, &w.v)),
        report::DRIFT_GROWTH => need(ctx.drift_growth_ratio(&w.u)),
        report::CONV_GRAPH_BOUND => need(ctx.cont_ratio(&w.u)),
        report::CONV_SUP_BOUND => need(ctx.conv_sup_ratio(&w.u)),
        report::CONV_DERIVATIVE_BOUND => need(ctx.conv_derivative_ratio(&w.u)),
        report::SEMIGROUP_DB_BOUND => semigroup_db_ratio(ctx.basis, &w.u, scalar(w, 0)?),
        report::LIPSCHITZ_HS => {
            let coef = ApproxCoefficient::with_fix(
                scalar(w, 0)? as u32,
                scalar(w, 1)?,
                scalar(w, 2)? != 0.0,
            )?;
            need(lipschitz_hs_ratio(ctx.basis, &coef, &w.u, &w.v)?)
        }
        report::HS_EMBEDDING => {
            Ok(hs_embedding_check(scalar(w, 0)?, scalar(w, 1)? as usize)?.empirical_constant)
        }
        other => Err(Error::config(format!("no replay for estimate '{other}'"))),
    }
}

fn scalar(w: &Witness, i: usize) -> Result<f64> {
    w.scalars
        .get(i)
        .copied()
        .ok_or_else(|| Error::config("witness is missing a scalar"))
}
