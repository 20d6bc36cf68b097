//! Independent realizations over consecutive stream ids, run on a worker
//! pool and merged in stream order.

use phytospde_core::diagnostics::holder::HolderSpec;
use phytospde_core::diagnostics::tightness::{convolution_grr, convolution_holder_norm};
use phytospde_core::diagnostics::qv_check;
use phytospde_core::stats::{mean, standard_error};
use phytospde_core::solver::simulate;
use phytospde_core::SolverConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::Table;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub stream_id: u64,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub mass_drift: f64,
    pub min_positivity: f64,
    pub qv_ratio: Option<f64>,
    /// Discrete `C^δ̄` norm of the stochastic convolution in `D(B)`.
    pub holder_norm: Option<f64>,
    pub grr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberFailure {
    pub stream_id: u64,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleOptions {
    pub members: usize,
    pub workers: usize,
    /// Used for the stochastic-convolution statistics when recorded.
    pub holder: HolderSpec,
}

impl EnsembleOptions {
    pub fn new(members: usize, workers: usize) -> Self {
        Self {
            members,
            workers,
            holder: HolderSpec {
                gamma: 0.6,
                delta_bar: 0.2,
                eta: 0.4,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanWithError {
    pub mean: f64,
    pub standard_error: f64,
    pub count: usize,
}

impl MeanWithError {
    pub fn of(values: &[f64]) -> Self {
        Self {
            mean: mean(values),
            standard_error: standard_error(values),
            count: values.len(),
        }
    }

    /// `|mean| / standard_error`
    pub fn z_score(&self) -> f64 {
        self.mean.abs() / self.standard_error
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub members: usize,
    pub failures: Vec<MemberFailure>,
    pub mass_drift: MeanWithError,
    pub qv_ratio: Option<MeanWithError>,
    pub holder_norm: Option<MeanWithError>,
    pub grr: Option<MeanWithError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleOutcome {
    /// Successful members in stream order.
    pub members: Vec<MemberSummary>,
    pub summary: EnsembleSummary,
}

impl EnsembleOutcome {
    pub fn failed(&self) -> bool {
        !self.summary.failures.is_empty()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "stream_id",
            "initial_mass",
            "final_mass",
            "mass_drift",
            "min_positivity",
            "qv_ratio",
            "holder_norm",
            "grr",
        ]);
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        for m in &self.members {
            t.push(vec![
                m.stream_id as f64,
                m.initial_mass,
                m.final_mass,
                m.mass_drift,
                m.min_positivity,
                nan(m.qv_ratio),
                nan(m.holder_norm),
                nan(m.grr),
            ]);
        }
        t
    }
}

/// One realization on stream `stream_id`.
pub fn run_member(cfg: &SolverConfig, stream_id: u64, holder: &HolderSpec) -> Result<MemberSummary, String> {
    let mut cfg = cfg.clone();
    cfg.noise = cfg.noise.with_stream(stream_id);
    let traj = simulate(&cfg).map_err(|e| e.to_string())?;
    let initial_mass = traj.mass[0];
    let final_mass = *traj.mass.last().expect("at least one row");
    let qv_ratio = match traj.martingale {
        Some(_) => Some(qv_check(&traj, 0.0).map_err(|e| e.to_string())?.ratio),
        None => None,
    };
    let (holder_norm, grr) = if traj.stochastic_convolution.is_some() {
        let basis = cfg.basis().map_err(|e| e.to_string())?;
        let h = convolution_holder_norm(&traj, &basis, holder.delta_bar).map_err(|e| e.to_string())?;
        let g = convolution_grr(&traj, &basis, holder).map_err(|e| e.to_string())?;
        (Some(h.total()), Some(g))
    } else {
        (None, None)
    };
    Ok(MemberSummary {
        stream_id,
        initial_mass,
        final_mass,
        mass_drift: final_mass - initial_mass,
        min_positivity: traj.positivity.iter().cloned().fold(1.0, f64::min),
        qv_ratio,
        holder_norm,
        grr,
    })
}

/// Merges member results, in any order, into stream order.
pub fn reduce(mut results: Vec<Result<MemberSummary, MemberFailure>>) -> EnsembleOutcome {
    results.sort_by_key(|r| match r {
        Ok(m) => m.stream_id,
        Err(f) => f.stream_id,
    });
    let mut members = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(m) => members.push(m),
            Err(f) => failures.push(f),
        }
    }
    let collect = |f: fn(&MemberSummary) -> Option<f64>| -> Option<MeanWithError> {
        let v: Vec<f64> = members.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| MeanWithError::of(&v))
    };
    let drift: Vec<f64> = members.iter().map(|m| m.mass_drift).collect();
    let summary = EnsembleSummary {
        members: members.len() + failures.len(),
        failures,
        mass_drift: MeanWithError::of(&drift),
        qv_ratio: collect(|m| m.qv_ratio),
        holder_norm: collect(|m| m.holder_norm),
        grr: collect(|m| m.grr),
    };
    EnsembleOutcome { members, summary }
}

/// Runs streams `cfg.noise.stream_id + i` for `i < members` on `workers`
/// threads.
pub fn run_ensemble(cfg: &SolverConfig, opts: &EnsembleOptions) -> Result<EnsembleOutcome, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| e.to_string())?;
    let base = cfg.noise.stream_id;
    let results = pool.install(|| {
        (0..opts.members as u64)
            .into_par_iter()
            .map(|i| {
                let stream_id = base + i;
                run_member(cfg, stream_id, &opts.holder).map_err(|message| MemberFailure {
                    stream_id,
                    message,
                })
            })
            .collect()
    });
    Ok(reduce(results))
}
