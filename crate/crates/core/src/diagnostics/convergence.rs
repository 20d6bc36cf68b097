//! Convergence in the approximation index `n` on common noise, and strong
//! self-convergence in `dt`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::l2_norm;
use crate::noise::{ApproxCoefficient, NoisePath};
use crate::solver::{simulate_on_path, Trajectory, SolverConfig, SolverMode, Stepper};
use crate::stats::mean;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub n_list: Vec<u32>,
    /// `d[a][b] = sup_t ‖u_{n_a}(t) − u_{n_b}(t)‖`, symmetric.
    pub distances: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.distances[a][b]
    }

    /// `d(n_i, n_{i+1})` along the list.
    pub fn successive(&self) -> Vec<f64> {
        (1..self.n_list.len())
            .map(|i| self.distances[i - 1][i])
            .collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.successive().windows(2).all(|w| w[1] < w[0])
    }

    /// Each successive distance is smaller than the one before, or both are
    /// zero because the approximations already coincide on the path.
    pub fn decreasing_until_equal(&self) -> bool {
        self.successive()
            .windows(2)
            .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
    }
}

/// Runs one trajectory per `n` in lockstep on the same increments drawn from
/// `base.noise`.
pub fn convergence_in_n(base: &SolverConfig, n_list: &[u32]) -> Result<ConvergenceTable> {
    if n_list.len() < 2 {
        return Err(Error::config("at least two values of n required"));
    }
    base.validate()?;
    let cfgs: Vec<SolverConfig> = n_list
        .iter()
        .map(|&n| {
            let coefficient = ApproxCoefficient::with_fix(
                n,
                base.coefficient.lambda,
                base.coefficient.continuity_fix,
            )?;
            Ok(SolverConfig {
                coefficient,
                ..base.clone()
            })
        })
        .collect::<Result<_>>()?;
    let basis = base.basis()?;
    let grid = *base.grid();
    let dx = grid.dx();
    let mut steppers: Vec<Stepper> = cfgs.iter().map(|c| Stepper::new(c, &basis)).collect();
    let p = n_list.len();
    let u0 = base.params.u0.values();
    let mut c0 = vec![0.0; basis.modes()];
    basis.project_into(u0, &mut c0);
    let mut states = vec![c0; p];
    let mut fields = vec![u0.to_vec(); p];
    let mut distances = vec![vec![0.0; p]; p];
    let mut stream = base.noise.stream();
    let mut xi = vec![0.0; grid.cells()];
    let sd = libm::sqrt(base.dt / dx);
    let noisy = steppers.iter().any(|s| s.noisy());
    let mut diff = vec![0.0; grid.cells()];
    for step in 0..base.steps() {
        if noisy {
            stream.fill(sd, &mut xi);
        }
        for ((stepper, c), u) in steppers.iter_mut().zip(&mut states).zip(&mut fields) {
            stepper.advance(c, u, noisy.then_some(&xi[..]), None);
            basis.synthesize_into(c, u);
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp {
                    step: step + 1,
                    partial: Box::new(Trajectory::empty(grid, base.dt)),
                });
            }
        }
        for a in 0..p {
            for b in 0..a {
                for ((d, x), y) in diff.iter_mut().zip(&fields[a]).zip(&fields[b]) {
                    *d = x - y;
                }
                let e = l2_norm(&diff, dx);
                if e > distances[a][b] {
                    distances[a][b] = e;
                    distances[b][a] = e;
                }
            }
        }
    }
    Ok(ConvergenceTable {
        n_list: n_list.to_vec(),
        distances,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfConvergence {
    pub dt: f64,
    /// Mean over paths of `sup_t ‖u_dt − u_ref‖` at the checkpoints.
    pub error_coarse: f64,
    /// The same at `dt/2`.
    pub error_fine: f64,
    pub ratio: f64,
    pub paths: usize,
}

/// Strong errors at `dt` and `dt/2` against a reference at `dt/8`, all on
/// Brownian increments of one fine path. Stochastic runs average over
/// `paths` streams starting at `cfg.noise.stream_id`.
pub fn self_convergence(cfg: &SolverConfig, paths: usize, checkpoints: usize) -> Result<SelfConvergence> {
    cfg.validate()?;
    if paths == 0 || checkpoints == 0 {
        return Err(Error::config("paths and checkpoints must be positive"));
    }
    let steps = cfg.steps();
    if !steps.is_multiple_of(checkpoints) {
        return Err(Error::config("checkpoints must divide the step count"));
    }
    let every = steps / checkpoints;
    let level = |factor: usize| SolverConfig {
        dt: cfg.dt / factor as f64,
        snapshot_every: every * factor,
        ..cfg.clone()
    };
    let levels = [level(1), level(2), level(8)];
    let paths = if cfg.active_coefficient().is_none() || cfg.mode == SolverMode::Deterministic {
        1
    } else {
        paths
    };
    let mut coarse = Vec::with_capacity(paths);
    let mut fine = Vec::with_capacity(paths);
    for p in 0..paths {
        let spec = cfg.noise.with_stream(cfg.noise.stream_id + p as u64);
        let finest = NoisePath::generate(spec, *cfg.grid(), levels[2].dt, 8 * steps)?;
        let reference = simulate_on_path(&levels[2], &finest)?;
        let run = |lvl: &SolverConfig, factor: usize| -> Result<Trajectory> {
            simulate_on_path(lvl, &finest.coarsen(factor)?)
        };
        coarse.push(snapshot_error(&run(&levels[0], 8)?, &reference));
        fine.push(snapshot_error(&run(&levels[1], 4)?, &reference));
    }
    let error_coarse = mean(&coarse);
    let error_fine = mean(&fine);
    Ok(SelfConvergence {
        dt: cfg.dt,
        error_coarse,
        error_fine,
        ratio: error_coarse / error_fine,
        paths,
    })
}

fn snapshot_error(a: &Trajectory, b: &Trajectory) -> f64 {
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| x.difference(y).map(|d| d.l2_norm()).unwrap_or(f64::NAN))
        .fold(0.0, f64::max)
}
