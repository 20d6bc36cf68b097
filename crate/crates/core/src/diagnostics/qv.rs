//! Realized against predicted quadratic variation of the martingale part.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::solver::Trajectory;
use crate::stats::{mean, pairwise_sum};

#[derive(Clone, Debug, PartialEq)]
pub struct QvReport {
    pub realized: f64,
    pub predicted: f64,
    /// `realized / predicted`, and 1 when both vanish.
    pub ratio: f64,
    /// Mean of the per-cell ratios over cells with positive prediction.
    pub cell_mean_ratio: f64,
    pub cells_used: usize,
    pub passed: bool,
}

/// Compares `Σ (aₙ ξ)²` with `Σ aₙ² dt/dx`, integrated over the grid.
pub fn qv_check(traj: &Trajectory, tol: f64) -> Result<QvReport> {
    let m = traj
        .martingale
        .as_ref()
        .ok_or_else(|| Error::config("trajectory has no martingale record"))?;
    let realized = pairwise_sum(&m.realized_qv);
    let predicted = pairwise_sum(&m.predicted_qv);
    let ratio = if predicted > 0.0 {
        realized / predicted
    } else if realized == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    let cell_ratios: Vec<f64> = m
        .realized_qv
        .iter()
        .zip(&m.predicted_qv)
        .filter(|(_, &p)| p > 0.0)
        .map(|(r, p)| r / p)
        .collect();
    let cell_mean_ratio = if cell_ratios.is_empty() {
        ratio
    } else {
        mean(&cell_ratios)
    };
    Ok(QvReport {
        realized,
        predicted,
        ratio,
        cell_mean_ratio,
        cells_used: cell_ratios.len(),
        passed: (ratio - 1.0).abs() <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, SpatialGrid};
    use crate::model::ModelParams;
    use crate::noise::{ApproxCoefficient, NoiseSpec};
    use crate::solver::{simulate, RecordOptions, SolverConfig, SolverMode};

    fn config(lambda: f64, u0: f64, record: bool) -> SolverConfig {
        let g = SpatialGrid::new(1.0, 64).unwrap();
        SolverConfig {
            params: ModelParams::new(1.0, lambda, None, Field::constant(g, u0)).unwrap(),
            coefficient: ApproxCoefficient::new(16, lambda).unwrap(),
            dt: 1e-4,
            t_end: 0.05,
            modes: 32,
            noise: NoiseSpec::new(5, 0),
            snapshot_every: 100,
            mode: SolverMode::ExponentialEuler,
            record: RecordOptions {
                martingale: record,
                stochastic_convolution: false,
            },
        }
    }

    #[test]
    fn missing_record_is_an_error() {
        let traj = simulate(&config(1.0, 1.0, false)).unwrap();
        assert!(matches!(qv_check(&traj, 0.1), Err(Error::Config(_))));
    }

    #[test]
    fn zero_noise_has_unit_ratio() {
        let traj = simulate(&config(0.0, 1.0, true)).unwrap();
        let r = qv_check(&traj, 1e-12).unwrap();
        assert_eq!((r.realized, r.predicted, r.ratio), (0.0, 0.0, 1.0));
        assert!(r.passed);
    }

    #[test]
    fn ratio_is_near_one() {
        // 500 steps on 64 cells: relative sd about √(2/32000)
        let traj = simulate(&config(0.5, 1.0, true)).unwrap();
        let r = qv_check(&traj, 0.05).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.cell_mean_ratio - 1.0).abs() < 0.1);
        assert_eq!(r.cells_used, 64);
    }
}
