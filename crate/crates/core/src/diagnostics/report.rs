//! Empirical-constant reports and their replay.

use alloc::string::String;
use alloc::vec::Vec;

pub const SMOOTHING: &str = "smoothing";
pub const DRIFT_LIPSCHITZ: &str = "drift_lipschitz";
pub const DRIFT_GROWTH: &str = "drift_growth";
pub const CONV_GRAPH_BOUND: &str = "conv_graph_bound";
pub const CONV_SUP_BOUND: &str = "conv_sup_bound";
pub const CONV_DERIVATIVE_BOUND: &str = "conv_derivative_bound";
pub const SEMIGROUP_DB_BOUND: &str = "semigroup_db_bound";
pub const LIPSCHITZ_HS: &str = "lipschitz_hs";
pub const HS_EMBEDDING: &str = "hs_embedding";

/// Input that attains a report's empirical constant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Witness {
    pub scalars: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    /// Max of the tested ratio over all trials.
    pub empirical_constant: f64,
    pub trials: usize,
    pub witness: Witness,
    /// Analytic bound (slack included) the ratio is held against, if any.
    pub bound: Option<f64>,
    pub violations: usize,
    pub passed: bool,
}

impl EstimateReport {
    pub fn new(
        name: &str,
        empirical_constant: f64,
        trials: usize,
        witness: Witness,
        bound: Option<f64>,
        violations: usize,
    ) -> Self {
        let within = bound.is_none_or(|b| empirical_constant <= b);
        Self {
            name: name.into(),
            empirical_constant,
            trials,
            witness,
            bound,
            violations,
            passed: violations == 0 && within && empirical_constant.is_finite(),
        }
    }
}
