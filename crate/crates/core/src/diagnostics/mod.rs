//! Empirical verification of the a priori estimates, tightness functionals,
//! quadratic variation and convergence studies.

pub mod convergence;
pub mod estimates;
pub mod holder;
pub mod qv;
pub mod report;
pub mod tightness;
pub mod trial;

pub use convergence::{convergence_in_n, self_convergence, ConvergenceTable, SelfConvergence};
pub use estimates::{replay, EstimateContext};
pub use holder::{grr_bound_check, grr_functional, holder_norm_estimate, HolderSpec, PathMetric, ScalarPath, SpectralPath};
pub use qv::{qv_check, QvReport};
pub use report::{EstimateReport, Witness};
pub use tightness::{tail_profile, TailProfile};
pub use trial::TrialSampler;
