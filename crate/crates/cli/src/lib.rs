//! Configuration, file formats, manifests, ensembles and commands for the
//! `phytospde` tool.

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod io;
pub mod manifest;

pub use config::{parse_config, parse_config_str, ConfigDoc, ConfigError, RunConfig};
pub use ensemble::{run_ensemble, EnsembleOptions, EnsembleOutcome};
pub use io::{read_snapshot, write_snapshot, write_timeseries, OutputKind, OutputRecord};
pub use manifest::RunManifest;
