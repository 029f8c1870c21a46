//! Experiment orchestration: configuration, seeded sweeps and CSV output.

mod config;
mod output;
mod run;

use thiserror::Error;

use crate::bounds::BoundsError;
use crate::deployment::LatticeError;
use crate::phy::PhyError;
use crate::pilotcode::CodeError;
use crate::serving::ServingError;

pub use config::{Assignment, ExperimentConfig, Scenario, SEED_ENV};
pub use output::{emit_csv, write_csv, CSV_HEADER};
pub use run::{run_experiment, sites_to_match, Axes, ResultRow, SitesMatch};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("could not parse config: {0}")]
    Parse(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Serving(#[from] ServingError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}
