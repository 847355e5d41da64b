//! Experiment orchestration: config ingestion, load and distance sweeps,
//! figure tables, sim-vs-analytic validation, and CSV/manifest output.

mod commands;
mod config;
mod figures;
mod output;
mod validate;

use thiserror::Error;

use crate::cluster::ClusterError;
use crate::interference::InterferenceError;
use crate::queuing::QueuingError;
use crate::sim::SimError;

pub use commands::{analyze, figures, rf, simulate, validate_command, Outcome};
pub use config::{
    parse_config, ClusterConfig, DistanceSweep, GeometryConfig, LoadGrid, OutputConfig, RfConfig,
    ScenarioConfig, SimulationConfig, TrafficConfig, FIGURES,
};
pub use figures::{
    analysis_table, analytic_borrowing, analytic_point, rf_occupancy, rf_sweep, run_figure,
    simulate_point, simulation_table, LoadMetrics, LoadPoint, SimulatedPoint,
};
pub use output::{Manifest, Table};
pub use validate::{validate, validate_with_fault, InvariantSuite, PointValidation, ValidationReport};

/// Process exit status for success.
pub const EXIT_OK: i32 = 0;
/// Process exit status when a check or run fails.
pub const EXIT_FAILED: i32 = 1;
/// Process exit status for unusable configuration or arguments.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config field `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid {field}: violates {rule}")]
    Invalid { field: String, rule: String },
    #[error("unknown figure {0}; expected one of 9, 10, 11, 12, 13, 14")]
    UnknownFigure(u32),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Queuing(#[from] QueuingError),
    #[error(transparent)]
    Interference(#[from] InterferenceError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

impl ScenarioError {
    pub(crate) fn invalid(field: &str, rule: &str) -> Self {
        ScenarioError::Invalid {
            field: field.into(),
            rule: rule.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        ScenarioError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Schema { .. }
            | ScenarioError::Invalid { .. }
            | ScenarioError::UnknownFigure(_)
            | ScenarioError::Usage(_)
            | ScenarioError::Io { .. } => EXIT_CONFIG,
            _ => EXIT_FAILED,
        }
    }
}
