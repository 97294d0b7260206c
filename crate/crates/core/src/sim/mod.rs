//! Scenario-driven simulation of the distributed scheme.

mod disturbance;
mod run;
pub mod scenario;
mod summary;
mod sweep;
mod trace;

pub use disturbance::{kinematic_tracker_step, DisturbanceModel, Measurement};
pub use run::{run, SimFailure};
pub use scenario::{apply_override, Scenario};
pub use summary::{scenario_digest, RunSummary, TimingSummary};
pub use sweep::{check_trends, sweep, write_sweep_csv, SweepAxes, SweepCell, TrendCheck};
pub use trace::{consensus_time, corridor_metrics, CorridorMetrics, SimTrace, StepMetrics, TraceRow};

use thiserror::Error;

use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario schema: {0}")]
    Schema(String),
    #[error("scenario field `{0}`: {1}")]
    Field(String, String),
    #[error("override: {0}")]
    Override(String),
    #[error("agent {agent}: initial rate deviation {rate} outside [{min}, {max}]")]
    InfeasibleInit {
        agent: usize,
        rate: f64,
        min: f64,
        max: f64,
    },
    #[error("step {step}, agent {agent}: {source}")]
    Solver {
        step: u64,
        agent: usize,
        #[source]
        source: SolverError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<crate::mission::MissionError> for SimError {
    fn from(e: crate::mission::MissionError) -> Self {
        SimError::Field("trajectories".into(), e.to_string())
    }
}
