//! Scenario-driven end-to-end simulation and the latency budget model.

mod report;
mod run;
mod scenario;
mod timing;

pub use report::{render_summary, LatencySummary, SimReport, StageSource, StageSources};
pub use report::{BroadcastEvent, DriverWarningEvent, ReceiverAlert};
pub use run::{run, synthetic_frame};
pub use scenario::{
    load_scenario, EgoSpec, PoseSample, Scenario, ScenarioFile, SensorSpec, StationSpec,
    TimingMode, DEFAULT_EGO_STATION_ID, DEFAULT_FRAME_PERIOD_MS,
};
pub use timing::{
    check_budgets, median, BudgetReport, FrameTiming, LatencyStats, Stage, StageTimings, Violation,
    TOTAL_MAX_US, TOTAL_TARGET_US,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::detection::ReplayError;
use crate::v2x::{RadioError, TransportError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("scenario parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("scenario invariant violated: {0}")]
    Invariant(String),
    #[error("referenced file not found: {0}")]
    MissingFile(PathBuf),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

/// Setup failures. Failures after the first frame produce a partial report
/// instead.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}
