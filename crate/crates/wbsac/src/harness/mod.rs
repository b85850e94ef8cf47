//! Experiment orchestration: seeded train/evaluate loops, per-seed and
//! aggregate CSV emission, plots and heatmaps, plus the numeric
//! verification suites behind the `verify` CLI command.

mod config;
mod plot;
mod runner;
pub mod verify;

pub use config::{AgentKindId, EnvId, ExperimentConfig};
pub use plot::{render_line_plot, Series};
pub use runner::{
    aggregate_seeds, moving_average, run_experiment, AggregateRow, EvalRow, RunRecord, SeedRecord,
};

use thiserror::Error;

use crate::agents::AgentError;
use crate::envs::EnvError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown environment id {0:?} (expected \"maze\" or \"point-mass\")")]
    UnknownEnv(String),
    #[error("unknown agent kind {0:?} (expected \"wbsac\", \"sac\", or \"wbsac-fixed\")")]
    UnknownAgent(String),
    #[error("checkpoint not found or unreadable: {0}")]
    MissingCheckpoint(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("i/o error at {path}: {message}")]
    Io { path: String, message: String },
    #[error("misaligned evaluation steps across seeds")]
    MisalignedSteps,
}

impl HarnessError {
    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
