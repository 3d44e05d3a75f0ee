//! Batch drivers: episode runs, market validation statistics, the credit
//! sweep, and the stdio environment server.

mod market_stats;
mod run;
mod server;
mod sweep;

pub use market_stats::{configured_tiers, market_trace, validate_market, MarketStatsReport, MarketTrace, MIN_VALIDATION_STEPS};
pub use run::{run_episode, run_episodes, EpisodeResult, RunOptions, RunSummary, TrajectoryLine};
pub use server::{env_server, observation_spec, SpaceSpec, SpecResponse};
pub use sweep::{sweep_credit, write_frontier_csv, FrontierPoint, DEFAULT_SWEEP_LEVELS};

use crate::env::EnvError;
use crate::policy::PolicyError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}
