//! Management infrastructure: token accounting, reservations, the batch
//! queue, experiment lifecycle and log archiving. CLI invocations talk to an
//! on-disk state directory; a single advisory lock serializes mutations.

mod experiment;
mod ledger;
mod playback;
mod queue;
mod reservation;
mod state;

pub use experiment::{
    collect_logs, run_experiment, verify_manifest, ExperimentOutcome, ExperimentSpec, Manifest,
    ManifestEntry,
};
pub use ledger::{TeamAccount, TokenLedger, WEEK_SECONDS};
pub use playback::ScenarioPlayer;
pub use queue::{JobRecord, JobState, Orchestrator, OrchestratorConfig, TickReport};
pub use reservation::{Reservation, ReservationState};
pub use state::StateLock;

use thiserror::Error;

use crate::channel::ChannelError;
use crate::radio::RadioError;
use crate::scenario::ScenarioError;
use crate::traffic::TrafficError;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("unknown team {team:?}")]
    UnknownTeam { team: String },
    #[error("insufficient tokens for team {team}: balance {balance}, need {needed}")]
    InsufficientTokens {
        team: String,
        balance: f64,
        needed: f64,
    },
    #[error("insufficient free nodes: requested {requested}, {free} free of {pool}")]
    InsufficientNodes {
        requested: usize,
        free: usize,
        pool: usize,
    },
    #[error("validation: {0}")]
    Validation(String),
    #[error("unknown job {id:?}")]
    UnknownJob { id: String },
    #[error("experiment {id} is already archived; archives are immutable")]
    AlreadyArchived { id: String },
    #[error("archiving {id} failed (source logs retained): {source}")]
    ArchiveFailed { id: String, source: std::io::Error },
    #[error("runtime failure: {0}")]
    Runtime(String),
    #[error("state directory is locked by another process")]
    Locked,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
