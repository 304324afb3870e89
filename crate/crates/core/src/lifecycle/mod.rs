//! Hashtag lifecycle: per-minute series, the trigger/burst/off-burst/death
//! machine, the streaming engine over many hashtags, ground-truth labels and
//! lifecycle statistics.

mod engine;
mod labels;
mod machine;
mod state;
mod stats;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engine::{run_engine, EndOfStream, Engine, EngineConfig, EngineOutput};
pub use labels::{label_instance, outcomes_from_events, CycleOutcome, InstanceLabels};
pub use machine::{
    burst_threshold, check_trigger, replay_series, Episode, EventKind, LifecycleMachine, LifecycleParams, Phase,
    TimeSeries, Transition,
};
pub use state::{AdopterStats, CycleAccumulators, CycleSummary, HashtagSnapshot, HashtagState};
pub use stats::{lifecycle_statistics, CheckpointStats, DEFAULT_CHECKPOINTS};

#[derive(Debug, Error)]
pub enum LifecycleError {
    #[error("minute {minute} arrived after minute {last} was finalized")]
    OutOfOrder { minute: i64, last: i64 },
    #[error("minute {minute} finalized twice")]
    DuplicateMinute { minute: i64 },
    #[error("invalid lifecycle parameters: {0}")]
    InvalidParams(String),
    #[error("cycle {cycle} of '{key}' is not resolved yet: {what}")]
    NotResolved { key: String, cycle: u32, what: &'static str },
    #[error("no bursting hashtags in the event log; ratios are undefined")]
    NoBurstingHashtags,
}

/// One line of the append-only event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifecycleEvent {
    pub key: String,
    pub cycle: u32,
    pub kind: EventKind,
    pub minute: i64,
    pub emitted_at: i64,
    pub trigger_minute: i64,
    pub c1: u32,
    pub threshold: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tbb: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tra: Option<i64>,
}

impl LifecycleEvent {
    pub fn from_transition(key: &str, t: Transition) -> Self {
        LifecycleEvent {
            key: key.to_string(),
            cycle: t.cycle,
            kind: t.kind,
            minute: t.minute,
            emitted_at: t.emitted_at,
            trigger_minute: t.trigger_minute,
            c1: t.c1,
            threshold: t.threshold,
            tbb: t.tbb,
            tra: t.tra,
        }
    }
}
