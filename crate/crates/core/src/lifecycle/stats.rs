//! Lifecycle statistics over bursting cycles: the share that have burst,
//! gone off-burst, or died by a given offset from their trigger.

use serde::{Deserialize, Serialize};

use super::labels::outcomes_from_events;
use super::{LifecycleError, LifecycleEvent};

/// 5min, 15min, 30min, 1h, 3h, 6h, 24h, 48h.
pub const DEFAULT_CHECKPOINTS: [u32; 8] = [5, 15, 30, 60, 180, 360, 1440, 2880];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub checkpoint_minutes: u32,
    pub bursting_cycles: usize,
    pub already_burst: f64,
    pub off_burst: f64,
    pub dead: f64,
}

/// Ratios are over cycles that burst at all. A moment counts once
/// `moment - trigger <= checkpoint`.
pub fn lifecycle_statistics(
    events: &[LifecycleEvent],
    checkpoints: &[u32],
) -> Result<Vec<CheckpointStats>, LifecycleError> {
    let bursting: Vec<_> = outcomes_from_events(events)
        .into_values()
        .filter(|o| o.onset.is_some())
        .collect();
    if bursting.is_empty() {
        return Err(LifecycleError::NoBurstingHashtags);
    }
    let n = bursting.len() as f64;
    let share = |cp: u32, f: &dyn Fn(&super::CycleOutcome) -> Option<i64>| {
        bursting
            .iter()
            .filter(|o| f(o).is_some_and(|m| m - o.trigger_minute <= cp as i64))
            .count() as f64
            / n
    };
    Ok(checkpoints
        .iter()
        .map(|&cp| CheckpointStats {
            checkpoint_minutes: cp,
            bursting_cycles: bursting.len(),
            already_burst: share(cp, &|o| o.onset),
            off_burst: share(cp, &|o| o.offburst),
            dead: share(cp, &|o| o.death),
        })
        .collect())
}
