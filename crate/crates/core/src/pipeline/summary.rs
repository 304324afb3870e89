//! Lifecycle statistics of one detected stream: checkpoint ratios, the
//! per-stage class balance, and agreement with a generator truth file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::label_snapshots;
use crate::evaluation::{stage_tag, stats_markdown};
use crate::features::Task;
use crate::lifecycle::{
    lifecycle_statistics, outcomes_from_events, CheckpointStats, HashtagSnapshot, LifecycleError, LifecycleEvent,
    DEFAULT_CHECKPOINTS,
};
use crate::synth::TruthRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBalance {
    pub stage: u32,
    /// Labeled Task 1 instances.
    pub eligible: usize,
    pub positives: usize,
}

impl StageBalance {
    pub fn share(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.positives as f64 / self.eligible as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthCheck {
    pub truth_records: usize,
    pub detected_cycles: usize,
    /// One line per disagreement.
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleSummary {
    pub triggered_cycles: usize,
    pub bursting_cycles: usize,
    /// Empty when nothing burst.
    pub checkpoints: Vec<CheckpointStats>,
    pub class_balance: Vec<StageBalance>,
    pub truth: Option<TruthCheck>,
}

pub fn class_balance(snapshots: &[HashtagSnapshot], events: &[LifecycleEvent], stages: &[u32]) -> Vec<StageBalance> {
    let outcomes = outcomes_from_events(events);
    let mut by_stage: BTreeMap<u32, StageBalance> = stages
        .iter()
        .map(|&s| {
            (
                s,
                StageBalance {
                    stage: s,
                    eligible: 0,
                    positives: 0,
                },
            )
        })
        .collect();
    for l in label_snapshots(snapshots, &outcomes) {
        let Some(labels) = l.labels else { continue };
        if !l.eligible(Task::Burst) {
            continue;
        }
        if let Some(b) = by_stage.get_mut(&l.snapshot.stage_minutes) {
            b.eligible += 1;
            b.positives += labels.burst as usize;
        }
    }
    by_stage.into_values().collect()
}

/// Compares detected cycles with a truth file whose hashtags each have a
/// single planted cycle. Every triggered cycle must appear in the truth and
/// every truth record must be detected with the same four moments.
pub fn compare_truth(events: &[LifecycleEvent], truth: &[TruthRecord]) -> TruthCheck {
    let outcomes = outcomes_from_events(events);
    let mut mismatches = Vec::new();
    let by_key: BTreeMap<&str, &TruthRecord> = truth.iter().map(|t| (t.key.as_str(), t)).collect();
    for ((key, cycle), o) in &outcomes {
        match by_key.get(key.as_str()) {
            None => mismatches.push(format!("{key} cycle {cycle}: detected but not in the truth file")),
            Some(_) if *cycle > 0 => mismatches.push(format!("{key}: unplanted cycle {cycle}")),
            Some(t) => {
                let detected = (o.trigger_minute, o.onset, o.offburst, o.death);
                let expected = (t.trigger_min, t.burst_min, t.offburst_min, Some(t.death_min));
                if detected != expected {
                    mismatches.push(format!(
                        "{key}: detected (trigger, onset, off-burst, death) {detected:?}, truth {expected:?}"
                    ));
                }
            }
        }
    }
    for t in truth {
        if !outcomes.contains_key(&(t.key.clone(), 0)) {
            mismatches.push(format!("{}: in the truth file but never triggered", t.key));
        }
    }
    TruthCheck {
        truth_records: truth.len(),
        detected_cycles: outcomes.len(),
        mismatches,
    }
}

pub fn summarize(
    snapshots: &[HashtagSnapshot],
    events: &[LifecycleEvent],
    stages: &[u32],
    truth: Option<&[TruthRecord]>,
) -> Result<LifecycleSummary, LifecycleError> {
    let outcomes = outcomes_from_events(events);
    let checkpoints = match lifecycle_statistics(events, &DEFAULT_CHECKPOINTS) {
        Ok(c) => c,
        Err(LifecycleError::NoBurstingHashtags) => Vec::new(),
        Err(e) => return Err(e),
    };
    Ok(LifecycleSummary {
        triggered_cycles: outcomes.len(),
        bursting_cycles: outcomes.values().filter(|o| o.onset.is_some()).count(),
        checkpoints,
        class_balance: class_balance(snapshots, events, stages),
        truth: truth.map(|t| compare_truth(events, t)),
    })
}

impl LifecycleSummary {
    pub fn to_markdown(&self) -> String {
        let mut s = if self.checkpoints.is_empty() {
            String::from("# Lifecycle statistics\n\nNo hashtag burst; ratios are undefined.\n")
        } else {
            stats_markdown(&self.checkpoints)
        };
        let _ = writeln!(
            s,
            "\nTriggered cycles: {}, bursting: {}\n\n## Class balance\n\n| stage | instances | positive share |\n|---|---:|---:|",
            self.triggered_cycles, self.bursting_cycles
        );
        for b in &self.class_balance {
            let share = b.share().map_or("n/a".to_string(), |p| format!("{:.2}%", 100.0 * p));
            let _ = writeln!(s, "| {} | {} | {} |", stage_tag(b.stage), b.eligible, share);
        }
        if let Some(t) = &self.truth {
            let _ = writeln!(
                s,
                "\n## Truth check\n\n{} truth records, {} detected cycles, {} mismatches",
                t.truth_records,
                t.detected_cycles,
                t.mismatches.len()
            );
            for m in &t.mismatches {
                let _ = writeln!(s, "- {m}");
            }
        }
        s
    }
}
