//! Ground-truth labels recovered from the event log.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::machine::EventKind;
use super::{LifecycleError, LifecycleEvent};

/// What happened to one (key, cycle) episode, as far as the log tells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleOutcome {
    pub key: String,
    pub cycle: u32,
    pub trigger_minute: i64,
    pub c1: u32,
    pub threshold: u32,
    pub onset: Option<i64>,
    pub offburst: Option<i64>,
    pub labeled_negative: Option<i64>,
    pub death: Option<i64>,
}

impl CycleOutcome {
    /// Whether the burst/no-burst outcome is known.
    pub fn burst_resolved(&self) -> bool {
        self.onset.is_some() || self.labeled_negative.is_some()
    }

    pub fn is_bursting_cycle(&self) -> bool {
        self.onset.is_some()
    }

    /// Not yet burst at `t_p` (the hashtag is still a burst candidate).
    pub fn task1_eligible(&self, t_p: i64) -> bool {
        self.onset.is_none_or(|o| o > t_p)
    }

    /// Will burst, but has not burst at `t_p`.
    pub fn task2_eligible(&self, t_p: i64) -> bool {
        self.onset.is_some_and(|o| o > t_p)
    }

    /// Bursting at `t_p`: `onset <= t_p < offburst`.
    pub fn task3_eligible(&self, t_p: i64) -> bool {
        match (self.onset, self.offburst) {
            (Some(o), Some(off)) => o <= t_p && t_p < off,
            (Some(o), None) => o <= t_p,
            _ => false,
        }
    }
}

/// Folds an event log into per-cycle outcomes keyed by (key, cycle).
pub fn outcomes_from_events(events: &[LifecycleEvent]) -> BTreeMap<(String, u32), CycleOutcome> {
    let mut out: BTreeMap<(String, u32), CycleOutcome> = BTreeMap::new();
    for e in events {
        let o = out.entry((e.key.clone(), e.cycle)).or_insert_with(|| CycleOutcome {
            key: e.key.clone(),
            cycle: e.cycle,
            trigger_minute: e.trigger_minute,
            c1: e.c1,
            threshold: e.threshold,
            onset: None,
            offburst: None,
            labeled_negative: None,
            death: None,
        });
        match e.kind {
            EventKind::Triggered => {
                o.trigger_minute = e.minute;
                o.c1 = e.c1;
                o.threshold = e.threshold;
            }
            EventKind::BurstOnset => o.onset = Some(e.minute),
            EventKind::LabeledNegative => o.labeled_negative = Some(e.minute),
            EventKind::OffBurst => o.offburst = Some(e.minute),
            EventKind::Death => o.death = Some(e.minute),
        }
    }
    out
}

/// Labels of one prediction instance at minute `t_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceLabels {
    /// The cycle bursts (at any time within its horizon).
    pub burst: bool,
    /// Minutes from `t_p` to onset, clamped to at least 1; set when
    /// `t_p <= onset`.
    pub tbb: Option<i64>,
    /// Minutes from `t_p` to off-burst, clamped to at least 1; set when the
    /// hashtag is bursting at `t_p`.
    pub tra: Option<i64>,
}

pub fn label_instance(outcome: &CycleOutcome, t_p: i64) -> Result<InstanceLabels, LifecycleError> {
    let unresolved = |what| LifecycleError::NotResolved {
        key: outcome.key.clone(),
        cycle: outcome.cycle,
        what,
    };
    if !outcome.burst_resolved() {
        return Err(unresolved("burst outcome unknown"));
    }
    let mut labels = InstanceLabels {
        burst: outcome.onset.is_some(),
        tbb: None,
        tra: None,
    };
    if let Some(onset) = outcome.onset {
        if t_p <= onset {
            labels.tbb = Some((onset - t_p).max(1));
        } else {
            let off = outcome.offburst.ok_or_else(|| unresolved("off-burst not confirmed"))?;
            if t_p < off {
                labels.tra = Some((off - t_p).max(1));
            }
        }
        if t_p == onset {
            let off = outcome.offburst.ok_or_else(|| unresolved("off-burst not confirmed"))?;
            labels.tra = Some((off - t_p).max(1));
        }
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(onset: Option<i64>, off: Option<i64>) -> CycleOutcome {
        CycleOutcome {
            key: "k".into(),
            cycle: 0,
            trigger_minute: 0,
            c1: 11,
            threshold: 61,
            onset,
            offburst: off,
            labeled_negative: onset.is_none().then_some(1440),
            death: None,
        }
    }

    #[test]
    fn time_before_burst() {
        let l = label_instance(&outcome(Some(30), Some(200)), 5).unwrap();
        assert_eq!((l.burst, l.tbb, l.tra), (true, Some(25), None));
    }

    #[test]
    fn time_remaining_active() {
        let l = label_instance(&outcome(Some(30), Some(200)), 60).unwrap();
        assert_eq!((l.tbb, l.tra), (None, Some(140)));
    }

    #[test]
    fn burst_at_prediction_minute_clamps() {
        let l = label_instance(&outcome(Some(30), Some(200)), 30).unwrap();
        assert_eq!(l.tbb, Some(1));
        assert_eq!(l.tra, Some(170));
    }

    #[test]
    fn negative_and_unresolved() {
        let l = label_instance(&outcome(None, None), 5).unwrap();
        assert!(!l.burst && l.tbb.is_none() && l.tra.is_none());
        let mut open = outcome(None, None);
        open.labeled_negative = None;
        assert!(matches!(label_instance(&open, 5), Err(LifecycleError::NotResolved { .. })));
        assert!(label_instance(&outcome(Some(3), None), 5).is_err());
    }

    #[test]
    fn eligibility() {
        let o = outcome(Some(30), Some(200));
        assert!(o.task1_eligible(15) && o.task2_eligible(15) && !o.task3_eligible(15));
        assert!(!o.task1_eligible(30) && !o.task2_eligible(30) && o.task3_eligible(30));
        assert!(!o.task3_eligible(200));
        let n = outcome(None, None);
        assert!(n.task1_eligible(360) && !n.task2_eligible(5) && !n.task3_eligible(5));
    }

    #[test]
    fn folds_events() {
        let ev = |kind, minute| LifecycleEvent {
            key: "a".into(),
            cycle: 0,
            kind,
            minute,
            emitted_at: minute,
            trigger_minute: 4,
            c1: 11,
            threshold: 61,
            tbb: None,
            tra: None,
        };
        let log = vec![
            ev(EventKind::Triggered, 4),
            ev(EventKind::BurstOnset, 9),
            ev(EventKind::OffBurst, 12),
            ev(EventKind::Death, 2000),
        ];
        let out = outcomes_from_events(&log);
        let o = &out[&("a".to_string(), 0)];
        assert_eq!((o.trigger_minute, o.onset, o.offburst, o.death), (4, Some(9), Some(12), Some(2000)));
    }
}
