//! Count-level lifecycle state machine.
//!
//! A hashtag is fed one finalized minute count at a time. The machine moves
//! through `Dormant -> Triggered -> Bursting -> OffBurst` and back to
//! `Dormant` when the cycle dies:
//!
//! * trigger: the sum over the last `window_minutes` counts exceeds `delta`;
//!   `c1` is the count of the trigger minute `s`.
//! * burst onset: the first minute in `(s, s + burst_horizon]` whose count
//!   exceeds `max(c1 + delta, ceil(1.5 * c1))`. If none, the cycle is labelled
//!   negative at `s + burst_horizon` and cannot trigger again before it dies.
//! * off-burst `t'`: the first minute after onset that starts a run of
//!   `offburst_quiet` counts all below the threshold. It is confirmed (and
//!   emitted) once the run has been observed in full.
//! * death: no trigger window exceeded `delta` in the last `death_quiet`
//!   minutes. Death is only checked once the burst outcome is resolved
//!   (negative label or confirmed off-burst).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::LifecycleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifecycleParams {
    pub delta: u32,
    pub window_minutes: u32,
    pub burst_horizon_minutes: u32,
    pub offburst_quiet_minutes: u32,
    pub death_quiet_minutes: u32,
}

impl Default for LifecycleParams {
    fn default() -> Self {
        LifecycleParams {
            delta: 50,
            window_minutes: 5,
            burst_horizon_minutes: 1440,
            offburst_quiet_minutes: 1440,
            death_quiet_minutes: 1440,
        }
    }
}

impl LifecycleParams {
    pub fn with_delta(delta: u32) -> Self {
        LifecycleParams {
            delta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), LifecycleError> {
        let bad = |what: &str| Err(LifecycleError::InvalidParams(what.to_string()));
        if self.delta == 0 {
            return bad("delta must be positive");
        }
        if self.window_minutes == 0 {
            return bad("window_minutes must be at least 1");
        }
        if self.burst_horizon_minutes == 0 || self.offburst_quiet_minutes == 0 || self.death_quiet_minutes == 0 {
            return bad("horizons must be at least 1 minute");
        }
        Ok(())
    }
}

/// `max(c1 + delta, ceil(1.5 * c1))`; a burst needs a count strictly above it.
pub fn burst_threshold(c1: u32, delta: u32) -> u32 {
    let scaled = (3 * c1 as u64).div_ceil(2);
    (c1 as u64 + delta as u64).max(scaled) as u32
}

/// Whether the window of `window_minutes` minutes ending at `minute` holds
/// more than `delta` tweets. Minutes outside the series count as zero.
pub fn check_trigger(series: &TimeSeries, minute: i64, params: &LifecycleParams) -> bool {
    let start = minute - params.window_minutes as i64 + 1;
    let sum: u64 = (start..=minute).map(|m| series.get(m) as u64).sum();
    sum > params.delta as u64
}

/// Dense per-minute counts starting at `origin_minute`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub origin_minute: i64,
    pub counts: Vec<u32>,
}

impl TimeSeries {
    pub fn new(origin_minute: i64, counts: Vec<u32>) -> Self {
        TimeSeries { origin_minute, counts }
    }

    /// Count at `minute`, zero outside the covered range.
    pub fn get(&self, minute: i64) -> u32 {
        let idx = minute - self.origin_minute;
        if idx < 0 {
            return 0;
        }
        self.counts.get(idx as usize).copied().unwrap_or(0)
    }

    /// Last covered minute.
    pub fn last_minute(&self) -> Option<i64> {
        if self.counts.is_empty() {
            None
        } else {
            Some(self.origin_minute + self.counts.len() as i64 - 1)
        }
    }

    /// Counts for minutes `from..=to`, clipped to the covered range.
    pub fn slice(&self, from: i64, to: i64) -> &[u32] {
        let lo = (from - self.origin_minute).max(0) as usize;
        let hi = ((to - self.origin_minute + 1).max(0) as usize).min(self.counts.len());
        if lo >= hi {
            &[]
        } else {
            &self.counts[lo..hi]
        }
    }

    pub fn push(&mut self, count: u32) {
        self.counts.push(count);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Dormant,
    Triggered,
    Bursting,
    OffBurst,
    /// Transient: a dying cycle resets to `Dormant` in the same minute.
    Dead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Triggered,
    BurstOnset,
    LabeledNegative,
    OffBurst,
    Death,
}

/// A lifecycle moment detected by the machine, before it is tagged with a key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub kind: EventKind,
    pub cycle: u32,
    /// The lifecycle moment itself (retroactive for off-burst).
    pub minute: i64,
    /// The minute whose finalization confirmed the moment.
    pub emitted_at: i64,
    pub trigger_minute: i64,
    pub c1: u32,
    pub threshold: u32,
    /// Minutes from trigger to burst onset (burst events).
    pub tbb: Option<i64>,
    /// Minutes from burst onset to off-burst (off-burst events).
    pub tra: Option<i64>,
}

/// State of the current prediction episode (trigger onwards).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Episode {
    pub trigger_minute: i64,
    pub c1: u32,
    pub threshold: u32,
    pub onset: Option<i64>,
    pub last_high: i64,
    pub offburst: Option<i64>,
    /// Minute at which the burst outcome became final.
    pub resolved_at: Option<i64>,
    pub negative: bool,
    /// Counts from `trigger_minute - window + 1` onward.
    pub series: TimeSeries,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifecycleMachine {
    params: LifecycleParams,
    cycle: u32,
    phase: Phase,
    window: VecDeque<u32>,
    window_sum: u64,
    last_minute: Option<i64>,
    first_seen: Option<i64>,
    last_hot: i64,
    episode: Option<Episode>,
}

impl LifecycleMachine {
    pub fn new(params: LifecycleParams) -> Self {
        LifecycleMachine {
            params,
            cycle: 0,
            phase: Phase::Dormant,
            window: VecDeque::with_capacity(params.window_minutes as usize),
            window_sum: 0,
            last_minute: None,
            first_seen: None,
            last_hot: i64::MIN,
            episode: None,
        }
    }

    pub fn params(&self) -> &LifecycleParams {
        &self.params
    }

    pub fn cycle(&self) -> u32 {
        self.cycle
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn last_minute(&self) -> Option<i64> {
        self.last_minute
    }

    pub fn first_seen(&self) -> Option<i64> {
        self.first_seen
    }

    pub fn episode(&self) -> Option<&Episode> {
        self.episode.as_ref()
    }

    /// Dormant with an empty window: zero minutes cannot change anything.
    pub fn is_idle(&self) -> bool {
        self.phase == Phase::Dormant && self.window_sum == 0
    }

    /// Jumps an idle machine forward so that `minute` is the last finalized
    /// minute. Equivalent to feeding zeros, which are no-ops while idle.
    pub fn skip_idle_to(&mut self, minute: i64) {
        debug_assert!(self.is_idle());
        if self.last_minute.is_none_or(|last| last < minute) {
            self.last_minute = Some(minute);
            self.window.clear();
        }
    }

    /// Finalizes `minute` with `count` tweets. Skipped minutes since the last
    /// call are finalized as zero first.
    pub fn advance(&mut self, minute: i64, count: u32) -> Result<Vec<Transition>, LifecycleError> {
        let mut out = Vec::new();
        if let Some(last) = self.last_minute {
            if minute == last {
                return Err(LifecycleError::DuplicateMinute { minute });
            }
            if minute < last {
                return Err(LifecycleError::OutOfOrder { minute, last });
            }
            let mut m = last + 1;
            while m < minute {
                if self.is_idle() {
                    self.skip_idle_to(minute - 1);
                    break;
                }
                self.step(m, 0, &mut out);
                m += 1;
            }
        }
        self.step(minute, count, &mut out);
        Ok(out)
    }

    fn step(&mut self, m: i64, c: u32, out: &mut Vec<Transition>) {
        let p = self.params;
        self.last_minute = Some(m);
        self.window.push_back(c);
        self.window_sum += c as u64;
        if self.window.len() > p.window_minutes as usize {
            self.window_sum -= self.window.pop_front().unwrap_or(0) as u64;
        }
        if c > 0 && self.first_seen.is_none() {
            self.first_seen = Some(m);
        }
        let hot = self.window_sum > p.delta as u64;
        if hot {
            self.last_hot = m;
        }
        let cycle = self.cycle;

        match self.phase {
            Phase::Dormant => {
                if hot {
                    let threshold = burst_threshold(c, p.delta);
                    let origin = m - self.window.len() as i64 + 1;
                    self.episode = Some(Episode {
                        trigger_minute: m,
                        c1: c,
                        threshold,
                        onset: None,
                        last_high: m,
                        offburst: None,
                        resolved_at: None,
                        negative: false,
                        series: TimeSeries::new(origin, self.window.iter().copied().collect()),
                    });
                    self.phase = Phase::Triggered;
                    out.push(self.transition(EventKind::Triggered, m, m));
                }
            }
            Phase::Triggered => {
                let ep = self.episode.as_mut().expect("triggered phase has an episode");
                ep.series.push(c);
                if !ep.negative {
                    let s = ep.trigger_minute;
                    if m <= s + p.burst_horizon_minutes as i64 && c > ep.threshold {
                        ep.onset = Some(m);
                        ep.last_high = m;
                        self.phase = Phase::Bursting;
                        let mut t = self.transition(EventKind::BurstOnset, m, m);
                        t.tbb = Some(m - s);
                        out.push(t);
                    } else if m >= s + p.burst_horizon_minutes as i64 {
                        ep.negative = true;
                        ep.resolved_at = Some(m);
                        out.push(self.transition(EventKind::LabeledNegative, m, m));
                    }
                }
            }
            Phase::Bursting => {
                let ep = self.episode.as_mut().expect("bursting phase has an episode");
                ep.series.push(c);
                if c >= ep.threshold {
                    ep.last_high = m;
                } else if m - ep.last_high >= p.offburst_quiet_minutes as i64 {
                    let t_off = ep.last_high + 1;
                    let onset = ep.onset.expect("bursting episode has an onset");
                    ep.offburst = Some(t_off);
                    ep.resolved_at = Some(m);
                    self.phase = Phase::OffBurst;
                    let mut t = self.transition(EventKind::OffBurst, t_off, m);
                    t.tra = Some(t_off - onset);
                    out.push(t);
                }
            }
            Phase::OffBurst => {
                if let Some(ep) = self.episode.as_mut() {
                    ep.series.push(c);
                }
            }
            Phase::Dead => unreachable!("dead is transient"),
        }

        let resolved = self.episode.as_ref().is_some_and(|e| e.resolved_at.is_some());
        if resolved && m - self.last_hot >= p.death_quiet_minutes as i64 {
            self.phase = Phase::Dead;
            out.push(self.transition(EventKind::Death, m, m));
            self.cycle += 1;
            self.phase = Phase::Dormant;
            self.episode = None;
            self.first_seen = None;
        }
        debug_assert!(cycle <= self.cycle);
    }

    fn transition(&self, kind: EventKind, minute: i64, emitted_at: i64) -> Transition {
        let ep = self.episode.as_ref();
        Transition {
            kind,
            cycle: self.cycle,
            minute,
            emitted_at,
            trigger_minute: ep.map_or(minute, |e| e.trigger_minute),
            c1: ep.map_or(0, |e| e.c1),
            threshold: ep.map_or(0, |e| e.threshold),
            tbb: None,
            tra: None,
        }
    }
}

/// Drives a fresh machine over a dense series and returns every transition.
pub fn replay_series(series: &TimeSeries, params: LifecycleParams) -> Vec<Transition> {
    let mut machine = LifecycleMachine::new(params);
    let mut out = Vec::new();
    for (i, &c) in series.counts.iter().enumerate() {
        let m = series.origin_minute + i as i64;
        out.extend(machine.advance(m, c).expect("dense series is ordered"));
    }
    out
}
