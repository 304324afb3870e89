//! Synthetic tweet streams with planted lifecycles and a ground-truth file.
//!
//! Every hashtag is first planned as a minute-count series. Triggered
//! hashtags are built so that their trigger, onset and off-burst minutes are
//! known in advance; bursting ones ramp up towards their threshold, peak,
//! hold and fade. Non-bursting triggered hashtags fade right after the
//! trigger or climb part of the way first. Background hashtags chatter below
//! the trigger level. The plans are then rendered as tweets, with co-occurring
//! hashtags sharing a tweet so that every planned count is exact.

mod emit;
mod oracle;
mod plan;
mod scenario;

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use oracle::{oracle_cycles, OracleCycle};
pub use plan::{planned_tbbs, PlanKind};
pub use scenario::{
    odds, AuthorPool, BurstShape, DecayShape, LogUniform, ParetoRate, StreamScenario, TweetProbabilities, Uniform,
    Virality, DEFAULT_PROFILE, PROFILE_STAGES,
};

use plan::{background_plan, burst_plan, hashtag_names, negative_plan, HashtagPlan};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("planned series for '{key}' does not realise its design: {detail}")]
    Infeasible { key: String, detail: String },
    #[error("writing stream: {0}")]
    Io(String),
    #[error("truth file: {0}")]
    Truth(String),
}

/// Ground truth for one triggered hashtag. Minutes are epoch minutes; `tbb`
/// runs from trigger to onset and `tra` from onset to off-burst.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub key: String,
    pub trigger_min: i64,
    pub burst_min: Option<i64>,
    pub offburst_min: Option<i64>,
    pub death_min: i64,
    pub tbb: Option<i64>,
    pub tra: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedStream {
    /// Sorted by key.
    pub truth: Vec<TruthRecord>,
    pub tweets: u64,
    pub hashtags: usize,
    /// Positive share per stage implied by the planted onsets.
    pub expected_profile: Vec<f64>,
}

fn check_design(p: &HashtagPlan, sc: &StreamScenario) -> Result<TruthRecord, SynthError> {
    let d = p.designed.expect("triggered plans carry a design");
    let cycles = oracle_cycles(p.origin, &p.counts, &sc.lifecycle);
    let fail = |detail: String| SynthError::Infeasible {
        key: p.key.clone(),
        detail,
    };
    let [c] = cycles.as_slice() else {
        return Err(fail(format!("{} cycles instead of one", cycles.len())));
    };
    if (c.trigger, c.onset, c.offburst) != (d.trigger, d.onset, d.offburst) {
        return Err(fail(format!("designed {d:?}, realised {c:?}")));
    }
    let base = sc.start_minute;
    Ok(TruthRecord {
        key: p.key.clone(),
        trigger_min: base + c.trigger,
        burst_min: c.onset.map(|m| base + m),
        offburst_min: c.offburst.map(|m| base + m),
        death_min: base + c.death.expect("oracle resolves every cycle"),
        tbb: c.onset.map(|b| b - c.trigger),
        tra: c.onset.zip(c.offburst).map(|(b, t)| t - b),
    })
}

fn check_background(p: &HashtagPlan, sc: &StreamScenario) -> Result<(), SynthError> {
    let cycles = oracle_cycles(p.origin, &p.counts, &sc.lifecycle);
    if cycles.is_empty() {
        Ok(())
    } else {
        Err(SynthError::Infeasible {
            key: p.key.clone(),
            detail: "background hashtag triggers".into(),
        })
    }
}

fn plans(sc: &StreamScenario, rng: &mut ChaCha8Rng) -> Result<Vec<HashtagPlan>, SynthError> {
    let n_neg = sc.triggered_negatives();
    let n_total = sc.n_planted_bursts + n_neg + sc.n_background_hashtags;
    let names = hashtag_names(rng, n_total);
    let mut names = names.into_iter();
    let mut next_name = || names.next().expect("one name per hashtag");
    let w = sc.lifecycle.window_minutes as i64;
    let first_trigger = sc.dormancy_minutes.max.ceil() as i64 + w;
    let last_trigger = sc.duration_minutes as i64;
    let tbbs = planned_tbbs(rng, sc);
    let n_near = (n_neg as f64 * sc.near_miss_fraction).round() as usize;
    let mut kinds: Vec<Option<bool>> = Vec::with_capacity(sc.n_planted_bursts + n_neg);
    kinds.extend(std::iter::repeat_n(None, sc.n_planted_bursts));
    kinds.extend((0..n_neg).map(|i| Some(i < n_near)));
    kinds.shuffle(rng);
    let mut tbb_iter = tbbs.into_iter();
    let mut out = Vec::with_capacity(n_total);
    for kind in kinds {
        let s = rng.random_range(first_trigger..last_trigger.max(first_trigger + 1));
        let key = next_name();
        out.push(match kind {
            None => burst_plan(rng, sc, key, s, tbb_iter.next().expect("one onset per burst")),
            Some(near) => negative_plan(rng, sc, key, s, near),
        });
    }
    let span = last_trigger + sc.lifecycle.burst_horizon_minutes as i64;
    for _ in 0..sc.n_background_hashtags {
        let key = next_name();
        out.push(background_plan(rng, sc, key, span));
    }
    Ok(out)
}

/// Generates the stream into `out` and returns the ground truth. The same
/// scenario always produces the same bytes.
pub fn generate<W: Write>(sc: &StreamScenario, out: W) -> Result<GeneratedStream, SynthError> {
    sc.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let plans = plans(sc, &mut rng)?;
    let mut truth = Vec::new();
    let mut tbbs = Vec::new();
    for p in &plans {
        if p.kind != PlanKind::Background {
            let t = check_design(p, sc)?;
            if let Some(b) = t.tbb {
                tbbs.push(b);
            }
            truth.push(t);
        } else {
            check_background(p, sc)?;
        }
    }
    truth.sort_by(|a, b| a.key.cmp(&b.key));
    let tweets = emit::emit_stream(&mut rng, sc, &plans, out)?;
    Ok(GeneratedStream {
        truth,
        tweets,
        hashtags: plans.len(),
        expected_profile: sc.expected_profile(&tbbs),
    })
}

const TRUTH_HEADER: [&str; 7] = ["key", "trigger_min", "burst_min", "offburst_min", "death_min", "tbb", "tra"];

pub fn write_truth_csv<W: Write>(truth: &[TruthRecord], w: W) -> Result<(), SynthError> {
    let err = |e: csv::Error| SynthError::Truth(e.to_string());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRUTH_HEADER).map_err(err)?;
    let opt = |v: Option<i64>| v.map_or_else(String::new, |v| v.to_string());
    for t in truth {
        out.write_record([
            t.key.clone(),
            t.trigger_min.to_string(),
            opt(t.burst_min),
            opt(t.offburst_min),
            t.death_min.to_string(),
            opt(t.tbb),
            opt(t.tra),
        ])
        .map_err(err)?;
    }
    out.flush().map_err(|e| SynthError::Truth(e.to_string()))
}

pub fn read_truth_csv<R: Read>(r: R) -> Result<Vec<TruthRecord>, SynthError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| SynthError::Truth(e.to_string()))?.clone();
    if header.iter().ne(TRUTH_HEADER) {
        return Err(SynthError::Truth("unexpected header".into()));
    }
    let num = |s: &str| -> Result<i64, SynthError> { s.parse().map_err(|_| SynthError::Truth(format!("bad number '{s}'"))) };
    let opt = |s: &str| -> Result<Option<i64>, SynthError> { if s.is_empty() { Ok(None) } else { num(s).map(Some) } };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| SynthError::Truth(e.to_string()))?;
        out.push(TruthRecord {
            key: rec[0].to_string(),
            trigger_min: num(&rec[1])?,
            burst_min: opt(&rec[2])?,
            offburst_min: opt(&rec[3])?,
            death_min: num(&rec[4])?,
            tbb: opt(&rec[5])?,
            tra: opt(&rec[6])?,
        });
    }
    Ok(out)
}
