//! Per-hashtag minute-count plans.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use super::scenario::{LogUniform, StreamScenario, Uniform};
use crate::lifecycle::burst_threshold;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanKind {
    Burst,
    Fizzle,
    NearMiss,
    Background,
}

/// Moments built into a triggered plan, in stream-relative minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Designed {
    pub trigger: i64,
    pub onset: Option<i64>,
    pub offburst: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct HashtagPlan {
    pub key: String,
    pub kind: PlanKind,
    /// Stream-relative minute of `counts[0]`.
    pub origin: i64,
    pub counts: Vec<u32>,
    pub virality: f64,
    pub designed: Option<Designed>,
}

impl HashtagPlan {
    pub fn end(&self) -> i64 {
        self.origin + self.counts.len() as i64
    }
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng, u: Uniform) -> f64 {
    if u.max > u.min {
        rng.random_range(u.min..=u.max)
    } else {
        u.min
    }
}

pub(crate) fn log_uniform(rng: &mut ChaCha8Rng, u: LogUniform) -> f64 {
    if u.max > u.min {
        rng.random_range(u.min.ln()..=u.max.ln()).exp()
    } else {
        u.min
    }
}

pub(crate) fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u32 {
    if lambda <= 0.0 || !lambda.is_finite() {
        return 0;
    }
    let d = Poisson::new(lambda).expect("positive finite rate");
    d.sample(rng).min(u32::MAX as f64) as u32
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").sample(rng)
}

/// Lowers counts so that no window of `w` minutes ending in the slice sums
/// past `delta`. Minutes before the slice count as zero.
fn cap_windows(counts: &mut [u32], w: usize, delta: u32) {
    let mut sum = 0u64;
    for i in 0..counts.len() {
        sum += counts[i] as u64;
        if i >= w {
            sum -= counts[i - w] as u64;
        }
        if sum > delta as u64 {
            let excess = (sum - delta as u64) as u32;
            counts[i] -= excess;
            sum -= excess as u64;
        }
    }
}

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ner", "tu", "vo", "shi", "ra", "pen", "dal", "qui", "zor", "bel", "fa", "gri", "hum", "jo",
    "wex", "yal", "cor", "tin", "sa", "mu", "rek",
];

/// Distinct lowercase hashtag keys.
pub fn hashtag_names(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let parts = rng.random_range(2..=4);
        let mut name: String = (0..parts).map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())]).collect();
        if rng.random_bool(0.2) {
            name.push_str(&rng.random_range(0..100).to_string());
        }
        if seen.insert(name.clone()) {
            out.push(name);
        }
    }
    out
}

/// Onset offsets for the planted bursts. Bins between stages get their
/// share by rounding the cumulative distribution, so the pending share after
/// each stage is within half a hashtag of the scenario's survival curve.
pub fn planned_tbbs(rng: &mut ChaCha8Rng, sc: &StreamScenario) -> Vec<i64> {
    let n = sc.n_planted_bursts;
    if n == 0 {
        return Vec::new();
    }
    let horizon = sc.lifecycle.burst_horizon_minutes as i64;
    let mut edges = vec![0i64];
    edges.extend(sc.stages.iter().map(|&s| s as i64));
    edges.push(horizon);
    let mut pending = vec![1.0];
    pending.extend(sc.survival().iter().map(|v| v.clamp(0.0, 1.0)));
    pending.push(0.0);
    let done: Vec<usize> = pending.iter().map(|p| ((1.0 - p) * n as f64).round() as usize).collect();
    let quota: Vec<usize> = done.windows(2).map(|w| w[1].saturating_sub(w[0])).collect();
    let mut tbbs = Vec::with_capacity(n);
    for (k, &q) in quota.iter().enumerate() {
        let (lo, hi) = (edges[k], edges[k + 1]);
        for _ in 0..q {
            tbbs.push(rng.random_range(lo + 1..=hi));
        }
    }
    tbbs.shuffle(rng);
    tbbs
}

struct Pretrigger {
    origin: i64,
    counts: Vec<u32>,
    c1: u32,
}

/// Dormant trickle, a short lead-in and the trigger minute `s`.
fn pretrigger(rng: &mut ChaCha8Rng, sc: &StreamScenario, s: i64) -> Pretrigger {
    let w = sc.lifecycle.window_minutes as usize;
    let delta = sc.lifecycle.delta;
    let dormancy = (log_uniform(rng, sc.dormancy_minutes).round() as i64).max(w as i64);
    let origin = s - dormancy;
    let rate = log_uniform(rng, sc.dormant_rate);
    let lead = uniform(rng, sc.lead_in_level);
    let mut counts: Vec<u32> = (0..dormancy).map(|_| poisson(rng, rate)).collect();
    counts[0] = counts[0].max(1);
    let lead_len = w - 1;
    for k in 0..lead_len {
        let i = dormancy as usize - lead_len + k;
        counts[i] = poisson(rng, lead * (k + 1) as f64 / lead_len as f64);
    }
    cap_windows(&mut counts, w, delta);
    let prev: u32 = counts[counts.len() - lead_len..].iter().sum();
    let excess = uniform(rng, sc.trigger_excess);
    let c1 = delta + 1 - prev + poisson(rng, excess);
    counts.push(c1);
    Pretrigger { origin, counts, c1 }
}

fn ramp(base: f64, top: f64, convexity: f64, u: f64, len: f64) -> f64 {
    base * (top / base).powf((u / len).powf(convexity))
}

/// A hashtag that triggers at `s` and bursts `tbb` minutes later.
pub fn burst_plan(rng: &mut ChaCha8Rng, sc: &StreamScenario, key: String, s: i64, tbb: i64) -> HashtagPlan {
    let b = &sc.burst;
    let quiet = sc.lifecycle.offburst_quiet_minutes as i64;
    let Pretrigger { origin, mut counts, c1 } = pretrigger(rng, sc, s);
    let thr = burst_threshold(c1, sc.lifecycle.delta);
    let thr_f = thr as f64;
    let z = std_normal(rng);
    let tra = ((b.tra_median_minutes.ln() + b.tra_sigma * z).exp().round() as i64).clamp(1, b.tra_max_minutes as i64);
    let phi = StdNormal::standard().cdf(z);
    let sustain = b.sustain_level.min + (b.sustain_level.max - b.sustain_level.min) * phi;

    let base = (b.ramp_base * c1 as f64).max(0.5);
    let top = (b.ramp_ceiling * thr_f).max(base);
    for u in 1..tbb {
        let lam = ramp(base, top, b.ramp_convexity, u as f64, tbb as f64);
        counts.push(poisson(rng, lam).min(thr));
    }
    let peak = uniform(rng, b.peak_level) * thr_f;
    counts.push(poisson(rng, peak).max(thr + 1));
    let peak_len = (uniform(rng, b.peak_minutes).round() as i64).clamp(1, tra);
    for _ in 1..peak_len {
        counts.push(poisson(rng, peak).max(thr));
    }
    let last_high = tbb + tra - 1;
    for _ in tbb + peak_len..last_high {
        counts.push(poisson(rng, sustain * thr_f).min(thr - 1));
    }
    if last_high >= tbb + peak_len {
        counts.push(poisson(rng, sustain * thr_f).max(thr));
    }
    let tau = log_uniform(rng, sc.decay.tail_tau_minutes);
    for v in 1..quiet {
        let lam = sustain * thr_f * (-(v as f64) / tau).exp();
        if lam < 0.02 {
            break;
        }
        counts.push(poisson(rng, lam).min(thr - 1));
    }
    let rho = sc.virality.duration_coupling;
    let coupled = rho * z + (1.0 - rho * rho).sqrt() * std_normal(rng);
    HashtagPlan {
        key,
        kind: PlanKind::Burst,
        origin,
        counts,
        virality: sc.virality.positive_mean + sc.virality.spread * coupled,
        designed: Some(Designed {
            trigger: s,
            onset: Some(s + tbb),
            offburst: Some(s + tbb + tra),
        }),
    }
}

/// A hashtag that triggers at `s` and never bursts: it either fades right
/// away or climbs part of the way to its threshold first.
pub fn negative_plan(rng: &mut ChaCha8Rng, sc: &StreamScenario, key: String, s: i64, near_miss: bool) -> HashtagPlan {
    let horizon = sc.lifecycle.burst_horizon_minutes as i64;
    let Pretrigger { origin, mut counts, c1 } = pretrigger(rng, sc, s);
    let thr = burst_threshold(c1, sc.lifecycle.delta);
    let thr_f = thr as f64;
    let d = &sc.decay;
    if near_miss {
        let rise = log_uniform(rng, d.near_miss_rise_minutes).round().max(1.0);
        let ceiling = uniform(rng, d.near_miss_ceiling) * thr_f;
        let base = (sc.burst.ramp_base * c1 as f64).max(0.5);
        let top = ceiling.max(base);
        let tau = log_uniform(rng, d.tail_tau_minutes);
        for u in 1..=horizon {
            let lam = if (u as f64) <= rise {
                ramp(base, top, sc.burst.ramp_convexity, u as f64, rise)
            } else {
                top * (-(u as f64 - rise) / tau).exp()
            };
            if u as f64 > rise && lam < 0.02 {
                break;
            }
            counts.push(poisson(rng, lam).min(thr));
        }
    } else {
        let tau = log_uniform(rng, d.fizzle_tau_minutes);
        for u in 1..=horizon {
            let lam = c1 as f64 * (-(u as f64) / tau).exp();
            if lam < 0.02 {
                break;
            }
            counts.push(poisson(rng, lam).min(thr));
        }
    }
    let v = &sc.virality;
    let mean = if near_miss { v.near_miss_mean } else { v.negative_mean };
    HashtagPlan {
        key,
        kind: if near_miss { PlanKind::NearMiss } else { PlanKind::Fizzle },
        origin,
        counts,
        virality: mean + v.spread * std_normal(rng),
        designed: Some(Designed {
            trigger: s,
            onset: None,
            offburst: None,
        }),
    }
}

/// A hashtag that chatters along without ever filling a trigger window.
pub fn background_plan(rng: &mut ChaCha8Rng, sc: &StreamScenario, key: String, span_end: i64) -> HashtagPlan {
    let r = &sc.background_rate;
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let rate = (r.scale * u.powf(-1.0 / r.shape)).min(r.cap);
    let len = log_uniform(rng, r.active_minutes).round().max(1.0) as i64;
    let origin = rng.random_range(0..span_end.max(1));
    let mut counts: Vec<u32> = (0..len).map(|_| poisson(rng, rate)).collect();
    counts[0] = counts[0].max(1);
    cap_windows(&mut counts, sc.lifecycle.window_minutes as usize, sc.lifecycle.delta);
    HashtagPlan {
        key,
        kind: PlanKind::Background,
        origin,
        counts,
        virality: sc.virality.negative_mean + sc.virality.spread * std_normal(rng),
        designed: None,
    }
}
