//! Scenario files: every knob of the generator, with JSON defaults.

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::lifecycle::LifecycleParams;

/// Uniform on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniform {
    pub min: f64,
    pub max: f64,
}

/// Log-uniform on `[min, max]`, both positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogUniform {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstShape {
    /// Before onset the rate grows from `ramp_base * c1` to
    /// `ramp_ceiling * threshold` along `(u / tbb)^ramp_convexity`.
    pub ramp_base: f64,
    pub ramp_ceiling: f64,
    pub ramp_convexity: f64,
    /// Minutes at or above the threshold right after onset.
    pub peak_minutes: Uniform,
    /// Peak rate as a multiple of the threshold.
    pub peak_level: Uniform,
    /// Burst duration (onset to off-burst) is log-normal.
    pub tra_median_minutes: f64,
    pub tra_sigma: f64,
    pub tra_max_minutes: u32,
    /// Rate between the peak and the last high minute, as a fraction of the
    /// threshold; longer bursts sit higher in this range.
    pub sustain_level: Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayShape {
    /// Time constant of a non-bursting hashtag's fade after its trigger.
    pub fizzle_tau_minutes: LogUniform,
    /// Time constant of the fade after a burst's last high minute.
    pub tail_tau_minutes: LogUniform,
    /// Peak of a near-miss as a fraction of its threshold.
    pub near_miss_ceiling: Uniform,
    /// Minutes from trigger to a near-miss peak.
    pub near_miss_rise_minutes: LogUniform,
}

/// Per-minute rate of a background hashtag: Pareto with the given scale and
/// shape, capped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoRate {
    pub scale: f64,
    pub shape: f64,
    pub cap: f64,
    /// Active span of a background hashtag.
    pub active_minutes: LogUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuthorPool {
    pub size: usize,
    /// Followers and statuses are log-normal: `exp(ln(median) + sigma * z)`.
    pub followers_median: f64,
    pub followers_sigma: f64,
    pub statuses_median: f64,
    pub statuses_sigma: f64,
    pub account_age_days: Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TweetProbabilities {
    pub retweet: f64,
    pub mention: f64,
    pub url: f64,
    pub happy_emoticon: f64,
    pub sad_emoticon: f64,
    pub special_signal: f64,
    /// A tweet also carries another hashtag active in the same minute.
    pub cooccurrence: f64,
    /// The hashtag is written with a non-default case.
    pub case_variant: f64,
}

/// Latent "virality" of a triggered hashtag: normal with a class-dependent
/// mean. It tilts authorship towards well-followed accounts and scales the
/// retweet, mention and url probabilities by `exp(effect * v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Virality {
    pub positive_mean: f64,
    pub negative_mean: f64,
    pub near_miss_mean: f64,
    pub spread: f64,
    pub effect: f64,
    /// Correlation between a burst's virality and its (log) active time.
    #[serde(default)]
    pub duration_coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StreamScenario {
    pub seed: u64,
    /// Epoch minute of the first stream minute.
    pub start_minute: i64,
    /// Triggers fall uniformly between the end of the longest dormancy and
    /// this many minutes after the start.
    pub duration_minutes: u32,
    pub lifecycle: LifecycleParams,
    /// Prediction stages the class-balance profile refers to.
    pub stages: Vec<u32>,
    pub n_background_hashtags: usize,
    pub n_planted_bursts: usize,
    /// Triggered hashtags that never burst. `None` derives the count from
    /// the class-balance profile.
    pub n_triggered_negatives: Option<usize>,
    /// Share of triggered negatives that climb towards their threshold
    /// before fading.
    pub near_miss_fraction: f64,
    /// Target share of bursting hashtags among not-yet-burst triggered
    /// hashtags at each stage. Decreasing.
    pub class_balance_profile: Vec<f64>,
    /// Share of bursts whose onset comes after the last stage.
    pub tbb_tail_fraction: f64,
    pub dormancy_minutes: LogUniform,
    /// Tweets per minute while dormant.
    pub dormant_rate: LogUniform,
    /// Mean count of the minutes just before a trigger.
    pub lead_in_level: Uniform,
    /// Mean count above the minimum needed to trigger.
    pub trigger_excess: Uniform,
    pub burst: BurstShape,
    pub decay: DecayShape,
    pub background_rate: ParetoRate,
    pub authors: AuthorPool,
    pub probabilities: TweetProbabilities,
    pub virality: Virality,
}

impl Default for StreamScenario {
    fn default() -> Self {
        StreamScenario::benchmark(0)
    }
}

/// Stages the default profile is stated for.
pub const PROFILE_STAGES: [u32; 6] = [5, 15, 30, 60, 180, 360];
/// Positive share at each stage of the default benchmark.
pub const DEFAULT_PROFILE: [f64; 6] = [0.1239, 0.0924, 0.0627, 0.0358, 0.0127, 0.008];

impl StreamScenario {
    /// The default benchmark: 2,000 triggered hashtags.
    pub fn benchmark(seed: u64) -> Self {
        StreamScenario {
            seed,
            start_minute: 22_500_000,
            duration_minutes: 2880,
            lifecycle: LifecycleParams::default(),
            stages: PROFILE_STAGES.to_vec(),
            n_background_hashtags: 1500,
            n_planted_bursts: 284,
            n_triggered_negatives: Some(1716),
            near_miss_fraction: 0.15,
            class_balance_profile: DEFAULT_PROFILE.to_vec(),
            tbb_tail_fraction: 0.0488,
            dormancy_minutes: LogUniform { min: 20.0, max: 1400.0 },
            dormant_rate: LogUniform { min: 0.005, max: 0.1 },
            lead_in_level: Uniform { min: 2.0, max: 9.0 },
            trigger_excess: Uniform { min: 0.0, max: 12.0 },
            burst: BurstShape {
                ramp_base: 0.3,
                ramp_ceiling: 0.9,
                ramp_convexity: 2.0,
                peak_minutes: Uniform { min: 1.0, max: 4.0 },
                peak_level: Uniform { min: 1.05, max: 1.6 },
                tra_median_minutes: 150.0,
                tra_sigma: 0.9,
                tra_max_minutes: 1380,
                sustain_level: Uniform { min: 0.05, max: 0.3 },
            },
            decay: DecayShape {
                fizzle_tau_minutes: LogUniform { min: 2.0, max: 25.0 },
                tail_tau_minutes: LogUniform { min: 3.0, max: 30.0 },
                near_miss_ceiling: Uniform { min: 0.4, max: 0.9 },
                near_miss_rise_minutes: LogUniform { min: 5.0, max: 90.0 },
            },
            background_rate: ParetoRate {
                scale: 0.01,
                shape: 1.2,
                cap: 4.0,
                active_minutes: LogUniform { min: 60.0, max: 2880.0 },
            },
            authors: AuthorPool {
                size: 20_000,
                followers_median: 150.0,
                followers_sigma: 1.6,
                statuses_median: 2000.0,
                statuses_sigma: 1.3,
                account_age_days: Uniform { min: 30.0, max: 2500.0 },
            },
            probabilities: TweetProbabilities {
                retweet: 0.25,
                mention: 0.2,
                url: 0.15,
                happy_emoticon: 0.08,
                sad_emoticon: 0.04,
                special_signal: 0.06,
                cooccurrence: 0.08,
                case_variant: 0.2,
            },
            virality: Virality {
                positive_mean: 1.0,
                negative_mean: -0.2,
                near_miss_mean: 0.3,
                spread: 0.6,
                effect: 0.7,
                duration_coupling: 0.9,
            },
        }
    }

    /// A scenario small enough to generate and replay in well under a second.
    pub fn small(seed: u64) -> Self {
        StreamScenario {
            duration_minutes: 1800,
            n_background_hashtags: 30,
            n_planted_bursts: 12,
            n_triggered_negatives: Some(20),
            dormancy_minutes: LogUniform { min: 10.0, max: 600.0 },
            authors: AuthorPool {
                size: 500,
                ..StreamScenario::benchmark(seed).authors
            },
            ..StreamScenario::benchmark(seed)
        }
    }

    /// Triggered negatives: explicit, or the count that makes the profile's
    /// last-stage share come out right.
    pub fn triggered_negatives(&self) -> usize {
        if let Some(n) = self.n_triggered_negatives {
            return n;
        }
        match self.class_balance_profile.last() {
            Some(&p) if p > 0.0 && self.tbb_tail_fraction > 0.0 => {
                let r = odds(p) / self.tbb_tail_fraction;
                (self.n_planted_bursts as f64 / r).round() as usize
            }
            _ => 0,
        }
    }

    /// Fraction of bursts still pending after each stage, implied by the
    /// profile: `S(t_k) = odds(p_k) * N_neg / N_pos`.
    pub fn survival(&self) -> Vec<f64> {
        let n_neg = self.triggered_negatives() as f64;
        let n_pos = self.n_planted_bursts as f64;
        self.class_balance_profile
            .iter()
            .map(|&p| if n_pos > 0.0 { odds(p) * n_neg / n_pos } else { 0.0 })
            .collect()
    }

    /// Expected positive share at each stage given the generated counts.
    pub fn expected_profile(&self, tbbs: &[i64]) -> Vec<f64> {
        let n_neg = self.triggered_negatives() as f64;
        self.stages
            .iter()
            .map(|&t| {
                let pos = tbbs.iter().filter(|&&b| b > t as i64).count() as f64;
                if pos + n_neg == 0.0 {
                    0.0
                } else {
                    pos / (pos + n_neg)
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidScenario(m));
        self.lifecycle
            .validate()
            .map_err(|e| SynthError::InvalidScenario(e.to_string()))?;
        let p = &self.probabilities;
        for (name, v) in [
            ("retweet", p.retweet),
            ("mention", p.mention),
            ("url", p.url),
            ("happy_emoticon", p.happy_emoticon),
            ("sad_emoticon", p.sad_emoticon),
            ("special_signal", p.special_signal),
            ("cooccurrence", p.cooccurrence),
            ("case_variant", p.case_variant),
            ("near_miss_fraction", self.near_miss_fraction),
            ("tbb_tail_fraction", self.tbb_tail_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("probability {name} = {v} is outside [0, 1]"));
            }
        }
        for (name, u) in [
            ("lead_in_level", self.lead_in_level),
            ("trigger_excess", self.trigger_excess),
            ("burst.peak_minutes", self.burst.peak_minutes),
            ("burst.peak_level", self.burst.peak_level),
            ("burst.sustain_level", self.burst.sustain_level),
            ("decay.near_miss_ceiling", self.decay.near_miss_ceiling),
            ("authors.account_age_days", self.authors.account_age_days),
        ] {
            if !(u.min.is_finite() && u.max.is_finite() && u.min >= 0.0 && u.min <= u.max) {
                return bad(format!("{name} must satisfy 0 <= min <= max"));
            }
        }
        for (name, u) in [
            ("dormancy_minutes", self.dormancy_minutes),
            ("dormant_rate", self.dormant_rate),
            ("decay.fizzle_tau_minutes", self.decay.fizzle_tau_minutes),
            ("decay.tail_tau_minutes", self.decay.tail_tau_minutes),
            ("decay.near_miss_rise_minutes", self.decay.near_miss_rise_minutes),
            ("background_rate.active_minutes", self.background_rate.active_minutes),
        ] {
            if !(u.min.is_finite() && u.max.is_finite() && u.min > 0.0 && u.min <= u.max) {
                return bad(format!("{name} must satisfy 0 < min <= max"));
            }
        }
        if self.burst.peak_level.min < 1.0 {
            return bad("burst.peak_level below 1 never exceeds the burst threshold".into());
        }
        if self.burst.peak_minutes.min < 1.0 {
            return bad("burst.peak_minutes must be at least 1".into());
        }
        if !(self.burst.ramp_ceiling > 0.0 && self.burst.ramp_ceiling <= 1.0) {
            return bad("burst.ramp_ceiling must be in (0, 1]".into());
        }
        if self.decay.near_miss_ceiling.max > 1.0 {
            return bad("decay.near_miss_ceiling above 1 would burst".into());
        }
        if self.burst.sustain_level.max >= 1.0 {
            return bad("burst.sustain_level must stay below the threshold".into());
        }
        if !(self.burst.ramp_base > 0.0 && self.burst.ramp_convexity > 0.0) {
            return bad("burst.ramp_base and burst.ramp_convexity must be positive".into());
        }
        if !(-1.0..=1.0).contains(&self.virality.duration_coupling) {
            return bad("virality.duration_coupling must be in [-1, 1]".into());
        }
        if self.burst.tra_median_minutes < 1.0 || self.burst.tra_sigma < 0.0 || self.burst.tra_max_minutes == 0 {
            return bad("burst duration distribution needs median >= 1, sigma >= 0, max >= 1".into());
        }
        let rate = &self.background_rate;
        if !(rate.scale > 0.0 && rate.shape > 0.0 && rate.cap > 0.0) {
            return bad("background_rate parameters must be positive".into());
        }
        // A background hashtag at its cap must not be able to trigger.
        if rate.cap * self.lifecycle.window_minutes as f64 > self.lifecycle.delta as f64 {
            return bad(format!(
                "background_rate.cap {} can fill a {}-minute window past delta {}",
                rate.cap, self.lifecycle.window_minutes, self.lifecycle.delta
            ));
        }
        if self.lead_in_level.max * (self.lifecycle.window_minutes as f64 - 1.0) > self.lifecycle.delta as f64 {
            return bad("lead_in_level is high enough to trigger early".into());
        }
        if self.authors.size == 0 {
            return bad("authors.size must be positive".into());
        }
        let horizon = self.lifecycle.burst_horizon_minutes;
        if self.stages.len() != self.class_balance_profile.len() {
            return bad(format!(
                "{} stages but {} class-balance values",
                self.stages.len(),
                self.class_balance_profile.len()
            ));
        }
        if self.stages.windows(2).any(|w| w[0] >= w[1]) || self.stages.last().is_some_and(|&s| s >= horizon) {
            return bad("stages must increase and end before the burst horizon".into());
        }
        if self.class_balance_profile.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return bad("class-balance values must be in (0, 1)".into());
        }
        if self.class_balance_profile.windows(2).any(|w| w[0] < w[1]) {
            return bad("class-balance profile must not increase".into());
        }
        if self.n_planted_bursts > 0 {
            let s = self.survival();
            if s.first().is_some_and(|&v| v > 1.0) {
                return bad(format!(
                    "profile needs {:.1}% of bursts pending at stage {} but only 100% exist",
                    s[0] * 100.0,
                    self.stages[0]
                ));
            }
            if s.last().is_some_and(|&v| v < self.tbb_tail_fraction - 0.05) {
                return bad("profile and tbb_tail_fraction disagree by more than 5 points".into());
            }
        }
        if (self.duration_minutes as f64) < self.dormancy_minutes.max + self.lifecycle.window_minutes as f64 + 1.0 {
            return bad("duration_minutes leaves no room for triggers after the longest dormancy".into());
        }
        Ok(())
    }
}

pub fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}
