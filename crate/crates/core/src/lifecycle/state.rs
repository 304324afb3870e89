//! Per-hashtag state: the count machine plus the tweet aggregates of the
//! current cycle, and point-in-time snapshots of both.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::machine::{LifecycleMachine, LifecycleParams, Phase, Transition};
use super::{LifecycleError, LifecycleEvent};
use crate::features::{passivity, RetweetMentionNetwork};
use crate::ingest::{HashtagOccurrence, SentimentTally, TweetRecord};

/// Latest-seen profile of one adopter plus how often they used the hashtag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdopterStats {
    pub tweets: u64,
    pub followers: u64,
    pub account_created: i64,
    pub statuses: u64,
}

/// Tweet-level aggregates over one lifecycle cycle.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleAccumulators {
    pub tweet_count: u64,
    pub retweet_count: u64,
    pub mention_count: u64,
    pub url_tweets: u64,
    pub special_signal_tweets: u64,
    pub happy_emoticon_tweets: u64,
    pub sad_emoticon_tweets: u64,
    pub pos_score_sum: f64,
    pub neg_score_sum: f64,
    pub scored_words: u64,
    pub cooccurrence_tweets: u64,
    pub case_variants: BTreeSet<String>,
    pub adopters: BTreeMap<String, AdopterStats>,
    pub graph: RetweetMentionNetwork,
}

impl CycleAccumulators {
    pub fn record(
        &mut self,
        tweet: &TweetRecord,
        occurrence: &HashtagOccurrence,
        sentiment: &SentimentTally,
        retweet_source_author: Option<&str>,
    ) {
        self.tweet_count += 1;
        if tweet.is_retweet() {
            self.retweet_count += 1;
        }
        self.mention_count += tweet.explicit_mentions.len() as u64;
        self.url_tweets += tweet.urls_present as u64;
        self.special_signal_tweets += tweet.special_signal as u64;
        self.happy_emoticon_tweets += (tweet.happy_emoticons > 0) as u64;
        self.sad_emoticon_tweets += (tweet.sad_emoticons > 0) as u64;
        self.pos_score_sum += sentiment.pos_sum;
        self.neg_score_sum += sentiment.neg_sum;
        self.scored_words += sentiment.scored_words;
        if tweet.hashtags.len() > 1 {
            self.cooccurrence_tweets += 1;
        }
        if !self.case_variants.contains(&occurrence.surface) {
            self.case_variants.insert(occurrence.surface.clone());
        }
        if !self.adopters.contains_key(&tweet.author_id) {
            self.adopters.insert(
                tweet.author_id.clone(),
                AdopterStats {
                    tweets: 0,
                    followers: 0,
                    account_created: tweet.author_account_created,
                    statuses: 0,
                },
            );
        }
        let adopter = self.adopters.get_mut(&tweet.author_id).expect("inserted above");
        adopter.tweets += 1;
        adopter.followers = tweet.author_followers;
        adopter.account_created = tweet.author_account_created;
        adopter.statuses = tweet.author_statuses_count;
        if let Some(src) = retweet_source_author {
            self.graph.add_edge(src, &tweet.author_id);
        }
        for m in &tweet.explicit_mentions {
            self.graph.add_edge(&tweet.author_id, m);
        }
    }
}

impl CycleAccumulators {
    /// Reduces the accumulators to the statistics the features need at
    /// minute `t_p`.
    pub fn summarize(&self, t_p: i64) -> CycleSummary {
        let mut total_followers = 0;
        let mut max_followers = 0;
        let mut passivity_sum = 0.0;
        for a in self.adopters.values() {
            total_followers += a.followers;
            max_followers = max_followers.max(a.followers);
            passivity_sum += passivity(a.account_created, a.statuses, t_p * 60);
        }
        CycleSummary {
            tweet_count: self.tweet_count,
            retweet_count: self.retweet_count,
            mention_count: self.mention_count,
            url_tweets: self.url_tweets,
            special_signal_tweets: self.special_signal_tweets,
            happy_emoticon_tweets: self.happy_emoticon_tweets,
            sad_emoticon_tweets: self.sad_emoticon_tweets,
            pos_score_sum: self.pos_score_sum,
            neg_score_sum: self.neg_score_sum,
            scored_words: self.scored_words,
            cooccurrence_tweets: self.cooccurrence_tweets,
            case_variants: self.case_variants.iter().cloned().collect(),
            adopters: self.adopters.len() as u64,
            total_followers,
            max_followers,
            passivity_sum,
            graph_edges: self.graph.edge_count() as u64,
            degree_histogram: self.graph.degree_histogram(),
        }
    }
}

/// Sufficient statistics of a cycle's tweets at one prediction minute.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub tweet_count: u64,
    pub retweet_count: u64,
    pub mention_count: u64,
    pub url_tweets: u64,
    pub special_signal_tweets: u64,
    pub happy_emoticon_tweets: u64,
    pub sad_emoticon_tweets: u64,
    pub pos_score_sum: f64,
    pub neg_score_sum: f64,
    pub scored_words: u64,
    pub cooccurrence_tweets: u64,
    pub case_variants: Vec<String>,
    pub adopters: u64,
    pub total_followers: u64,
    pub max_followers: u64,
    /// Sum over adopters of their passivity at the prediction minute.
    pub passivity_sum: f64,
    pub graph_edges: u64,
    /// Total degree -> number of vertices.
    pub degree_histogram: BTreeMap<usize, usize>,
}

/// Everything feature extraction needs about one hashtag at a prediction
/// minute `t_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashtagSnapshot {
    pub key: String,
    pub cycle: u32,
    /// Offset of `t_p` from the trigger minute.
    pub stage_minutes: u32,
    pub prediction_minute: i64,
    pub trigger_minute: i64,
    pub first_seen_minute: i64,
    pub burst_onset_minute: Option<i64>,
    pub c1: u32,
    pub threshold: u32,
    /// Counts for minutes `trigger_minute..=prediction_minute`.
    pub series: Vec<u32>,
    pub stats: CycleSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HashtagState {
    pub key: String,
    machine: LifecycleMachine,
    acc: CycleAccumulators,
    pending_minute: Option<i64>,
    pending_count: u32,
}

impl HashtagState {
    pub fn new(key: impl Into<String>, params: LifecycleParams) -> Self {
        HashtagState {
            key: key.into(),
            machine: LifecycleMachine::new(params),
            acc: CycleAccumulators::default(),
            pending_minute: None,
            pending_count: 0,
        }
    }

    pub fn machine(&self) -> &LifecycleMachine {
        &self.machine
    }

    pub fn accumulators(&self) -> &CycleAccumulators {
        &self.acc
    }

    pub fn phase(&self) -> Phase {
        self.machine.phase()
    }

    /// True when nothing can happen until the next tweet arrives.
    pub fn is_idle(&self) -> bool {
        self.pending_minute.is_none() && self.machine.is_idle()
    }

    /// Adds a tweet to the open minute `minute`. Minutes before it must
    /// already be finalized or be skippable.
    pub fn record(
        &mut self,
        minute: i64,
        tweet: &TweetRecord,
        occurrence: &HashtagOccurrence,
        sentiment: &SentimentTally,
        retweet_source_author: Option<&str>,
    ) -> Result<(), LifecycleError> {
        if let Some(last) = self.machine.last_minute() {
            if minute <= last {
                return Err(LifecycleError::OutOfOrder { minute, last });
            }
        }
        match self.pending_minute {
            Some(p) if p != minute => {
                return Err(LifecycleError::OutOfOrder { minute, last: p });
            }
            _ => {}
        }
        if self.machine.is_idle() && self.pending_minute.is_none() {
            self.machine.skip_idle_to(minute - 1);
        }
        self.pending_minute = Some(minute);
        self.pending_count += 1;
        self.acc.record(tweet, occurrence, sentiment, retweet_source_author);
        Ok(())
    }

    /// Finalizes one minute. Returns the keyed events, plus a snapshot when
    /// the minute is a prediction stage of the live episode.
    pub fn finalize(
        &mut self,
        minute: i64,
        stages: &[u32],
    ) -> Result<(Vec<LifecycleEvent>, Option<HashtagSnapshot>), LifecycleError> {
        let count = if self.pending_minute == Some(minute) {
            self.pending_minute = None;
            std::mem::take(&mut self.pending_count)
        } else {
            0
        };
        let transitions = self.machine.advance(minute, count)?;
        let snapshot = self.stage_snapshot(minute, stages);
        let died = transitions.iter().any(|t| t.kind == super::EventKind::Death);
        let events = transitions.into_iter().map(|t| self.keyed(t)).collect();
        if died {
            self.acc = CycleAccumulators::default();
        }
        Ok((events, snapshot))
    }

    /// Finalizes every minute up to and including `to`, one at a time so that
    /// no stage snapshot is skipped. Idle stretches are jumped over.
    pub fn finalize_through(
        &mut self,
        to: i64,
        stages: &[u32],
        events: &mut Vec<LifecycleEvent>,
        snapshots: &mut Vec<HashtagSnapshot>,
    ) -> Result<(), LifecycleError> {
        loop {
            let next = match self.machine.last_minute() {
                Some(last) if last >= to => return Ok(()),
                Some(last) => last + 1,
                None => match self.pending_minute {
                    Some(p) => p.min(to),
                    None => return Ok(()),
                },
            };
            if self.is_idle() {
                self.machine.skip_idle_to(to);
                return Ok(());
            }
            let (e, s) = self.finalize(next, stages)?;
            events.extend(e);
            snapshots.extend(s);
        }
    }

    fn keyed(&self, t: Transition) -> LifecycleEvent {
        LifecycleEvent::from_transition(&self.key, t)
    }

    fn stage_snapshot(&self, minute: i64, stages: &[u32]) -> Option<HashtagSnapshot> {
        let ep = self.machine.episode()?;
        if !matches!(self.phase(), Phase::Triggered | Phase::Bursting | Phase::OffBurst) {
            return None;
        }
        let offset = minute - ep.trigger_minute;
        let stage = stages.iter().copied().find(|&s| s as i64 == offset)?;
        Some(self.snapshot_at(minute, stage))
    }

    /// Snapshot of the live episode at the last finalized minute.
    pub fn snapshot_at(&self, minute: i64, stage_minutes: u32) -> HashtagSnapshot {
        let ep = self.machine.episode().expect("snapshot requires a live episode");
        let s = ep.trigger_minute;
        HashtagSnapshot {
            key: self.key.clone(),
            cycle: self.machine.cycle(),
            stage_minutes,
            prediction_minute: minute,
            trigger_minute: s,
            first_seen_minute: self.machine.first_seen().unwrap_or(s).min(s),
            burst_onset_minute: ep.onset.filter(|&b| b <= minute),
            c1: ep.c1,
            threshold: ep.threshold,
            series: ep.series.slice(s, minute).to_vec(),
            stats: self.acc.summarize(minute),
        }
    }
}
