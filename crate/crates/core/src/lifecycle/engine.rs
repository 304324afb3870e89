//! Streaming engine over many hashtags.
//!
//! Tweets must arrive in non-decreasing minute order. The engine keeps one
//! open minute; when a tweet for a later minute arrives, every non-idle
//! hashtag is finalized through the previous minute. Hashtag states live in
//! shards keyed by a stable hash of the hashtag key; shards are finalized in
//! parallel and their outputs merged in a fixed order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use super::machine::LifecycleParams;
use super::state::{HashtagSnapshot, HashtagState};
use super::{LifecycleError, LifecycleEvent};
use crate::ingest::{SentimentLexicon, TweetRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub params: LifecycleParams,
    /// Offsets from the trigger minute at which snapshots are captured.
    pub stages: Vec<u32>,
    pub shards: usize,
}

impl EngineConfig {
    pub fn new(params: LifecycleParams, stages: Vec<u32>) -> Self {
        EngineConfig {
            params,
            stages,
            shards: 8,
        }
    }
}

/// How the stream ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndOfStream {
    /// Treat the rest of time as silence and resolve every open cycle.
    Drain,
    /// Finalize through this minute and stop.
    At(i64),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngineOutput {
    pub events: Vec<LifecycleEvent>,
    pub snapshots: Vec<HashtagSnapshot>,
    pub tweets: u64,
    pub hashtags: usize,
}

#[derive(Debug, Default)]
struct Shard {
    states: BTreeMap<String, HashtagState>,
    active: BTreeSet<String>,
    events: Vec<LifecycleEvent>,
    snapshots: Vec<HashtagSnapshot>,
}

impl Shard {
    fn close_through(&mut self, minute: i64, stages: &[u32]) -> Result<(), LifecycleError> {
        let mut idle = Vec::new();
        for key in &self.active {
            let st = self.states.get_mut(key).expect("active keys have state");
            st.finalize_through(minute, stages, &mut self.events, &mut self.snapshots)?;
            if st.is_idle() {
                idle.push(key.clone());
            }
        }
        for key in idle {
            self.active.remove(&key);
        }
        Ok(())
    }

    fn drain(&mut self, stages: &[u32]) -> Result<(), LifecycleError> {
        for key in std::mem::take(&mut self.active) {
            let st = self.states.get_mut(&key).expect("active keys have state");
            // Callers close the open minute first, so every active key has a
            // finalized minute to continue from.
            while !st.is_idle() {
                let next = st.machine().last_minute().expect("closed before drain") + 1;
                st.finalize_through(next, stages, &mut self.events, &mut self.snapshots)?;
            }
        }
        Ok(())
    }
}

const PARALLEL_MIN_ACTIVE: usize = 256;

fn shard_of(key: &str, shards: usize) -> usize {
    // FNV-1a: stable across runs and platforms.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in key.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    (h % shards as u64) as usize
}

pub struct Engine {
    config: EngineConfig,
    sentiment: SentimentLexicon,
    shards: Vec<Shard>,
    open_minute: Option<i64>,
    authors: HashMap<String, String>,
    tweets: u64,
}

impl Engine {
    pub fn new(config: EngineConfig, sentiment: SentimentLexicon) -> Result<Self, LifecycleError> {
        config.params.validate()?;
        let shards = (0..config.shards.max(1)).map(|_| Shard::default()).collect();
        Ok(Engine {
            config,
            sentiment,
            shards,
            open_minute: None,
            authors: HashMap::new(),
            tweets: 0,
        })
    }

    pub fn open_minute(&self) -> Option<i64> {
        self.open_minute
    }

    /// Current state of a hashtag, if it has been seen.
    pub fn state(&self, key: &str) -> Option<&HashtagState> {
        self.shards[shard_of(key, self.shards.len())].states.get(key)
    }

    /// Feeds one tweet. A tweet for a minute that is already finalized is
    /// rejected and leaves the engine unchanged.
    pub fn ingest(&mut self, tweet: &TweetRecord) -> Result<(), LifecycleError> {
        let minute = tweet.minute();
        match self.open_minute {
            Some(open) if minute < open => {
                return Err(LifecycleError::OutOfOrder { minute, last: open });
            }
            Some(open) if minute > open => {
                self.close_through(minute - 1)?;
                self.open_minute = Some(minute);
            }
            None => self.open_minute = Some(minute),
            _ => {}
        }
        self.tweets += 1;
        let source_author = tweet
            .retweet_of
            .as_ref()
            .and_then(|id| self.authors.get(id))
            .cloned();
        self.authors.insert(tweet.tweet_id.clone(), tweet.author_id.clone());
        if tweet.hashtags.is_empty() {
            return Ok(());
        }
        let sentiment = self.sentiment.score(&tweet.word_tokens);
        let params = self.config.params;
        let n = self.shards.len();
        for occ in &tweet.hashtags {
            let shard = &mut self.shards[shard_of(&occ.key, n)];
            if !shard.states.contains_key(&occ.key) {
                shard.states.insert(occ.key.clone(), HashtagState::new(occ.key.clone(), params));
            }
            let st = shard.states.get_mut(&occ.key).expect("inserted above");
            st.record(minute, tweet, occ, &sentiment, source_author.as_deref())?;
            if !shard.active.contains(&occ.key) {
                shard.active.insert(occ.key.clone());
            }
        }
        Ok(())
    }

    fn close_through(&mut self, minute: i64) -> Result<(), LifecycleError> {
        let stages = &self.config.stages;
        // Most minutes touch a handful of keys; a parallel dispatch per
        // minute would cost more than the work.
        let active: usize = self.shards.iter().map(|s| s.active.len()).sum();
        if active < PARALLEL_MIN_ACTIVE || rayon::current_num_threads() == 1 {
            self.shards.iter_mut().try_for_each(|s| s.close_through(minute, stages))
        } else {
            self.shards
                .par_iter_mut()
                .try_for_each(|s| s.close_through(minute, stages))
        }
    }

    pub fn finish(mut self, end: EndOfStream) -> Result<EngineOutput, LifecycleError> {
        match end {
            EndOfStream::At(minute) => {
                if self.open_minute.is_some_and(|open| minute < open) {
                    return Err(LifecycleError::OutOfOrder {
                        minute,
                        last: self.open_minute.unwrap_or(minute),
                    });
                }
                self.close_through(minute)?;
            }
            EndOfStream::Drain => {
                if let Some(open) = self.open_minute {
                    self.close_through(open)?;
                }
                let stages = &self.config.stages;
                self.shards.par_iter_mut().try_for_each(|s| s.drain(stages))?;
            }
        }
        let mut out = EngineOutput {
            tweets: self.tweets,
            ..Default::default()
        };
        for shard in self.shards {
            out.hashtags += shard.states.len();
            out.events.extend(shard.events);
            out.snapshots.extend(shard.snapshots);
        }
        out.events
            .sort_by(|a, b| (a.emitted_at, &a.key, a.cycle).cmp(&(b.emitted_at, &b.key, b.cycle)));
        out.snapshots
            .sort_by(|a, b| (&a.key, a.cycle, a.stage_minutes).cmp(&(&b.key, b.cycle, b.stage_minutes)));
        Ok(out)
    }
}

/// Runs a whole tweet sequence through a fresh engine.
pub fn run_engine<'a, I>(
    config: EngineConfig,
    sentiment: SentimentLexicon,
    tweets: I,
    end: EndOfStream,
) -> Result<EngineOutput, LifecycleError>
where
    I: IntoIterator<Item = &'a TweetRecord>,
{
    let mut engine = Engine::new(config, sentiment)?;
    for t in tweets {
        engine.ingest(t)?;
    }
    engine.finish(end)
}
