//! Turns minute-count plans into tweets in the ingest wire format.

use std::collections::VecDeque;
use std::io::Write;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::plan::{uniform, HashtagPlan};
use super::scenario::StreamScenario;
use super::SynthError;
use crate::ingest::{RawTweet, RawUser};

const WORDS: [&str; 30] = [
    "today", "this", "is", "the", "so", "what", "now", "new", "just", "watch", "people", "really", "night",
    "game", "music", "show", "love", "great", "happy", "awesome", "amazing", "good", "sad", "bad", "awful",
    "angry", "hate", "terrible", "best", "worst",
];
const HAPPY: [&str; 4] = [":)", ":D", ";)", ":-)"];
const SAD: [&str; 3] = [":(", ":'(", ":-("];
const RECENT: usize = 32;

struct User {
    id: String,
    followers: u64,
    created_at: i64,
    statuses: u64,
}

fn user_pool(rng: &mut ChaCha8Rng, sc: &StreamScenario) -> Vec<User> {
    let a = &sc.authors;
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    let start_ts = sc.start_minute * 60;
    let mut users: Vec<User> = (0..a.size)
        .map(|i| {
            let followers = (a.followers_median.ln() + a.followers_sigma * z.sample(rng)).exp().round() as u64;
            let statuses = (a.statuses_median.ln() + a.statuses_sigma * z.sample(rng)).exp().round() as u64;
            let age = uniform(rng, a.account_age_days);
            User {
                id: format!("u{i}"),
                followers,
                created_at: start_ts - (age * 86_400.0) as i64,
                statuses,
            }
        })
        .collect();
    // Most-followed first, so that a low index means a prominent author.
    users.sort_by(|x, y| y.followers.cmp(&x.followers).then(x.id.cmp(&y.id)));
    users
}

/// Per-hashtag tweet habits derived from its virality.
struct Habits {
    author_exponent: f64,
    retweet: f64,
    mention: f64,
    url: f64,
}

fn habits(sc: &StreamScenario, virality: f64) -> Habits {
    let e = (sc.virality.effect * virality).exp();
    let p = &sc.probabilities;
    Habits {
        author_exponent: e,
        retweet: (p.retweet * e).min(0.95),
        mention: (p.mention * e).min(0.95),
        url: (p.url * e).min(0.95),
    }
}

fn surface(rng: &mut ChaCha8Rng, key: &str, p: f64) -> String {
    if !rng.random_bool(p) {
        return key.to_string();
    }
    if rng.random_bool(0.5) {
        key.to_uppercase()
    } else {
        let mut c = key.chars();
        c.next()
            .map(|f| f.to_uppercase().chain(c).collect())
            .unwrap_or_default()
    }
}

struct Emitter<'a, W> {
    sc: &'a StreamScenario,
    out: W,
    users: Vec<User>,
    habits: Vec<Habits>,
    recent: Vec<VecDeque<(u64, usize)>>,
    next_id: u64,
    tweets: u64,
}

impl<W: Write> Emitter<'_, W> {
    fn author(&self, rng: &mut ChaCha8Rng, h: usize) -> usize {
        let u: f64 = rng.random();
        let n = self.users.len();
        ((n as f64 * u.powf(self.habits[h].author_exponent)) as usize).min(n - 1)
    }

    fn tweet(&self, rng: &mut ChaCha8Rng, plans: &[HashtagPlan], tags: &[usize]) -> (RawTweet, usize) {
        let h = tags[0];
        let hb = &self.habits[h];
        let p = &self.sc.probabilities;
        let author = self.author(rng, h);
        let mut text = String::new();
        let mut mentions = Vec::new();
        let mut retweet_of = None;
        if rng.random_bool(hb.retweet) {
            let recent = &self.recent[h];
            if !recent.is_empty() {
                let (id, src) = recent[rng.random_range(0..recent.len())];
                retweet_of = Some(format!("t{id}"));
                text.push_str(&format!("RT @{}: ", self.users[src].id));
                mentions.push(self.users[src].id.clone());
            }
        }
        if rng.random_bool(hb.mention) {
            let m = rng.random_range(0..self.users.len());
            text.push_str(&format!("@{} ", self.users[m].id));
            mentions.push(self.users[m].id.clone());
        }
        let words = rng.random_range(2..=6);
        for i in 0..words {
            let w = WORDS.choose(rng).expect("non-empty word list");
            if i == 0 && rng.random_bool(p.special_signal) {
                text.push_str(&w.replacen('o', "ooo", 1));
                text.push_str("!!! ");
            } else {
                text.push_str(w);
                text.push(' ');
            }
        }
        if rng.random_bool(p.happy_emoticon) {
            text.push_str(HAPPY.choose(rng).expect("non-empty"));
            text.push(' ');
        }
        if rng.random_bool(p.sad_emoticon) {
            text.push_str(SAD.choose(rng).expect("non-empty"));
            text.push(' ');
        }
        if rng.random_bool(hb.url) {
            text.push_str(&format!("http://t.co/{:06x} ", rng.random_range(0..0xFF_FFFFu32)));
        }
        for (i, &t) in tags.iter().enumerate() {
            if i > 0 {
                text.push(' ');
            }
            text.push('#');
            text.push_str(&surface(rng, &plans[t].key, p.case_variant));
        }
        let u = &self.users[author];
        let raw = RawTweet {
            id: String::new(),
            ts: 0,
            user: RawUser {
                id: u.id.clone(),
                followers: u.followers,
                created_at: u.created_at,
                statuses: u.statuses,
            },
            text,
            retweet_of,
            mentions: Some(mentions),
        };
        (raw, author)
    }

    fn minute(&mut self, rng: &mut ChaCha8Rng, plans: &[HashtagPlan], active: &[usize], m: i64) -> Result<(), SynthError> {
        let mut slots = Vec::new();
        for &h in active {
            let p = &plans[h];
            let c = p.counts[(m - p.origin) as usize];
            slots.extend(std::iter::repeat_n(h, c as usize));
        }
        if slots.is_empty() {
            return Ok(());
        }
        rand::seq::SliceRandom::shuffle(slots.as_mut_slice(), rng);
        let mut used = vec![false; slots.len()];
        let mut batch = Vec::with_capacity(slots.len());
        for i in 0..slots.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let mut tags = vec![slots[i]];
            if rng.random_bool(self.sc.probabilities.cooccurrence) {
                if let Some(j) = (i + 1..slots.len().min(i + 9)).find(|&j| !used[j] && slots[j] != slots[i]) {
                    used[j] = true;
                    tags.push(slots[j]);
                }
            }
            let (raw, author) = self.tweet(rng, plans, &tags);
            let second: u32 = rng.random_range(0..60);
            batch.push((second, raw, author, tags));
        }
        batch.sort_by_key(|b| b.0);
        let minute_ts = (self.sc.start_minute + m) * 60;
        let mut fresh = Vec::with_capacity(batch.len());
        for (second, mut raw, author, tags) in batch {
            let id = self.next_id;
            self.next_id += 1;
            raw.id = format!("t{id}");
            raw.ts = minute_ts + second as i64;
            serde_json::to_writer(&mut self.out, &raw).map_err(|e| SynthError::Io(e.to_string()))?;
            self.out.write_all(b"\n").map_err(|e| SynthError::Io(e.to_string()))?;
            self.tweets += 1;
            fresh.push((id, author, tags));
        }
        // Only tweets from finished minutes can be retweeted, so a retweet
        // never precedes its source in the stream.
        for (id, author, tags) in fresh {
            for h in tags {
                let r = &mut self.recent[h];
                if r.len() == RECENT {
                    r.pop_front();
                }
                r.push_back((id, author));
            }
        }
        Ok(())
    }
}

/// Writes one JSON line per tweet, minute by minute, and returns the count.
pub fn emit_stream<W: Write>(
    rng: &mut ChaCha8Rng,
    sc: &StreamScenario,
    plans: &[HashtagPlan],
    out: W,
) -> Result<u64, SynthError> {
    let users = user_pool(rng, sc);
    let mut em = Emitter {
        sc,
        out,
        habits: plans.iter().map(|p| habits(sc, p.virality)).collect(),
        recent: vec![VecDeque::new(); plans.len()],
        users,
        next_id: 0,
        tweets: 0,
    };
    let mut order: Vec<usize> = (0..plans.len()).collect();
    order.sort_by_key(|&i| (plans[i].origin, i));
    let first = plans.iter().map(|p| p.origin).min().unwrap_or(0);
    let last = plans.iter().map(HashtagPlan::end).max().unwrap_or(0);
    let mut next = 0;
    let mut active: Vec<usize> = Vec::new();
    for m in first..last {
        while next < order.len() && plans[order[next]].origin <= m {
            active.push(order[next]);
            next += 1;
        }
        active.retain(|&h| plans[h].end() > m);
        active.sort_unstable();
        em.minute(rng, plans, &active, m)?;
    }
    em.out.flush().map_err(|e| SynthError::Io(e.to_string()))?;
    Ok(em.tweets)
}
