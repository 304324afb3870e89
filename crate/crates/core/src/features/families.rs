//! Meme, user, content, hashtag and dormancy features of a snapshot.

use super::FeatureError;
use crate::lifecycle::{CycleSummary, HashtagSnapshot};

const SECONDS_PER_DAY: i64 = 86_400;

/// tweet, author, retweet and mention counts followed by the url, author,
/// retweet and mention ratios over tweet count.
pub fn meme_features(stats: &CycleSummary) -> Result<[f64; 8], FeatureError> {
    if stats.tweet_count == 0 {
        return Err(FeatureError::EmptyCycle);
    }
    let n = stats.tweet_count as f64;
    let authors = stats.adopters as f64;
    let rts = stats.retweet_count as f64;
    let mentions = stats.mention_count as f64;
    Ok([
        n,
        authors,
        rts,
        mentions,
        stats.url_tweets as f64 / n,
        authors / n,
        rts / n,
        mentions / n,
    ])
}

/// `N_d / (1 + N_t)` with `N_d` the account age in whole days.
pub fn passivity(account_created: i64, statuses: u64, at_seconds: i64) -> f64 {
    let days = ((at_seconds - account_created).max(0) / SECONDS_PER_DAY) as f64;
    days / (1.0 + statuses as f64)
}

/// Total and maximum followers over adopters, and their mean passivity.
pub fn user_features(stats: &CycleSummary) -> [f64; 3] {
    if stats.adopters == 0 {
        return [0.0; 3];
    }
    [
        stats.total_followers as f64,
        stats.max_followers as f64,
        stats.passivity_sum / stats.adopters as f64,
    ]
}

/// Special-signal tweets, average positive and negative word scores, and
/// happy / sad emoticon tweets.
pub fn content_features(stats: &CycleSummary) -> [f64; 5] {
    let (pos, neg) = if stats.scored_words == 0 {
        (0.0, 0.0)
    } else {
        let w = stats.scored_words as f64;
        (stats.pos_score_sum / w, stats.neg_score_sum / w)
    };
    [
        stats.special_signal_tweets as f64,
        pos,
        neg,
        stats.happy_emoticon_tweets as f64,
        stats.sad_emoticon_tweets as f64,
    ]
}

/// Key length in characters, surface variants, co-occurrence tweets.
pub fn hashtag_features(key: &str, stats: &CycleSummary) -> [f64; 3] {
    [
        key.chars().count() as f64,
        stats.case_variants.len() as f64,
        stats.cooccurrence_tweets as f64,
    ]
}

/// Minutes between first sighting and trigger, and minutes since onset.
pub fn dormancy_features(snap: &HashtagSnapshot) -> [f64; 2] {
    let dormant = (snap.trigger_minute - snap.first_seen_minute) as f64;
    let bursting = snap
        .burst_onset_minute
        .filter(|&b| b <= snap.prediction_minute)
        .map_or(0.0, |b| (snap.prediction_minute - b) as f64);
    [dormant, bursting]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifecycle::{AdopterStats, CycleAccumulators};

    fn adopter(followers: u64, created: i64, statuses: u64) -> AdopterStats {
        AdopterStats {
            tweets: 1,
            followers,
            account_created: created,
            statuses,
        }
    }

    #[test]
    fn meme_ratios() {
        let mut acc = CycleAccumulators {
            tweet_count: 100,
            retweet_count: 25,
            mention_count: 10,
            url_tweets: 20,
            ..Default::default()
        };
        for i in 0..40 {
            acc.adopters.insert(format!("u{i}"), adopter(1, 0, 0));
        }
        assert_eq!(
            meme_features(&acc.summarize(0)).unwrap(),
            [100.0, 40.0, 25.0, 10.0, 0.2, 0.4, 0.25, 0.1]
        );
        assert!(matches!(
            meme_features(&CycleSummary::default()),
            Err(FeatureError::EmptyCycle)
        ));
    }

    #[test]
    fn single_author() {
        let mut acc = CycleAccumulators {
            tweet_count: 60,
            ..Default::default()
        };
        acc.adopters.insert("a".into(), adopter(1, 0, 0));
        let f = meme_features(&acc.summarize(0)).unwrap();
        assert_eq!(f[5], 1.0 / 60.0);
        assert_eq!((f[2], f[3], f[6], f[7]), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn followers_and_passivity() {
        let mut acc = CycleAccumulators::default();
        acc.adopters.insert("a".into(), adopter(100, 0, 19));
        acc.adopters.insert("b".into(), adopter(5000, 0, 19));
        acc.adopters.insert("c".into(), adopter(30, 0, 19));
        let t_p = 10 * 1440 + 5;
        let f = user_features(&acc.summarize(t_p));
        assert_eq!(f[0], 5130.0);
        assert_eq!(f[1], 5000.0);
        assert_eq!(f[2], 0.5);
        assert_eq!(passivity(1000, 3, 1000 + 86_399), 0.0);
    }

    #[test]
    fn sentiment_averages() {
        let acc = CycleAccumulators {
            pos_score_sum: 4.0,
            scored_words: 8,
            special_signal_tweets: 3,
            ..Default::default()
        };
        let f = content_features(&acc.summarize(0));
        assert_eq!((f[0], f[1]), (3.0, 0.5));
        assert_eq!(content_features(&CycleSummary::default())[1..3], [0.0, 0.0]);
    }

    #[test]
    fn hashtag_length_counts_chars() {
        let mut acc = CycleAccumulators::default();
        for v in ["3peopleulove", "3PeopleuLove", "3PeopleULove"] {
            acc.case_variants.insert(v.into());
        }
        assert_eq!(hashtag_features("3peopleulove", &acc.summarize(0)), [12.0, 3.0, 0.0]);
    }

    #[test]
    fn dormancy() {
        let snap = HashtagSnapshot {
            key: "x".into(),
            cycle: 0,
            stage_minutes: 5,
            prediction_minute: 255,
            trigger_minute: 250,
            first_seen_minute: 100,
            burst_onset_minute: None,
            c1: 11,
            threshold: 61,
            series: vec![11; 6],
            stats: CycleSummary::default(),
        };
        assert_eq!(dormancy_features(&snap), [150.0, 0.0]);
        let burst = HashtagSnapshot {
            burst_onset_minute: Some(252),
            ..snap
        };
        assert_eq!(dormancy_features(&burst), [150.0, 3.0]);
    }
}
