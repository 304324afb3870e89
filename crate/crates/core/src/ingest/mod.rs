//! Parsing of the line-delimited tweet stream.
//!
//! Each input line is one JSON object:
//!
//! ```text
//! {"id":"t1","ts":1351728000,"user":{"id":"u1","followers":10,"created_at":1300000000,"statuses":42},
//!  "text":"RT @bob great!!! #Tag","retweet_of":"t0","mentions":["u2"]}
//! ```
//!
//! `retweet_of` and `mentions` are optional; unknown fields are ignored. All
//! text signals (hashtags, urls, emoticons, special signals, word tokens) are
//! derived from `text`. When `mentions` is absent, `@handles` in the text are
//! used as user ids.

mod lexicon;
mod text;

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{EmoticonLexicon, Lexicons, SentimentLexicon, SentimentTally, WordScore};
pub use text::{
    casefold, contains_url, detect_special_signal, extract_handles, extract_hashtags, is_url_token,
    word_tokens, HashtagOccurrence,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Wire format of one stream line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub ts: i64,
    pub user: RawUser,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mentions: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawUser {
    pub id: String,
    pub followers: u64,
    pub created_at: i64,
    pub statuses: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub timestamp: i64,
    pub text: String,
    pub retweet_of: Option<String>,
    pub explicit_mentions: Vec<String>,
    pub author_followers: u64,
    pub author_account_created: i64,
    pub author_statuses_count: u64,
    pub hashtags: Vec<HashtagOccurrence>,
    pub urls_present: bool,
    pub special_signal: bool,
    pub happy_emoticons: u32,
    pub sad_emoticons: u32,
    pub word_tokens: Vec<String>,
}

impl TweetRecord {
    /// UTC epoch minute of the tweet.
    pub fn minute(&self) -> i64 {
        self.timestamp.div_euclid(60)
    }

    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }
}

impl RawTweet {
    pub fn into_record(self, emoticons: &EmoticonLexicon, line: usize) -> Result<TweetRecord, IngestError> {
        let bad = |reason: String| IngestError::Parse { line, reason };
        if self.ts <= 0 {
            return Err(bad(format!("timestamp {} is not positive", self.ts)));
        }
        if self.user.created_at > self.ts {
            return Err(bad(format!(
                "account created at {} after tweet timestamp {}",
                self.user.created_at, self.ts
            )));
        }
        let (happy, sad) = emoticons.count(&self.text);
        let explicit_mentions = match self.mentions {
            Some(m) => m,
            None => extract_handles(&self.text),
        };
        Ok(TweetRecord {
            hashtags: extract_hashtags(&self.text),
            urls_present: contains_url(&self.text),
            special_signal: detect_special_signal(&self.text),
            happy_emoticons: happy,
            sad_emoticons: sad,
            word_tokens: word_tokens(&self.text),
            tweet_id: self.id,
            author_id: self.user.id,
            timestamp: self.ts,
            text: self.text,
            retweet_of: self.retweet_of,
            explicit_mentions,
            author_followers: self.user.followers,
            author_account_created: self.user.created_at,
            author_statuses_count: self.user.statuses,
        })
    }
}

/// Parses one stream line. `line` is the 1-based line number used in errors.
pub fn parse_tweet(json: &str, line: usize, emoticons: &EmoticonLexicon) -> Result<TweetRecord, IngestError> {
    let raw: RawTweet = serde_json::from_str(json).map_err(|e| IngestError::Parse {
        line,
        reason: e.to_string(),
    })?;
    raw.into_record(emoticons, line)
}

/// Iterates over a stream, yielding one result per non-blank line. A bad
/// record produces an error item and iteration continues.
pub struct TweetReader<'a, R> {
    reader: R,
    line: String,
    line_no: usize,
    emoticons: &'a EmoticonLexicon,
}

impl<'a, R: BufRead> TweetReader<'a, R> {
    pub fn new(reader: R, emoticons: &'a EmoticonLexicon) -> Self {
        TweetReader {
            reader,
            line: String::new(),
            line_no: 0,
            emoticons,
        }
    }
}

impl<R: BufRead> Iterator for TweetReader<'_, R> {
    type Item = Result<TweetRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line.clear();
            match self.reader.read_line(&mut self.line) {
                Ok(0) => return None,
                Ok(_) => self.line_no += 1,
                Err(e) => {
                    self.line_no += 1;
                    return Some(Err(IngestError::Parse {
                        line: self.line_no,
                        reason: e.to_string(),
                    }));
                }
            }
            if self.line.trim().is_empty() {
                continue;
            }
            return Some(parse_tweet(&self.line, self.line_no, self.emoticons));
        }
    }
}
