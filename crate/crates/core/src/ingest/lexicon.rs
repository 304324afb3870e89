//! Sentiment and emoticon lexicons.
//!
//! Sentiment lexicons are TSV (`word<TAB>pos<TAB>neg`, scores in `[0, 1]`).
//! Emoticon lexicons hold a `[happy]` and a `[sad]` section with one token per
//! line. Both ship with small bundled defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestError;

const DEFAULT_SENTIMENT: &str = include_str!("../../assets/sentiment.tsv");
const DEFAULT_EMOTICONS: &str = include_str!("../../assets/emoticons.txt");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordScore {
    pub pos: f64,
    pub neg: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentLexicon {
    words: BTreeMap<String, WordScore>,
}

/// Lexicon hit totals for one tweet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentTally {
    pub pos_sum: f64,
    pub neg_sum: f64,
    pub scored_words: u64,
}

impl SentimentLexicon {
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut words = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(IngestError::Lexicon {
                    line: line_no,
                    reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            let score = |s: &str| -> Result<f64, IngestError> {
                let v: f64 = s.trim().parse().map_err(|_| IngestError::Lexicon {
                    line: line_no,
                    reason: format!("score {s:?} is not a number"),
                })?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(IngestError::Lexicon {
                        line: line_no,
                        reason: format!("score {v} outside [0, 1]"),
                    });
                }
                Ok(v)
            };
            let entry = WordScore {
                pos: score(fields[1])?,
                neg: score(fields[2])?,
            };
            words.insert(fields[0].trim().to_lowercase(), entry);
        }
        Ok(SentimentLexicon { words })
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, f64, f64)>,
        S: Into<String>,
    {
        let words = entries
            .into_iter()
            .map(|(w, pos, neg)| (w.into(), WordScore { pos, neg }))
            .collect();
        SentimentLexicon { words }
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_SENTIMENT).expect("bundled sentiment lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        Self::parse(&read(path)?)
    }

    pub fn get(&self, word: &str) -> Option<WordScore> {
        self.words.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Sums lexicon scores over the tokens that have an entry.
    pub fn score(&self, tokens: &[String]) -> SentimentTally {
        let mut tally = SentimentTally::default();
        for t in tokens {
            if let Some(s) = self.words.get(t) {
                tally.pos_sum += s.pos;
                tally.neg_sum += s.neg;
                tally.scored_words += 1;
            }
        }
        tally
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "EmoticonLists", into = "EmoticonLists")]
pub struct EmoticonLexicon {
    happy: Vec<String>,
    sad: Vec<String>,
    /// Bytes that begin some entry.
    starts: [bool; 256],
}

#[derive(Serialize, Deserialize)]
struct EmoticonLists {
    happy: Vec<String>,
    sad: Vec<String>,
}

impl From<EmoticonLists> for EmoticonLexicon {
    fn from(l: EmoticonLists) -> Self {
        let mut starts = [false; 256];
        for e in l.happy.iter().chain(&l.sad) {
            if let Some(&b) = e.as_bytes().first() {
                starts[b as usize] = true;
            }
        }
        EmoticonLexicon {
            happy: l.happy,
            sad: l.sad,
            starts,
        }
    }
}

impl From<EmoticonLexicon> for EmoticonLists {
    fn from(l: EmoticonLexicon) -> Self {
        EmoticonLists {
            happy: l.happy,
            sad: l.sad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mood {
    Happy,
    Sad,
}

impl EmoticonLexicon {
    pub fn new<S: Into<String>>(happy: impl IntoIterator<Item = S>, sad: impl IntoIterator<Item = S>) -> Self {
        EmoticonLists {
            happy: happy.into_iter().map(Into::into).collect(),
            sad: sad.into_iter().map(Into::into).collect(),
        }
        .into()
    }

    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut happy = Vec::new();
        let mut sad = Vec::new();
        let mut section: Option<Mood> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[happy]" => section = Some(Mood::Happy),
                "[sad]" => section = Some(Mood::Sad),
                token => match section {
                    Some(Mood::Happy) => happy.push(token.to_string()),
                    Some(Mood::Sad) => sad.push(token.to_string()),
                    None => {
                        return Err(IngestError::Lexicon {
                            line: idx + 1,
                            reason: "emoticon listed before any [happy]/[sad] section".into(),
                        })
                    }
                },
            }
        }
        Ok(EmoticonLists { happy, sad }.into())
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_EMOTICONS).expect("bundled emoticon lexicon is valid")
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        Self::parse(&read(path)?)
    }

    fn longest_at(&self, s: &str) -> Option<(Mood, usize)> {
        let mut best: Option<(Mood, usize)> = None;
        let lists = [(Mood::Happy, &self.happy), (Mood::Sad, &self.sad)];
        for (mood, list) in lists {
            for e in list.iter() {
                if s.starts_with(e.as_str()) && best.is_none_or(|(_, len)| e.len() > len) {
                    best = Some((mood, e.len()));
                }
            }
        }
        best
    }

    /// Counts emoticon occurrences per class. Each whitespace token is scanned
    /// left to right, taking the longest lexicon entry at each position.
    pub fn count(&self, text: &str) -> (u32, u32) {
        let (mut happy, mut sad) = (0, 0);
        for token in text.split_whitespace() {
            let bytes = token.as_bytes();
            let mut i = 0;
            while i < bytes.len() {
                // An entry's first byte is never a UTF-8 continuation byte,
                // so this also keeps `i` on a char boundary.
                if !self.starts[bytes[i] as usize] {
                    i += 1;
                    continue;
                }
                match self.longest_at(&token[i..]) {
                    Some((mood, len)) => {
                        match mood {
                            Mood::Happy => happy += 1,
                            Mood::Sad => sad += 1,
                        }
                        i += len;
                    }
                    None => i += 1,
                }
            }
        }
        (happy, sad)
    }
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Everything the parser and the content features need from lexicons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicons {
    pub sentiment: SentimentLexicon,
    pub emoticons: EmoticonLexicon,
}

impl Lexicons {
    pub fn bundled() -> Self {
        Lexicons {
            sentiment: SentimentLexicon::bundled(),
            emoticons: EmoticonLexicon::bundled(),
        }
    }

    pub fn load(sentiment: Option<&Path>, emoticons: Option<&Path>) -> Result<Self, IngestError> {
        Ok(Lexicons {
            sentiment: match sentiment {
                Some(p) => SentimentLexicon::load(p)?,
                None => SentimentLexicon::bundled(),
            },
            emoticons: match emoticons {
                Some(p) => EmoticonLexicon::load(p)?,
                None => EmoticonLexicon::bundled(),
            },
        })
    }
}
