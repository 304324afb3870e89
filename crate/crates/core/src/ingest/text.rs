//! Text-derived tweet signals: hashtags, urls, mentions, special signals,
//! emoticons and word tokens.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// One hashtag as it appeared in a tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagOccurrence {
    /// Casefolded form, the lifecycle identity of the hashtag.
    pub key: String,
    /// Original-case form without the leading `#`.
    pub surface: String,
}

impl HashtagOccurrence {
    pub fn new(surface: &str) -> Self {
        HashtagOccurrence {
            key: casefold(surface),
            surface: surface.to_string(),
        }
    }
}

pub fn casefold(s: &str) -> String {
    s.to_lowercase()
}

fn is_tag_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Extracts hashtags in order of first appearance, one entry per key.
///
/// A `#` starts a hashtag wherever it occurs, so `#boston#explosion` yields two
/// hashtags. The first surface form seen for a key is kept.
pub fn extract_hashtags(text: &str) -> Vec<HashtagOccurrence> {
    let mut out: Vec<HashtagOccurrence> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '#' {
            continue;
        }
        let start = i + c.len_utf8();
        let mut end = start;
        while let Some(&(j, d)) = chars.peek() {
            if !is_tag_char(d) {
                break;
            }
            end = j + d.len_utf8();
            chars.next();
        }
        if end > start {
            let occ = HashtagOccurrence::new(&text[start..end]);
            if seen.insert(occ.key.clone()) {
                out.push(occ);
            }
        }
    }
    out
}

pub fn is_url_token(token: &str) -> bool {
    token.starts_with("http://") || token.starts_with("https://")
}

pub fn contains_url(text: &str) -> bool {
    text.split_whitespace().any(is_url_token)
}

/// `@handle` tokens in order, handles without the `@`.
pub fn extract_handles(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for token in text.split_whitespace() {
        if let Some(rest) = token.strip_prefix('@') {
            let handle: String = rest.chars().take_while(|&c| is_tag_char(c)).collect();
            if !handle.is_empty() {
                out.push(handle);
            }
        }
    }
    out
}

/// Minimum run length that counts as an emphasis signal.
pub const SPECIAL_RUN: usize = 3;

/// True when the text repeats one letter, `!` or `?` at least three times in a
/// row ("goooood", "!!!", "???").
pub fn detect_special_signal(text: &str) -> bool {
    let mut prev: Option<char> = None;
    let mut run = 0usize;
    for c in text.chars() {
        let eligible = c.is_alphabetic() || c == '!' || c == '?';
        if eligible && prev == Some(c) {
            run += 1;
        } else {
            run = 1;
        }
        prev = Some(c);
        if eligible && run >= SPECIAL_RUN {
            return true;
        }
    }
    false
}

/// Casefolded maximal alphabetic runs, skipping hashtag, mention and url tokens.
pub fn word_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for token in text.split_whitespace() {
        if token.starts_with('#') || token.starts_with('@') || is_url_token(token) {
            continue;
        }
        if token.is_ascii() {
            for run in token.split(|c: char| !c.is_ascii_alphabetic()).filter(|r| !r.is_empty()) {
                out.push(run.to_ascii_lowercase());
            }
            continue;
        }
        let mut current = String::new();
        for c in token.chars() {
            if c.is_alphabetic() {
                current.extend(c.to_lowercase());
            } else if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}
