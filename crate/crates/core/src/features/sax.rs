//! Symbolic representation of the count series and the gapped 3-grams
//! built from it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::schema::TOP_GRAMS;
use super::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaxConfig {
    pub alphabet_size: usize,
    pub paa_segments: usize,
}

impl Default for SaxConfig {
    fn default() -> Self {
        SaxConfig {
            alphabet_size: 6,
            paa_segments: 8,
        }
    }
}

impl SaxConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(2..=10).contains(&self.alphabet_size) {
            return Err(FeatureError::InvalidConfig(format!(
                "alphabet size {} outside 2..=10",
                self.alphabet_size
            )));
        }
        if self.paa_segments < 3 {
            return Err(FeatureError::InvalidConfig(format!(
                "{} PAA segments; need at least 3",
                self.paa_segments
            )));
        }
        Ok(())
    }

    /// The symbol used for flat series: the lower of the two middle letters
    /// for even alphabets.
    pub fn middle_symbol(&self) -> char {
        symbol((self.alphabet_size - 1) / 2)
    }
}

fn symbol(i: usize) -> char {
    (b'A' + i as u8) as char
}

/// Equiprobable cut points of the standard normal for `alphabet_size` bins.
pub fn gaussian_breakpoints(alphabet_size: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (1..alphabet_size)
        .map(|i| normal.inverse_cdf(i as f64 / alphabet_size as f64))
        .collect()
}

/// Piecewise aggregate approximation into `segments` means. When the length
/// is not a multiple of `segments`, points straddling a boundary contribute
/// fractionally to both sides.
pub fn paa(values: &[f64], segments: usize) -> Vec<f64> {
    let n = values.len();
    let mut sums = vec![0.0; segments];
    for k in 0..n * segments {
        sums[k / n] += values[k / segments];
    }
    sums.into_iter().map(|s| s / n as f64).collect()
}

/// SAX word of the series. Series shorter than the segment count get one
/// symbol per point.
pub fn sax_encode(series: &[u32], cfg: &SaxConfig) -> String {
    let n = series.len();
    if n == 0 {
        return String::new();
    }
    let segments = cfg.paa_segments.min(n);
    let values: Vec<f64> = series.iter().map(|&v| v as f64).collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if std == 0.0 {
        return std::iter::repeat_n(cfg.middle_symbol(), segments).collect();
    }
    let z: Vec<f64> = values.iter().map(|v| (v - mean) / std).collect();
    let cuts = gaussian_breakpoints(cfg.alphabet_size);
    paa(&z, segments)
        .into_iter()
        .map(|m| symbol(cuts.iter().filter(|&&b| m >= b).count()))
        .collect()
}

/// Order-preserving, possibly gapped 3-symbol subsequences that end with the
/// final symbol.
pub fn extract_3grams(symbols: &str) -> BTreeSet<String> {
    let s: Vec<char> = symbols.chars().collect();
    let mut out = BTreeSet::new();
    if s.len() < 3 {
        return out;
    }
    let last = s.len() - 1;
    for i in 0..last {
        for j in i + 1..last {
            out.insert([s[i], s[j], s[last]].iter().collect());
        }
    }
    out
}

/// Most frequent 3-grams per stage over bursting hashtags.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopGramTables {
    pub stages: BTreeMap<u32, Vec<String>>,
}

impl TopGramTables {
    /// Ranks grams by the number of gram sets containing them, ties in
    /// lexicographic order, keeping the top five per stage.
    pub fn build<'a, I>(bursting: I) -> Self
    where
        I: IntoIterator<Item = (u32, &'a BTreeSet<String>)>,
    {
        let mut df: BTreeMap<u32, BTreeMap<&'a str, usize>> = BTreeMap::new();
        for (stage, grams) in bursting {
            let table = df.entry(stage).or_default();
            for g in grams {
                *table.entry(g.as_str()).or_insert(0) += 1;
            }
        }
        let stages = df
            .into_iter()
            .map(|(stage, counts)| {
                let mut ranked: Vec<_> = counts.into_iter().collect();
                ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
                (stage, ranked.into_iter().take(TOP_GRAMS).map(|(g, _)| g.to_string()).collect())
            })
            .collect();
        TopGramTables { stages }
    }

    pub fn for_stage(&self, stage: u32) -> Result<&[String], FeatureError> {
        self.stages
            .get(&stage)
            .map(Vec::as_slice)
            .ok_or(FeatureError::MissingTopGrams { stage })
    }
}

/// 0/1 indicator per table entry; slots past a short table stay 0.
pub fn top_gram_features(grams: &BTreeSet<String>, top: &[String]) -> [f64; TOP_GRAMS] {
    let mut out = [0.0; TOP_GRAMS];
    for (slot, g) in out.iter_mut().zip(top) {
        *slot = grams.contains(g) as u8 as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn worked_example() {
        assert_eq!(extract_3grams("ACBF"), set(&["ACF", "ABF", "CBF"]));
    }

    #[test]
    fn repeated_and_short() {
        assert_eq!(extract_3grams("AAAB"), set(&["AAB"]));
        assert!(extract_3grams("AB").is_empty());
    }

    #[test]
    fn flat_series_uses_lower_middle() {
        assert_eq!(sax_encode(&[4; 30], &SaxConfig::default()), "CCCCCCCC");
        assert_eq!(sax_encode(&[4; 3], &SaxConfig::default()), "CCC");
    }

    #[test]
    fn increasing_series_is_non_decreasing() {
        let s: Vec<u32> = (0..100).collect();
        let w = sax_encode(&s, &SaxConfig::default());
        assert_eq!(w.len(), 8);
        assert!(w.as_bytes().windows(2).all(|p| p[0] <= p[1]));
        assert!(w.starts_with('A') && w.ends_with('F'));
    }

    #[test]
    fn breakpoints_for_four_letters() {
        let b = gaussian_breakpoints(4);
        assert!((b[0] + 0.6745).abs() < 1e-4);
        assert!(b[1].abs() < 1e-12);
        assert!((b[2] - 0.6745).abs() < 1e-4);
    }

    #[test]
    fn fractional_paa() {
        // 3 points into 2 segments: [a, a/2 + b/2 ... ] weights 2:1 and 1:2
        let m = paa(&[3.0, 6.0, 9.0], 2);
        assert!((m[0] - 4.0).abs() < 1e-12);
        assert!((m[1] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn ranking_by_document_frequency() {
        let a = set(&["ABF", "CBF"]);
        let b = set(&["ABF", "CBF"]);
        let c = set(&["ABF", "AAF"]);
        let d = set(&["BBF"]);
        let t = TopGramTables::build([(5, &a), (5, &b), (5, &c), (5, &d)]);
        assert_eq!(t.for_stage(5).unwrap(), ["ABF", "CBF", "AAF", "BBF"]);
        assert!(t.for_stage(15).is_err());
    }

    #[test]
    fn indicators() {
        let top: Vec<String> = ["A", "B", "C", "D", "E"].iter().map(|s| s.to_string()).collect();
        assert_eq!(top_gram_features(&set(&["A", "B", "C", "D", "E", "X"]), &top), [1.0; 5]);
        assert_eq!(top_gram_features(&set(&["X"]), &top), [0.0; 5]);
        assert_eq!(top_gram_features(&set(&["A"]), &top[..1]), [1.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
