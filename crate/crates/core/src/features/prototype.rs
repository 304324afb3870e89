//! Prototype features: labels of the most similar historic hashtags at the
//! same stage.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::schema::{BASE_DIMS, PROTOTYPE_K};
use super::FeatureError;

/// The three prediction tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Will the hashtag burst?
    Burst,
    /// Minutes until the burst onset.
    Tbb,
    /// Minutes until off-burst.
    Tra,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Burst, Task::Tbb, Task::Tra];

    pub fn name(self) -> &'static str {
        match self {
            Task::Burst => "burst",
            Task::Tbb => "tbb",
            Task::Tra => "tra",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Per-feature mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Population statistics over `rows`; an empty set gives mean 0, std 0.
    pub fn fit<'a, I>(rows: I, dims: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let rows: Vec<&[f64]> = rows.into_iter().collect();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dims];
        let mut std = vec![0.0; dims];
        if rows.is_empty() {
            return NormStats { mean, std };
        }
        for r in &rows {
            for (m, v) in mean.iter_mut().zip(r.iter()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        for r in &rows {
            for ((s, v), m) in std.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        std.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        NormStats { mean, std }
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    /// z-scores; features with zero spread map to 0.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

/// `1 / (1 + ||a - b||)` on normalized vectors.
pub fn similarity(a: &[f64], b: &[f64]) -> Result<f64, FeatureError> {
    if a.len() != b.len() {
        return Err(FeatureError::SchemaMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(1.0 / (1.0 + d2.sqrt()))
}

/// One historic snapshot with what each task knows about it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoricEntry {
    pub key: String,
    pub cycle: u32,
    pub base: Vec<f64>,
    /// Not yet burst at the snapshot; a Task 1 prototype.
    pub burst_candidate: bool,
    pub burst: bool,
    /// Set when the entry is a Task 2 prototype.
    pub tbb: Option<i64>,
    /// Set when the entry is a Task 3 prototype.
    pub tra: Option<i64>,
}

impl HistoricEntry {
    fn value(&self, task: Task) -> Option<f64> {
        match task {
            Task::Burst => self.burst_candidate.then_some(self.burst as u8 as f64),
            Task::Tbb => self.tbb.map(|v| v as f64),
            Task::Tra => self.tra.map(|v| v as f64),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageIndex {
    pub norm: NormStats,
    /// Sorted by (key, cycle).
    pub entries: Vec<HistoricEntry>,
    #[serde(skip)]
    normalized: OnceLock<Vec<Vec<f64>>>,
}

impl PartialEq for StageIndex {
    fn eq(&self, other: &Self) -> bool {
        self.norm == other.norm && self.entries == other.entries
    }
}

impl StageIndex {
    pub fn new(mut entries: Vec<HistoricEntry>) -> Self {
        entries.sort_by(|a, b| (&a.key, a.cycle).cmp(&(&b.key, b.cycle)));
        let norm = NormStats::fit(entries.iter().map(|e| e.base.as_slice()), BASE_DIMS);
        StageIndex {
            norm,
            entries,
            normalized: OnceLock::new(),
        }
    }

    fn normalized(&self) -> &[Vec<f64>] {
        self.normalized
            .get_or_init(|| self.entries.iter().map(|e| self.norm.apply(&e.base)).collect())
    }

    /// Task prototypes ranked by similarity to `base`, most similar first;
    /// equal similarities keep (key, cycle) order. Returns (similarity, label).
    pub fn ranked(&self, base: &[f64], task: Task) -> Result<Vec<(f64, f64)>, FeatureError> {
        if base.len() != self.norm.dims() {
            return Err(FeatureError::SchemaMismatch {
                expected: self.norm.dims(),
                found: base.len(),
            });
        }
        let q = self.norm.apply(base);
        let mut scored = Vec::new();
        for (i, (e, z)) in self.entries.iter().zip(self.normalized()).enumerate() {
            if let Some(v) = e.value(task) {
                scored.push((similarity(&q, z)?, i, v));
            }
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(scored.into_iter().map(|(s, _, v)| (s, v)).collect())
    }
}

/// Ten values for k = 1..=10 from a ranked prototype list. Task 1 counts
/// bursting prototypes among the top k; Tasks 2/3 take the
/// similarity-weighted mean label. Short lists repeat their last value; an
/// empty list gives zeros.
pub fn prototype_values(ranked: &[(f64, f64)], task: Task) -> [f64; PROTOTYPE_K] {
    let mut out = [0.0; PROTOTYPE_K];
    let mut count = 0.0;
    let mut wsum = 0.0;
    let mut sims = 0.0;
    let mut last = 0.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if let Some(&(sim, v)) = ranked.get(k) {
            count += v;
            wsum += sim * v;
            sims += sim;
            last = match task {
                Task::Burst => count,
                Task::Tbb | Task::Tra => wsum / sims,
            };
        }
        *slot = last;
    }
    out
}

/// Historic snapshots per stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrototypeIndex {
    pub stages: BTreeMap<u32, StageIndex>,
}

impl PrototypeIndex {
    pub fn build(by_stage: BTreeMap<u32, Vec<HistoricEntry>>) -> Self {
        PrototypeIndex {
            stages: by_stage.into_iter().map(|(s, e)| (s, StageIndex::new(e))).collect(),
        }
    }

    pub fn stage(&self, stage: u32) -> Result<&StageIndex, FeatureError> {
        self.stages.get(&stage).ok_or(FeatureError::MissingIndex { stage })
    }

    pub fn prototype_features(&self, stage: u32, base: &[f64], task: Task) -> Result<[f64; PROTOTYPE_K], FeatureError> {
        let ranked = self.stage(stage)?.ranked(base, task)?;
        Ok(prototype_values(&ranked, task))
    }
}
