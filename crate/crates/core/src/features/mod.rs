//! Feature extraction at a prediction minute: seven families assembled into
//! a fixed 58-dimensional layout.

mod families;
mod matrix;
mod network;
mod prototype;
mod sax;
mod schema;
mod timeseries;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use families::{content_features, dormancy_features, hashtag_features, meme_features, passivity, user_features};
pub use matrix::{FeatureMatrix, FeatureRow};
pub use network::{network_features, network_features_from_degrees, NetworkFeatures, RetweetMentionNetwork};
pub use prototype::{prototype_values, similarity, HistoricEntry, NormStats, PrototypeIndex, StageIndex, Task};
pub use sax::{
    extract_3grams, gaussian_breakpoints, paa, sax_encode, top_gram_features, SaxConfig, TopGramTables,
};
pub use schema::{
    schema_document, FeatureFamily, SchemaDocument, SchemaEntry, ALPHA, BASE_DIMS, FAMILIES, FEATURE_NAMES,
    PROTOTYPE_K, PROTOTYPE_OFFSET, SCHEMA_VERSION, TOP_GRAMS, TOP_GRAM_OFFSET,
};
pub use timeseries::{derivative_features, polyfit, PolyFit, MAX_POLY_ORDER};

use crate::lifecycle::HashtagSnapshot;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("snapshot has no tweets; a triggered cycle always has some")]
    EmptyCycle,
    #[error("invalid feature configuration: {0}")]
    InvalidConfig(String),
    #[error("no top-gram table for stage {stage}")]
    MissingTopGrams { stage: u32 },
    #[error("no prototype index for stage {stage}")]
    MissingIndex { stage: u32 },
    #[error("feature vector has {found} values, expected {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("feature matrix: {0}")]
    Matrix(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub key: String,
    pub cycle: u32,
    pub stage_minutes: u32,
    pub prediction_minute: i64,
    pub task: Task,
    pub schema_version: u32,
    pub values: Vec<f64>,
}

/// The first `BASE_DIMS` features, which need no trained tables.
pub fn base_features(snap: &HashtagSnapshot) -> Result<[f64; BASE_DIMS], FeatureError> {
    let stats = &snap.stats;
    let mut out = [0.0; BASE_DIMS];
    let parts: [&[f64]; 8] = [
        &meme_features(stats)?,
        &user_features(stats),
        &content_features(stats),
        &network_features_from_degrees(stats.graph_edges as usize, &stats.degree_histogram).to_array(),
        &hashtag_features(&snap.key, stats),
        &dormancy_features(snap),
        &polyfit(&snap.series).coeffs,
        &derivative_features(&snap.series),
    ];
    let mut i = 0;
    for p in parts {
        out[i..i + p.len()].copy_from_slice(p);
        i += p.len();
    }
    debug_assert_eq!(i, BASE_DIMS);
    Ok(out)
}

/// Gapped 3-grams of the snapshot's SAX word.
pub fn snapshot_grams(snap: &HashtagSnapshot, sax: &SaxConfig) -> BTreeSet<String> {
    extract_3grams(&sax_encode(&snap.series, sax))
}

/// Trained tables that the last two families depend on.
#[derive(Debug, Clone, Copy)]
pub struct FeatureContext<'a> {
    pub sax: SaxConfig,
    pub top_grams: &'a TopGramTables,
    pub index: &'a PrototypeIndex,
}

pub fn assemble(snap: &HashtagSnapshot, task: Task, ctx: &FeatureContext<'_>) -> Result<FeatureVector, FeatureError> {
    let base = base_features(snap)?;
    let top = ctx.top_grams.for_stage(snap.stage_minutes)?;
    let grams = top_gram_features(&snapshot_grams(snap, &ctx.sax), top);
    let proto = ctx.index.prototype_features(snap.stage_minutes, &base, task)?;
    let mut values = Vec::with_capacity(ALPHA);
    values.extend_from_slice(&base);
    values.extend_from_slice(&grams);
    values.extend_from_slice(&proto);
    debug_assert!(values.iter().all(|v| v.is_finite()));
    Ok(FeatureVector {
        key: snap.key.clone(),
        cycle: snap.cycle,
        stage_minutes: snap.stage_minutes,
        prediction_minute: snap.prediction_minute,
        task,
        schema_version: SCHEMA_VERSION,
        values,
    })
}
