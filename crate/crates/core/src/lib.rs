//! Bursting-hashtag detection and prediction over tweet streams: a
//! streaming lifecycle engine, per-stage features, weighted classifiers and
//! regressors, a staged evaluation harness, a synthetic stream generator
//! with ground truth, and versioned on-disk artifacts.

pub mod evaluation;
pub mod features;
pub mod ingest;
pub mod lifecycle;
pub mod models;
pub mod pipeline;
pub mod storage;
pub mod synth;
