//! CSV export of labeled feature vectors.

use std::io::{Read, Write};

use super::prototype::Task;
use super::schema::{ALPHA, FEATURE_NAMES, SCHEMA_VERSION};
use super::{FeatureError, FeatureVector};

const ID_COLUMNS: [&str; 7] = ["key", "cycle", "stage", "t_p", "label", "tbb", "tra"];

/// One feature vector plus whatever ground truth is known for it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub vector: FeatureVector,
    pub burst: Option<bool>,
    pub tbb: Option<i64>,
    pub tra: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub task: Task,
    pub rows: Vec<FeatureRow>,
}

fn err(e: impl std::fmt::Display) -> FeatureError {
    FeatureError::Matrix(e.to_string())
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>, FeatureError>
where
    T::Err: std::fmt::Display,
{
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(err)
    }
}

impl FeatureMatrix {
    pub fn header() -> Vec<&'static str> {
        ID_COLUMNS.iter().chain(FEATURE_NAMES.iter()).copied().collect()
    }

    /// Rows sharing a stage.
    pub fn stage_rows(&self, stage: u32) -> impl Iterator<Item = &FeatureRow> {
        self.rows.iter().filter(move |r| r.vector.stage_minutes == stage)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), FeatureError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::header()).map_err(err)?;
        for r in &self.rows {
            let v = &r.vector;
            if v.values.len() != ALPHA {
                return Err(FeatureError::SchemaMismatch {
                    expected: ALPHA,
                    found: v.values.len(),
                });
            }
            let label = r.burst.map(|b| if b { "1" } else { "-1" }).unwrap_or("");
            let mut rec = vec![
                v.key.clone(),
                v.cycle.to_string(),
                v.stage_minutes.to_string(),
                v.prediction_minute.to_string(),
                label.to_string(),
                opt(r.tbb),
                opt(r.tra),
            ];
            rec.extend(v.values.iter().map(|x| x.to_string()));
            out.write_record(&rec).map_err(err)?;
        }
        out.flush().map_err(err)
    }

    pub fn read_csv<R: Read>(task: Task, r: R) -> Result<Self, FeatureError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers().map_err(err)?.clone();
        if header.iter().ne(Self::header()) {
            return Err(FeatureError::Matrix("header does not match the feature schema".into()));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(err)?;
            let label = match &rec[4] {
                "" => None,
                "1" => Some(true),
                "-1" => Some(false),
                other => return Err(FeatureError::Matrix(format!("bad label '{other}'"))),
            };
            let values = (ID_COLUMNS.len()..rec.len())
                .map(|i| rec[i].parse::<f64>().map_err(err))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(FeatureRow {
                vector: FeatureVector {
                    key: rec[0].to_string(),
                    cycle: rec[1].parse().map_err(err)?,
                    stage_minutes: rec[2].parse().map_err(err)?,
                    prediction_minute: rec[3].parse().map_err(err)?,
                    task,
                    schema_version: SCHEMA_VERSION,
                    values,
                },
                burst: label,
                tbb: parse_opt(&rec[5])?,
                tra: parse_opt(&rec[6])?,
            });
        }
        Ok(FeatureMatrix { task, rows })
    }
}
