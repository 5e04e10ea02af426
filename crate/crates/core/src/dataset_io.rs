//! Canonical dataset file and format-sniffing loader.
//!
//! The canonical file is JSON:
//!
//! ```json
//! {"format": "uniprofile-dataset", "version": 1, "relation": "Universities-v2",
//!  "attributes": [{"name": "name", "kind": "string", "domain": []}, ...],
//!  "records": [["ADELPHI", "NEWYORK", null, "PRIVATE", ...], ...]}
//! ```
//!
//! Each record is an array with one entry per attribute in schema order:
//! a string for string and nominal attributes, a number for numeric ones,
//! `null` for missing.

use std::path::Path;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::arff::{parse_arff, ArffError};
use crate::ingest::{parse_raw_bytes, IngestError};
use crate::integrate::{build_dataset, Dataset, IntegrationReport, UniversityProfile, Value};
use crate::schema::{AttributeSchema, RELATION};

pub const FORMAT: &str = "uniprofile-dataset";
pub const VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum DatasetIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid canonical dataset: {0}")]
    Invalid(String),
    #[error(transparent)]
    Arff(#[from] ArffError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

fn invalid(msg: impl Into<String>) -> DatasetIoError {
    DatasetIoError::Invalid(msg.into())
}

pub fn write_canonical(dataset: &Dataset) -> String {
    let records: Vec<Json> = dataset
        .records()
        .iter()
        .map(|r| {
            Json::Array(
                r.values()
                    .iter()
                    .map(|v| match v {
                        Value::Missing => Json::Null,
                        Value::Text(s) => Json::String(s.clone()),
                        Value::Number(x) => json!(x),
                    })
                    .collect(),
            )
        })
        .collect();
    let doc = json!({
        "format": FORMAT,
        "version": VERSION,
        "relation": RELATION,
        "attributes": AttributeSchema::canonical(),
        "records": records,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json values serialize");
    text.push('\n');
    text
}

pub fn read_canonical(text: &str) -> Result<Dataset, DatasetIoError> {
    let doc: Json = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
    if doc["format"] != FORMAT {
        return Err(invalid(format!("format must be `{FORMAT}`")));
    }
    if doc["version"] != VERSION {
        return Err(invalid(format!("unsupported version {}", doc["version"])));
    }
    if doc["relation"] != RELATION {
        return Err(invalid(format!("relation must be `{RELATION}`")));
    }
    if doc["attributes"] != serde_json::to_value(AttributeSchema::canonical()).unwrap() {
        return Err(invalid("attribute list differs from the canonical schema"));
    }
    let rows = doc["records"].as_array().ok_or_else(|| invalid("`records` must be an array"))?;
    let mut records = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let cells = row.as_array().ok_or_else(|| invalid(format!("record {i} is not an array")))?;
        let values = cells
            .iter()
            .map(|c| match c {
                Json::Null => Ok(Value::Missing),
                Json::String(s) => Ok(Value::Text(s.clone())),
                Json::Number(n) => Ok(Value::Number(n.as_f64().unwrap_or(f64::NAN))),
                other => Err(invalid(format!("record {i}: unexpected value {other}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        records.push(UniversityProfile::from_values(values).map_err(|e| invalid(format!("record {i}: {e}")))?);
    }
    Dataset::new(records).map_err(|e| invalid(e.to_string()))
}

/// Load a dataset from a canonical `.json`, an `.arff`, or a raw instance
/// file (anything else). Raw input is integrated on the fly and its report
/// returned, with parse diagnostics folded in.
pub fn load_dataset(path: &Path) -> Result<(Dataset, Option<IntegrationReport>), DatasetIoError> {
    let bytes = std::fs::read(path)
        .map_err(|source| DatasetIoError::Io { path: path.display().to_string(), source })?;
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let as_text = || String::from_utf8(bytes.clone()).map_err(|e| IngestError::InvalidUtf8(e.utf8_error().valid_up_to()));
    match ext.as_deref() {
        Some("json") => Ok((read_canonical(&as_text()?)?, None)),
        Some("arff") => Ok((parse_arff(&as_text()?)?, None)),
        _ => {
            let (raw, diagnostics) = parse_raw_bytes(&bytes)?;
            let (dataset, mut report) = build_dataset(&raw);
            let mut all = diagnostics;
            all.append(&mut report.diagnostics);
            report.diagnostics = all;
            Ok((dataset, Some(report)))
        }
    }
}
