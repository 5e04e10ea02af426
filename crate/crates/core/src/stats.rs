//! Class distributions over the canonical dataset.
//!
//! Percentages are truncated toward zero at two decimals and always use
//! the full record count as denominator, missing values included.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::integrate::Dataset;
use crate::schema::{AttributeSchema, EMPHASIS_LABELS, EMPHASIS_START, STUDENTS};

/// Attribute name used for the multi-label emphasis distribution.
pub const EMPHASIS: &str = "academic-emphasis";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub label: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDistribution {
    pub attribute: String,
    pub rows: Vec<ClassRow>,
    pub total_records: usize,
    pub missing_count: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{0}` is not nominal")]
    NotNominal(String),
}

/// `count / total * 100` truncated to hundredths, as an integer.
pub fn truncated_hundredths(count: usize, total: usize) -> u64 {
    if total == 0 {
        return 0;
    }
    (count as u64 * 10_000) / total as u64
}

fn row(label: &str, count: usize, total: usize) -> ClassRow {
    ClassRow { label: label.to_string(), count, percent: truncated_hundredths(count, total) as f64 / 100.0 }
}

impl ClassRow {
    /// The percentage with exactly two decimals.
    pub fn percent_text(&self) -> String {
        format!("{:.2}", self.percent)
    }
}

/// Per-class counts of a nominal attribute, in declared domain order.
pub fn class_distribution(dataset: &Dataset, attribute: &str) -> Result<ClassDistribution, StatsError> {
    let schema = AttributeSchema::canonical();
    let index = schema
        .index_of(attribute)
        .ok_or_else(|| StatsError::UnknownAttribute(attribute.to_string()))?;
    let def = &schema.attributes()[index];
    if !def.is_nominal() {
        return Err(StatsError::NotNominal(attribute.to_string()));
    }
    let mut counts = vec![0usize; def.domain.len()];
    let mut missing = 0;
    for r in dataset.records() {
        match r.get(index).as_text().and_then(|v| def.domain.iter().position(|d| *d == v)) {
            Some(i) => counts[i] += 1,
            None => missing += 1,
        }
    }
    let total = dataset.len();
    Ok(ClassDistribution {
        attribute: attribute.to_string(),
        rows: def.domain.iter().zip(counts).map(|(label, c)| row(label, c, total)).collect(),
        total_records: total,
        missing_count: missing,
    })
}

/// Multi-label YES counts over the seven emphasis flags.
pub fn emphasis_distribution(dataset: &Dataset) -> ClassDistribution {
    let mut counts = [0usize; 7];
    for r in dataset.records() {
        for (c, yes) in counts.iter_mut().zip(r.emphasis()) {
            *c += yes as usize;
        }
    }
    let total = dataset.len();
    ClassDistribution {
        attribute: EMPHASIS.to_string(),
        rows: EMPHASIS_LABELS.iter().zip(counts).map(|(l, c)| row(l, c, total)).collect(),
        total_records: total,
        missing_count: 0,
    }
}

/// Either a nominal attribute or `academic-emphasis`.
pub fn distribution(dataset: &Dataset, attribute: &str) -> Result<ClassDistribution, StatsError> {
    if attribute == EMPHASIS {
        Ok(emphasis_distribution(dataset))
    } else {
        class_distribution(dataset, attribute)
    }
}

/// Every reportable distribution: nominal attributes before the emphasis
/// flags, then the combined emphasis table.
pub fn all_distributions(dataset: &Dataset) -> Vec<ClassDistribution> {
    let schema = AttributeSchema::canonical();
    let mut out: Vec<_> = schema.attributes()[..EMPHASIS_START]
        .iter()
        .filter(|d| d.is_nominal())
        .map(|d| class_distribution(dataset, d.name).expect("nominal attribute"))
        .collect();
    out.push(emphasis_distribution(dataset));
    out
}

fn title(attribute: &str) -> String {
    attribute.replace('-', " ").to_uppercase()
}

const CONTROL_NOTE: &str = "note: the widely cited control table (PRIVATE 61, STATE 103) repeats the \
location counts; the counts above are computed from the data and are authoritative.";

fn size_footer(d: &ClassDistribution) -> String {
    let count = |label: &str| d.rows.iter().find(|r| r.label == label).map_or(0, |r| r.count);
    format!(
        "size classes as commonly grouped: <5 = 5- ({}), 5-10 = 05-10 ({}), 10-20 = 15-20 ({}); \
         raw 10-15 values have no declared label and are counted as missing.",
        count("5-"),
        count("05-10"),
        count("15-20"),
    )
}

/// Render one distribution as an aligned text table.
pub fn render_table(d: &ClassDistribution) -> String {
    let width = d.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max("Class".len());
    let mut out = String::new();
    writeln!(out, "UNIVERSITY CLASSES BASED ON {}", title(&d.attribute)).unwrap();
    writeln!(out, "{:<6}  {:<width$}  {:>5}  {:>6}", "Sr. No", "Class", "Count", "%").unwrap();
    for (i, r) in d.rows.iter().enumerate() {
        writeln!(out, "{:<6}  {:<width$}  {:>5}  {:>6}", i + 1, r.label, r.count, r.percent_text()).unwrap();
    }
    if d.missing_count > 0 {
        writeln!(out, "{:<6}  {:<width$}  {:>5}", "", "?", d.missing_count).unwrap();
    }
    writeln!(out, "total records: {}", d.total_records).unwrap();
    out
}

/// Text report of every distribution, with notes where commonly reported
/// figures disagree with the computed ones.
pub fn summary(dataset: &Dataset) -> String {
    let schema = AttributeSchema::canonical();
    let mut out = String::new();
    for d in all_distributions(dataset) {
        out.push_str(&render_table(&d));
        if d.attribute == "control" {
            out.push_str(CONTROL_NOTE);
            out.push('\n');
        }
        if d.attribute == schema.attributes()[STUDENTS].name {
            out.push_str(&size_footer(&d));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// One JSON object per class, newline-terminated.
pub fn to_jsonl(d: &ClassDistribution) -> String {
    let mut out = String::new();
    for r in &d.rows {
        let line = serde_json::json!({
            "attribute": d.attribute,
            "class": r.label,
            "count": r.count,
            "percent": r.percent,
            "total": d.total_records,
        });
        writeln!(out, "{line}").unwrap();
    }
    out
}
