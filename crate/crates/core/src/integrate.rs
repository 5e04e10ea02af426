//! Deduplication and projection of raw records onto the canonical schema.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{Diagnostic, RawRecord, MISSING};
use crate::schema::{
    emphasis_flag, raw_mapping, AttributeKind, AttributeSchema, RawMapping, ACADEMICS, ADMITTANCE,
    APPLICANTS, ATTRIBUTE_COUNT, CONTROL, EMPHASIS_START, ENROLLED, EXPENSES, FINANCIAL_AID,
    LOCATION, NAME, QUALITY_OF_LIFE, SOCIAL, STATE, STUDENTS,
};

/// A single attribute value of a canonical record.
///
/// Nominal and string attributes both use `Text`; the schema says which.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Text(String),
    Number(f64),
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }
}

/// One university under the canonical 20-attribute schema.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversityProfile {
    values: Vec<Value>,
}

impl UniversityProfile {
    /// Build from one value per schema attribute, checking every record
    /// invariant.
    pub fn from_values(values: Vec<Value>) -> Result<Self, IntegrateError> {
        let schema = AttributeSchema::canonical();
        if values.len() != schema.len() {
            return Err(IntegrateError::Arity(values.len()));
        }
        let name = match &values[NAME] {
            Value::Text(n) if !n.is_empty() => n.clone(),
            _ => return Err(IntegrateError::MissingName),
        };
        for (index, (def, value)) in schema.attributes().iter().zip(&values).enumerate() {
            let bad = |reason: &str| IntegrateError::InvalidValue {
                record: name.clone(),
                attribute: def.name,
                reason: reason.to_string(),
            };
            match (def.kind, value) {
                (_, Value::Missing) if index >= EMPHASIS_START => {
                    return Err(bad("emphasis flags are never missing"))
                }
                (_, Value::Missing) => {}
                (AttributeKind::String, Value::Text(s)) if !s.is_empty() => {}
                (AttributeKind::Nominal, Value::Text(s)) if def.contains(s) => {}
                (AttributeKind::Nominal, Value::Text(s)) => {
                    return Err(bad(&format!("`{s}` is not in the declared domain")))
                }
                (AttributeKind::Numeric, Value::Number(x)) if (0.0..=100.0).contains(x) => {}
                (AttributeKind::Numeric, Value::Number(x)) => {
                    return Err(bad(&format!("{x} is outside [0, 100]")))
                }
                _ => return Err(bad("value kind does not match attribute kind")),
            }
        }
        Ok(UniversityProfile { values })
    }

    pub fn name(&self) -> &str {
        self.values[NAME].as_text().expect("name is validated at construction")
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn get(&self, index: usize) -> &Value {
        &self.values[index]
    }

    pub fn get_by_name(&self, attribute: &str) -> Option<&Value> {
        AttributeSchema::canonical().index_of(attribute).map(|i| &self.values[i])
    }

    /// Emphasis flags in schema order, `true` for YES.
    pub fn emphasis(&self) -> [bool; 7] {
        let mut out = [false; 7];
        for (i, flag) in out.iter_mut().enumerate() {
            *flag = self.values[EMPHASIS_START + i].as_text() == Some("YES");
        }
        out
    }
}

/// The canonical integrated dataset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    records: Vec<UniversityProfile>,
}

impl Dataset {
    pub fn new(records: Vec<UniversityProfile>) -> Result<Self, IntegrateError> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.name()) {
                return Err(IntegrateError::DuplicateName(r.name().to_string()));
            }
        }
        Ok(Dataset { records })
    }

    pub fn schema(&self) -> &'static AttributeSchema {
        AttributeSchema::canonical()
    }

    pub fn records(&self) -> &[UniversityProfile] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Look up a record by name, after the same normalization dedupe uses.
    pub fn find(&self, name: &str) -> Option<&UniversityProfile> {
        let key = normalize_name(name);
        self.records.iter().find(|r| r.name() == key)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IntegrateError {
    #[error("record has no name")]
    MissingName,
    #[error("expected {ATTRIBUTE_COUNT} values, got {0}")]
    Arity(usize),
    #[error("{record}: invalid value for `{attribute}`: {reason}")]
    InvalidValue { record: String, attribute: &'static str, reason: String },
    #[error("duplicate record name `{0}`")]
    DuplicateName(String),
    #[error("negative or non-finite quantity {0}")]
    NegativeQuantity(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateGroup {
    pub name: String,
    pub kept_index: usize,
    pub dropped_indices: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IntegrationReport {
    pub raw_count: usize,
    pub deduped_count: usize,
    pub dropped_duplicates: Vec<DuplicateGroup>,
    pub unmapped_attributes: BTreeSet<String>,
    /// Records removed after dedupe because they could not be projected.
    pub skipped: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl IntegrationReport {
    pub fn total_dropped(&self) -> usize {
        self.dropped_duplicates.iter().map(|g| g.dropped_indices.len()).sum()
    }
}

impl fmt::Display for IntegrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "raw records:       {}", self.raw_count)?;
        writeln!(f, "after dedupe:      {}", self.deduped_count)?;
        writeln!(f, "duplicates dropped: {}", self.total_dropped())?;
        for g in &self.dropped_duplicates {
            writeln!(f, "  {} kept #{} dropped {:?}", g.name, g.kept_index, g.dropped_indices)?;
        }
        if !self.skipped.is_empty() {
            writeln!(f, "skipped:           {}", self.skipped.join(", "))?;
        }
        if !self.unmapped_attributes.is_empty() {
            let list: Vec<_> = self.unmapped_attributes.iter().map(String::as_str).collect();
            writeln!(f, "unmapped attributes: {}", list.join(", "))?;
        }
        Ok(())
    }
}

/// Uppercase, with internal whitespace runs collapsed to a single hyphen.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join("-").to_uppercase()
}

/// Single-valued attributes counted when ranking duplicates.
const SCORED: std::ops::RangeInclusive<usize> = STATE..=QUALITY_OF_LIFE;

fn raw_missing_count(record: &RawRecord) -> usize {
    SCORED
        .filter(|&index| {
            !record.attributes.iter().any(|a| {
                raw_mapping(&a.name) == Some(RawMapping::Single(index))
                    && a.values.iter().any(|v| v != MISSING)
            })
        })
        .count()
}

/// Keep one record per normalized name: the one with the fewest missing
/// values, earliest on ties. Output is in first-occurrence order.
pub fn dedupe(records: &[RawRecord]) -> (Vec<RawRecord>, IntegrationReport) {
    // (normalized name, member indices)
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    let mut index_of: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for (i, r) in records.iter().enumerate() {
        let key = normalize_name(&r.name);
        match index_of.get(&key) {
            Some(&g) => groups[g].1.push(i),
            None => {
                index_of.insert(key.clone(), groups.len());
                groups.push((key, vec![i]));
            }
        }
    }

    let mut kept = Vec::with_capacity(groups.len());
    let mut report = IntegrationReport { raw_count: records.len(), ..Default::default() };
    for (name, members) in groups {
        let best = *members
            .iter()
            .min_by_key(|&&i| (raw_missing_count(&records[i]), i))
            .expect("groups are non-empty");
        kept.push(records[best].clone());
        if members.len() > 1 {
            report.dropped_duplicates.push(DuplicateGroup {
                name,
                kept_index: best,
                dropped_indices: members.into_iter().filter(|&i| i != best).collect(),
            });
        }
    }
    report.deduped_count = kept.len();
    (kept, report)
}

/// Lower-inclusive bin edges with their labels.
struct Bins(&'static [(f64, &'static str)]);

const STUDENT_BINS: Bins =
    Bins(&[(0.0, "5-"), (5.0, "05-10"), (10.0, "10-15"), (15.0, "15-20"), (20.0, "20+")]);
const EXPENSE_BINS: Bins = Bins(&[(0.0, "4-"), (4.0, "04-07"), (7.0, "07-10"), (10.0, "10+")]);
// The 10-13 band carries the label "01-10" so output stays byte-compatible.
const APPLICANT_BINS: Bins = Bins(&[
    (0.0, "4-"),
    (4.0, "04-07"),
    (7.0, "07-10"),
    (10.0, "01-10"),
    (13.0, "13-17"),
    (17.0, "17+"),
]);

impl Bins {
    fn index(&self, x: f64) -> Result<usize, IntegrateError> {
        if x.is_nan() || x < 0.0 || x.is_infinite() {
            return Err(IntegrateError::NegativeQuantity(x));
        }
        Ok(self.0.iter().rposition(|&(lo, _)| x >= lo).expect("first edge is 0"))
    }

    fn label(&self, x: f64) -> Result<&'static str, IntegrateError> {
        self.index(x).map(|i| self.0[i].1)
    }

    fn upper(&self, i: usize) -> f64 {
        self.0.get(i + 1).map_or(f64::INFINITY, |e| e.0)
    }

    /// Label of the single bin holding `[lo, hi)`, if there is one.
    fn containing(&self, lo: f64, hi: f64) -> Option<&'static str> {
        let i = self.index(lo).ok()?;
        (hi <= self.upper(i)).then_some(self.0[i].1)
    }
}

/// Thousands of students to a size label. `10-15` is produced for that
/// band even though the schema domain omits it.
pub fn bin_students(thousands: f64) -> Result<&'static str, IntegrateError> {
    STUDENT_BINS.label(thousands)
}

/// Thousands of USD per year to an expense label.
pub fn bin_expenses(thousands: f64) -> Result<&'static str, IntegrateError> {
    EXPENSE_BINS.label(thousands)
}

/// Thousands of applicants to an applicant label.
pub fn bin_applicants(thousands: f64) -> Result<&'static str, IntegrateError> {
    APPLICANT_BINS.label(thousands)
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim_end_matches('%').parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Map a raw range label (`5-10`, `4-`, `10+`, `8.5`) to a bin label.
fn normalize_range(raw: &str, bins: &Bins) -> Result<&'static str, String> {
    let upper = raw.to_ascii_uppercase();
    if let Some(&(_, label)) = bins.0.iter().find(|(_, l)| *l == upper) {
        return Ok(label);
    }
    let interval = if let Some(n) = raw.strip_suffix('+').and_then(parse_number) {
        Some((n, f64::INFINITY))
    } else if let Some(n) = raw.strip_suffix('-').and_then(parse_number) {
        Some((0.0, n))
    } else if let Some((a, b)) = raw.split_once('-') {
        parse_number(a).zip(parse_number(b))
    } else {
        parse_number(raw).map(|x| (x, x))
    };
    match interval {
        Some((lo, hi)) if lo == hi => bins.label(lo).map_err(|e| e.to_string()),
        Some((lo, hi)) if lo < hi => {
            bins.containing(lo, hi).ok_or_else(|| format!("range `{raw}` straddles several bins"))
        }
        _ => Err(format!("cannot read `{raw}` as a quantity or range")),
    }
}

/// Extract the single usable token from a raw value list: unit annotations
/// like `scale:1-5` are dropped when other tokens remain, and a lone
/// `thous:5-10` style token loses its prefix.
fn single_token(values: &[String]) -> Result<Option<&str>, String> {
    let plain: Vec<&str> = if values.len() > 1 {
        values.iter().map(String::as_str).filter(|v| !v.contains(':')).collect()
    } else {
        values.iter().map(String::as_str).collect()
    };
    match plain.as_slice() {
        [] => Err(format!("no usable value in {values:?}")),
        [one] => {
            let token = one.rsplit(':').next().unwrap_or(one);
            Ok((token != MISSING && !token.is_empty()).then_some(token))
        }
        _ => Err(format!("ambiguous value {values:?}")),
    }
}

fn project_value(index: usize, token: &str) -> Result<Value, String> {
    let schema = AttributeSchema::canonical();
    let def = schema.get(index).expect("index from mapping table");
    match index {
        STATE => Ok(Value::Text(normalize_name(token))),
        LOCATION | CONTROL => {
            let label = token.to_ascii_uppercase();
            if def.contains(&label) {
                Ok(Value::Text(label))
            } else {
                Err(format!("`{token}` is not one of {:?}", def.domain))
            }
        }
        STUDENTS | EXPENSES | APPLICANTS => {
            let bins = match index {
                STUDENTS => &STUDENT_BINS,
                EXPENSES => &EXPENSE_BINS,
                _ => &APPLICANT_BINS,
            };
            let label = normalize_range(token, bins)?;
            if def.contains(label) {
                Ok(Value::Text(label.to_string()))
            } else {
                Err(format!("label `{label}` is outside the declared domain"))
            }
        }
        FINANCIAL_AID | ADMITTANCE | ENROLLED => match parse_number(token) {
            Some(x) if (0.0..=100.0).contains(&x) => Ok(Value::Number(x)),
            _ => Err(format!("`{token}` is not a percentage")),
        },
        ACADEMICS | SOCIAL | QUALITY_OF_LIFE => match parse_number(token) {
            Some(x) if x.fract() == 0.0 && (1.0..=5.0).contains(&x) => Ok(Value::Text(format!("{x}"))),
            _ => Err(format!("`{token}` is not a 1-5 rating")),
        },
        _ => match token {
            "yes" | "y" | "true" => Ok(Value::Text("YES".into())),
            "no" | "n" | "false" => Ok(Value::Text("NO".into())),
            _ => Err(format!("`{token}` is not YES/NO")),
        },
    }
}

/// Project one raw record onto the canonical schema.
///
/// Values that cannot be mapped become missing with a diagnostic; emphasis
/// flags default to NO. Unmapped raw attributes are ignored here and
/// reported by [`crate::ingest::validate_raw`] and [`build_dataset`].
pub fn project(
    record: &RawRecord,
    _schema: &AttributeSchema,
) -> Result<(UniversityProfile, Vec<Diagnostic>), IntegrateError> {
    let name = normalize_name(&record.name);
    if name.is_empty() {
        return Err(IntegrateError::MissingName);
    }
    let line = record.source_span.0;
    let mut diagnostics = Vec::new();
    let mut values = vec![Value::Missing; ATTRIBUTE_COUNT];
    values[NAME] = Value::Text(name.clone());
    let mut flags = [false; 7];
    let mut explicit_flags = [None::<bool>; 7];

    for attr in &record.attributes {
        match raw_mapping(&attr.name) {
            None => {}
            Some(RawMapping::Emphasis) => {
                for v in attr.values.iter().filter(|v| v.as_str() != MISSING) {
                    match emphasis_flag(v) {
                        Some(flag) => flags[flag] = true,
                        None => diagnostics.push(Diagnostic::warning(
                            line,
                            format!("{name}: unmapped academic-emphasis value `{v}`"),
                        )),
                    }
                }
            }
            Some(RawMapping::Single(index)) => {
                if !values[index].is_missing() || (index >= EMPHASIS_START && explicit_flags[index - EMPHASIS_START].is_some()) {
                    continue;
                }
                let result = single_token(&attr.values)
                    .and_then(|tok| tok.map(|t| project_value(index, t)).transpose());
                match result {
                    Ok(Some(v)) if index >= EMPHASIS_START => {
                        explicit_flags[index - EMPHASIS_START] = Some(v.as_text() == Some("YES"))
                    }
                    Ok(Some(v)) => values[index] = v,
                    Ok(None) => {}
                    Err(msg) => diagnostics.push(Diagnostic::warning(
                        line,
                        format!("{name}: {}: {msg}; treated as missing", attr.name),
                    )),
                }
            }
        }
    }

    for i in 0..7 {
        let yes = explicit_flags[i].unwrap_or(false) || flags[i];
        values[EMPHASIS_START + i] = Value::Text(if yes { "YES" } else { "NO" }.into());
    }
    let profile = UniversityProfile::from_values(values)?;
    Ok((profile, diagnostics))
}

/// Dedupe, then project every surviving record.
pub fn build_dataset(records: &[RawRecord]) -> (Dataset, IntegrationReport) {
    let schema = AttributeSchema::canonical();
    let (kept, mut report) = dedupe(records);
    for r in records {
        for a in &r.attributes {
            if raw_mapping(&a.name).is_none() {
                report.unmapped_attributes.insert(a.name.clone());
            }
        }
    }
    let mut profiles = Vec::with_capacity(kept.len());
    for r in &kept {
        match project(r, schema) {
            Ok((p, diags)) => {
                report.diagnostics.extend(diags);
                profiles.push(p);
            }
            Err(e) => {
                report.diagnostics.push(Diagnostic::error(r.source_span.0, format!("{}: {e}", r.name)));
                report.skipped.push(r.name.clone());
            }
        }
    }
    let dataset = Dataset::new(profiles).expect("dedupe guarantees unique names");
    (dataset, report)
}
