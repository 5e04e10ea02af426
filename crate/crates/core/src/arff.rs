//! ARFF emission and parsing for the canonical dataset.
//!
//! Output uses `\n` line endings, unquoted strings, `?` for missing values
//! and the shortest decimal form of numbers (`60`, not `60.0`).

use std::fmt::Write as _;

use thiserror::Error;

use crate::integrate::{Dataset, UniversityProfile, Value};
use crate::schema::{AttributeKind, AttributeSchema, RELATION};

#[derive(Debug, Error, PartialEq)]
pub enum ArffError {
    #[error("record {record}: value `{value}` is not declared for attribute `{attribute}`")]
    UndeclaredValue { record: String, attribute: String, value: String },
    #[error("record {record}: `{value}` in `{attribute}` cannot be written unquoted")]
    Unwritable { record: String, attribute: String, value: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown attribute `{name}`")]
    UnknownAttribute { line: usize, name: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity { line: usize, expected: usize, found: usize },
    #[error("line {line}: value `{value}` is not declared for attribute `{attribute}`")]
    UndeclaredAt { line: usize, attribute: String, value: String },
}

fn declaration(def: &crate::schema::AttributeDef) -> String {
    match def.kind {
        AttributeKind::String => format!("@attribute {} string", def.name),
        AttributeKind::Numeric => format!("@attribute {} numeric", def.name),
        AttributeKind::Nominal => format!("@attribute {} {{{}}}", def.name, def.domain.join(",")),
    }
}

/// Header block through the `@data` line, each line `\n`-terminated.
pub fn header() -> String {
    let mut out = format!("@relation {RELATION}\n\n");
    for def in AttributeSchema::canonical().attributes() {
        out.push_str(&declaration(def));
        out.push('\n');
    }
    out.push_str("\n@data\n");
    out
}

fn render_number(x: f64) -> String {
    // Display already drops a trailing `.0` and picks the shortest form
    // that round-trips.
    format!("{x}")
}

fn unwritable(s: &str) -> bool {
    s.is_empty()
        || s == "?"
        || s.chars().any(|c| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '\'' | '"' | '%'))
}

fn render_row(record: &UniversityProfile) -> Result<String, ArffError> {
    let schema = AttributeSchema::canonical();
    let mut fields = Vec::with_capacity(schema.len());
    for (def, value) in schema.attributes().iter().zip(record.values()) {
        let field = match value {
            Value::Missing => "?".to_string(),
            Value::Number(x) => render_number(*x),
            Value::Text(s) => {
                if def.kind == AttributeKind::Nominal && !def.contains(s) {
                    return Err(ArffError::UndeclaredValue {
                        record: record.name().to_string(),
                        attribute: def.name.to_string(),
                        value: s.clone(),
                    });
                }
                if unwritable(s) {
                    return Err(ArffError::Unwritable {
                        record: record.name().to_string(),
                        attribute: def.name.to_string(),
                        value: s.clone(),
                    });
                }
                s.clone()
            }
        };
        fields.push(field);
    }
    Ok(fields.join(","))
}

/// Render the dataset as ARFF text.
pub fn emit_arff(dataset: &Dataset) -> Result<String, ArffError> {
    let mut out = header();
    for record in dataset.records() {
        let row = render_row(record)?;
        writeln!(out, "{row}").expect("writing to a String");
    }
    Ok(out)
}

fn syntax(line: usize, message: impl Into<String>) -> ArffError {
    ArffError::Syntax { line, message: message.into() }
}

/// Parse ARFF text carrying the canonical relation and attributes.
///
/// Blank lines and `%` comments are skipped anywhere.
pub fn parse_arff(text: &str) -> Result<Dataset, ArffError> {
    let schema = AttributeSchema::canonical();
    let mut declared = 0usize;
    let mut saw_relation = false;
    let mut in_data = false;
    let mut records = Vec::new();

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            records.push(parse_row(line, line_no)?);
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match keyword.to_ascii_lowercase().as_str() {
            "@relation" => {
                if rest != RELATION {
                    return Err(syntax(line_no, format!("unexpected relation `{rest}`")));
                }
                saw_relation = true;
            }
            "@attribute" => {
                if !saw_relation {
                    return Err(syntax(line_no, "@attribute before @relation"));
                }
                let name = rest.split_whitespace().next().unwrap_or("");
                let Some(index) = schema.index_of(name) else {
                    return Err(ArffError::UnknownAttribute { line: line_no, name: name.to_string() });
                };
                if index != declared {
                    return Err(syntax(line_no, format!("attribute `{name}` out of order")));
                }
                let expected = declaration(&schema.attributes()[index]);
                let normalized = format!("@attribute {}", rest.split_whitespace().collect::<Vec<_>>().join(" "));
                if !normalized.eq_ignore_ascii_case(&expected) {
                    return Err(syntax(line_no, format!("declaration of `{name}` differs from the schema")));
                }
                declared += 1;
            }
            "@data" => {
                if declared != schema.len() {
                    return Err(syntax(
                        line_no,
                        format!("@data after {declared} of {} attributes", schema.len()),
                    ));
                }
                in_data = true;
            }
            _ => return Err(syntax(line_no, format!("unexpected line `{line}`"))),
        }
    }
    if !in_data {
        return Err(syntax(text.lines().count().max(1), "missing @data section"));
    }
    Dataset::new(records).map_err(|e| syntax(0, e.to_string()))
}

fn parse_row(line: &str, line_no: usize) -> Result<UniversityProfile, ArffError> {
    let schema = AttributeSchema::canonical();
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != schema.len() {
        return Err(ArffError::Arity { line: line_no, expected: schema.len(), found: fields.len() });
    }
    let mut values = Vec::with_capacity(fields.len());
    for (def, field) in schema.attributes().iter().zip(fields) {
        let value = if field == "?" {
            Value::Missing
        } else {
            match def.kind {
                AttributeKind::String => Value::Text(field.to_string()),
                AttributeKind::Nominal if def.contains(field) => Value::Text(field.to_string()),
                AttributeKind::Nominal => {
                    return Err(ArffError::UndeclaredAt {
                        line: line_no,
                        attribute: def.name.to_string(),
                        value: field.to_string(),
                    })
                }
                AttributeKind::Numeric => Value::Number(field.parse().map_err(|_| {
                    syntax(line_no, format!("`{field}` is not numeric for `{}`", def.name))
                })?),
            }
        };
        values.push(value);
    }
    UniversityProfile::from_values(values).map_err(|e| syntax(line_no, e.to_string()))
}
