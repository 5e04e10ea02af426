//! Tolerant reader for the raw `.data` instance format.
//!
//! ```text
//! file := form*
//! form := '(' 'def-instance' NAME pair* ')'
//! pair := '(' ATTR value+ ')'
//! ```
//!
//! Whitespace and newlines are insignificant and `;` starts a comment that
//! runs to the end of the line. Atoms may be double-quoted. Instance names
//! are uppercased, attribute names and values lowercased.
//!
//! A broken form never aborts the parse. Each `def-instance` form either
//! yields a [`RawRecord`] or exactly one error [`Diagnostic`]; everything
//! else that looks off (stray `)`, foreign top-level forms) is a warning.

use std::fmt;
use std::iter::Peekable;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{raw_mapping, AttributeSchema, RawMapping};

/// Head atom of an instance form.
pub const DEF_INSTANCE: &str = "def-instance";

/// Raw-value token for an explicitly missing value.
pub const MISSING: &str = "?";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
}

impl Diagnostic {
    pub fn warning(line: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into(), line }
    }

    pub fn error(line: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into(), line }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "line {}: {}: {}", self.line, sev, self.message)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawAttribute {
    pub name: String,
    pub values: Vec<String>,
}

/// One `def-instance` form as it appeared in the source.
///
/// Equality ignores `source_span`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRecord {
    pub name: String,
    /// Attribute entries in source order; repeated names are kept as
    /// separate entries.
    pub attributes: Vec<RawAttribute>,
    /// First and last source line of the form.
    pub source_span: (usize, usize),
}

impl PartialEq for RawRecord {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.attributes.len() == other.attributes.len()
            && self
                .attributes
                .iter()
                .zip(&other.attributes)
                .all(|(a, b)| a.name == b.name && a.values == b.values)
    }
}

impl RawRecord {
    pub fn new(name: impl Into<String>) -> Self {
        RawRecord { name: name.into().to_uppercase(), attributes: Vec::new(), source_span: (1, 1) }
    }

    /// Builder used by tests and fixtures.
    pub fn with(mut self, attribute: &str, values: &[&str]) -> Self {
        self.attributes.push(RawAttribute {
            name: attribute.to_ascii_lowercase(),
            values: values.iter().map(|v| v.to_ascii_lowercase()).collect(),
        });
        self
    }

    /// All value lists recorded under `attribute`.
    pub fn values<'a>(&'a self, attribute: &'a str) -> impl Iterator<Item = &'a [String]> + 'a {
        self.attributes.iter().filter(move |a| a.name == attribute).map(|a| a.values.as_slice())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8 (first invalid byte at offset {0})")]
    InvalidUtf8(usize),
}

/// Decode `bytes` as UTF-8 and parse them.
pub fn parse_raw_bytes(bytes: &[u8]) -> Result<(Vec<RawRecord>, Vec<Diagnostic>), IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::InvalidUtf8(e.valid_up_to()))?;
    Ok(parse_raw(text))
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open(usize),
    Close(usize),
    Atom { text: String, line: usize, quoted: bool },
}

struct Lexer<'a> {
    chars: Peekable<std::str::Chars<'a>>,
    line: usize,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, diagnostics: Vec::new() }
    }

    fn quoted(&mut self) -> String {
        let start = self.line;
        let mut out = String::new();
        loop {
            match self.chars.next() {
                None => {
                    self.diagnostics.push(Diagnostic::warning(start, "unterminated string literal"));
                    return out;
                }
                Some('"') => return out,
                Some('\\') => {
                    if let Some(c) = self.chars.next() {
                        if c == '\n' {
                            self.line += 1;
                        }
                        out.push(c)
                    }
                }
                Some(c) => {
                    if c == '\n' {
                        self.line += 1;
                    }
                    out.push(c);
                }
            }
        }
    }
}

impl Iterator for Lexer<'_> {
    type Item = Token;

    fn next(&mut self) -> Option<Token> {
        loop {
            let c = *self.chars.peek()?;
            match c {
                '\n' => {
                    self.line += 1;
                    self.chars.next();
                }
                c if c.is_whitespace() => {
                    self.chars.next();
                }
                ';' => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                '(' => {
                    self.chars.next();
                    return Some(Token::Open(self.line));
                }
                ')' => {
                    self.chars.next();
                    return Some(Token::Close(self.line));
                }
                '"' => {
                    let line = self.line;
                    self.chars.next();
                    let text = self.quoted();
                    return Some(Token::Atom { text, line, quoted: true });
                }
                _ => {
                    let mut text = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"') {
                            break;
                        }
                        text.push(c);
                        self.chars.next();
                    }
                    return Some(Token::Atom { text, line: self.line, quoted: false });
                }
            }
        }
    }
}

#[derive(Debug)]
enum Node {
    Atom { text: String, line: usize },
    List { items: Vec<Node>, open: usize, close: usize },
}

impl Node {
    fn line(&self) -> usize {
        match self {
            Node::Atom { line, .. } => *line,
            Node::List { open, .. } => *open,
        }
    }
}

fn is_def_instance(token: Option<&Token>) -> bool {
    matches!(token, Some(Token::Atom { text, quoted: false, .. }) if text.eq_ignore_ascii_case(DEF_INSTANCE))
}

/// Parse raw instance text into records plus diagnostics.
pub fn parse_raw(text: &str) -> (Vec<RawRecord>, Vec<Diagnostic>) {
    let mut lexer = Lexer::new(text);
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();

    // Open lists: (items, open line). The bottom entry is the top-level form.
    let mut stack: Vec<(Vec<Node>, usize)> = Vec::new();
    let mut pending: Option<Token> = None;

    while let Some(token) = pending.take().or_else(|| lexer.next()) {
        match token {
            Token::Open(line) => {
                let next = lexer.next();
                // A new instance form while another is still open means the
                // previous one lost its closing parens.
                if !stack.is_empty() && is_def_instance(next.as_ref()) {
                    let (items, open) = &stack[0];
                    let head_is_instance = matches!(
                        items.first(),
                        Some(Node::Atom { text, .. }) if text.eq_ignore_ascii_case(DEF_INSTANCE)
                    );
                    let message = format!("unterminated form starting at line {open}");
                    if head_is_instance {
                        diagnostics.push(Diagnostic::error(*open, message));
                    } else {
                        diagnostics.push(Diagnostic::warning(*open, message));
                    }
                    stack.clear();
                }
                stack.push((Vec::new(), line));
                pending = next;
            }
            Token::Close(line) => match stack.pop() {
                None => diagnostics.push(Diagnostic::warning(line, "unmatched ')'")),
                Some((items, open)) => {
                    let node = Node::List { items, open, close: line };
                    match stack.last_mut() {
                        Some((parent, _)) => parent.push(node),
                        None => finish_top_level(node, &mut records, &mut diagnostics),
                    }
                }
            },
            Token::Atom { text, line, .. } => match stack.last_mut() {
                Some((items, _)) => items.push(Node::Atom { text, line }),
                None => diagnostics
                    .push(Diagnostic::warning(line, format!("stray atom `{text}` outside any form"))),
            },
        }
    }

    if let Some((items, open)) = stack.into_iter().next() {
        let is_instance = matches!(
            items.first(),
            Some(Node::Atom { text, .. }) if text.eq_ignore_ascii_case(DEF_INSTANCE)
        );
        let message = format!("unbalanced form starting at line {open}: missing ')' at end of input");
        if is_instance {
            diagnostics.push(Diagnostic::error(open, message));
        } else {
            diagnostics.push(Diagnostic::warning(open, message));
        }
    }

    diagnostics.extend(lexer.diagnostics);
    diagnostics.sort_by_key(|d| d.line);
    (records, diagnostics)
}

fn finish_top_level(node: Node, records: &mut Vec<RawRecord>, diagnostics: &mut Vec<Diagnostic>) {
    let Node::List { items, open, close } = node else { unreachable!() };
    match items.first() {
        Some(Node::Atom { text, .. }) if text.eq_ignore_ascii_case(DEF_INSTANCE) => {
            match instance_from_items(items, open, close, diagnostics) {
                Ok(record) => records.push(record),
                Err(d) => diagnostics.push(d),
            }
        }
        Some(Node::Atom { text, .. }) => diagnostics
            .push(Diagnostic::warning(open, format!("ignoring top-level `{text}` form"))),
        _ => diagnostics.push(Diagnostic::warning(open, "ignoring top-level form without a head atom")),
    }
}

fn instance_from_items(
    items: Vec<Node>,
    open: usize,
    close: usize,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<RawRecord, Diagnostic> {
    let mut iter = items.into_iter().skip(1);
    let name = match iter.next() {
        Some(Node::Atom { text, .. }) if !text.is_empty() => text.to_uppercase(),
        Some(other) => {
            return Err(Diagnostic::error(other.line(), "instance name must be a non-empty atom"))
        }
        None => return Err(Diagnostic::error(open, "def-instance without a name")),
    };

    let mut attributes = Vec::new();
    for node in iter {
        let (pair, pair_line) = match node {
            Node::List { items, open, .. } => (items, open),
            Node::Atom { text, line } => {
                return Err(Diagnostic::error(
                    line,
                    format!("instance {name}: expected (attribute value...) but found `{text}`"),
                ))
            }
        };
        let mut parts = pair.into_iter();
        let attr = match parts.next() {
            Some(Node::Atom { text, .. }) if !text.is_empty() => text.to_ascii_lowercase(),
            _ => {
                return Err(Diagnostic::error(
                    pair_line,
                    format!("instance {name}: attribute pair must start with an attribute name"),
                ))
            }
        };
        let mut values = Vec::new();
        for part in parts {
            flatten_value(part, &mut values, &name, &attr, diagnostics);
        }
        if values.is_empty() {
            return Err(Diagnostic::error(
                pair_line,
                format!("instance {name}: attribute `{attr}` has no value"),
            ));
        }
        attributes.push(RawAttribute { name: attr, values });
    }

    Ok(RawRecord { name, attributes, source_span: (open, close) })
}

fn flatten_value(node: Node, out: &mut Vec<String>, name: &str, attr: &str, diagnostics: &mut Vec<Diagnostic>) {
    match node {
        Node::Atom { text, .. } => out.push(text.to_ascii_lowercase()),
        Node::List { items, open, .. } => {
            diagnostics.push(Diagnostic::warning(
                open,
                format!("instance {name}: nested list in `{attr}` flattened"),
            ));
            for item in items {
                flatten_value(item, out, name, attr, diagnostics);
            }
        }
    }
}

fn needs_quotes(atom: &str) -> bool {
    atom.is_empty()
        || atom.eq_ignore_ascii_case(DEF_INSTANCE)
        || atom.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ';' | '"' | '\\'))
}

fn write_atom(out: &mut String, atom: &str) {
    if needs_quotes(atom) {
        out.push('"');
        for c in atom.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
    } else {
        out.push_str(atom);
    }
}

/// Render records in the canonical raw text form accepted by [`parse_raw`].
pub fn to_sexpr(records: &[RawRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push('(');
        out.push_str(DEF_INSTANCE);
        out.push(' ');
        // The name sits in head position, so `def-instance` is safe unquoted
        // there, but quoting keeps the rule uniform.
        write_atom(&mut out, &record.name);
        for attr in &record.attributes {
            out.push_str("\n  (");
            write_atom(&mut out, &attr.name);
            for v in &attr.values {
                out.push(' ');
                write_atom(&mut out, v);
            }
            out.push(')');
        }
        out.push_str(")\n");
    }
    out
}

/// Line-delimited JSON dump, one record per line. Field order is
/// `name`, `attributes` (list of `{name, values}`), `source_span`.
pub fn to_jsonl(records: &[RawRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("raw records always serialize"));
        out.push('\n');
    }
    out
}

/// Schema conformance report for a single raw record. Never mutates.
pub fn validate_raw(record: &RawRecord, _schema: &AttributeSchema) -> Vec<Diagnostic> {
    let line = record.source_span.0;
    let mut out = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for attr in &record.attributes {
        match raw_mapping(&attr.name) {
            None => out.push(Diagnostic::warning(
                line,
                format!("{}: unmapped attribute `{}`", record.name, attr.name),
            )),
            Some(RawMapping::Emphasis) => {}
            Some(RawMapping::Single(_)) => {
                if seen.contains(&attr.name.as_str()) {
                    out.push(Diagnostic::warning(
                        line,
                        format!("{}: repeated single-valued attribute `{}`", record.name, attr.name),
                    ));
                } else {
                    seen.push(&attr.name);
                }
            }
        }
    }
    out
}
