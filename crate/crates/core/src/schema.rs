//! The canonical university schema and the table that maps raw attribute
//! names onto it.

use serde::Serialize;

/// Relation name written at the top of every ARFF file.
pub const RELATION: &str = "Universities-v2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    String,
    Nominal,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AttributeDef {
    pub name: &'static str,
    pub kind: AttributeKind,
    /// Declared nominal labels in declaration order; empty for non-nominal.
    pub domain: &'static [&'static str],
}

impl AttributeDef {
    pub fn is_nominal(&self) -> bool {
        self.kind == AttributeKind::Nominal
    }

    pub fn contains(&self, label: &str) -> bool {
        self.domain.contains(&label)
    }
}

pub const NAME: usize = 0;
pub const STATE: usize = 1;
pub const LOCATION: usize = 2;
pub const CONTROL: usize = 3;
pub const STUDENTS: usize = 4;
pub const EXPENSES: usize = 5;
pub const FINANCIAL_AID: usize = 6;
pub const APPLICANTS: usize = 7;
pub const ADMITTANCE: usize = 8;
pub const ENROLLED: usize = 9;
pub const ACADEMICS: usize = 10;
pub const SOCIAL: usize = 11;
pub const QUALITY_OF_LIFE: usize = 12;
/// Index of the first of the seven YES/NO emphasis flags.
pub const EMPHASIS_START: usize = 13;
pub const ATTRIBUTE_COUNT: usize = 20;

const RATING: &[&str] = &["1", "2", "3", "4", "5"];
const YES_NO: &[&str] = &["YES", "NO"];

const fn string(name: &'static str) -> AttributeDef {
    AttributeDef { name, kind: AttributeKind::String, domain: &[] }
}

const fn numeric(name: &'static str) -> AttributeDef {
    AttributeDef { name, kind: AttributeKind::Numeric, domain: &[] }
}

const fn nominal(name: &'static str, domain: &'static [&'static str]) -> AttributeDef {
    AttributeDef { name, kind: AttributeKind::Nominal, domain }
}

static CANONICAL_ATTRIBUTES: [AttributeDef; ATTRIBUTE_COUNT] = [
    string("name"),
    string("state"),
    nominal("location", &["SUBURBAN", "URBAN", "SMALL-TOWN", "SMALL-CITY"]),
    nominal("control", &["PRIVATE", "STATE"]),
    nominal("no-of-students", &["5-", "05-10", "15-20", "20+"]),
    nominal("expenses", &["4-", "04-07", "07-10", "10+"]),
    numeric("percent-financial-aid"),
    nominal("number-of-applicants", &["01-10", "04-07", "07-10", "17+", "13-17", "4-"]),
    numeric("percent-admittance"),
    numeric("percent-enrolled"),
    nominal("academics", RATING),
    nominal("social", RATING),
    nominal("quality-of-life", RATING),
    nominal("academic-emphasis-arts", YES_NO),
    nominal("academic-emphasis-science", YES_NO),
    nominal("academic-emphasis-commerce", YES_NO),
    nominal("academic-emphasis-engg", YES_NO),
    nominal("academic-emphasis-management", YES_NO),
    nominal("academic-emphasis-education", YES_NO),
    nominal("academic-emphasis-medical", YES_NO),
];

static CANONICAL: AttributeSchema = AttributeSchema { attributes: &CANONICAL_ATTRIBUTES };

/// Display labels for the emphasis flags, in flag order.
pub const EMPHASIS_LABELS: [&str; 7] =
    ["ARTS", "SCIENCE", "COMMERCE", "ENGINEERING", "MANAGEMENT", "EDUCATION", "MEDICAL"];

/// Ordered attribute definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct AttributeSchema {
    attributes: &'static [AttributeDef],
}

impl AttributeSchema {
    /// The 20-attribute university schema.
    pub fn canonical() -> &'static AttributeSchema {
        &CANONICAL
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn attributes(&self) -> &'static [AttributeDef] {
        self.attributes
    }

    pub fn get(&self, index: usize) -> Option<&'static AttributeDef> {
        self.attributes.get(index)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn emphasis_range(&self) -> std::ops::Range<usize> {
        EMPHASIS_START..ATTRIBUTE_COUNT
    }
}

/// Where a raw attribute lands in the canonical schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawMapping {
    /// A single-valued canonical attribute, by schema index.
    Single(usize),
    /// The multi-valued `academic-emphasis` attribute.
    Emphasis,
}

/// Projection table from raw attribute names (lowercase) to the schema.
pub fn raw_mapping(raw_attribute: &str) -> Option<RawMapping> {
    let index = match raw_attribute {
        "state" => STATE,
        "location" => LOCATION,
        "control" => CONTROL,
        "no-of-students" | "number-of-students" => STUDENTS,
        "expenses" => EXPENSES,
        "percent-financial-aid" => FINANCIAL_AID,
        "no-applicants" | "number-of-applicants" => APPLICANTS,
        "percent-admittance" => ADMITTANCE,
        "percent-enrolled" => ENROLLED,
        "academics" => ACADEMICS,
        "social" => SOCIAL,
        "quality-of-life" => QUALITY_OF_LIFE,
        "academic-emphasis" => return Some(RawMapping::Emphasis),
        other => return CANONICAL.index_of(other).filter(|&i| i >= EMPHASIS_START).map(RawMapping::Single),
    };
    Some(RawMapping::Single(index))
}

/// Emphasis keyword map: raw emphasis value (lowercase) to flag offset
/// (0 = arts .. 6 = medical).
pub fn emphasis_flag(raw_value: &str) -> Option<usize> {
    let flag = match raw_value {
        "arts" | "liberal-arts" | "fine-arts" | "humanities" | "art" => 0,
        "science" | "sciences" | "biology" | "chemistry" | "physics" | "mathematics" | "math" => 1,
        "commerce" | "accounting" | "economics" | "finance" => 2,
        "engineering" | "engg" | "computer-science" => 3,
        "management" | "business-administration" | "business" => 4,
        "education" | "teaching" => 5,
        "medicine" | "medical" | "nursing" | "pre-med" | "health-science" => 6,
        _ => return None,
    };
    Some(flag)
}

/// Every key accepted by [`emphasis_flag`], for lexicon construction.
pub const EMPHASIS_KEYWORDS: &[&str] = &[
    "arts", "liberal-arts", "fine-arts", "humanities", "art",
    "science", "sciences", "biology", "chemistry", "physics", "mathematics", "math",
    "commerce", "accounting", "economics", "finance",
    "engineering", "engg", "computer-science",
    "management", "business-administration", "business",
    "education", "teaching",
    "medicine", "medical", "nursing", "pre-med", "health-science",
];
