//! Query tokenization against a lexicon of attribute values.
//!
//! Text is lowercased and split on anything that is not alphanumeric. Runs
//! of up to three tokens are first tried against the lexicon, joined both
//! with `-` and with nothing, so `small town` and `new york` reach
//! `SMALL-TOWN` and `NEWYORK`. Longest match wins. Remaining tokens are
//! dropped if they are stopwords, mapped through the lexicon if they hit an
//! entry, and kept as keyword features otherwise.
//!
//! Lexicon entries: location and control labels, the other non-emphasis
//! nominal labels, every emphasis keyword (mapped to the emphasis flag with
//! value `YES`), and every state value observed in the dataset. A key that
//! would map to values of more than one attribute (ratings `1`..`5`, shared
//! range labels such as `04-07`) is left out and stays a keyword.

use std::collections::{BTreeSet, HashMap};

use crate::integrate::Dataset;
use crate::profile::Feature;
use crate::schema::{emphasis_flag, AttributeSchema, EMPHASIS_KEYWORDS, EMPHASIS_START, STATE};

pub const STOPWORDS: &[&str] = &[
    "a", "an", "and", "any", "are", "at", "by", "for", "from", "i", "in", "is", "me", "my", "near",
    "of", "on", "or", "some", "the", "to", "with",
];

const MAX_NGRAM: usize = 3;

/// A token (or joined token run) together with the feature it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub text: String,
    pub feature: Feature,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, Feature>,
    ambiguous: BTreeSet<String>,
}

impl Lexicon {
    /// Schema-derived entries only, no observed state names.
    pub fn from_schema() -> Self {
        Self::from_dataset(&Dataset::default())
    }

    pub fn from_dataset(dataset: &Dataset) -> Self {
        let schema = AttributeSchema::canonical();
        let mut candidates: HashMap<String, BTreeSet<Feature>> = HashMap::new();
        let mut add = |key: &str, feature: Feature| {
            let key = key.to_lowercase();
            let bare = key.replace('-', "");
            for k in [key, bare] {
                if !k.is_empty() {
                    candidates.entry(k).or_default().insert(feature.clone());
                }
            }
        };

        for def in &schema.attributes()[..EMPHASIS_START] {
            for label in def.domain {
                add(label, Feature::attr(def.name, label));
            }
        }
        for keyword in EMPHASIS_KEYWORDS {
            let flag = emphasis_flag(keyword).expect("keyword table is consistent");
            add(keyword, Feature::attr(schema.attributes()[EMPHASIS_START + flag].name, "YES"));
        }
        for r in dataset.records() {
            if let Some(state) = r.get(STATE).as_text() {
                add(state, Feature::attr("state", state));
            }
        }

        let mut entries = HashMap::new();
        let mut ambiguous = BTreeSet::new();
        for (key, features) in candidates {
            if features.len() == 1 {
                entries.insert(key, features.into_iter().next().unwrap());
            } else {
                ambiguous.insert(key);
            }
        }
        Lexicon { entries, ambiguous }
    }

    pub fn lookup(&self, key: &str) -> Option<&Feature> {
        self.entries.get(key)
    }

    pub fn is_ambiguous(&self, key: &str) -> bool {
        self.ambiguous.contains(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn phrase(&self, tokens: &[String]) -> Option<(String, &Feature)> {
        let hyphen = tokens.join("-");
        if let Some(f) = self.entries.get(&hyphen) {
            return Some((hyphen, f));
        }
        let bare = tokens.concat();
        self.entries.get(&bare).map(|f| (hyphen, f))
    }

    pub fn terms(&self, text: &str) -> Vec<Term> {
        let tokens: Vec<String> = text
            .to_lowercase()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect();
        let mut out = Vec::new();
        let mut i = 0;
        'outer: while i < tokens.len() {
            for n in (2..=MAX_NGRAM.min(tokens.len() - i)).rev() {
                if let Some((text, feature)) = self.phrase(&tokens[i..i + n]) {
                    out.push(Term { text, feature: feature.clone() });
                    i += n;
                    continue 'outer;
                }
            }
            let token = &tokens[i];
            i += 1;
            if let Some(feature) = self.entries.get(token) {
                out.push(Term { text: token.clone(), feature: feature.clone() });
            } else if !STOPWORDS.contains(&token.as_str()) {
                out.push(Term { text: token.clone(), feature: Feature::keyword(token) });
            }
        }
        out
    }

    /// Features for `text`, duplicates preserved.
    pub fn tokenize(&self, text: &str) -> Vec<Feature> {
        self.terms(text).into_iter().map(|t| t.feature).collect()
    }
}
