//! Ranking universities against a user's interest distribution.
//!
//! A university is scored by the mean log-probability of its features
//! under the user's smoothed multinomial. Using the mean keeps records with
//! missing attributes comparable to complete ones. Ties are broken by name.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::integrate::{Dataset, UniversityProfile};
use crate::lexicon::Lexicon;
use crate::profile::{interest_distribution, vocabulary, Feature, ProfileError, UserProfile};
use crate::schema::{AttributeSchema, EMPHASIS_START, NAME, STATE};

#[derive(Debug, Error, PartialEq)]
pub enum RecommendError {
    #[error("university `{0}` has no features to score")]
    EmptyFeatures(String),
    #[error("attribute `{0}` is not nominal")]
    NotNominal(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Feature set of a university: its state, every present nominal
/// attribute value, and the emphasis flags set to YES. Numeric attributes
/// are not features.
pub fn university_features(u: &UniversityProfile) -> BTreeSet<Feature> {
    let schema = AttributeSchema::canonical();
    let mut out = BTreeSet::new();
    for (i, (def, value)) in schema.attributes().iter().zip(u.values()).enumerate() {
        let Some(text) = value.as_text() else { continue };
        if i == NAME {
            continue;
        }
        if i == STATE || (def.is_nominal() && (i < EMPHASIS_START || text == "YES")) {
            out.insert(Feature::attr(def.name, text));
        }
    }
    out
}

/// Mean of natural-log probabilities, accumulated as offsets from the first
/// term so that equal terms give exactly that term.
fn mean_log(probabilities: impl Iterator<Item = f64>) -> Option<f64> {
    let logs: Vec<f64> = probabilities.map(f64::ln).collect();
    let first = *logs.first()?;
    let n = logs.len() as f64;
    Some(first + logs.iter().map(|l| (l - first) / n).sum::<f64>())
}

/// A profile's distribution prepared for repeated scoring.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    profile: &'a UserProfile,
    theta: BTreeMap<Feature, f64>,
}

impl<'a> Scorer<'a> {
    /// Distribution over the profile's vocabulary for `dataset`.
    pub fn new(profile: &'a UserProfile, dataset: &Dataset, alpha: f64) -> Result<Self, RecommendError> {
        Self::with_vocabulary(profile, &vocabulary(profile, dataset), alpha)
    }

    pub fn with_vocabulary(
        profile: &'a UserProfile,
        vocabulary: &BTreeSet<Feature>,
        alpha: f64,
    ) -> Result<Self, RecommendError> {
        Ok(Scorer { profile, theta: interest_distribution(profile, vocabulary, alpha)? })
    }

    pub fn theta(&self) -> &BTreeMap<Feature, f64> {
        &self.theta
    }

    /// Probability of a feature, zero outside the vocabulary.
    pub fn probability(&self, f: &Feature) -> f64 {
        self.theta.get(f).copied().unwrap_or(0.0)
    }

    pub fn score(&self, u: &UniversityProfile) -> Result<f64, RecommendError> {
        let features = university_features(u);
        mean_log(features.iter().map(|f| self.probability(f)))
            .ok_or_else(|| RecommendError::EmptyFeatures(u.name().to_string()))
    }

    fn recommendation(&self, u: &UniversityProfile, score: f64) -> Recommendation {
        let mut matched: Vec<(Feature, f64)> = university_features(u)
            .into_iter()
            .filter(|f| self.profile.counts.get(f).is_some_and(|c| *c > 0.0))
            .map(|f| {
                let p = self.probability(&f);
                (f, p)
            })
            .collect();
        matched.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let schema = AttributeSchema::canonical();
        let class_labels = schema.attributes()[..EMPHASIS_START]
            .iter()
            .zip(u.values())
            .filter(|(def, _)| def.is_nominal())
            .filter_map(|(def, v)| v.as_text().map(|t| (def.name.to_string(), t.to_string())))
            .collect();
        Recommendation {
            name: u.name().to_string(),
            score,
            matched_features: matched.into_iter().map(|(feature, probability)| MatchedFeature { feature, probability }).collect(),
            class_labels,
        }
    }

    /// Score every scorable record, best first, ties by name.
    pub fn rank<'d>(&self, records: impl IntoIterator<Item = &'d UniversityProfile>) -> Vec<Recommendation> {
        let mut scored: Vec<(&UniversityProfile, f64)> =
            records.into_iter().filter_map(|u| self.score(u).ok().map(|s| (u, s))).collect();
        scored.sort_by(|a, b| by_score_then_name(a.1, a.0.name(), b.1, b.0.name()));
        scored.into_iter().map(|(u, s)| self.recommendation(u, s)).collect()
    }
}

fn by_score_then_name(sa: f64, na: &str, sb: f64, nb: &str) -> Ordering {
    sb.total_cmp(&sa).then_with(|| na.cmp(nb))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedFeature {
    pub feature: Feature,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub name: String,
    pub score: f64,
    /// Features of the university the user has weight on, by probability.
    pub matched_features: Vec<MatchedFeature>,
    pub class_labels: BTreeMap<String, String>,
}

/// Mean log-probability of `u`'s features under the profile.
pub fn score(
    profile: &UserProfile,
    u: &UniversityProfile,
    vocabulary: &BTreeSet<Feature>,
    alpha: f64,
) -> Result<f64, RecommendError> {
    Scorer::with_vocabulary(profile, vocabulary, alpha)?.score(u)
}

/// Top `k` universities. Records without features are skipped.
pub fn recommend(
    profile: &UserProfile,
    dataset: &Dataset,
    k: usize,
    alpha: f64,
) -> Result<Vec<Recommendation>, RecommendError> {
    if k == 0 || dataset.is_empty() {
        return Ok(Vec::new());
    }
    let mut ranked = Scorer::new(profile, dataset, alpha)?.rank(dataset.records());
    ranked.truncate(k);
    Ok(ranked)
}

/// Label used for records missing the partitioning attribute.
pub const UNKNOWN_CLASS: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBucket {
    pub class: String,
    pub recommendations: Vec<Recommendation>,
}

/// Top `per_class` recommendations within each class of a nominal
/// attribute, classes in declared order. Records missing the attribute go
/// to a trailing `unknown` bucket when there are any.
pub fn class_recommend(
    profile: &UserProfile,
    dataset: &Dataset,
    attribute: &str,
    per_class: usize,
    alpha: f64,
) -> Result<Vec<ClassBucket>, RecommendError> {
    let schema = AttributeSchema::canonical();
    let index = schema
        .index_of(attribute)
        .filter(|&i| schema.attributes()[i].is_nominal())
        .ok_or_else(|| RecommendError::NotNominal(attribute.to_string()))?;
    let def = &schema.attributes()[index];
    if dataset.is_empty() {
        return Ok(def
            .domain
            .iter()
            .map(|label| ClassBucket { class: label.to_string(), recommendations: Vec::new() })
            .collect());
    }
    let scorer = Scorer::new(profile, dataset, alpha)?;

    let mut buckets: Vec<ClassBucket> = def
        .domain
        .iter()
        .map(|label| {
            let members = dataset.records().iter().filter(|r| r.get(index).as_text() == Some(label));
            let mut recs = scorer.rank(members);
            recs.truncate(per_class);
            ClassBucket { class: label.to_string(), recommendations: recs }
        })
        .collect();
    let unknown: Vec<_> = dataset.records().iter().filter(|r| r.get(index).is_missing()).collect();
    if !unknown.is_empty() {
        let mut recs = scorer.rank(unknown);
        recs.truncate(per_class);
        buckets.push(ClassBucket { class: UNKNOWN_CLASS.to_string(), recommendations: recs });
    }
    Ok(buckets)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchHit {
    pub name: String,
    pub matches: usize,
}

/// Keyword search over the dataset.
///
/// Each query term scores one match per record when it equals the record's
/// name, is a substring of the name at least three characters long, equals
/// its state, or maps to a feature the record has. A query that equals a
/// name once whitespace is turned into hyphens scores one extra match.
pub fn search(dataset: &Dataset, query: &str, lexicon: &Lexicon) -> Vec<SearchHit> {
    let terms = lexicon.terms(query);
    let whole = query.split_whitespace().collect::<Vec<_>>().join("-").to_lowercase();
    if terms.is_empty() && whole.is_empty() {
        return Vec::new();
    }
    let mut hits: Vec<SearchHit> = dataset
        .records()
        .iter()
        .filter_map(|r| {
            let name = r.name().to_lowercase();
            let state = r.get(STATE).as_text().map(str::to_lowercase);
            let features = university_features(r);
            let mut matches = terms
                .iter()
                .filter(|t| {
                    t.text == name
                        || (t.text.chars().count() >= 3 && name.contains(&t.text))
                        || state.as_deref() == Some(t.text.as_str())
                        || features.contains(&t.feature)
                })
                .count();
            if !whole.is_empty() && whole == name {
                matches += 1;
            }
            (matches > 0).then(|| SearchHit { name: r.name().to_string(), matches })
        })
        .collect();
    hits.sort_by(|a, b| b.matches.cmp(&a.matches).then_with(|| a.name.cmp(&b.name)));
    hits
}
