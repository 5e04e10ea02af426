//! User profiles as smoothed multinomials over features.
//!
//! A profile holds non-negative pseudo-counts per [`Feature`]. Events add
//! weight to features; the interest distribution is
//!
//! ```text
//! theta[f] = (count[f] + alpha) / (sum(count) + alpha * |V|)
//! ```
//!
//! over a vocabulary `V` that covers every feature with a count. Profiles
//! are values: [`apply_event`] returns a new profile and never reads the
//! clock, so folding an event log is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrate::Dataset;
use crate::lexicon::Lexicon;
use crate::recommend::university_features;

/// A point in the support of the interest distribution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Feature {
    AttributeValue { attribute: String, value: String },
    Keyword { keyword: String },
}

impl Feature {
    pub fn attr(attribute: &str, value: &str) -> Self {
        Feature::AttributeValue { attribute: attribute.to_string(), value: value.to_string() }
    }

    /// Keyword tokens are stored lowercase.
    pub fn keyword(token: &str) -> Self {
        Feature::Keyword { keyword: token.to_lowercase() }
    }

    /// The attribute name, or `None` for keywords.
    pub fn attribute(&self) -> Option<&str> {
        match self {
            Feature::AttributeValue { attribute, .. } => Some(attribute),
            Feature::Keyword { .. } => None,
        }
    }

    pub fn is_keyword(&self) -> bool {
        matches!(self, Feature::Keyword { .. })
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::AttributeValue { attribute, value } => write!(f, "({attribute},{value})"),
            Feature::Keyword { keyword } => write!(f, "keyword:{keyword}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplicitFields {
    pub display_name: String,
    pub location: String,
    pub education: String,
    pub visited_places: Vec<String>,
    pub contact: Option<String>,
}

/// Event weights, smoothing and optional decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub alpha: f64,
    pub w_reg: f64,
    pub w_search: f64,
    pub w_click: f64,
    pub w_import: f64,
    /// Multiplier applied to every count before each non-register event.
    /// `1.0` disables decay.
    pub decay: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { alpha: 1.0, w_reg: 5.0, w_search: 1.0, w_click: 2.0, w_import: 3.0, decay: 1.0 }
    }
}

impl ProfileConfig {
    pub fn validate(&self) -> Result<(), ProfileError> {
        let weights = [self.w_reg, self.w_search, self.w_click, self.w_import];
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(ProfileError::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(ProfileError::InvalidConfig("event weights must be finite and non-negative".into()));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(ProfileError::InvalidConfig(format!("decay must be in (0, 1], got {}", self.decay)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum EventPayload {
    Register {
        #[serde(default)]
        explicit: ExplicitFields,
        #[serde(default)]
        seeds: Vec<Feature>,
    },
    Search { query: String },
    Click { university: String },
    /// Features are resolved when the event is created so replay does not
    /// depend on the external document still existing.
    Import { source: String, features: Vec<Feature> },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::Register { .. } => "register",
            EventPayload::Search { .. } => "search",
            EventPayload::Click { .. } => "click",
            EventPayload::Import { .. } => "import",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEvent {
    pub event_id: u64,
    pub user_id: String,
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub payload: EventPayload,
}

mod counts_as_pairs {
    use super::Feature;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        feature: Feature,
        count: f64,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<Feature, f64>, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> =
            map.iter().map(|(f, c)| Entry { feature: f.clone(), count: *c }).collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Feature, f64>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        Ok(entries.into_iter().map(|e| (e.feature, e.count)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub explicit: ExplicitFields,
    #[serde(with = "counts_as_pairs")]
    pub counts: BTreeMap<Feature, f64>,
    pub event_count: u64,
    pub last_event_id: u64,
    pub updated_at_ms: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("user `{0}` already exists")]
    DuplicateUser(String),
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("unknown university `{0}`")]
    UnknownUniversity(String),
    #[error("event {event_id} is not after the last applied event {last}")]
    OutOfOrder { event_id: u64, last: u64 },
    #[error("event for `{event}` applied to profile `{profile}`")]
    UserMismatch { event: String, profile: String },
    #[error("register event for an existing profile")]
    AlreadyRegistered,
    #[error("first event for `{0}` is not a register event")]
    NotRegistered(String),
    #[error("user id must be non-empty")]
    EmptyUserId,
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("vocabulary does not contain {0}")]
    VocabularyGap(Feature),
    #[error("malformed external profile document: {}", .0.join("; "))]
    MalformedDocument(Vec<String>),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("event log line {line}: {message}")]
    CorruptLog { line: usize, message: String },
}

impl UserProfile {
    /// Profile produced by a register event.
    pub fn register(event: &ProfileEvent, config: &ProfileConfig) -> Result<Self, ProfileError> {
        let EventPayload::Register { explicit, seeds } = &event.payload else {
            return Err(ProfileError::NotRegistered(event.user_id.clone()));
        };
        if event.user_id.is_empty() {
            return Err(ProfileError::EmptyUserId);
        }
        let mut counts = BTreeMap::new();
        for f in seeds {
            *counts.entry(f.clone()).or_insert(0.0) += config.w_reg;
        }
        Ok(UserProfile {
            user_id: event.user_id.clone(),
            explicit: explicit.clone(),
            counts,
            event_count: 1,
            last_event_id: event.event_id,
            updated_at_ms: event.timestamp_ms,
        })
    }

    pub fn total_count(&self) -> f64 {
        self.counts.values().sum()
    }

    /// Features with a positive count.
    pub fn support(&self) -> impl Iterator<Item = &Feature> {
        self.counts.iter().filter(|(_, c)| **c > 0.0).map(|(f, _)| f)
    }
}

fn add(counts: &mut BTreeMap<Feature, f64>, features: impl IntoIterator<Item = Feature>, weight: f64) {
    for f in features {
        *counts.entry(f).or_insert(0.0) += weight;
    }
}

/// Fold one non-register event into `profile`, returning the new profile.
pub fn apply_event(
    profile: &UserProfile,
    event: &ProfileEvent,
    dataset: &Dataset,
    lexicon: &Lexicon,
    config: &ProfileConfig,
) -> Result<UserProfile, ProfileError> {
    if event.user_id != profile.user_id {
        return Err(ProfileError::UserMismatch { event: event.user_id.clone(), profile: profile.user_id.clone() });
    }
    if event.event_id <= profile.last_event_id {
        return Err(ProfileError::OutOfOrder { event_id: event.event_id, last: profile.last_event_id });
    }
    let mut next = profile.clone();
    if config.decay != 1.0 {
        for c in next.counts.values_mut() {
            *c *= config.decay;
        }
    }
    match &event.payload {
        EventPayload::Register { .. } => return Err(ProfileError::AlreadyRegistered),
        EventPayload::Search { query } => add(&mut next.counts, lexicon.tokenize(query), config.w_search),
        EventPayload::Click { university } => {
            let u = dataset
                .find(university)
                .ok_or_else(|| ProfileError::UnknownUniversity(university.clone()))?;
            add(&mut next.counts, university_features(u), config.w_click);
        }
        EventPayload::Import { features, .. } => add(&mut next.counts, features.iter().cloned(), config.w_import),
    }
    next.event_count += 1;
    next.last_event_id = event.event_id;
    next.updated_at_ms = event.timestamp_ms;
    Ok(next)
}

/// Every attribute-value feature realized in the dataset plus every
/// feature the profile has a count for.
pub fn vocabulary(profile: &UserProfile, dataset: &Dataset) -> BTreeSet<Feature> {
    let mut v: BTreeSet<Feature> = dataset.records().iter().flat_map(university_features).collect();
    v.extend(profile.counts.keys().cloned());
    v
}

/// Laplace-smoothed multinomial over `vocabulary`.
pub fn interest_distribution(
    profile: &UserProfile,
    vocabulary: &BTreeSet<Feature>,
    alpha: f64,
) -> Result<BTreeMap<Feature, f64>, ProfileError> {
    if vocabulary.is_empty() {
        return Err(ProfileError::EmptyVocabulary);
    }
    if let Some(f) = profile.support().find(|f| !vocabulary.contains(*f)) {
        return Err(ProfileError::VocabularyGap(f.clone()));
    }
    let denominator = profile.total_count() + alpha * vocabulary.len() as f64;
    Ok(vocabulary
        .iter()
        .map(|f| {
            let c = profile.counts.get(f).copied().unwrap_or(0.0);
            (f.clone(), (c + alpha) / denominator)
        })
        .collect())
}

/// In-memory profile state plus the global event sequence.
#[derive(Debug, Clone)]
pub struct ProfileStore {
    profiles: BTreeMap<String, UserProfile>,
    last_event_id: u64,
    config: ProfileConfig,
}

impl ProfileStore {
    pub fn new(config: ProfileConfig) -> Self {
        ProfileStore { profiles: BTreeMap::new(), last_event_id: 0, config }
    }

    pub fn config(&self) -> &ProfileConfig {
        &self.config
    }

    pub fn get(&self, user_id: &str) -> Option<&UserProfile> {
        self.profiles.get(user_id)
    }

    pub fn profiles(&self) -> &BTreeMap<String, UserProfile> {
        &self.profiles
    }

    pub fn into_profiles(self) -> BTreeMap<String, UserProfile> {
        self.profiles
    }

    pub fn last_event_id(&self) -> u64 {
        self.last_event_id
    }

    /// Build the next event and the profile it produces without committing
    /// either.
    pub fn prepare(
        &self,
        user_id: &str,
        payload: EventPayload,
        timestamp_ms: u64,
        dataset: &Dataset,
        lexicon: &Lexicon,
    ) -> Result<(ProfileEvent, UserProfile), ProfileError> {
        let event = ProfileEvent {
            event_id: self.last_event_id + 1,
            user_id: user_id.to_string(),
            timestamp_ms,
            payload,
        };
        let profile = self.evaluate(&event, dataset, lexicon)?;
        Ok((event, profile))
    }

    fn evaluate(&self, event: &ProfileEvent, dataset: &Dataset, lexicon: &Lexicon) -> Result<UserProfile, ProfileError> {
        if event.event_id <= self.last_event_id {
            return Err(ProfileError::OutOfOrder { event_id: event.event_id, last: self.last_event_id });
        }
        match (&event.payload, self.profiles.get(&event.user_id)) {
            (EventPayload::Register { .. }, Some(_)) => Err(ProfileError::DuplicateUser(event.user_id.clone())),
            (EventPayload::Register { .. }, None) => UserProfile::register(event, &self.config),
            (_, None) => Err(ProfileError::UnknownUser(event.user_id.clone())),
            (_, Some(p)) => apply_event(p, event, dataset, lexicon, &self.config),
        }
    }

    /// Install a prepared result. `event` must be the one `prepare`
    /// returned against the current state.
    pub fn commit(&mut self, event: &ProfileEvent, profile: UserProfile) {
        debug_assert_eq!(event.event_id, self.last_event_id + 1);
        self.last_event_id = event.event_id;
        self.profiles.insert(profile.user_id.clone(), profile);
    }

    /// Validate and apply an already-numbered event.
    pub fn apply(&mut self, event: &ProfileEvent, dataset: &Dataset, lexicon: &Lexicon) -> Result<(), ProfileError> {
        let profile = self.evaluate(event, dataset, lexicon)?;
        self.last_event_id = event.event_id;
        self.profiles.insert(profile.user_id.clone(), profile);
        Ok(())
    }

    /// Register a new user.
    pub fn create_user(
        &mut self,
        user_id: &str,
        explicit: ExplicitFields,
        seeds: Vec<Feature>,
        timestamp_ms: u64,
    ) -> Result<ProfileEvent, ProfileError> {
        let (event, profile) = self.prepare(
            user_id,
            EventPayload::Register { explicit, seeds },
            timestamp_ms,
            &Dataset::default(),
            &Lexicon::default(),
        )?;
        self.commit(&event, profile);
        Ok(event)
    }

    /// Number, apply and return a new event.
    pub fn record(
        &mut self,
        user_id: &str,
        payload: EventPayload,
        timestamp_ms: u64,
        dataset: &Dataset,
        lexicon: &Lexicon,
    ) -> Result<ProfileEvent, ProfileError> {
        let (event, profile) = self.prepare(user_id, payload, timestamp_ms, dataset, lexicon)?;
        self.commit(&event, profile);
        Ok(event)
    }
}

/// Fold an event sequence into profiles. Event ids must increase strictly
/// across the whole sequence.
pub fn replay(
    events: &[ProfileEvent],
    config: ProfileConfig,
    dataset: &Dataset,
    lexicon: &Lexicon,
) -> Result<ProfileStore, ProfileError> {
    let mut store = ProfileStore::new(config);
    for e in events {
        store.apply(e, dataset, lexicon)?;
    }
    Ok(store)
}

/// One JSON object per line.
pub fn event_line(event: &ProfileEvent) -> String {
    serde_json::to_string(event).expect("events always serialize")
}

/// Parse a line-delimited event log. Blank lines are skipped; any other
/// unreadable line aborts with its line number.
pub fn parse_log(text: &str) -> Result<Vec<ProfileEvent>, ProfileError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ProfileError::CorruptLog { line: i + 1, message: e.to_string() })
        })
        .collect()
}

/// Stand-in for a social-network profile: a JSON object with optional
/// `location`, `education` (strings), `interests` and `visited_places`
/// (string arrays). Other keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExternalDocument {
    pub location: Option<String>,
    pub education: Option<String>,
    pub interests: Vec<String>,
    pub visited_places: Vec<String>,
}

impl ExternalDocument {
    pub fn parse(text: &str) -> Result<Self, ProfileError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| ProfileError::MalformedDocument(vec![format!("not JSON: {e}")]))?;
        Self::from_value(&value)
    }

    pub fn from_value(value: &serde_json::Value) -> Result<Self, ProfileError> {
        let Some(object) = value.as_object() else {
            return Err(ProfileError::MalformedDocument(vec!["document must be an object".into()]));
        };
        let mut doc = ExternalDocument::default();
        let mut problems = Vec::new();
        for (key, v) in object {
            match key.as_str() {
                "location" | "education" => match v {
                    serde_json::Value::String(s) => {
                        if key == "location" {
                            doc.location = Some(s.clone())
                        } else {
                            doc.education = Some(s.clone())
                        }
                    }
                    serde_json::Value::Null => {}
                    _ => problems.push(format!("{key}: expected a string")),
                },
                "interests" | "visited_places" => {
                    let list = v.as_array().and_then(|items| {
                        items.iter().map(|i| i.as_str().map(str::to_string)).collect::<Option<Vec<_>>>()
                    });
                    match list {
                        Some(items) if key == "interests" => doc.interests = items,
                        Some(items) => doc.visited_places = items,
                        None => problems.push(format!("{key}: expected an array of strings")),
                    }
                }
                other => problems.push(format!("{other}: unknown field")),
            }
        }
        if problems.is_empty() {
            Ok(doc)
        } else {
            Err(ProfileError::MalformedDocument(problems))
        }
    }

    /// All fields pushed through the query lexicon, in field order.
    pub fn features(&self, lexicon: &Lexicon) -> Vec<Feature> {
        let mut out = Vec::new();
        for text in self.location.iter().chain(&self.education).chain(&self.interests).chain(&self.visited_places) {
            out.extend(lexicon.tokenize(text));
        }
        out
    }
}

/// Turn an external document into import events, numbered from
/// `first_event_id`. A document yielding no features yields no events.
pub fn import_external(
    user_id: &str,
    source: &str,
    document: &ExternalDocument,
    lexicon: &Lexicon,
    first_event_id: u64,
    timestamp_ms: u64,
) -> Vec<ProfileEvent> {
    let features = document.features(lexicon);
    if features.is_empty() {
        return Vec::new();
    }
    vec![ProfileEvent {
        event_id: first_event_id,
        user_id: user_id.to_string(),
        timestamp_ms,
        payload: EventPayload::Import { source: source.to_string(), features },
    }]
}
