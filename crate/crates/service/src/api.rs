use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as JsonValue};
use uniprofile_core::profile::{interest_distribution, vocabulary, ExternalDocument};
use uniprofile_core::recommend::{class_recommend, recommend, search, university_features, ClassBucket, SearchHit};
use uniprofile_core::stats::distribution;
use uniprofile_core::{
    EventPayload, ExplicitFields, Feature, ProfileError, Recommendation, UniversityProfile, UserProfile, Value,
};

use crate::error::ApiError;
use crate::state::{AppState, SubmitError};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_PER_CLASS: usize = 3;
pub const DEFAULT_TOP: usize = 10;

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/users", post(create_user))
        .route("/users/{id}/events", post(post_event))
        .route("/users/{id}/recommendations", get(recommendations))
        .route("/users/{id}/profile", get(profile))
        .route("/universities", get(universities))
        .route("/search", get(search_universities))
        .route("/stats/{attribute}", get(stats))
        .with_state(state)
}

impl From<SubmitError> for ApiError {
    fn from(e: SubmitError) -> Self {
        match e {
            SubmitError::Profile(p) => p.into(),
            SubmitError::Io(_) => ApiError::internal(e.to_string()),
        }
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

fn usize_param(params: &HashMap<String, String>, key: &str, default: usize) -> ApiResult<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| ApiError::bad_request(format!("`{key}` must be a non-negative integer"))),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateUser {
    user_id: String,
    #[serde(default)]
    explicit: ExplicitFields,
    #[serde(default)]
    seeds: Vec<Feature>,
}

#[derive(Debug, Serialize)]
struct WeightedFeature {
    feature: Feature,
    count: f64,
    probability: f64,
}

#[derive(Debug, Serialize)]
pub struct ProfileView {
    user_id: String,
    explicit: ExplicitFields,
    event_count: u64,
    last_event_id: u64,
    updated_at_ms: u64,
    total_count: f64,
    top: Vec<WeightedFeature>,
}

fn profile_view(state: &AppState, p: &UserProfile, top: usize) -> ApiResult<ProfileView> {
    let theta = interest_distribution(p, &vocabulary(p, &state.dataset), state.config().alpha)?;
    let mut entries: Vec<WeightedFeature> = theta
        .into_iter()
        .map(|(feature, probability)| {
            let count = p.counts.get(&feature).copied().unwrap_or(0.0);
            WeightedFeature { feature, count, probability }
        })
        .collect();
    entries.sort_by(|a, b| b.probability.total_cmp(&a.probability).then_with(|| a.feature.cmp(&b.feature)));
    entries.truncate(top);
    Ok(ProfileView {
        user_id: p.user_id.clone(),
        explicit: p.explicit.clone(),
        event_count: p.event_count,
        last_event_id: p.last_event_id,
        updated_at_ms: p.updated_at_ms,
        total_count: p.total_count(),
        top: entries,
    })
}

async fn create_user(State(state): State<Shared>, body: Bytes) -> ApiResult<(StatusCode, Json<JsonValue>)> {
    let req: CreateUser = parse_body(&body)?;
    if req.user_id.trim().is_empty() {
        return Err(ProfileError::EmptyUserId.into());
    }
    let payload = EventPayload::Register { explicit: req.explicit, seeds: req.seeds };
    let (event, profile) = state.submit(&req.user_id, payload).await?;
    let view = profile_view(&state, &profile, DEFAULT_TOP)?;
    Ok((StatusCode::CREATED, Json(json!({ "event_id": event.event_id, "profile": view }))))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImportBody {
    source: String,
    document: Option<JsonValue>,
    features: Option<Vec<Feature>>,
}

async fn post_event(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<JsonValue>)> {
    if state.profile(&id).is_none() {
        return Err(ProfileError::UnknownUser(id).into());
    }
    let raw: JsonValue = parse_body(&body)?;
    let payload = if raw["kind"] == "import" {
        let body: ImportBody = serde_json::from_value(raw["payload"].clone())
            .map_err(|e| ApiError::bad_request(format!("malformed import payload: {e}")))?;
        let features = match (body.document, body.features) {
            (Some(doc), None) => ExternalDocument::from_value(&doc)?.features(&state.lexicon),
            (None, Some(features)) => features,
            _ => return Err(ApiError::bad_request("import payload needs exactly one of `document` or `features`")),
        };
        if features.is_empty() {
            return Ok((StatusCode::ACCEPTED, Json(json!({ "event_id": null, "applied": false }))));
        }
        EventPayload::Import { source: body.source, features }
    } else {
        let payload: EventPayload = serde_json::from_value(raw)
            .map_err(|e| ApiError::bad_request(format!("malformed event: {e}")))?;
        if matches!(payload, EventPayload::Register { .. }) {
            return Err(ApiError::bad_request("register events are created through POST /users"));
        }
        payload
    };
    let (event, _) = state.submit(&id, payload).await?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "event_id": event.event_id, "applied": true }))))
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum RecommendationView {
    Flat { user_id: String, k: usize, recommendations: Vec<Recommendation> },
    ByClass { user_id: String, class_attribute: String, per_class: usize, classes: Vec<ClassBucket> },
}

async fn recommendations(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<RecommendationView>> {
    let profile = state.profile(&id).ok_or(ProfileError::UnknownUser(id.clone()))?;
    let alpha = state.config().alpha;
    let view = match params.get("class_attribute") {
        Some(attribute) => {
            let per_class = usize_param(&params, "per_class", DEFAULT_PER_CLASS)?;
            let classes = class_recommend(&profile, &state.dataset, attribute, per_class, alpha)?;
            RecommendationView::ByClass { user_id: id, class_attribute: attribute.clone(), per_class, classes }
        }
        None => {
            let k = usize_param(&params, "k", DEFAULT_K)?;
            RecommendationView::Flat { user_id: id, k, recommendations: recommend(&profile, &state.dataset, k, alpha)? }
        }
    };
    Ok(Json(view))
}

async fn profile(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<ProfileView>> {
    let p = state.profile(&id).ok_or(ProfileError::UnknownUser(id))?;
    let top = usize_param(&params, "top", DEFAULT_TOP)?;
    Ok(Json(profile_view(&state, &p, top)?))
}

#[derive(Debug, Serialize)]
pub struct UniversityView {
    name: String,
    attributes: serde_json::Map<String, JsonValue>,
    features: Vec<Feature>,
}

fn university_view(u: &UniversityProfile) -> UniversityView {
    let schema = uniprofile_core::AttributeSchema::canonical();
    let attributes = schema
        .attributes()
        .iter()
        .zip(u.values())
        .map(|(def, v)| {
            let value = match v {
                Value::Missing => JsonValue::Null,
                Value::Text(s) => json!(s),
                Value::Number(x) => json!(x),
            };
            (def.name.to_string(), value)
        })
        .collect();
    UniversityView { name: u.name().to_string(), attributes, features: university_features(u).into_iter().collect() }
}

async fn universities(
    State(state): State<Shared>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<Vec<UniversityView>>> {
    match params.get("name") {
        Some(name) => {
            let u = state
                .dataset
                .find(name)
                .ok_or_else(|| ApiError::not_found("unknown_university", format!("unknown university `{name}`")))?;
            Ok(Json(vec![university_view(u)]))
        }
        None => Ok(Json(state.dataset.records().iter().map(university_view).collect())),
    }
}

#[derive(Debug, Serialize)]
struct SearchView {
    query: String,
    event_id: Option<u64>,
    results: Vec<SearchHit>,
}

async fn search_universities(
    State(state): State<Shared>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<SearchView>> {
    let query = params.get("q").ok_or_else(|| ApiError::bad_request("missing `q`"))?.clone();
    let mut event_id = None;
    if let Some(user) = params.get("user") {
        if state.profile(user).is_none() {
            return Err(ProfileError::UnknownUser(user.clone()).into());
        }
        if !query.trim().is_empty() {
            let (event, _) = state.submit(user, EventPayload::Search { query: query.clone() }).await?;
            event_id = Some(event.event_id);
        }
    }
    let results = search(&state.dataset, &query, &state.lexicon);
    Ok(Json(SearchView { query, event_id, results }))
}

async fn stats(
    State(state): State<Shared>,
    Path(attribute): Path<String>,
) -> ApiResult<Json<uniprofile_core::ClassDistribution>> {
    use uniprofile_core::stats::StatsError;
    distribution(&state.dataset, &attribute).map(Json).map_err(|e| match e {
        StatsError::UnknownAttribute(_) => ApiError::not_found("unknown_attribute", e.to_string()),
        StatsError::NotNominal(_) => ApiError::bad_request(e.to_string()),
    })
}
