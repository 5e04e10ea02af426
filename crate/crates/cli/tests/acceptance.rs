//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.
//!
//! Criteria that need the UCI universities file read it from
//! `UNIVERSITY_DATA` (or `data/university.data` in the workspace). Without
//! it they report BLOCKED, which is not a pass. Set
//! `UNIPROFILE_ACCEPTANCE_STRICT=1` to make BLOCKED fail the run.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as JsonValue};
use uniprofile_core::ingest::to_sexpr;
use uniprofile_core::profile::{apply_event, event_line, interest_distribution, parse_log, replay, vocabulary};
use uniprofile_core::recommend::{recommend, score};
use uniprofile_core::schema::{AttributeKind, AttributeSchema, EMPHASIS_START};
use uniprofile_core::stats::{class_distribution, emphasis_distribution, ClassDistribution};
use uniprofile_core::{
    build_dataset, emit_arff, load_dataset, parse_arff, parse_raw, Dataset, EventPayload, ExplicitFields,
    Feature, Lexicon, ProfileConfig, ProfileEvent, ProfileStore, UniversityProfile, UserProfile, Value,
};
use uniprofile_service::{spawn, AppState};

const THETA_TOLERANCE: f64 = 1e-9;
const TABLE_RUNTIME: Duration = Duration::from_secs(5);

const EXPECTED_HEADER: &str = "@relation Universities-v2

@attribute name string
@attribute state string
@attribute location {SUBURBAN,URBAN,SMALL-TOWN,SMALL-CITY}
@attribute control {PRIVATE,STATE}
@attribute no-of-students {5-,05-10,15-20,20+}
@attribute expenses {4-,04-07,07-10,10+}
@attribute percent-financial-aid numeric
@attribute number-of-applicants {01-10,04-07,07-10,17+,13-17,4-}
@attribute percent-admittance numeric
@attribute percent-enrolled numeric
@attribute academics {1,2,3,4,5}
@attribute social {1,2,3,4,5}
@attribute quality-of-life {1,2,3,4,5}
@attribute academic-emphasis-arts {YES,NO}
@attribute academic-emphasis-science {YES,NO}
@attribute academic-emphasis-commerce {YES,NO}
@attribute academic-emphasis-engg {YES,NO}
@attribute academic-emphasis-management {YES,NO}
@attribute academic-emphasis-education {YES,NO}
@attribute academic-emphasis-medical {YES,NO}

";
const EXPECTED_ADELPHI: &str = "ADELPHI,NEWYORK,?,PRIVATE,05-10,07-10,60,04-07,70,40,2,2,2,NO,YES,NO,NO,YES,NO,NO";

enum Failure {
    Fail(String),
    Blocked(String),
}

type Outcome = Result<String, Failure>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure::Fail(msg()))
    }
}

fn fail<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Fail(msg.into()))
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("workspace root")
}

fn fixture(name: &str) -> PathBuf {
    workspace().join("crates/core/fixtures").join(name)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn uci_path() -> Option<PathBuf> {
    match std::env::var_os("UNIVERSITY_DATA") {
        Some(p) => Some(PathBuf::from(p)),
        None => Some(workspace().join("data/university.data")).filter(|p| p.exists()),
    }
}

fn blocked() -> Failure {
    Failure::Blocked(
        "UCI universities file not supplied; set UNIVERSITY_DATA=<path to university.data>".into(),
    )
}

fn fixture_dataset() -> Dataset {
    let (raw, _) = parse_raw(&read(&fixture("universities.data")));
    build_dataset(&raw).0
}

// ---------------------------------------------------------------------------
// random generation

fn random_dataset(rng: &mut ChaCha8Rng, max: usize) -> Dataset {
    let n = rng.random_range(0..=max);
    Dataset::new((0..n).map(|i| random_record(rng, &format!("U{i}"))).collect()).unwrap()
}

fn random_record(rng: &mut ChaCha8Rng, name: &str) -> UniversityProfile {
    let schema = AttributeSchema::canonical();
    let mut values = vec![Value::Text(name.to_string())];
    for (i, def) in schema.attributes().iter().enumerate().skip(1) {
        let missing = i < EMPHASIS_START && rng.random_bool(0.2);
        values.push(match def.kind {
            _ if missing => Value::Missing,
            AttributeKind::String => {
                let len = rng.random_range(1..10);
                Value::Text((0..len).map(|_| rng.random_range(b'A'..=b'Z') as char).collect())
            }
            AttributeKind::Numeric if rng.random_bool(0.5) => Value::Number(rng.random_range(0..=100) as f64),
            AttributeKind::Numeric => Value::Number(rng.random::<f64>() * 100.0),
            AttributeKind::Nominal => Value::Text(def.domain.choose(rng).unwrap().to_string()),
        });
    }
    UniversityProfile::from_values(values).unwrap()
}

fn nominal_features() -> Vec<Feature> {
    AttributeSchema::canonical()
        .attributes()
        .iter()
        .filter(|d| d.kind == AttributeKind::Nominal)
        .flat_map(|d| d.domain.iter().map(move |v| Feature::attr(d.name, v)))
        .collect()
}

fn random_feature(rng: &mut ChaCha8Rng, nominal: &[Feature]) -> Feature {
    if rng.random_bool(0.75) {
        nominal.choose(rng).unwrap().clone()
    } else {
        Feature::keyword(["rowing", "boston", "quiet", "jazz", "3"].choose(rng).unwrap())
    }
}

fn random_profile(rng: &mut ChaCha8Rng, nominal: &[Feature]) -> UserProfile {
    let n = rng.random_range(0..12);
    UserProfile {
        user_id: "u".into(),
        explicit: ExplicitFields::default(),
        counts: (0..n).map(|_| (random_feature(rng, nominal), rng.random::<f64>() * 40.0)).collect(),
        event_count: 1,
        last_event_id: 1,
        updated_at_ms: 0,
    }
}

// ---------------------------------------------------------------------------
// independent oracle

fn naive_theta(p: &UserProfile, vocab: &BTreeSet<Feature>, alpha: f64) -> BTreeMap<Feature, f64> {
    let total: f64 = p.counts.values().sum();
    vocab
        .iter()
        .map(|f| {
            let c = p.counts.get(f).copied().unwrap_or(0.0);
            (f.clone(), (c + alpha) / (total + alpha * vocab.len() as f64))
        })
        .collect()
}

fn naive_features(u: &UniversityProfile) -> Vec<Feature> {
    let schema = AttributeSchema::canonical();
    let mut out = Vec::new();
    for (i, def) in schema.attributes().iter().enumerate().skip(1) {
        if let Value::Text(t) = u.get(i) {
            let keep = match def.kind {
                AttributeKind::String => true,
                AttributeKind::Numeric => false,
                AttributeKind::Nominal => i < EMPHASIS_START || t == "YES",
            };
            if keep {
                out.push(Feature::attr(def.name, t));
            }
        }
    }
    out
}

fn naive_score(theta: &BTreeMap<Feature, f64>, u: &UniversityProfile) -> f64 {
    let features = naive_features(u);
    features.iter().map(|f| theta[f].ln()).sum::<f64>() / features.len() as f64
}

// ---------------------------------------------------------------------------
// criteria

fn counts_and_percents(d: &ClassDistribution) -> Vec<(usize, String)> {
    d.rows.iter().map(|r| (r.count, r.percent_text())).collect()
}

fn expect_table(name: &str, d: &ClassDistribution, expected: &[(usize, &str)]) -> Result<(), Failure> {
    let got = counts_and_percents(d);
    let want: Vec<(usize, String)> = expected.iter().map(|(c, p)| (*c, p.to_string())).collect();
    ensure(got == want, || format!("{name}: got {got:?}, want {want:?}"))
}

fn table_reproduction() -> Outcome {
    let path = uci_path().ok_or_else(blocked)?;
    let start = Instant::now();
    let (dataset, _) = load_dataset(&path).map_err(|e| Failure::Fail(format!("{}: {e}", path.display())))?;
    let location = class_distribution(&dataset, "location").unwrap();
    let expenses = class_distribution(&dataset, "expenses").unwrap();
    let emphasis = emphasis_distribution(&dataset);
    let elapsed = start.elapsed();
    ensure(dataset.len() == 238, || format!("record count {} (want 238)", dataset.len()))?;
    expect_table("location", &location, &[(61, "25.63"), (103, "43.27"), (35, "14.70"), (36, "15.12")])?;
    expect_table("expenses", &expenses, &[(54, "22.68"), (70, "29.41"), (46, "19.32"), (68, "28.57")])?;
    expect_table(
        "emphasis",
        &emphasis,
        &[
            (114, "47.89"),
            (93, "39.07"),
            (24, "10.08"),
            (92, "38.65"),
            (81, "34.03"),
            (28, "11.76"),
            (28, "11.76"),
        ],
    )?;
    ensure(elapsed < TABLE_RUNTIME, || format!("took {elapsed:?}"))?;
    Ok(format!("238 records; location, expenses and emphasis tables exact; {elapsed:?}"))
}

fn control_note() -> Outcome {
    let path = uci_path().unwrap_or_else(|| fixture("universities.data"));
    let out = Command::new(env!("CARGO_BIN_EXE_uniprofile"))
        .args(["stats", "--data"])
        .arg(&path)
        .output()
        .expect("run uniprofile");
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let text = String::from_utf8(out.stdout).unwrap();
    let (dataset, _) = load_dataset(&path).unwrap();
    let control = class_distribution(&dataset, "control").unwrap();
    let section = text
        .split("\n\n")
        .find(|s| s.starts_with("UNIVERSITY CLASSES BASED ON CONTROL"))
        .ok_or_else(|| Failure::Fail("no control table in report".into()))?;
    for (i, r) in control.rows.iter().enumerate() {
        let want = [(i + 1).to_string(), r.label.clone(), r.count.to_string(), r.percent_text()];
        let found = section.lines().any(|l| l.split_whitespace().eq(want.iter().map(String::as_str)));
        ensure(found, || format!("control row {want:?} missing"))?;
    }
    ensure(section.contains("note:") && section.contains("PRIVATE 61, STATE 103"), || {
        "discrepancy note missing".into()
    })?;
    let computed: Vec<String> = control.rows.iter().map(|r| format!("{} {}", r.label, r.count)).collect();
    Ok(format!("{} printed with discrepancy note ({})", computed.join(", "), path.display()))
}

fn arff_golden() -> Outcome {
    let arff = emit_arff(&fixture_dataset()).map_err(|e| Failure::Fail(e.to_string()))?;
    let lines: Vec<&str> = arff.lines().collect();
    let header = lines[..23].join("\n") + "\n";
    ensure(header == EXPECTED_HEADER, || format!("header differs:\n{header}"))?;
    ensure(lines.get(24) == Some(&EXPECTED_ADELPHI), || format!("line 25 is {:?}", lines.get(24)))?;
    ensure(arff == read(&fixture("universities.arff")), || "differs from golden file".into())?;
    Ok("header lines 1-23 and ADELPHI line 25 byte-exact".into())
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..200 {
        let d = random_dataset(&mut rng, 15);
        let text = emit_arff(&d).map_err(|e| Failure::Fail(format!("dataset {i}: {e}")))?;
        let back = parse_arff(&text).map_err(|e| Failure::Fail(format!("dataset {i}: {e}")))?;
        ensure(back == d, || format!("dataset {i} changed on round trip"))?;
    }
    let (raw, _) = parse_raw(&read(&fixture("universities.data")));
    let (again, diags) = parse_raw(&to_sexpr(&raw));
    ensure(raw.len() == 10 && again == raw && diags.is_empty(), || "raw fixture round trip differs".into())?;
    Ok("200 random datasets; 10-record raw fixture".into())
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let nominal = nominal_features();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let profile = random_profile(&mut rng, &nominal);
        let u = random_record(&mut rng, "X");
        let dataset = Dataset::new(vec![u.clone(), random_record(&mut rng, "Y")]).unwrap();
        let alpha = [0.5, 1.0, 2.0].choose(&mut rng).copied().unwrap();
        let vocab = vocabulary(&profile, &dataset);
        let theta = interest_distribution(&profile, &vocab, alpha).unwrap();
        let naive = naive_theta(&profile, &vocab, alpha);
        ensure(theta.keys().eq(naive.keys()), || format!("pair {i}: support differs"))?;
        for (f, t) in &theta {
            worst = worst.max((t - naive[f]).abs());
        }
        if !naive_features(&u).is_empty() {
            let s = score(&profile, &u, &vocab, alpha).map_err(|e| Failure::Fail(e.to_string()))?;
            worst = worst.max((s - naive_score(&naive, &u)).abs());
        }
    }
    ensure(worst <= THETA_TOLERANCE, || format!("max deviation {worst:e}"))?;

    let dataset = fixture_dataset();
    let lexicon = Lexicon::from_dataset(&dataset);
    let queries = ["engineering", "urban private", "small town arts", "new york", "the", "medicine 3"];
    let mut worst_sum = 0.0f64;
    for seq in 0..60 {
        let mut store = ProfileStore::new(ProfileConfig::default());
        let seeds = (0..rng.random_range(0..3)).map(|_| random_feature(&mut rng, &nominal)).collect();
        store.create_user("u", ExplicitFields::default(), seeds, 0).unwrap();
        let len = if seq == 0 { 50 } else { rng.random_range(0..=50) };
        for t in 0..=len {
            if t > 0 {
                let payload = match rng.random_range(0..3) {
                    0 => EventPayload::Search { query: queries.choose(&mut rng).unwrap().to_string() },
                    1 => EventPayload::Click {
                        university: dataset.records().choose(&mut rng).unwrap().name().to_string(),
                    },
                    _ => EventPayload::Import {
                        source: "doc".into(),
                        features: (0..rng.random_range(0..4)).map(|_| random_feature(&mut rng, &nominal)).collect(),
                    },
                };
                store.record("u", payload, t as u64, &dataset, &lexicon).unwrap();
            }
            let p = store.get("u").unwrap();
            let sum: f64 = interest_distribution(p, &vocabulary(p, &dataset), 1.0).unwrap().values().sum();
            worst_sum = worst_sum.max((sum - 1.0).abs());
        }
    }
    ensure(worst_sum <= THETA_TOLERANCE, || format!("|sum(theta) - 1| reached {worst_sum:e}"))?;
    Ok(format!("100 pairs, max deviation {worst:.1e}; 60 sequences, max |sum-1| {worst_sum:.1e}"))
}

fn feedback_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let nominal = nominal_features();
    let schema = AttributeSchema::canonical();
    let lexicon = Lexicon::from_schema();
    let config = ProfileConfig::default();
    let mut checked = 0;
    for (index, def) in schema.attributes().iter().enumerate() {
        if def.kind != AttributeKind::Nominal {
            continue;
        }
        for value in def.domain.iter().filter(|v| **v != "NO") {
            let other = if *value == "YES" { "NO" } else { def.domain.iter().find(|v| *v != value).unwrap() };
            for trial in 0..4 {
                let base = random_record(&mut rng, "BASE");
                let with = |name: &str, v: &str| {
                    let mut values = base.values().to_vec();
                    values[0] = Value::Text(name.into());
                    values[index] = Value::Text(v.into());
                    UniversityProfile::from_values(values).unwrap()
                };
                let dataset = Dataset::new(vec![with("A", value), with("B", other)]).unwrap();
                let profile = random_profile(&mut rng, &nominal);
                let diff = |p: &UserProfile| {
                    let vocab = vocabulary(p, &dataset);
                    let [a, b] = [0, 1].map(|i| score(p, &dataset.records()[i], &vocab, config.alpha).unwrap());
                    a - b
                };
                let f = Feature::attr(def.name, value);
                let mut payloads =
                    vec![EventPayload::Import { source: "doc".into(), features: vec![f.clone()] }];
                if lexicon.tokenize(&value.to_lowercase()) == [f.clone()] {
                    payloads.push(EventPayload::Search { query: value.to_lowercase() });
                }
                if other != "NO" {
                    payloads.push(EventPayload::Click { university: "A".into() });
                }
                let before = diff(&profile);
                for payload in payloads {
                    let kind = payload.kind();
                    let event = ProfileEvent { event_id: 2, user_id: "u".into(), timestamp_ms: 1, payload };
                    let after = apply_event(&profile, &event, &dataset, &lexicon, &config).unwrap();
                    let d = diff(&after);
                    ensure(d > before, || format!("{f} via {kind} (trial {trial}): {before} -> {d}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} event applications over every nominal attribute value"))
}

fn fifty_event_log(dataset: &Dataset, lexicon: &Lexicon) -> (String, ProfileStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut store = ProfileStore::new(ProfileConfig::default());
    let mut log = String::new();
    let users = ["ana", "bo", "cy", "di"];
    for u in users {
        let seed = Feature::attr("location", ["URBAN", "SUBURBAN"].choose(&mut rng).unwrap());
        log += &(event_line(&store.create_user(u, ExplicitFields::default(), vec![seed], 0).unwrap()) + "\n");
    }
    for t in users.len()..50 {
        let payload = match rng.random_range(0..3) {
            0 => EventPayload::Search { query: ["engineering", "urban arts", "new york state"].choose(&mut rng).unwrap().to_string() },
            1 => EventPayload::Click { university: dataset.records().choose(&mut rng).unwrap().name().to_string() },
            _ => EventPayload::Import { source: "cv".into(), features: lexicon.tokenize("medicine in a small city") },
        };
        let user = users.choose(&mut rng).unwrap();
        log += &(event_line(&store.record(user, payload, t as u64 * 1000, dataset, lexicon).unwrap()) + "\n");
    }
    (log, store)
}

fn determinism() -> Outcome {
    let dataset = fixture_dataset();
    let lexicon = Lexicon::from_dataset(&dataset);
    let (log, live) = fifty_event_log(&dataset, &lexicon);
    let events = parse_log(&log).map_err(|e| Failure::Fail(e.to_string()))?;
    ensure(events.len() == 50, || format!("{} events", events.len()))?;
    let replayed = replay(&events, ProfileConfig::default(), &dataset, &lexicon).unwrap();
    ensure(replayed.profiles() == live.profiles(), || "replayed profiles differ from live ones".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let nominal = nominal_features();
    let mut cases: Vec<(UserProfile, Dataset)> =
        live.profiles().values().map(|p| (p.clone(), dataset.clone())).collect();
    for _ in 0..20 {
        cases.push((random_profile(&mut rng, &nominal), random_dataset(&mut rng, 12)));
    }
    for (p, d) in &cases {
        for k in 0..d.len() {
            let a = recommend(p, d, k, 1.0).unwrap();
            let b = recommend(p, d, k + 1, 1.0).unwrap();
            ensure(a.len() == k && b[..k] == a[..], || format!("recommend({k}) is not a prefix of recommend({})", k + 1))?;
        }
    }
    Ok(format!("50-event log replays exactly; prefix property on {} profile/dataset pairs", cases.len()))
}

async fn start(dataset: Dataset, events: &Path) -> (String, reqwest::Client) {
    let state = Arc::new(AppState::with_dataset(dataset, events, ProfileConfig::default()).unwrap());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let (addr, _) = spawn(listener, state).unwrap();
    (format!("http://{addr}"), reqwest::Client::new())
}

async fn service_flow() -> Result<String, Failure> {
    let dir = tempfile::tempdir().unwrap();
    let (base, client) = start(fixture_dataset(), &dir.path().join("events.jsonl")).await;
    let get = |path: &str| {
        let req = client.get(format!("{base}{path}"));
        async move {
            let r = req.send().await.unwrap();
            (r.status().as_u16(), r.json::<JsonValue>().await.unwrap())
        }
    };

    let r = client.post(format!("{base}/users")).json(&json!({"user_id": "acc"})).send().await.unwrap();
    ensure(r.status().as_u16() == 201, || format!("create user: {}", r.status()))?;
    let dup = client.post(format!("{base}/users")).json(&json!({"user_id": "acc"})).send().await.unwrap();
    ensure(dup.status().as_u16() == 409, || format!("duplicate user: {}", dup.status()))?;

    let (_, before) = get("/users/acc/recommendations?k=5").await;
    let (status, found) = get("/search?q=engineering&user=acc").await;
    ensure(status == 200 && found["event_id"] == 2, || format!("search: {status} {found}"))?;
    let (_, again) = get("/users/acc/recommendations?k=5").await;
    ensure(again != before, || "search did not change recommendations".into())?;

    let r = client
        .post(format!("{base}/users/acc/events"))
        .json(&json!({"kind": "click", "payload": {"university": "CAL-TECH"}}))
        .send()
        .await
        .unwrap();
    ensure(r.status().as_u16() == 202, || format!("click: {}", r.status()))?;
    let (status, recs) = get("/users/acc/recommendations?k=5").await;
    ensure(status == 200 && recs["recommendations"][0]["name"] == "CAL-TECH", || format!("recommendations: {recs}"))?;
    ensure(get("/users/acc/recommendations?k=5").await.1 == recs, || "repeated GET differs".into())?;
    let (status, _) = get("/users/acc/recommendations?class_attribute=location&per_class=2").await;
    ensure(status == 200, || format!("class recommendations: {status}"))?;
    let (_, profile) = get("/users/acc/profile").await;
    ensure(
        profile["top"][0]["feature"] == json!({"attribute": "academic-emphasis-engg", "value": "YES"}),
        || format!("profile: {profile}"),
    )?;
    let (status, hits) = get("/search?q=cal-tech").await;
    ensure(status == 200 && hits["results"][0]["name"] == "CAL-TECH", || format!("search cal-tech: {hits}"))?;
    let (status, _) = get("/stats/location").await;
    ensure(status == 200, || format!("stats: {status}"))?;

    let path = uci_path().ok_or_else(|| match blocked() {
        Failure::Blocked(m) => Failure::Blocked(format!("endpoint suite passed; full-dataset stats check: {m}")),
        f => f,
    })?;
    let (full, _) = load_dataset(&path).map_err(|e| Failure::Fail(e.to_string()))?;
    let (base, client) = start(full, &dir.path().join("full.jsonl")).await;
    let body: JsonValue =
        client.get(format!("{base}/stats/location")).send().await.unwrap().json().await.unwrap();
    ensure(body["rows"][1]["label"] == "URBAN" && body["rows"][1]["count"] == 103, || format!("full stats: {body}"))?;
    Ok("create user, search, click, recommendations, profile, stats; full dataset URBAN 103".into())
}

fn service_contract() -> Outcome {
    tokio::runtime::Runtime::new().unwrap().block_on(service_flow())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("table-reproduction", table_reproduction),
        ("control-discrepancy-note", control_note),
        ("arff-golden", arff_golden),
        ("round-trip", round_trip),
        ("oracle-equivalence", oracle_equivalence),
        ("feedback-monotonicity", feedback_monotonicity),
        ("determinism", determinism),
        ("service-contract", service_contract),
    ];
    let strict = std::env::var_os("UNIPROFILE_ACCEPTANCE_STRICT").is_some();
    let (mut failed, mut blocked) = (0, 0);
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                fail(format!("panicked: {msg}"))
            });
        match outcome {
            Ok(detail) => println!("PASS    {name}: {detail}"),
            Err(Failure::Fail(detail)) => {
                failed += 1;
                println!("FAIL    {name}: {detail}");
            }
            Err(Failure::Blocked(detail)) => {
                blocked += 1;
                println!("BLOCKED {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed, {blocked} blocked", 8 - failed - blocked);
    if failed > 0 || (strict && blocked > 0) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
