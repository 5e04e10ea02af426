use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;
use tokio::sync::Mutex;
use uniprofile_core::profile::{event_line, parse_log, replay};
use uniprofile_core::{
    load_dataset, Dataset, DatasetIoError, EventPayload, Lexicon, ProfileConfig, ProfileError,
    ProfileEvent, ProfileStore, UserProfile,
};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data: PathBuf,
    pub events: PathBuf,
    pub host: String,
    pub port: u16,
    pub profile: ProfileConfig,
}

impl ServiceConfig {
    pub fn new(data: impl Into<PathBuf>, events: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data: data.into(),
            events: events.into(),
            host: "127.0.0.1".into(),
            port: 8080,
            profile: ProfileConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error(transparent)]
    Dataset(#[from] DatasetIoError),
    #[error("{path}: {source}")]
    Log { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Replay { path: String, source: ProfileError },
    #[error(transparent)]
    Config(ProfileError),
}

struct EventLog {
    file: File,
}

impl EventLog {
    fn append(&mut self, event: &ProfileEvent) -> std::io::Result<()> {
        let mut line = event_line(event);
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()
    }
}

/// Shared server state. The dataset and lexicon never change after start;
/// profiles are the fold of the event log.
pub struct AppState {
    pub dataset: Arc<Dataset>,
    pub lexicon: Arc<Lexicon>,
    store: RwLock<ProfileStore>,
    // Held across prepare, append and commit so events reach the log in id order.
    log: Mutex<EventLog>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl AppState {
    /// Load the dataset and rebuild profiles from the event log, creating
    /// the log if it does not exist.
    pub fn open(config: &ServiceConfig) -> Result<Self, StartupError> {
        let (dataset, _) = load_dataset(&config.data)?;
        Self::with_dataset(dataset, &config.events, config.profile)
    }

    pub fn with_dataset(dataset: Dataset, events: &Path, profile: ProfileConfig) -> Result<Self, StartupError> {
        profile.validate().map_err(StartupError::Config)?;
        let path = events.display().to_string();
        let text = match std::fs::read_to_string(events) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(source) => return Err(StartupError::Log { path, source }),
        };
        let lexicon = Lexicon::from_dataset(&dataset);
        let store = parse_log(&text)
            .and_then(|events| replay(&events, profile, &dataset, &lexicon))
            .map_err(|source| StartupError::Replay { path: path.clone(), source })?;
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(events)
            .map_err(|source| StartupError::Log { path: path.clone(), source })?;
        if !text.is_empty() && !text.ends_with('\n') {
            file.write_all(b"\n").map_err(|source| StartupError::Log { path, source })?;
        }
        tracing::info!(users = store.profiles().len(), last_event = store.last_event_id(), "replayed event log");
        Ok(AppState {
            dataset: Arc::new(dataset),
            lexicon: Arc::new(lexicon),
            store: RwLock::new(store),
            log: Mutex::new(EventLog { file }),
        })
    }

    pub fn config(&self) -> ProfileConfig {
        *self.store.read().unwrap().config()
    }

    pub fn profile(&self, user_id: &str) -> Option<UserProfile> {
        self.store.read().unwrap().get(user_id).cloned()
    }

    pub fn last_event_id(&self) -> u64 {
        self.store.read().unwrap().last_event_id()
    }

    /// Validate, persist and apply one event. Nothing is logged or applied
    /// when validation fails.
    pub async fn submit(&self, user_id: &str, payload: EventPayload) -> Result<(ProfileEvent, UserProfile), SubmitError> {
        let mut log = self.log.lock().await;
        let (event, profile) =
            self.store.read().unwrap().prepare(user_id, payload, now_ms(), &self.dataset, &self.lexicon)?;
        log.append(&event).map_err(SubmitError::Io)?;
        self.store.write().unwrap().commit(&event, profile.clone());
        Ok((event, profile))
    }
}

#[derive(Debug, Error)]
pub enum SubmitError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("event log write failed: {0}")]
    Io(std::io::Error),
}
