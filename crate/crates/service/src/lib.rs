//! HTTP/JSON front end over the profiling pipeline.
//!
//! Profiles are event-sourced: every state change is appended to a JSON
//! lines log before it is applied, and startup replays the log.

pub mod api;
pub mod error;
pub mod state;

use std::net::SocketAddr;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::task::JoinHandle;

pub use api::router;
pub use error::{ApiError, ErrorBody};
pub use state::{AppState, ServiceConfig, StartupError, SubmitError};

/// Serve on an already-bound listener in a background task.
pub fn spawn(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<(SocketAddr, JoinHandle<std::io::Result<()>>)> {
    let addr = listener.local_addr()?;
    let app = router(state);
    let handle = tokio::spawn(async move { axum::serve(listener, app).await });
    Ok((addr, handle))
}

/// Load state and serve until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let state = Arc::new(AppState::open(&config)?);
    let listener = TcpListener::bind((config.host.as_str(), config.port)).await?;
    tracing::info!(addr = %listener.local_addr()?, records = state.dataset.len(), "serving");
    axum::serve(listener, router(state)).await?;
    Ok(())
}
