//! HTTP/JSON front end: archive browsing, lineage queries, phenotype
//! rendering and the interactive session protocol, all under `/api`.
//!
//! Handlers are thin adapters over [`win_core`]; anything the API does can be
//! reproduced with direct library calls.

pub mod config;
mod error;
mod png;
mod routes;

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::response::Html;
use axum::routing::get;
use axum::Router;
use thiserror::Error;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;
use win_core::session::{SessionConfig, SessionManager};
use win_core::{Archive, ArchiveError, DomainRegistry};

pub use config::{ConfigError, ServerConfig};
pub use error::ApiError;
pub use png::encode_grayscale;
pub use routes::MAX_RENDER_SIDE;

const GC_INTERVAL: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("server i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Shared handles every request works on.
#[derive(Clone)]
pub struct AppState {
    pub archive: Arc<Archive>,
    pub sessions: Arc<SessionManager>,
}

impl AppState {
    pub fn new(archive: Arc<Archive>, config: &ServerConfig) -> AppState {
        let session_config = SessionConfig { default_pop_size: config.pop_size_default, ..SessionConfig::default() };
        let ttl_ms = config.session_ttl_seconds.saturating_mul(1000);
        let sessions = Arc::new(SessionManager::new(archive.clone(), session_config, ttl_ms));
        AppState { archive, sessions }
    }
}

const LANDING: &str = "<!doctype html>\n<title>WIN</title>\n<p>WIN server is running. \
The JSON API lives under <a href=\"/api/domains\">/api</a>.</p>\n";

/// The full route table: `/api/...` plus static assets (or a landing page)
/// at `/`.
pub fn router(state: AppState, static_dir: Option<&std::path::Path>) -> Router {
    let app = Router::new().nest("/api", routes::api());
    let app = match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(LANDING) })),
    };
    app.with_state(state)
}

/// A bound, not yet running server.
pub struct Server {
    listener: TcpListener,
    state: AppState,
    config: ServerConfig,
}

impl Server {
    /// Opens the store and binds the listening socket.
    pub async fn bind(config: ServerConfig) -> Result<Server, ServerError> {
        Server::bind_with_registry(config, DomainRegistry::with_builtins()).await
    }

    pub async fn bind_with_registry(config: ServerConfig, registry: DomainRegistry) -> Result<Server, ServerError> {
        let path = config.storage_path.clone();
        let registry = Arc::new(registry);
        let archive = tokio::task::spawn_blocking(move || Archive::open(path, registry))
            .await
            .map_err(std::io::Error::other)??;
        let addr = SocketAddr::new(config.bind, config.port);
        let listener = TcpListener::bind(addr).await.map_err(|source| ServerError::Bind { addr, source })?;
        let state = AppState::new(Arc::new(archive), &config);
        Ok(Server { listener, state, config })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound socket has an address")
    }

    pub fn state(&self) -> &AppState {
        &self.state
    }

    /// Serves until `shutdown` resolves, then drains in-flight requests and
    /// syncs the store to disk.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServerError> {
        let Server { listener, state, config } = self;
        let sessions = state.sessions.clone();
        let gc = tokio::spawn(async move {
            let mut tick = tokio::time::interval(GC_INTERVAL);
            loop {
                tick.tick().await;
                let removed = sessions.gc();
                if removed > 0 {
                    log::info!("dropped {removed} idle sessions");
                }
            }
        });
        let app = router(state.clone(), config.static_dir.as_deref());
        let served = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
        gc.abort();
        let archive = state.archive.clone();
        tokio::task::spawn_blocking(move || archive.sync())
            .await
            .map_err(std::io::Error::other)??;
        log::info!("store synced, server stopped");
        served.map_err(ServerError::Io)
    }
}
