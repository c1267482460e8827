//! HTTP API over the analysis pipeline and the session store.
//!
//! | route | |
//! |---|---|
//! | `POST /api/v1/process` | multipart: `trace` or `video` + `annotations`, optional `metadata` |
//! | `POST /api/v1/sessions` | save a processed result with reference values |
//! | `GET /api/v1/sessions?from=&to=` | list sessions, RFC 3339 bounds, inclusive |
//! | `GET /api/v1/sessions/{id}` | one session |
//! | `GET /health` | liveness |

mod api;
mod handlers;

use std::collections::{HashMap, VecDeque};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use chrono::{DateTime, Utc};
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;
use vitalcam_core::vitals::VitalsReport;

pub use api::{ApiError, ProcessMetadata, ProcessResponse, SaveSessionRequest, SaveSessionResponse};

use crate::config::Config;
use crate::formats::read_bp_coefficients;
use crate::pipeline::PipelineConfig;
use crate::storage::{Environment, Profile, ReferenceVitals, Store};
use crate::video::{DefaultDecoder, VideoDecoder};
use crate::{Error, Result};

/// Processed results waiting to be saved as sessions.
const RESULT_CACHE_CAPACITY: usize = 1024;

#[derive(Debug, Clone)]
pub(crate) struct PendingResult {
    pub timestamp: DateTime<Utc>,
    pub filename: String,
    pub report: VitalsReport,
    pub environment: Option<Environment>,
    pub profile: Option<Profile>,
    pub ground_truth: Option<ReferenceVitals>,
}

#[derive(Debug, Default)]
pub(crate) struct ResultCache {
    entries: HashMap<String, PendingResult>,
    order: VecDeque<String>,
}

impl ResultCache {
    pub fn insert(&mut self, id: String, result: PendingResult) {
        if self.order.len() == RESULT_CACHE_CAPACITY {
            if let Some(old) = self.order.pop_front() {
                self.entries.remove(&old);
            }
        }
        self.order.push_back(id.clone());
        self.entries.insert(id, result);
    }

    pub fn get(&self, id: &str) -> Option<&PendingResult> {
        self.entries.get(id)
    }
}

#[derive(Clone)]
pub struct AppState {
    pub(crate) config: Arc<Config>,
    pub(crate) store: Arc<Store>,
    pub(crate) decoder: Arc<dyn VideoDecoder>,
    pub(crate) pipeline: Arc<PipelineConfig>,
    pub(crate) workers: Arc<Semaphore>,
    pub(crate) results: Arc<Mutex<ResultCache>>,
}

impl AppState {
    /// Opens the session database and upload directory under `data_dir`.
    pub fn new(config: Config, decoder: Arc<dyn VideoDecoder>) -> Result<Self> {
        config.validate()?;
        let uploads = config.upload_dir();
        std::fs::create_dir_all(&uploads).map_err(|e| Error::io(&uploads, e))?;
        let store = Store::open(&config.database_path())?;
        let mut pipeline = PipelineConfig::default();
        if let Some(path) = &config.bp_coefficients {
            pipeline.vitals.bp_model = read_bp_coefficients(path)?;
        }
        Ok(Self {
            workers: Arc::new(Semaphore::new(config.workers)),
            config: Arc::new(config),
            store: Arc::new(store),
            decoder,
            pipeline: Arc::new(pipeline),
            results: Arc::new(Mutex::new(ResultCache::default())),
        })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }
}

pub fn router(state: AppState) -> Router {
    let limit = state.config.max_payload_bytes;
    let static_dir = state.config.static_dir.clone();
    let api = Router::new()
        .route("/api/v1/process", post(handlers::process).layer(DefaultBodyLimit::max(limit)))
        .route("/api/v1/sessions", post(handlers::save_session).get(handlers::list_sessions))
        .route("/api/v1/sessions/{id}", get(handlers::get_session))
        .route("/health", get(handlers::health));
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.with_state(state).layer(TraceLayer::new_for_http())
}

/// Serves until Ctrl-C.
pub async fn serve(config: Config) -> Result<()> {
    let addr = config.addr();
    let state = AppState::new(config, Arc::new(DefaultDecoder))?;
    let listener =
        tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::Config(format!("cannot bind {addr}: {e}")))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Io { path: addr.to_string().into(), source: e })
}

/// A server on its own runtime thread, stopped when dropped. Used by tests
/// and by tools that need a live endpoint.
pub struct BackgroundServer {
    addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl BackgroundServer {
    /// Binds an ephemeral port on localhost.
    pub fn start(state: AppState) -> Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .map_err(|e| Error::Config(format!("runtime: {e}")))?;
        let listener = runtime
            .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
            .map_err(|e| Error::Config(format!("bind: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Error::Config(e.to_string()))?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let _ = axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(Self { addr, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
