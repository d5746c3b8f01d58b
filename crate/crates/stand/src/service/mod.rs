//! HTTP/JSON teaching sessions.
//!
//! | route | body | reply |
//! |---|---|---|
//! | `POST /sessions` | [`CreateRequest`] | `201 {"id"}` |
//! | `POST /sessions/{id}/labels` | [`LabelRequest`] | [`LabelOutcome`] |
//! | `POST /sessions/{id}/candidates` | [`ProblemDoc`] | [`CandidatesOutcome`] |
//! | `POST /sessions/{id}/suggest` | none | [`SuggestOutcome`] |
//! | `GET /sessions/{id}/state` | none | [`SessionState`] |
//! | `GET /sessions/{id}/events` | none | the session's event log |
//!
//! Errors are `{"error": {"code", "message"}}`. Requests to one session are
//! applied one at a time in arrival order; distinct sessions run
//! concurrently. With a store directory, each session appends its events to
//! `<id>.jsonl` there and is rebuilt from that log on restart.

mod session;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde_json::json;
use tokio::sync::Mutex;

pub use session::{
    log_path, read_log, CandidateReport, CandidatesOutcome, CreateRequest, Event, LabelOutcome, LabelRequest, LeafBreakdown,
    PoolConfig, ProblemDoc, Rejection, Session, SessionState, StateDoc, StateReport, SuggestOutcome,
};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn not_found(id: &str) -> Self {
        Self { status: StatusCode::NOT_FOUND, code: "not_found", message: format!("no session `{id}`") }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: "bad_request", message: message.into() }
    }
}

impl From<Rejection> for ApiError {
    fn from(r: Rejection) -> Self {
        match r {
            Rejection::BadRequest(m) => Self::bad_request(m),
            Rejection::SchemaMismatch(m) => Self { status: StatusCode::BAD_REQUEST, code: "schema_mismatch", message: m },
            Rejection::Internal(m) => Self { status: StatusCode::INTERNAL_SERVER_ERROR, code: "internal", message: m },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": { "code": self.code, "message": self.message } }))).into_response()
    }
}

type Reply<T> = Result<Json<T>, ApiError>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Mutex<Session>>>>>,
    store: Option<PathBuf>,
}

impl AppState {
    /// In-memory sessions only.
    pub fn ephemeral() -> Self {
        Self::default()
    }

    /// Sessions persisted under `dir`; existing logs there are replayed.
    pub fn persistent(dir: &Path) -> crate::Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match Session::replay(&path) {
                Ok(s) => {
                    sessions.insert(s.id().to_string(), Arc::new(Mutex::new(s)));
                }
                Err(e) => log::warn!("skipping {}: {e:?}", path.display()),
            }
        }
        log::info!("restored {} sessions from {}", sessions.len(), dir.display());
        Ok(Self { sessions: Arc::new(RwLock::new(sessions)), store: Some(dir.to_path_buf()) })
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions.read().expect("session map poisoned").get(id).cloned().ok_or_else(|| ApiError::not_found(id))
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

async fn create(State(app): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let req: CreateRequest = parse(&body)?;
    let id = uuid::Uuid::new_v4().to_string();
    let created = Session::creation(id.clone(), req)?;
    let log = app.store.as_deref().map(|d| log_path(d, &id));
    let session = Session::start(created, log.as_deref())?;
    app.sessions.write().expect("session map poisoned").insert(id.clone(), Arc::new(Mutex::new(session)));
    log::info!("created session {id}");
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

async fn label(State(app): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> Reply<LabelOutcome> {
    let session = app.get(&id)?;
    let req: LabelRequest = parse(&body)?;
    let out = session.lock().await.label(req)?;
    Ok(Json(out))
}

async fn candidates(State(app): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> Reply<CandidatesOutcome> {
    let session = app.get(&id)?;
    let problem: ProblemDoc = parse(&body)?;
    let out = session.lock().await.candidates(&problem)?;
    Ok(Json(out))
}

async fn suggest(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Reply<SuggestOutcome> {
    let session = app.get(&id)?;
    let out = session.lock().await.suggest()?;
    Ok(Json(out))
}

async fn state(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Reply<SessionState> {
    let session = app.get(&id)?;
    let out = session.lock().await.state();
    Ok(Json(out))
}

async fn events(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> Reply<Vec<Event>> {
    let session = app.get(&id)?;
    let out = session.lock().await.events().to_vec();
    Ok(Json(out))
}

async fn fallback() -> ApiError {
    ApiError { status: StatusCode::NOT_FOUND, code: "not_found", message: "no such route".into() }
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/labels", post(label))
        .route("/sessions/{id}/candidates", post(candidates))
        .route("/sessions/{id}/suggest", post(suggest))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/events", get(events))
        .fallback(fallback)
        .with_state(app)
}

/// Serves until the listener fails or the process receives Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, app: AppState) -> std::io::Result<()> {
    let addr: SocketAddr = listener.local_addr()?;
    log::info!("listening on http://{addr}");
    axum::serve(listener, router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
