//! JSON-over-HTTP session service.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;
use tower_http::services::ServeDir;
use uuid::Uuid;

use crate::assets::Assets;
use crate::engine::{AgentTurn, EngineConfig, EngineError, Session};

/// Sessions untouched for this long are dropped.
pub const IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

/// Reply to a user message: the agent turn plus session bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiMessage {
    pub session_id: String,
    pub turn: usize,
    pub goal_reached: bool,
    pub ended: bool,
    #[serde(flatten)]
    pub agent: AgentTurn,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct MessageRequest {
    text: String,
}

#[derive(Debug, Serialize)]
struct Created {
    session_id: String,
    greeting: String,
}

struct Slot {
    session: Mutex<Session>,
    last_used: StdMutex<Instant>,
}

impl Slot {
    fn touch(&self) {
        *self.last_used.lock().expect("clock lock") = Instant::now();
    }
}

/// Shared service state. Cloning is cheap.
#[derive(Clone)]
pub struct AppState {
    assets: Assets,
    config: EngineConfig,
    sessions: Arc<StdMutex<HashMap<String, Arc<Slot>>>>,
}

impl AppState {
    pub fn new(assets: Assets, config: EngineConfig) -> Self {
        Self {
            assets,
            config,
            sessions: Arc::default(),
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("store lock").len()
    }

    /// Drops sessions idle for longer than `max_idle`; returns how many.
    pub fn evict_idle(&self, max_idle: Duration) -> usize {
        let now = Instant::now();
        let mut store = self.sessions.lock().expect("store lock");
        let before = store.len();
        store.retain(|_, slot| now.duration_since(*slot.last_used.lock().expect("clock lock")) < max_idle);
        before - store.len()
    }

    fn slot(&self, id: &str) -> Option<Arc<Slot>> {
        self.sessions.lock().expect("store lock").get(id).cloned()
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn not_found(id: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("unknown session {id}"))
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", axum::routing::delete(delete_session))
        .route("/api/session/{id}/message", post(post_message))
        .route("/api/session/{id}/transcript", get(transcript))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Json<Created>, ApiError> {
    let req: CreateRequest = if body.iter().all(u8::is_ascii_whitespace) {
        CreateRequest::default()
    } else {
        parse_body(&body)?
    };
    let seed = req.seed.unwrap_or_else(rand::random);
    let session = Session::new(state.assets.clone(), state.config.clone(), seed)
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let id = Uuid::new_v4().to_string();
    let greeting = session.greeting().to_string();
    let slot = Arc::new(Slot {
        session: Mutex::new(session),
        last_used: StdMutex::new(Instant::now()),
    });
    state.sessions.lock().expect("store lock").insert(id.clone(), slot);
    Ok(Json(Created { session_id: id, greeting }))
}

async fn post_message(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ApiMessage>, ApiError> {
    let slot = state.slot(&id).ok_or_else(|| not_found(&id))?;
    let req: MessageRequest = parse_body(&body)?;
    let mut session = slot.session.lock().await;
    slot.touch();
    let agent = session.step(&req.text).map_err(|e| match e {
        EngineError::SessionEnded => ApiError(StatusCode::CONFLICT, e.to_string()),
        EngineError::EmptyUtterance => ApiError(StatusCode::BAD_REQUEST, e.to_string()),
        EngineError::Config(_) => ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    })?;
    Ok(Json(ApiMessage {
        session_id: id,
        turn: session.turn(),
        goal_reached: session.goal_reached(),
        ended: session.ended(),
        agent,
    }))
}

async fn transcript(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Vec<AgentTurn>>, ApiError> {
    let slot = state.slot(&id).ok_or_else(|| not_found(&id))?;
    let session = slot.session.lock().await;
    slot.touch();
    Ok(Json(session.transcript().to_vec()))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    match state.sessions.lock().expect("store lock").remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(not_found(&id)),
    }
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(state: AppState, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.evict_idle(IDLE_TIMEOUT);
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
