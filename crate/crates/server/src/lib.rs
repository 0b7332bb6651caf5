//! HTTP/JSON front end for editor sessions.
//!
//! Sessions live in memory. Each one sits behind its own mutex, so commands
//! on one session run strictly in order while different sessions proceed in
//! parallel. Solver work runs on the blocking pool.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use anhinga_core::{Action, Cell, Command, Condition, PaletteObject, SearchBudget, Session, SessionError};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

/// Gradient cells returned by a poll that gives no `max`.
pub const DEFAULT_POLL_CELLS: usize = 16;

struct Entry {
    session: Mutex<Session>,
    started: Instant,
}

impl Entry {
    fn now_ms(&self) -> u64 {
        self.started.elapsed().as_millis() as u64
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<Entry>>>>,
    budget: SearchBudget,
}

impl AppState {
    pub fn new(budget: SearchBudget) -> AppState {
        AppState {
            sessions: Arc::default(),
            budget,
        }
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.to_string()).into())
    }
}

impl Default for AppState {
    fn default() -> Self {
        AppState::new(SearchBudget::default())
    }
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::UnknownSession(_) => StatusCode::NOT_FOUND,
            SessionError::IllegalCommand(_) | SessionError::EmptyHistory | SessionError::ConditionDisabled => {
                StatusCode::CONFLICT
            }
            SessionError::NotEditable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Level(_) | SessionError::Replay { .. } => StatusCode::BAD_REQUEST,
        };
        ApiError(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

#[derive(Deserialize)]
struct CreateBody {
    level: String,
    condition: String,
}

#[derive(Serialize)]
struct Created {
    id: String,
}

#[derive(Deserialize)]
struct EditBody {
    col: u16,
    row: u16,
    #[serde(default)]
    selected: Option<PaletteObject>,
}

#[derive(Deserialize)]
struct ActionBody {
    action: String,
}

#[derive(Deserialize)]
struct SelectBody {
    object: PaletteObject,
}

#[derive(Deserialize)]
struct PollQuery {
    max: Option<usize>,
}

/// Accepts `D`/`U`/`L`/`R` or the lowercase direction names.
fn parse_action(s: &str) -> Option<Action> {
    match s {
        "down" => Some(Action::Down),
        "up" => Some(Action::Up),
        "left" => Some(Action::Left),
        "right" => Some(Action::Right),
        _ if s.len() == 1 => Action::from_letter(s.chars().next()?),
        _ => None,
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("worker panicked")
}

async fn create(State(state): State<AppState>, Json(body): Json<CreateBody>) -> Result<Response, ApiError> {
    let condition: Condition = body
        .condition
        .to_ascii_lowercase()
        .parse()
        .map_err(|e: SessionError| bad_request(e.to_string()))?;
    let budget = state.budget;
    let session = blocking(move || Session::with_budget(&body.level, condition, budget)).await?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let entry = Arc::new(Entry {
        session: Mutex::new(session),
        started: Instant::now(),
    });
    state.sessions.lock().unwrap().insert(id.clone(), entry);
    Ok((StatusCode::CREATED, Json(Created { id })).into_response())
}

async fn snapshot(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = state.entry(&id)?;
    let snapshot = entry.session.lock().unwrap().snapshot();
    Ok(Json(snapshot).into_response())
}

async fn run(state: &AppState, id: &str, command: Command) -> Result<Response, ApiError> {
    let entry = state.entry(id)?;
    let response = blocking(move || {
        let mut session = entry.session.lock().unwrap();
        session.command(command, entry.now_ms())
    })
    .await?;
    Ok(Json(response).into_response())
}

async fn edit(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<EditBody>,
) -> Result<Response, ApiError> {
    let command = Command::Edit {
        cell: Cell::new(body.col, body.row),
        selected: body.selected,
    };
    run(&state, &id, command).await
}

async fn action(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<ActionBody>,
) -> Result<Response, ApiError> {
    let action = parse_action(&body.action).ok_or_else(|| bad_request(format!("unknown action {:?}", body.action)))?;
    run(&state, &id, Command::Play(action)).await
}

async fn undo(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    run(&state, &id, Command::Undo).await
}

async fn reset(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    run(&state, &id, Command::Reset).await
}

async fn solve(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    run(&state, &id, Command::Solve).await
}

async fn select(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<SelectBody>,
) -> Result<Response, ApiError> {
    run(&state, &id, Command::Select(body.object)).await
}

async fn gradient(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<PollQuery>,
) -> Result<Response, ApiError> {
    let entry = state.entry(&id)?;
    let max = query.max.unwrap_or(DEFAULT_POLL_CELLS);
    let poll = blocking(move || entry.session.lock().unwrap().poll_gradient(max)).await?;
    Ok(Json(poll).into_response())
}

async fn log(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let entry = state.entry(&id)?;
    let text = entry.session.lock().unwrap().export_log().to_jsonl();
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create))
        .route("/session/{id}", get(snapshot))
        .route("/session/{id}/edit", post(edit))
        .route("/session/{id}/action", post(action))
        .route("/session/{id}/undo", post(undo))
        .route("/session/{id}/reset", post(reset))
        .route("/session/{id}/solve", post(solve))
        .route("/session/{id}/select", post(select))
        .route("/session/{id}/gradient", get(gradient))
        .route("/session/{id}/log", get(log))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, budget: SearchBudget) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(budget))).await
}
