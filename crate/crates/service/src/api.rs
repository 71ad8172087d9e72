use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use phonoblocks::layout::{alphabetic_layout, letters};
use phonoblocks::scaffold::{Action, ScaffoldError};
use phonoblocks::session::{creature_keys, Command, Output, SessionError, SessionInit, SessionKind, SessionState};
use phonoblocks::study::{MinigameConfig, StudyError};
use phonoblocks::wordplay::{interpret_with, DisplayMode, Payload};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::{AppState, LiveSession};

pub const API_SCHEMA: &str = "phonoblocks.api/1";

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "schema": API_SCHEMA, "error": self.1 }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::Io(_) | SessionError::Corrupt { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            SessionError::Scaffold(ScaffoldError::Complete) | SessionError::WrongKind { .. } => StatusCode::CONFLICT,
            SessionError::Study(StudyError::Protocol(m)) if m.contains("complete") => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError(status, e.to_string())
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/keyboard", get(keyboard))
        .route("/session", post(create_session))
        .route("/session/{id}", get(get_session))
        .route("/session/{id}/place", post(place))
        .route("/session/{id}/toggle-display", post(toggle_display))
        .route("/session/{id}/interpret", post(interpret))
        .route("/minigame/start", post(minigame_start))
        .route("/minigame/{id}/answer", post(minigame_answer))
        .route("/minigame/{id}/records", get(minigame_records))
        .with_state(state)
}

async fn health(State(app): State<Arc<AppState>>) -> Json<Value> {
    Json(json!({ "schema": API_SCHEMA, "status": "ok", "lexiconWords": app.lexicon.word_count() }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyboardQuery {
    mode: String,
    /// For `alphabetic`: `creatures` (default) or `letters`.
    set: Option<String>,
}

async fn keyboard(State(app): State<Arc<AppState>>, Query(q): Query<KeyboardQuery>) -> ApiResult {
    let width = app.config.keyboard_width;
    let grid = match (q.mode.as_str(), q.set.as_deref()) {
        ("phoneme", None) => app.phoneme_grid.clone(),
        ("letter", None) | ("alphabetic", Some("letters")) => alphabetic_layout(&letters(), width),
        ("alphabetic", None | Some("creatures")) => alphabetic_layout(&creature_keys(&app.lexicon), width),
        _ => {
            return Err(ApiError(
                StatusCode::BAD_REQUEST,
                "mode must be phoneme, letter or alphabetic (set=creatures|letters)".into(),
            ))
        }
    };
    Ok(Json(json!({ "schema": API_SCHEMA, "mode": q.mode, "grid": grid })))
}

fn session_json(s: &LiveSession) -> Value {
    json!({
        "schema": API_SCHEMA,
        "sessionId": s.id,
        "kind": s.kind,
        "createdAt": s.created_at,
        "state": s.state,
    })
}

fn with_output(mut v: Value, output: &Output) -> Value {
    v["output"] = serde_json::to_value(output).expect("output serializes");
    v
}

async fn create_session(State(app): State<Arc<AppState>>, Json(mut init): Json<SessionInit>) -> ApiResult {
    if let SessionInit::Scaffolded { config, .. } = &mut init {
        config.validate().map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
    }
    let (live, output) = app.create(init).await?;
    let s = live.lock().await;
    Ok(Json(with_output(session_json(&s), &output)))
}

async fn lookup(app: &AppState, id: &str) -> Result<Arc<tokio::sync::Mutex<LiveSession>>, ApiError> {
    app.get(id)
        .await
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no session {id:?}")))
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let live = lookup(&app, &id).await?;
    let s = live.lock().await;
    Ok(Json(session_json(&s)))
}

/// Body of `/session/{id}/place`: a scaffold pick or timeout, a freeplay
/// insertion, or any raw command.
#[derive(Deserialize)]
#[serde(untagged)]
enum PlaceRequest {
    Command(Command),
    #[serde(rename_all = "camelCase")]
    Pick {
        block_id: u32,
    },
    Timeout {
        timeout: bool,
    },
    Insert {
        payload: Payload,
        #[serde(default)]
        index: Option<usize>,
    },
}

impl PlaceRequest {
    fn into_command(self) -> Result<Command, ApiError> {
        Ok(match self {
            PlaceRequest::Command(c) => c,
            PlaceRequest::Pick { block_id } => Command::Place {
                action: Action::Pick { block_id },
            },
            PlaceRequest::Timeout { timeout: true } => Command::Place { action: Action::Timeout },
            PlaceRequest::Timeout { timeout: false } => {
                return Err(ApiError(StatusCode::BAD_REQUEST, "timeout must be true".into()))
            }
            PlaceRequest::Insert { payload, index } => Command::Insert { payload, index },
        })
    }
}

async fn run(app: &AppState, id: &str, command: Command) -> ApiResult {
    let live = lookup(app, id).await?;
    let mut s = live.lock().await;
    let output = s.apply(&command, &app.lexicon)?;
    Ok(Json(with_output(session_json(&s), &output)))
}

async fn place(State(app): State<Arc<AppState>>, Path(id): Path<String>, Json(body): Json<PlaceRequest>) -> ApiResult {
    run(&app, &id, body.into_command()?).await
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ToggleRequest {
    display_mode: DisplayMode,
}

async fn toggle_display(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<ToggleRequest>,
) -> ApiResult {
    run(&app, &id, Command::ToggleDisplay { display_mode: body.display_mode }).await
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct InterpretRequest {
    k: Option<usize>,
}

async fn interpret(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Option<Json<InterpretRequest>>,
) -> ApiResult {
    let k = body.and_then(|b| b.0.k).unwrap_or(5).clamp(1, 50);
    let live = lookup(&app, &id).await?;
    let s = live.lock().await;
    let SessionState::Freeplay { word_box } = &s.state else {
        return Err(ApiError(StatusCode::CONFLICT, "interpret applies to freeplay sessions".into()));
    };
    let results = interpret_with(&word_box.blocks, &app.lexicon, k, &app.config.interpreter);
    Ok(Json(json!({ "schema": API_SCHEMA, "sessionId": s.id, "interpretations": results })))
}

fn minigame_json(s: &LiveSession) -> Result<Value, ApiError> {
    let SessionState::Minigame { minigame } = &s.state else {
        return Err(ApiError(StatusCode::CONFLICT, format!("session {} is not a minigame", s.id)));
    };
    Ok(json!({
        "schema": API_SCHEMA,
        "sessionId": s.id,
        "prompt": minigame.prompt(),
        "complete": minigame.is_complete(),
        "trialIndex": minigame.current,
        "totalTrials": minigame.trials.len(),
    }))
}

async fn minigame_start(State(app): State<Arc<AppState>>, Json(config): Json<MinigameConfig>) -> ApiResult {
    let (live, _) = app.create(SessionInit::Minigame { config }).await?;
    let s = live.lock().await;
    Ok(Json(minigame_json(&s)?))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct AnswerRequest {
    symbol: String,
    elapsed_ms: f64,
}

async fn minigame_answer(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<AnswerRequest>,
) -> ApiResult {
    let live = lookup(&app, &id).await?;
    let mut s = live.lock().await;
    if s.kind != SessionKind::Minigame {
        return Err(ApiError(StatusCode::CONFLICT, format!("session {id} is not a minigame")));
    }
    let output = s.apply(
        &Command::Answer {
            symbol: body.symbol,
            elapsed_ms: body.elapsed_ms,
        },
        &app.lexicon,
    )?;
    let mut v = minigame_json(&s)?;
    if let Output::Answer { outcome } = output {
        v["outcome"] = serde_json::to_value(outcome).expect("outcome serializes");
    }
    Ok(Json(v))
}

async fn minigame_records(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let live = lookup(&app, &id).await?;
    let s = live.lock().await;
    let SessionState::Minigame { minigame } = &s.state else {
        return Err(ApiError(StatusCode::CONFLICT, format!("session {id} is not a minigame")));
    };
    Ok(Json(json!({ "schema": API_SCHEMA, "sessionId": s.id, "records": minigame.records })))
}
