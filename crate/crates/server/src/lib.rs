//! HTTP front end for the execution engine. All endpoints live under
//! `/api/v1`; anything else is served from the static directory.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hrgame::exec::{Engine, ExecError, MoveView, StateView, StepResult};
use hrgame::scenarios::ScenarioSummary;
use hrgame::Objective;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

const PLACEHOLDER: &str = "<!doctype html>\n<title>hrgame</title>\n<p>No UI bundle configured. The API is at <code>/api/v1</code>.</p>\n";

/// Error document `{code, message, detail}`.
#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub code: String,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    fn bad_request(message: String) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request".into(),
            message,
            detail: Value::Null,
        }
    }

    fn internal(message: String) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal".into(),
            message,
            detail: Value::Null,
        }
    }
}

impl From<ExecError> for ApiError {
    fn from(e: ExecError) -> Self {
        let status = match e {
            ExecError::UnknownScenario(_) | ExecError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ExecError::Synthesis { .. } | ExecError::IllegalMove(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ExecError::NotYourTurn(_) | ExecError::Terminal => StatusCode::CONFLICT,
        };
        ApiError {
            status,
            code: e.code().into(),
            message: e.to_string(),
            detail: e.detail(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSession {
    pub scenario: String,
    pub formula: Option<String>,
    pub seed: Option<u64>,
    pub objective: Option<Objective>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanMove {
    pub action: String,
}

#[derive(Debug, Serialize)]
pub struct Moves {
    pub session_id: String,
    pub moves: Vec<MoveView>,
}

/// Engine work can mean a full synthesis, so it runs off the async workers.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ExecError> + Send + 'static,
) -> Result<T, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError::internal(e.to_string())),
    }
}

async fn list_scenarios(State(engine): State<Arc<Engine>>) -> Json<Vec<ScenarioSummary>> {
    Json(engine.scenarios())
}

async fn create_session(
    State(engine): State<Arc<Engine>>,
    body: Result<Json<NewSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let Json(req) = body?;
    let id = blocking(move || engine.new_session(&req.scenario, req.formula.as_deref(), req.objective, req.seed)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id }))))
}

async fn get_session(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<StateView> {
    Ok(Json(engine.state_view(&id)?))
}

async fn get_moves(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<Moves> {
    let moves = engine.legal_moves(&id)?;
    Ok(Json(Moves { session_id: id, moves }))
}

async fn human_move(
    State(engine): State<Arc<Engine>>,
    Path(id): Path<String>,
    body: Result<Json<HumanMove>, JsonRejection>,
) -> ApiResult<StepResult> {
    let Json(req) = body?;
    Ok(Json(blocking(move || engine.apply_human_move(&id, &req.action)).await?))
}

async fn robot_move(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> ApiResult<StepResult> {
    Ok(Json(blocking(move || engine.robot_step(&id)).await?))
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        code: "not_found".into(),
        message: "no such endpoint".into(),
        detail: Value::Null,
    }
}

/// The API router, with the UI bundle from `static_dir` (or a placeholder page) at `/`.
pub fn router(engine: Arc<Engine>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/scenarios", get(list_scenarios))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/moves", get(get_moves))
        .route("/sessions/{id}/human", post(human_move))
        .route("/sessions/{id}/robot", post(robot_move))
        .fallback(not_found)
        .with_state(engine);
    let app = Router::new().nest("/api/v1", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr, engine: Arc<Engine>, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(engine, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
