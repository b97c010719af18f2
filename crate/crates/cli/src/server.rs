//! Scenario-optimization HTTP API.
//!
//! `GET /api/v1/model` describes the objective and default scenario.
//! `POST /api/v1/optimize` solves a [`ScenarioRequest`]. Malformed bodies get
//! 400; unsolvable scenarios get 422 with an [`ErrorBody`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mmx_core::scenario::{ErrorBody, ModelView, ScenarioError, ScenarioModel, ScenarioRequest};

pub const MODEL_PATH: &str = "/api/v1/model";
pub const OPTIMIZE_PATH: &str = "/api/v1/optimize";

/// Routes over an immutable model snapshot shared by all requests.
pub fn router(model: ScenarioModel) -> Router {
    Router::new()
        .route(MODEL_PATH, get(model_view))
        .route(OPTIMIZE_PATH, post(optimize))
        .with_state(Arc::new(model))
}

async fn model_view(State(model): State<Arc<ScenarioModel>>) -> Json<ModelView> {
    Json(model.view())
}

fn error_response(e: &ScenarioError) -> Response {
    let status = StatusCode::from_u16(e.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, Json::<ErrorBody>(e.body())).into_response()
}

/// Parses a request body; an empty body means the default scenario.
pub fn parse_request(body: &[u8]) -> Result<ScenarioRequest, ScenarioError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(ScenarioRequest::default());
    }
    serde_json::from_slice(body).map_err(|e| ScenarioError::Malformed(e.to_string()))
}

async fn optimize(State(model): State<Arc<ScenarioModel>>, body: Bytes) -> Response {
    match parse_request(&body).and_then(|req| model.optimize(&req)) {
        Ok(resp) => Json(resp).into_response(),
        Err(e) => error_response(&e),
    }
}

/// Serves until the process is stopped.
pub async fn serve(model: ScenarioModel, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(model)).await
}
