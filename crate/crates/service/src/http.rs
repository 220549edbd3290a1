//! HTTP routes. Bodies are JSON; schema errors come back as 400 with the
//! path of the offending field.

use std::net::SocketAddr;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dragflow_intent::{request_intent, EndpointConfig, IntentError, IntentRequest};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::api::{decode, eval, preview, EvalRequest, JobRequest, PreviewRequest};
use crate::jobs::{CancelOutcome, JobTable};

#[derive(Clone)]
pub struct AppState {
    pub jobs: JobTable,
    /// Upstream for `/intent`; `None` answers 503.
    pub intent: Option<EndpointConfig>,
}

impl AppState {
    pub fn new(workers: usize, intent: Option<EndpointConfig>) -> Self {
        AppState {
            jobs: JobTable::new(workers),
            intent,
        }
    }
}

#[derive(Debug)]
pub struct ApiFailure {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiFailure {
    fn new(status: StatusCode, kind: &str, message: impl Into<String>) -> Self {
        ApiFailure {
            status,
            body: json!({"error": kind, "message": message.into()}),
        }
    }
}

impl IntoResponse for ApiFailure {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<dragflow_core::Error> for ApiFailure {
    fn from(e: dragflow_core::Error) -> Self {
        match e {
            dragflow_core::Error::Schema { path, message } => ApiFailure {
                status: StatusCode::BAD_REQUEST,
                body: json!({"error": "schema", "path": path, "message": message}),
            },
            other => ApiFailure::new(StatusCode::BAD_REQUEST, "invalid", other.to_string()),
        }
    }
}

impl From<IntentError> for ApiFailure {
    fn from(e: IntentError) -> Self {
        let status = match e {
            IntentError::Config(_) => StatusCode::SERVICE_UNAVAILABLE,
            IntentError::Timeout(_) => StatusCode::GATEWAY_TIMEOUT,
            _ => StatusCode::BAD_GATEWAY,
        };
        let mut f = ApiFailure::new(status, e.kind(), e.to_string());
        if let Some(raw) = e.raw() {
            f.body["raw"] = raw.into();
        }
        f
    }
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiFailure> {
    decode(bytes).map_err(|e| ApiFailure {
        status: StatusCode::BAD_REQUEST,
        body: json!({"error": "schema", "path": e.path, "message": e.message}),
    })
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> dragflow_core::Result<T> + Send + 'static,
) -> Result<T, ApiFailure> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiFailure::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiFailure::from)
}

async fn preview_route(bytes: Bytes) -> Result<Response, ApiFailure> {
    let req: PreviewRequest = body(&bytes)?;
    let resp = blocking(move || preview(&req)).await?;
    Ok(Json(resp).into_response())
}

async fn submit_job(State(s): State<AppState>, bytes: Bytes) -> Result<Response, ApiFailure> {
    let req: JobRequest = body(&bytes)?;
    let id = s.jobs.submit(req)?;
    Ok((StatusCode::ACCEPTED, Json(json!({"id": id}))).into_response())
}

async fn get_job(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiFailure> {
    match s.jobs.get(&id) {
        Some(r) => Ok(Json(r).into_response()),
        None => Err(ApiFailure::new(StatusCode::NOT_FOUND, "not_found", format!("no job {id}"))),
    }
}

async fn cancel_job(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiFailure> {
    match s.jobs.cancel(&id) {
        CancelOutcome::Accepted(r) => Ok((StatusCode::ACCEPTED, Json(*r)).into_response()),
        CancelOutcome::AlreadyFinished(status) => Err(ApiFailure::new(
            StatusCode::CONFLICT,
            "conflict",
            format!("job {id} already finished with status {}", serde_json::to_value(status).unwrap_or_default()),
        )),
        CancelOutcome::NotFound => Err(ApiFailure::new(StatusCode::NOT_FOUND, "not_found", format!("no job {id}"))),
    }
}

async fn eval_route(bytes: Bytes) -> Result<Response, ApiFailure> {
    let req: EvalRequest = body(&bytes)?;
    let report = blocking(move || eval(&req)).await?;
    Ok(Json(report).into_response())
}

async fn intent_route(State(s): State<AppState>, bytes: Bytes) -> Result<Response, ApiFailure> {
    let req: IntentRequest = body(&bytes)?;
    let cfg = s
        .intent
        .as_ref()
        .ok_or_else(|| ApiFailure::new(StatusCode::SERVICE_UNAVAILABLE, "config", "no intent endpoint configured"))?;
    let result = request_intent(cfg, &req).await?;
    Ok(Json(result).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/preview", post(preview_route))
        .route("/jobs", post(submit_job))
        .route("/jobs/{id}", get(get_job).delete(cancel_job))
        .route("/eval", post(eval_route))
        .route("/intent", post(intent_route))
        .with_state(state)
}

/// Binds and serves until the process ends. Returns the bound address
/// through `on_bound` so callers can use port 0.
pub async fn serve(addr: SocketAddr, state: AppState, on_bound: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
