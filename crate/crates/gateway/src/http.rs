//! JSON routes over [`SessionService`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::service::{CreateSession, SessionService, Submission};
use crate::GatewayError;

impl IntoResponse for GatewayError {
    fn into_response(self) -> Response {
        let (status, code) = match &self {
            GatewayError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found".to_string()),
            GatewayError::BadRequest { code, .. } => (StatusCode::BAD_REQUEST, code.clone()),
            GatewayError::Conflict { code, .. } => (StatusCode::CONFLICT, code.clone()),
            GatewayError::Store(_) => (StatusCode::INTERNAL_SERVER_ERROR, "store".to_string()),
        };
        let message = match &self {
            GatewayError::BadRequest { message, .. } | GatewayError::Conflict { message, .. } => message.clone(),
            other => other.to_string(),
        };
        (status, Json(json!({ "error": code, "message": message }))).into_response()
    }
}

type Shared = Arc<SessionService>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, GatewayError> {
    serde_json::from_slice(bytes).map_err(|e| GatewayError::BadRequest { code: "invalid_body".into(), message: e.to_string() })
}

fn agent_index(raw: &str) -> Result<usize, GatewayError> {
    raw.parse().map_err(|_| GatewayError::NotFound(format!("no agent {raw}")))
}

async fn create(State(svc): State<Shared>, bytes: Bytes) -> Result<Response, GatewayError> {
    let req: CreateSession = body(&bytes)?;
    Ok((StatusCode::CREATED, Json(svc.create(req)?)).into_response())
}

async fn state(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, GatewayError> {
    Ok(Json(svc.state(&id)?).into_response())
}

async fn agent(State(svc): State<Shared>, Path((id, a)): Path<(String, String)>) -> Result<Response, GatewayError> {
    Ok(Json(svc.agent_view(&id, agent_index(&a)?)?).into_response())
}

async fn answer(State(svc): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> Result<Response, GatewayError> {
    // unknown sessions are 404 even when the body is bad
    svc.state(&id)?;
    let sub: Submission = body(&bytes)?;
    Ok(Json(svc.submit(&id, &sub)?).into_response())
}

async fn result(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, GatewayError> {
    Ok(Json(svc.result(&id)?).into_response())
}

pub fn router(svc: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(state))
        .route("/sessions/{id}/agents/{agent}", get(agent))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/result", get(result))
        .with_state(svc)
}

/// Serves until the process is stopped.
pub async fn serve(addr: std::net::SocketAddr, svc: Shared) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(svc)).await
}
