//! Thin axum layer over [`Store`]: routing, auth, JSON plumbing, and the
//! decision-timeout sweeper. All session logic lives in the store.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use hunl_core::aivat::AivatReport;
use hunl_core::protocol::{
    ActionRequest, CreateSessionRequest, CreateSessionResponse, GameStateMessage,
    LeaderboardEntry,
};

use crate::{ServiceError, Store};

#[derive(Clone)]
struct AppState {
    store: Arc<Store>,
}

/// Timeout-flagged hands of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagsResponse {
    pub timed_out_hands: Vec<u64>,
}

struct ApiError(ServiceError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.0.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.0.body())).into_response()
    }
}

/// `Json` extractor whose rejection is the service's structured error body.
struct ApiJson<T>(T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(value)) => Ok(ApiJson(value)),
            Err(rejection @ JsonRejection::JsonDataError(_))
            | Err(rejection @ JsonRejection::JsonSyntaxError(_))
            | Err(rejection @ JsonRejection::MissingJsonContentType(_)) => Err(ApiError(
                ServiceError::Validation(rejection.body_text()),
            )),
            Err(other) => Err(ApiError(ServiceError::Internal(other.body_text()))),
        }
    }
}

/// Bytewise comparison that does not short-circuit on the first mismatch.
fn token_matches(provided: &str, expected: &str) -> bool {
    let a = provided.as_bytes();
    let b = expected.as_bytes();
    let mut diff = a.len() ^ b.len();
    for i in 0..a.len().min(b.len()) {
        diff |= (a[i] ^ b[i]) as usize;
    }
    diff == 0
}

async fn auth(State(app): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(expected) = app.store.config().auth_token.as_deref() {
        let authorized = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(|token| token_matches(token, expected))
            .unwrap_or(false);
        if !authorized {
            return ApiError(ServiceError::Unauthorized).into_response();
        }
    }
    next.run(req).await
}

/// Run a store operation off the async threads (session work is synchronous
/// and may compute for a while — house decisions, metric evaluation).
async fn run<T: Send + 'static>(
    app: AppState,
    op: impl FnOnce(&Store) -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(move || op(&app.store))
        .await
        .map_err(|e| ApiError(ServiceError::Internal(format!("worker task failed: {e}"))))?
        .map_err(ApiError)
}

async fn create_session(
    State(app): State<AppState>,
    ApiJson(req): ApiJson<CreateSessionRequest>,
) -> Result<Json<CreateSessionResponse>, ApiError> {
    run(app, move |store| store.create_session(&req))
        .await
        .map(Json)
}

async fn get_state(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<GameStateMessage>, ApiError> {
    run(app, move |store| store.get_state(&id)).await.map(Json)
}

async fn submit_action(
    State(app): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<ActionRequest>,
) -> Result<Json<GameStateMessage>, ApiError> {
    run(app, move |store| store.submit_action(&id, &req))
        .await
        .map(Json)
}

async fn get_metrics(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<AivatReport>, ApiError> {
    run(app, move |store| store.metrics(&id)).await.map(Json)
}

async fn get_flags(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<FlagsResponse>, ApiError> {
    run(app, move |store| {
        store.flags(&id).map(|timed_out_hands| FlagsResponse { timed_out_hands })
    })
    .await
    .map(Json)
}

async fn leaderboard(
    State(app): State<AppState>,
) -> Result<Json<Vec<LeaderboardEntry>>, ApiError> {
    run(app, move |store| store.leaderboard()).await.map(Json)
}

pub fn router(store: Arc<Store>) -> Router {
    let app = AppState { store };
    let protected = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/action", post(submit_action))
        .route("/sessions/{id}/metrics", get(get_metrics))
        .route("/sessions/{id}/flags", get(get_flags))
        .route("/leaderboard", get(leaderboard))
        .layer(middleware::from_fn_with_state(app.clone(), auth))
        .with_state(app);
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .merge(protected)
}

/// Serve until the listener fails; spawns the timeout sweeper when a
/// decision timeout is configured.
pub async fn serve(store: Arc<Store>, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    if let Some(timeout) = store.config().decision_timeout {
        let sweeper = store.clone();
        tokio::spawn(async move {
            let period = (timeout / 4)
                .clamp(Duration::from_millis(10), Duration::from_millis(1000));
            let mut tick = tokio::time::interval(period);
            loop {
                tick.tick().await;
                let store = sweeper.clone();
                let _ = tokio::task::spawn_blocking(move || store.sweep_timeouts()).await;
            }
        });
    }
    axum::serve(listener, router(store)).await
}
