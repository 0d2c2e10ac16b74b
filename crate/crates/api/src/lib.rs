//! HTTP service over a caremetrics data directory.
//!
//! Every body is produced by `caremetrics_core::query` and rendered with
//! [`render`], so responses match the CLI's `--format json` output exactly.
//! When a token is configured, all routes except `/health` require
//! `Authorization: Bearer <token>`.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use caremetrics_core::alerting::AlertStore;
use caremetrics_core::domain::Timestamp;
use caremetrics_core::ingest::EventStore;
use caremetrics_core::query::{
    self, render, AlertParams, DashboardParams, IngestParams, QueryError, RankParams, SeriesParams,
    ValueParams, Workspace, WorkspaceError,
};
use serde::Serialize;

/// Environment variable holding the bearer token.
pub const TOKEN_ENV: &str = "CAREMETRICS_TOKEN";

/// An error response body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        ApiError {
            status: e.status,
            code: e.code,
            message: e.message,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, json_headers(), render(&self)).into_response()
    }
}

fn json_headers() -> [(header::HeaderName, &'static str); 1] {
    [(header::CONTENT_TYPE, "application/json")]
}

fn ok<T: Serialize>(body: &T) -> Response {
    (StatusCode::OK, json_headers(), render(body)).into_response()
}

type ApiResult = Result<Response, ApiError>;

/// Shared service state: loaded workspace, record store and alert store.
pub struct AppState {
    pub workspace: Workspace,
    pub store: RwLock<EventStore>,
    pub alerts: Mutex<AlertStore>,
    pub token: Option<String>,
    clock: fn() -> Timestamp,
}

impl AppState {
    /// Opens the stores of `workspace` and brings alerts up to date.
    pub fn open(workspace: Workspace, token: Option<String>) -> Result<Self, WorkspaceError> {
        let store = workspace.open_store()?;
        let alerts = workspace.open_alerts()?;
        Ok(Self::new(workspace, store, alerts, token))
    }

    pub fn new(
        workspace: Workspace,
        store: EventStore,
        alerts: AlertStore,
        token: Option<String>,
    ) -> Self {
        let state = AppState {
            workspace,
            store: RwLock::new(store),
            alerts: Mutex::new(alerts),
            token: token.filter(|t| !t.is_empty()),
            clock: chrono::Utc::now,
        };
        if let Err(e) = state.refresh_alerts() {
            tracing::warn!(error = %e.message, "alert evaluation failed");
        }
        state
    }

    /// Replaces the wall clock, for reproducible alert timestamps.
    pub fn with_clock(mut self, clock: fn() -> Timestamp) -> Self {
        self.clock = clock;
        self
    }

    fn refresh_alerts(&self) -> Result<usize, QueryError> {
        let data = self.store.read().expect("store lock").snapshot();
        let mut alerts = self.alerts.lock().expect("alerts lock");
        let changed = query::evaluate_alerts(&self.workspace, &data, &mut alerts, (self.clock)())?;
        Ok(changed.len())
    }
}

/// All routes with authentication applied.
pub fn router(state: Arc<AppState>) -> Router {
    let protected = Router::new()
        .route("/kpis", get(list_kpis))
        .route("/kpis/{id}/value", get(kpi_value))
        .route("/kpis/{id}/series", get(kpi_series))
        .route("/dashboards/{view}", get(dashboard))
        .route("/alerts", get(list_alerts))
        .route("/alerts/{id}/{action}", post(alert_action))
        .route("/drg/rank", get(drg_rank))
        .route("/ingest", post(ingest))
        .route_layer(middleware::from_fn_with_state(state.clone(), authorize));
    Router::new()
        .route("/health", get(health))
        .merge(protected)
        .fallback(not_found)
        .with_state(state)
}

/// Serves `router(state)` on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}

async fn authorize(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    request: Request,
    next: Next,
) -> Response {
    if let Some(token) = &state.token {
        let presented = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token.as_str()) {
            return ApiError {
                status: 401,
                code: "unauthorized".into(),
                message: "missing or invalid bearer token".into(),
            }
            .into_response();
        }
    }
    next.run(request).await
}

fn params<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(p)| p)
        .map_err(|e| ApiError::from(QueryError::bad_request("invalid_parameter", e.body_text())))
}

async fn not_found() -> ApiError {
    QueryError::not_found("not_found", "no such route").into()
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    records: usize,
    batch_seq: u64,
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let store = state.store.read().expect("store lock");
    ok(&Health {
        status: "ok",
        records: store.len(),
        batch_seq: store.batch_seq(),
    })
}

async fn list_kpis(State(state): State<Arc<AppState>>) -> Response {
    ok(&query::kpi_list(&state.workspace))
}

async fn kpi_value(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<ValueParams>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let data = state.store.read().expect("store lock").snapshot();
    let body = query::Query::new(&state.workspace, &data).kpi_value(&id, &p)?;
    Ok(ok(&body))
}

async fn kpi_series(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    q: Result<Query<SeriesParams>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let data = state.store.read().expect("store lock").snapshot();
    let body = query::Query::new(&state.workspace, &data).kpi_series(&id, &p)?;
    Ok(ok(&body))
}

async fn dashboard(
    State(state): State<Arc<AppState>>,
    Path(view): Path<String>,
    q: Result<Query<DashboardParams>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let data = state.store.read().expect("store lock").snapshot();
    let alerts = state.alerts.lock().expect("alerts lock");
    let body = query::Query::new(&state.workspace, &data).dashboard(&view, &p, &alerts)?;
    Ok(ok(&body))
}

async fn drg_rank(
    State(state): State<Arc<AppState>>,
    q: Result<Query<RankParams>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let data = state.store.read().expect("store lock").snapshot();
    let body = query::Query::new(&state.workspace, &data).drg_rank(&p)?;
    Ok(ok(&body))
}

async fn list_alerts(
    State(state): State<Arc<AppState>>,
    q: Result<Query<AlertParams>, QueryRejection>,
) -> ApiResult {
    let p = params(q)?;
    let alerts = state.alerts.lock().expect("alerts lock");
    Ok(ok(&query::alert_list(&alerts, &p.state)?))
}

async fn alert_action(
    State(state): State<Arc<AppState>>,
    Path((id, action)): Path<(String, String)>,
) -> ApiResult {
    let mut alerts = state.alerts.lock().expect("alerts lock");
    let alert = query::alert_action(&mut alerts, &id, &action, (state.clock)())?;
    Ok(ok(&alert))
}

async fn ingest(
    State(state): State<Arc<AppState>>,
    q: Result<Query<IngestParams>, QueryRejection>,
    body: Bytes,
) -> ApiResult {
    let p = params(q)?;
    let summary = {
        let mut store = state.store.write().expect("store lock");
        query::ingest(&mut store, body.as_ref(), &p, "http")?
    };
    if summary.accepted > 0 {
        state.refresh_alerts()?;
    }
    tracing::info!(
        accepted = summary.accepted,
        batch = summary.batch_seq,
        "ingested"
    );
    Ok(ok(&summary))
}
