//! HTTP API over the model, the assessment store, scoring and scanning.
//!
//! All bodies are JSON. Assessment documents carry their content hash as
//! `ETag`; a `PUT` with `If-Match` only succeeds against that version.

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::assessment::{Assessment, AssessmentError, AssessmentId, AssessmentStore, StoreError};
use crate::evidence::remote::{RemoteError, RemoteOptions, SharedTransport};
use crate::evidence::{scan_repository, ProbeRule, ScanError, ScanReport};
use crate::model::MaturityModel;
use crate::scoring::{self, Flip, MaturityProfile, ScoringError};

/// Environment variable with a static bearer token; unset means open.
pub const TOKEN_ENV: &str = "RSMM_API_TOKEN";
/// Comma-separated origins allowed to call the API from a browser.
pub const CORS_ENV: &str = "RSMM_CORS_ORIGINS";
pub const DEFAULT_CORS_ORIGINS: &[&str] = &["http://localhost:5173", "http://127.0.0.1:5173"];

#[derive(Clone)]
pub struct ServiceConfig {
    pub model: Arc<MaturityModel>,
    pub data_dir: PathBuf,
    pub rules: Arc<Vec<ProbeRule>>,
    pub remote: RemoteOptions,
    /// Used for remote scans; `None` means live HTTP.
    pub transport: Option<SharedTransport>,
    pub cors_origins: Vec<String>,
    pub bearer_token: Option<String>,
    /// Whether `scan` may read paths on the server's file system.
    pub allow_local_scan: bool,
    /// Fixed clock for reproducible timestamps.
    pub frozen_time: Option<DateTime<Utc>>,
}

impl ServiceConfig {
    pub fn new(model: MaturityModel, data_dir: impl Into<PathBuf>, rules: Vec<ProbeRule>) -> Self {
        Self {
            model: Arc::new(model),
            data_dir: data_dir.into(),
            rules: Arc::new(rules),
            remote: RemoteOptions::default(),
            transport: None,
            cors_origins: DEFAULT_CORS_ORIGINS.iter().map(|s| s.to_string()).collect(),
            bearer_token: None,
            allow_local_scan: true,
            frozen_time: None,
        }
    }

    /// Reads the bearer token, CORS allowlist and hosting token from the
    /// environment.
    pub fn with_env(mut self) -> Self {
        if let Ok(token) = std::env::var(TOKEN_ENV) {
            self.bearer_token = Some(token).filter(|t| !t.is_empty());
        }
        if let Ok(origins) = std::env::var(CORS_ENV) {
            self.cors_origins = origins
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
        }
        self.remote = self.remote.token_from_env();
        self
    }
}

#[derive(Clone)]
struct AppState {
    config: ServiceConfig,
    store: Arc<AssessmentStore>,
}

impl AppState {
    fn now(&self) -> DateTime<Utc> {
        self.config.frozen_time.unwrap_or_else(Utc::now)
    }
}

/// Error body: `{status, code, message}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        json_response(status, to_body(&self))
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", message),
            StoreError::Conflict { .. } => ApiError::new(StatusCode::CONFLICT, "version_conflict", message),
            StoreError::Invalid { .. } => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "corrupt_document", message),
            StoreError::Io { .. } => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", message),
        }
    }
}

impl From<AssessmentError> for ApiError {
    fn from(e: AssessmentError) -> Self {
        let code = match &e {
            AssessmentError::UnknownCode(_) => "unknown_code",
            AssessmentError::ModelMismatch { .. } => "model_mismatch",
            AssessmentError::Syntax { .. } => "malformed_document",
            _ => "invalid_assessment",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<ScoringError> for ApiError {
    fn from(e: ScoringError) -> Self {
        let code = match &e {
            ScoringError::UnknownCode(_) => "unknown_code",
            ScoringError::ModelMismatch { .. } => "model_mismatch",
            ScoringError::Syntax(_) => "malformed_document",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<ScanError> for ApiError {
    fn from(e: ScanError) -> Self {
        let message = e.to_string();
        match e {
            ScanError::Snapshot(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unreadable_repository", message),
            ScanError::Remote(RemoteError::RateLimited { .. }) => {
                ApiError::new(StatusCode::TOO_MANY_REQUESTS, "rate_limited", message)
            }
            ScanError::Remote(RemoteError::InvalidUrl(_)) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_url", message)
            }
            ScanError::Remote(r) => ApiError::new(StatusCode::BAD_GATEWAY, &format!("upstream_{}", r.kind()), message),
        }
    }
}

fn to_body<T: Serialize>(value: &T) -> Vec<u8> {
    let mut body = serde_json::to_vec_pretty(value).expect("response bodies serialize");
    body.push(b'\n');
    body
}

fn json_response(status: StatusCode, body: Vec<u8>) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))],
        body,
    )
        .into_response()
}

fn etag(version: &str) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{version}\"")).expect("versions are hex")
}

fn parse_id(raw: &str) -> Result<AssessmentId, ApiError> {
    AssessmentId::new(raw).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_id", e.to_string()))
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return serde_json::from_slice(b"{}")
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "malformed_body", e.to_string()));
    }
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "malformed_body", e.to_string()))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn get_model(State(state): State<AppState>) -> Response {
    let mut body = state.config.model.to_json().into_bytes();
    body.push(b'\n');
    json_response(StatusCode::OK, body)
}

#[derive(Debug, Serialize)]
struct AssessmentListing {
    id: AssessmentId,
    project: String,
    vector_text: String,
    updated: DateTime<Utc>,
}

async fn list_assessments(State(state): State<AppState>) -> Result<Response, ApiError> {
    blocking(move || {
        let mut items = Vec::new();
        for id in state.store.list()? {
            // A corrupt document should not hide the rest of the list.
            if let Ok(stored) = state.store.load(&id, &state.config.model) {
                items.push(AssessmentListing {
                    vector_text: scoring::profile(&state.config.model, &stored.assessment).vector_text,
                    project: stored.assessment.project.name,
                    updated: stored.assessment.updated,
                    id,
                });
            }
        }
        Ok(json_response(
            StatusCode::OK,
            to_body(&serde_json::json!({ "assessments": items })),
        ))
    })
    .await
}

async fn get_assessment(State(state): State<AppState>, Path(raw): Path<String>) -> Result<Response, ApiError> {
    let id = parse_id(&raw)?;
    blocking(move || {
        let stored = state.store.load(&id, &state.config.model)?;
        let mut response = json_response(StatusCode::OK, stored.bytes);
        response.headers_mut().insert(header::ETAG, etag(&stored.version));
        Ok(response)
    })
    .await
}

fn if_match(headers: &HeaderMap) -> Result<Option<String>, ApiError> {
    let Some(value) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    let text = value
        .to_str()
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "invalid_if_match", "If-Match is not text"))?
        .trim();
    let text = text.strip_prefix("W/").unwrap_or(text);
    Ok(Some(text.trim_matches('"').to_string()))
}

async fn put_assessment(
    State(state): State<AppState>,
    Path(raw): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let id = parse_id(&raw)?;
    let expected = if_match(&headers)?;
    blocking(move || {
        let text = std::str::from_utf8(&body).map_err(|_| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "malformed_document",
                "body is not UTF-8",
            )
        })?;
        let assessment = Assessment::from_json_for(text, &state.config.model)?;
        if assessment.id != id {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "id_mismatch",
                format!("document id `{}` does not match `{id}`", assessment.id),
            ));
        }
        let existed = state.store.exists(&id);
        let version = state.store.save(&assessment, expected.as_deref())?;
        let mut bytes = assessment.to_json().into_bytes();
        bytes.push(b'\n');
        let status = if existed { StatusCode::OK } else { StatusCode::CREATED };
        let mut response = json_response(status, bytes);
        response.headers_mut().insert(header::ETAG, etag(&version));
        Ok(response)
    })
    .await
}

async fn score(State(state): State<AppState>, Path(raw): Path<String>) -> Result<Response, ApiError> {
    let id = parse_id(&raw)?;
    blocking(move || {
        let stored = state.store.load(&id, &state.config.model)?;
        let profile: MaturityProfile = scoring::checked_profile(&state.config.model, &stored.assessment)?;
        Ok(json_response(StatusCode::OK, to_body(&profile)))
    })
    .await
}

#[derive(Debug, Default, Deserialize)]
struct WhatIfBody {
    #[serde(default)]
    flips: Vec<Flip>,
}

async fn what_if(State(state): State<AppState>, Path(raw): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let id = parse_id(&raw)?;
    let request: WhatIfBody = parse_json(&body)?;
    blocking(move || {
        let stored = state.store.load(&id, &state.config.model)?;
        let result = scoring::what_if(&state.config.model, &stored.assessment, &request.flips)?;
        Ok(json_response(StatusCode::OK, to_body(&result)))
    })
    .await
}

#[derive(Debug, Deserialize)]
struct ScanBody {
    repo: String,
    #[serde(default)]
    apply: bool,
}

#[derive(Debug, Serialize)]
struct ScanResponse {
    assessment_id: AssessmentId,
    applied: bool,
    #[serde(flatten)]
    report: ScanReport,
    changed: Vec<crate::model::PracticeCode>,
    overridden: Vec<crate::model::PracticeCode>,
    flagged: Vec<crate::model::PracticeCode>,
    before: String,
    after: String,
}

async fn scan(
    State(state): State<AppState>,
    Path(raw): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Response, ApiError> {
    let id = parse_id(&raw)?;
    let request: ScanBody = parse_json(&body)?;
    let expected = if_match(&headers)?;
    blocking(move || {
        let config = &state.config;
        let stored = state.store.load(&id, &config.model)?;
        if !crate::evidence::remote::is_remote_locator(&request.repo) && !config.allow_local_scan {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "local_scan_disabled",
                "this server only scans hosted repositories",
            ));
        }
        let now = state.now();
        let report = scan_repository(
            &request.repo,
            &config.rules,
            &config.remote,
            config.transport.as_deref(),
            now,
        )?;
        let merged = stored
            .assessment
            .merge_probe_results(&config.model, &report.evidence.proposals, now)?;
        if request.apply {
            // The scan ran against the version just loaded; refuse to
            // clobber anything written meanwhile.
            let guard = expected.unwrap_or_else(|| stored.version.clone());
            state.store.save(&merged.assessment, Some(&guard))?;
        }
        let response = ScanResponse {
            assessment_id: id,
            applied: request.apply,
            before: scoring::profile(&config.model, &stored.assessment).vector_text,
            after: scoring::profile(&config.model, &merged.assessment).vector_text,
            changed: merged.changed,
            overridden: merged.overridden,
            flagged: merged.flagged,
            report,
        };
        Ok(json_response(StatusCode::OK, to_body(&response)))
    })
    .await
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no_route", "no such endpoint")
}

async fn require_token(State(state): State<AppState>, request: Request, next: Next) -> Response {
    let Some(token) = state.config.bearer_token.as_deref() else {
        return next.run(request).await;
    };
    if request.method() == Method::OPTIONS {
        return next.run(request).await;
    }
    let presented = request
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    if presented == Some(token) {
        next.run(request).await
    } else {
        ApiError::new(
            StatusCode::UNAUTHORIZED,
            "unauthorized",
            "missing or wrong bearer token",
        )
        .into_response()
    }
}

fn cors(origins: &[String]) -> CorsLayer {
    let allowed: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    CorsLayer::new()
        .allow_origin(AllowOrigin::list(allowed))
        .allow_methods([Method::GET, Method::HEAD, Method::PUT, Method::POST])
        .allow_headers([header::CONTENT_TYPE, header::IF_MATCH, header::AUTHORIZATION])
        .expose_headers([header::ETAG])
}

/// Builds the API router. Fails only if the data directory cannot be
/// created.
pub fn router(config: ServiceConfig) -> Result<Router, StoreError> {
    let store = Arc::new(AssessmentStore::open(&config.data_dir)?);
    let cors = cors(&config.cors_origins);
    let state = AppState { config, store };
    let api = Router::new()
        .route("/api/v1/model", get(get_model))
        .route("/api/v1/assessments", get(list_assessments))
        .route("/api/v1/assessments/{id}", get(get_assessment).put(put_assessment))
        .route("/api/v1/assessments/{id}/score", post(score))
        .route("/api/v1/assessments/{id}/whatif", post(what_if))
        .route("/api/v1/assessments/{id}/scan", post(scan))
        .fallback(not_found)
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .layer(cors)
        .with_state(state);
    Ok(api)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

/// Resolves on Ctrl-C or, on Unix, SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}
