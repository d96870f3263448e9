//! HTTP facade over the pipeline.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::embeddings::{load_all_vectors, EmbeddingTable};
use crate::pipeline::{render_svg, run_layout, EmbeddingSource, LayoutParams, PipelineError, Resources, Stage};

pub const MAX_TEXT_BYTES: usize = 1 << 20;
const MAX_BODY_BYTES: usize = 4 << 20;
pub const REQUEST_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub stopwords: Option<HashSet<String>>,
    pub lexicon: Option<HashSet<String>>,
    pub ui_dir: Option<PathBuf>,
}

/// Shared, read-only after the embedding table lands.
#[derive(Clone)]
pub struct AppState {
    table: Arc<OnceLock<Result<Arc<EmbeddingTable>, String>>>,
    config: Arc<ServiceConfig>,
    timeout: Duration,
}

impl AppState {
    pub fn loading(config: ServiceConfig) -> Self {
        AppState {
            table: Arc::new(OnceLock::new()),
            config: Arc::new(config),
            timeout: REQUEST_TIMEOUT,
        }
    }

    pub fn ready(table: EmbeddingTable, config: ServiceConfig) -> Self {
        let s = Self::loading(config);
        s.finish_loading(Ok(table));
        s
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn finish_loading(&self, result: Result<EmbeddingTable, String>) {
        let _ = self.table.set(result.map(Arc::new));
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutRequest {
    pub text: String,
    #[serde(default)]
    pub params: LayoutParams,
}

#[derive(Debug, Serialize)]
struct Health {
    status: &'static str,
    #[serde(rename = "embedding-loaded")]
    embedding_loaded: bool,
    dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

struct ApiError(StatusCode, PipelineError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn bad_request(field: &str, detail: impl std::fmt::Display) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, PipelineError::config(field, detail))
}

async fn health(State(s): State<AppState>) -> Json<Health> {
    Json(match s.table.get() {
        None => Health {
            status: "ok",
            embedding_loaded: false,
            dimension: None,
            detail: None,
        },
        Some(Ok(t)) => Health {
            status: "ok",
            embedding_loaded: true,
            dimension: Some(t.dimension()),
            detail: None,
        },
        Some(Err(e)) => Health {
            status: "error",
            embedding_loaded: false,
            dimension: None,
            detail: Some(e.clone()),
        },
    })
}

fn check(req: &LayoutRequest) -> Result<(), ApiError> {
    if req.text.trim().is_empty() {
        return Err(bad_request("text", "must not be empty"));
    }
    if req.text.len() > MAX_TEXT_BYTES {
        return Err(bad_request("text", format!("exceeds {MAX_TEXT_BYTES} bytes")));
    }
    // clients may not name server-side files
    if !matches!(req.params.container.as_str(), "circle" | "square") {
        return Err(bad_request("container", "must be circle or square"));
    }
    if !matches!(req.params.font.as_str(), "helvetica" | "sans" | "courier" | "mono") {
        return Err(bad_request("font", "must be helvetica or courier"));
    }
    req.params.validate().map_err(|e| ApiError(StatusCode::BAD_REQUEST, e))
}

/// Runs the pipeline off the async executor; `svg` adds the render stage.
async fn compute(s: &AppState, req: LayoutRequest, svg: bool) -> Result<(String, String), ApiError> {
    check(&req)?;
    let table = match s.table.get() {
        None => {
            return Err(ApiError(
                StatusCode::SERVICE_UNAVAILABLE,
                PipelineError::new(Stage::Embeddings, "Loading", "embedding table is still loading"),
            ))
        }
        Some(Err(e)) => {
            return Err(ApiError(
                StatusCode::SERVICE_UNAVAILABLE,
                PipelineError::new(Stage::Embeddings, "LoadFailed", e),
            ))
        }
        Some(Ok(t)) => t.clone(),
    };
    let res = Resources {
        embeddings: EmbeddingSource::Shared(table),
        stopwords: s.config.stopwords.clone(),
        lexicon: s.config.lexicon.clone(),
    };
    let job = tokio::task::spawn_blocking(move || {
        let mut out = run_layout(&req.text, &req.params, &res)?;
        let body = if svg {
            render_svg(&out.document, &mut out.timings)?
        } else {
            out.document.to_json()
        };
        Ok::<_, PipelineError>((body, out.timings.header_value()))
    });
    match tokio::time::timeout(s.timeout, job).await {
        Err(_) => Err(ApiError(
            StatusCode::GATEWAY_TIMEOUT,
            PipelineError::new(Stage::Config, "Timeout", format!("exceeded {}s", s.timeout.as_secs_f64())),
        )),
        Ok(Err(join)) => Err(ApiError(
            StatusCode::INTERNAL_SERVER_ERROR,
            PipelineError::new(Stage::Config, "Internal", join),
        )),
        Ok(Ok(Err(e))) if e.stage == Stage::Config => Err(ApiError(StatusCode::BAD_REQUEST, e)),
        Ok(Ok(Err(e))) => Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, e)),
        Ok(Ok(Ok(v))) => Ok(v),
    }
}

fn respond(body: String, timing: String, content_type: &'static str) -> Response {
    let mut r = (StatusCode::OK, [(header::CONTENT_TYPE, content_type)], body).into_response();
    if let Ok(v) = HeaderValue::from_str(&timing) {
        r.headers_mut().insert("server-timing", v);
    }
    r
}

fn parse_body(body: &[u8]) -> Result<LayoutRequest, ApiError> {
    serde_json::from_slice(body).map_err(|e| bad_request("body", e))
}

async fn layout(State(s): State<AppState>, body: axum::body::Bytes) -> Result<Response, ApiError> {
    let (body, timing) = compute(&s, parse_body(&body)?, false).await?;
    Ok(respond(body, timing, "application/json"))
}

async fn render_post(State(s): State<AppState>, body: axum::body::Bytes) -> Result<Response, ApiError> {
    let (body, timing) = compute(&s, parse_body(&body)?, true).await?;
    Ok(respond(body, timing, "image/svg+xml"))
}

/// `GET /api/render?format=svg&text=...&max-words=...`
async fn render_get(State(s): State<AppState>, Query(q): Query<BTreeMap<String, String>>) -> Result<Response, ApiError> {
    let mut q = q;
    if let Some(f) = q.remove("format") {
        if f != "svg" {
            return Err(bad_request("format", "only svg is supported"));
        }
    }
    let text = q.remove("text").unwrap_or_default();
    let params: serde_json::Map<String, serde_json::Value> = q
        .into_iter()
        .map(|(k, v)| {
            let val = if let Ok(b) = v.parse::<bool>() {
                serde_json::Value::Bool(b)
            } else if let Ok(n) = v.parse::<u64>() {
                n.into()
            } else if let Ok(x) = v.parse::<f64>() {
                x.into()
            } else {
                serde_json::Value::String(v)
            };
            (k, val)
        })
        .collect();
    let params: LayoutParams =
        serde_json::from_value(serde_json::Value::Object(params)).map_err(|e| bad_request("query", e))?;
    let (body, timing) = compute(&s, LayoutRequest { text, params }, true).await?;
    Ok(respond(body, timing, "image/svg+xml"))
}

const INDEX: &str = "<!doctype html><title>storygem</title><p>storygem API: POST /api/layout, POST /api/render, GET /api/render, GET /api/health</p>";

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/layout", post(layout))
        .route("/api/render", post(render_post).get(render_get))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES));
    let app = match &state.config.ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(INDEX) })),
    };
    app.layer(CorsLayer::permissive()).with_state(state)
}

/// Binds, starts loading the embedding table in the background, and serves.
pub async fn serve(host: &str, port: u16, vectors: PathBuf, config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::loading(config);
    let loader = state.clone();
    tokio::task::spawn_blocking(move || {
        let result = load_all_vectors(&vectors).map_err(|e| e.to_string());
        match &result {
            Ok(t) => log::info!("loaded {} vectors of dimension {}", t.len(), t.dimension()),
            Err(e) => log::error!("embedding load failed: {e}"),
        }
        loader.finish_loading(result);
    });
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
