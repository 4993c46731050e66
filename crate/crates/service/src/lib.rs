//! HTTP preview backend for interactive pipeline tuning.
//!
//! | route                  | body                         | reply                        |
//! |------------------------|------------------------------|------------------------------|
//! | `POST /images`         | PNG bytes (<= 32 MiB)        | `{"id", "width", ...}`       |
//! | `GET /images/{id}`     |                              | PNG                          |
//! | `POST /images/{id}/mask` | PNG bytes                  | 204                          |
//! | `POST /preview`        | `{"pipeline", "seed", "image_id", "grid"?}` | `multipart/mixed` |
//! | `POST /format`         | `{"pipeline"}`               | `{"canonical"}`              |
//! | `GET /catalog`         |                              | ops and presets              |
//! | `GET /presets/{name}`  |                              | pipeline text                |
//!
//! Pipeline errors answer 422 with `line` and `col`. Rendering is a pure
//! function of the request and the stored image, so identical requests get
//! byte-identical replies.

mod preview;
mod store;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fractaug_core::dsl::{self, DslError};
use fractaug_core::{io, ops, presets};
use serde::Deserialize;
use serde_json::json;
use uuid::Uuid;

pub use preview::{render_preview, PreviewRequest, MAX_GRID};
pub use store::{ImageStore, StoredImage};

pub const MAX_UPLOAD: usize = 32 * 1024 * 1024;
pub const IMAGE_TTL: Duration = Duration::from_secs(3600);

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<ImageStore>,
}

impl Default for AppState {
    fn default() -> Self {
        AppState {
            store: Arc::new(ImageStore::new(IMAGE_TTL)),
        }
    }
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound(String),
    Pipeline(DslError),
    Internal(String),
}

impl From<DslError> for ApiError {
    fn from(e: DslError) -> Self {
        ApiError::Pipeline(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({ "error": m })),
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({ "error": m })),
            ApiError::Pipeline(e) => {
                let (line, col) = e.line_col();
                (
                    StatusCode::UNPROCESSABLE_ENTITY,
                    json!({ "error": e.to_string(), "class": e.class(), "line": line, "col": col }),
                )
            }
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": m })),
        };
        (status, Json(body)).into_response()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/images", post(upload_image))
        .route("/images/{id}", get(fetch_image))
        .route("/images/{id}/mask", post(upload_mask))
        .route("/preview", post(preview_handler))
        .route("/format", post(format_handler))
        .route("/catalog", get(catalog))
        .route("/presets/{name}", get(preset))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD))
        .with_state(state)
}

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::default())).await
}

fn parse_id(id: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(id).map_err(|_| ApiError::NotFound(format!("no image '{id}'")))
}

async fn upload_image(State(st): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let loaded = io::decode_png(&body).map_err(|e| ApiError::BadRequest(format!("not a PNG: {e}")))?;
    let (w, h, c) = loaded.image.dims();
    let id = st.store.insert(StoredImage {
        image: loaded.image,
        depth: loaded.depth,
        mask: None,
    });
    let body = json!({ "id": id.to_string(), "width": w, "height": h, "channels": c });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn upload_mask(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<StatusCode, ApiError> {
    let id = parse_id(&id)?;
    let stored = st
        .store
        .get(&id)
        .ok_or_else(|| ApiError::NotFound(format!("no image '{id}'")))?;
    let (mask, _) =
        io::decode_mask(&body).map_err(|e| ApiError::BadRequest(format!("not a PNG: {e}")))?;
    if (mask.width(), mask.height()) != (stored.image.width(), stored.image.height()) {
        return Err(ApiError::BadRequest("mask size differs from image size".into()));
    }
    if !st.store.set_mask(&id, mask) {
        return Err(ApiError::NotFound(format!("no image '{id}'")));
    }
    Ok(StatusCode::NO_CONTENT)
}

async fn fetch_image(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let s = st
        .store
        .get(&id)
        .ok_or_else(|| ApiError::NotFound(format!("no image '{id}'")))?;
    let png = io::encode_png(&s.image, s.depth).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn preview_handler(
    State(st): State<AppState>,
    Json(req): Json<PreviewRequest>,
) -> Result<Response, ApiError> {
    // parse before looking anything up so pipeline errors win over 404s
    let ast = dsl::parse(&req.pipeline)?;
    let id = parse_id(&req.image_id)?;
    let stored = st
        .store
        .get(&id)
        .ok_or_else(|| ApiError::NotFound(format!("no image '{id}'")))?;
    let (content_type, body) = tokio::task::spawn_blocking(move || render_preview(&ast, &req, &stored))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(([(header::CONTENT_TYPE, content_type)], body).into_response())
}

#[derive(Deserialize)]
struct FormatRequest {
    pipeline: String,
}

async fn format_handler(Json(req): Json<FormatRequest>) -> Result<Json<serde_json::Value>, ApiError> {
    let ast = dsl::parse(&req.pipeline)?;
    Ok(Json(json!({ "canonical": dsl::format(&ast) })))
}

pub fn catalog_body() -> serde_json::Value {
    let presets: Vec<_> = presets::PRESETS
        .iter()
        .map(|p| json!({ "name": p.name, "source": p.source }))
        .collect();
    json!({ "ops": ops::catalog_json(), "presets": presets })
}

async fn catalog() -> Json<serde_json::Value> {
    Json(catalog_body())
}

async fn preset(Path(name): Path<String>) -> Result<Response, ApiError> {
    let p = presets::get(&name).ok_or_else(|| ApiError::NotFound(format!("no preset '{name}'")))?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], p.source).into_response())
}
