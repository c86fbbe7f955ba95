use std::collections::HashMap;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use win_core::archive::{AncestryGraph, ArtifactSummary, Direction, MAX_PAGE};
use win_core::session::{SessionError, SessionParams, SessionView};
use win_core::Raster;

use crate::error::ApiError;
use crate::png::encode_grayscale;
use crate::AppState;

pub const MAX_RENDER_SIDE: u32 = 1024;
const DEFAULT_PAGE: usize = 50;

pub(crate) fn api() -> Router<AppState> {
    Router::new()
        .route("/domains", get(domains))
        .route("/artifacts", get(list_artifacts))
        .route("/artifacts/{id}", get(get_artifact))
        .route("/artifacts/{id}/ancestry", get(ancestry))
        .route("/artifacts/{id}/phenotype.png", get(artifact_png))
        .route("/phylogeny", get(phylogeny))
        .route("/sessions", post(create_session))
        .route("/sessions/{sid}", delete(delete_session))
        .route("/sessions/{sid}/candidates/{k}/phenotype.png", get(candidate_png))
        .route("/sessions/{sid}/select", post(select))
        .route("/sessions/{sid}/publish", post(publish))
        .fallback(|| async { ApiError::not_found("no such route") })
        .method_not_allowed_fallback(|| async {
            ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "INVALID_ARGUMENT", "method not allowed")
        })
}

type Params = Query<HashMap<String, String>>;

/// Runs blocking archive or session work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::invalid_argument(e.body_text()))
}

fn parse_param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<Option<T>, ApiError> {
    q.get(key)
        .map(|v| v.parse::<T>().map_err(|_| ApiError::invalid_argument(format!("{key}: {v:?} is not valid"))))
        .transpose()
}

fn required<'a>(q: &'a HashMap<String, String>, key: &str) -> Result<&'a str, ApiError> {
    q.get(key)
        .map(String::as_str)
        .ok_or_else(|| ApiError::invalid_argument(format!("query parameter {key} is required")))
}

#[derive(Serialize)]
struct DomainInfo {
    domain_id: String,
    display_name: String,
    default_render_size: (u32, u32),
}

async fn domains(State(state): State<AppState>) -> Json<Vec<DomainInfo>> {
    Json(
        state
            .archive
            .registry()
            .descriptors()
            .into_iter()
            .map(|d| DomainInfo {
                domain_id: d.domain_id.clone(),
                display_name: d.display_name.clone(),
                default_render_size: d.default_render_size,
            })
            .collect(),
    )
}

#[derive(Serialize)]
struct PageBody {
    total: usize,
    items: Vec<ArtifactSummary>,
}

async fn list_artifacts(State(state): State<AppState>, Query(q): Params) -> Result<Json<PageBody>, ApiError> {
    let domain_id = required(&q, "domain_id")?.to_string();
    let offset = parse_param(&q, "offset")?.unwrap_or(0);
    let limit = parse_param(&q, "limit")?.unwrap_or(DEFAULT_PAGE);
    if !(1..=MAX_PAGE).contains(&limit) {
        return Err(ApiError::invalid_argument(format!("limit must be in 1..={MAX_PAGE}")));
    }
    let page = state.archive.list(&domain_id, offset, limit)?;
    Ok(Json(PageBody { total: page.total, items: page.items }))
}

async fn get_artifact(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(state.archive.get(&id)?).into_response())
}

async fn ancestry(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Params,
) -> Result<Json<AncestryGraph>, ApiError> {
    let direction: Direction = match q.get("direction") {
        None => Direction::Up,
        Some(d) => d.parse().map_err(ApiError::invalid_argument)?,
    };
    let depth: Option<usize> = parse_param(&q, "depth")?;
    blocking(move || Ok(state.archive.ancestry(&id, direction, depth)?)).await.map(Json)
}

async fn phylogeny(State(state): State<AppState>, Query(q): Params) -> Result<Json<AncestryGraph>, ApiError> {
    let domain_id = required(&q, "domain_id")?.to_string();
    blocking(move || Ok(state.archive.phylogeny(&domain_id)?)).await.map(Json)
}

fn render_size(q: &HashMap<String, String>, default: (u32, u32)) -> Result<(u32, u32), ApiError> {
    let w = parse_param(q, "w")?.unwrap_or(default.0);
    let h = parse_param(q, "h")?.unwrap_or(default.1);
    for (name, v) in [("w", w), ("h", h)] {
        if !(1..=MAX_RENDER_SIDE).contains(&v) {
            return Err(ApiError::invalid_argument(format!("{name} must be in 1..={MAX_RENDER_SIDE}, got {v}")));
        }
    }
    Ok((w, h))
}

fn default_size(state: &AppState, domain_id: &str) -> (u32, u32) {
    state
        .archive
        .registry()
        .get(domain_id)
        .map_or((128, 128), |d| d.descriptor.default_render_size)
}

fn png_response(raster: &Raster, extra: &[(header::HeaderName, HeaderValue)]) -> Response {
    let mut resp = encode_grayscale(raster).into_response();
    let headers = resp.headers_mut();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    for (k, v) in extra {
        headers.insert(k.clone(), v.clone());
    }
    resp
}

fn etag_matches(headers: &HeaderMap, etag: &str) -> bool {
    headers
        .get_all(header::IF_NONE_MATCH)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(','))
        .map(str::trim)
        .any(|t| t == "*" || t == etag || t.strip_prefix("W/") == Some(etag))
}

async fn artifact_png(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Params,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let record = state.archive.get(&id)?;
    let (w, h) = render_size(&q, default_size(&state, &record.domain_id))?;
    let etag = format!("\"{}-{w}x{h}\"", record.artifact_id);
    let etag_value = HeaderValue::from_str(&etag).expect("hex and digits");
    let cache = HeaderValue::from_static("public, max-age=31536000, immutable");
    if etag_matches(&headers, &etag) {
        return Ok((
            StatusCode::NOT_MODIFIED,
            [(header::ETAG, etag_value), (header::CACHE_CONTROL, cache)],
        )
            .into_response());
    }
    let domain = state
        .archive
        .registry()
        .domain(&record.domain_id)
        .cloned()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_DOMAIN", format!("unknown domain {:?}", record.domain_id)))?;
    let raster = blocking(move || Ok(domain.render(&record.genome_blob, w, h)?)).await?;
    Ok(png_response(&raster, &[(header::ETAG, etag_value), (header::CACHE_CONTROL, cache)]))
}

async fn candidate_png(
    State(state): State<AppState>,
    Path((sid, k)): Path<(String, String)>,
    Query(q): Params,
) -> Result<Response, ApiError> {
    let k: usize = k.parse().map_err(|_| ApiError::not_found(format!("no candidate {k:?}")))?;
    let (domain_id, _) = state.sessions.candidate(&sid, k).map_err(|e| match e {
        SessionError::IndexOutOfRange(i) => ApiError::not_found(format!("candidate index {i} out of range")),
        e => e.into(),
    })?;
    let (w, h) = render_size(&q, default_size(&state, &domain_id))?;
    let raster = blocking(move || Ok(state.sessions.render_candidate(&sid, k, w, h)?)).await?;
    Ok(png_response(&raster, &[(header::CACHE_CONTROL, HeaderValue::from_static("no-store"))]))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    domain_id: String,
    #[serde(default)]
    seed_artifact_ids: Vec<String>,
    pop_size: Option<usize>,
    rng_seed: Option<u64>,
}

async fn create_session(
    State(state): State<AppState>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req = body(payload)?;
    let params = SessionParams {
        domain_id: req.domain_id,
        seed_artifact_ids: req.seed_artifact_ids,
        pop_size: req.pop_size,
        rng_seed: req.rng_seed,
        carry_seeds: false,
    };
    let view = blocking(move || Ok(state.sessions.create(&params)?)).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectBody {
    op_epoch: u64,
    selected: Vec<usize>,
}

async fn select(
    State(state): State<AppState>,
    Path(sid): Path<String>,
    payload: Result<Json<SelectBody>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let req = body(payload)?;
    blocking(move || Ok(state.sessions.select(&sid, req.op_epoch, &req.selected)?)).await.map(Json)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PublishBody {
    candidate: usize,
    #[serde(default = "anonymous")]
    author: String,
    #[serde(default)]
    tags: Vec<String>,
}

fn anonymous() -> String {
    "anonymous".into()
}

async fn publish(
    State(state): State<AppState>,
    Path(sid): Path<String>,
    Query(q): Params,
    payload: Result<Json<PublishBody>, JsonRejection>,
) -> Result<(StatusCode, Json<ArtifactSummary>), ApiError> {
    let full = matches!(q.get("full").map(String::as_str), Some("1" | "true"));
    let req = body(payload)?;
    let published = blocking(move || Ok(state.sessions.publish(&sid, req.candidate, &req.author, &req.tags)?)).await?;
    let status = if published.created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(published.record.summary(full))))
}

async fn delete_session(State(state): State<AppState>, Path(sid): Path<String>) -> Result<StatusCode, ApiError> {
    state.sessions.delete(&sid)?;
    Ok(StatusCode::NO_CONTENT)
}
