//! REST interface over a [`Store`].
//!
//! Errors are returned as `{"error": <name>, "message": <text>}` with a
//! matching status code.

use std::io::Write;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tower_http::services::ServeDir;
use transparency_core::annotation::{self, AnnotationError, ExportSeed, FieldKey, PolicyText, Submission};
use transparency_core::tilt::{self, check_completeness, to_value, ValidationError};

use crate::filter::parse_filter;
use crate::qa::{answer_question, Intent};
use crate::{HubError, Store};

pub const PORT_ENV: &str = "TILT_HUB_PORT";
pub const DATA_DIR_ENV: &str = "TILT_HUB_DATA_DIR";
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub host: IpAddr,
    pub port: u16,
    pub data_dir: PathBuf,
    /// Static files served below `/ui/`.
    pub ui_dir: Option<PathBuf>,
}

impl ServerConfig {
    /// Resolves settings from flags first, then `TILT_HUB_PORT` /
    /// `TILT_HUB_DATA_DIR`, then defaults (port 8080, `./tilt-hub-data`).
    pub fn resolve(port: Option<u16>, data_dir: Option<PathBuf>, env: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let port = match port {
            Some(p) => p,
            None => match env(PORT_ENV) {
                Some(v) => v.trim().parse().map_err(|_| format!("{PORT_ENV}={v:?} is not a port number"))?,
                None => DEFAULT_PORT,
            },
        };
        let data_dir = data_dir
            .or_else(|| env(DATA_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("tilt-hub-data"));
        Ok(Self { host: IpAddr::V4(Ipv4Addr::LOCALHOST), port, data_dir, ui_dir: None })
    }
}

struct ApiError(HubError);

impl<E: Into<HubError>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

fn status_of(e: &HubError) -> StatusCode {
    match e {
        HubError::NotFound(_) => StatusCode::NOT_FOUND,
        HubError::VersionConflict { .. } | HubError::Conflict(_) => StatusCode::CONFLICT,
        HubError::Annotation(AnnotationError::TaskNotDone { .. }) => StatusCode::CONFLICT,
        HubError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": self.0.name(), "message": self.0.to_string()});
        (status_of(&self.0), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type AppState = Arc<Store>;

fn etag_header(etag: &str) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{etag}\"")).expect("hex etag is a valid header value")
}

fn parse_body<T: for<'de> Deserialize<'de>>(text: &str, on_error: impl Fn(String) -> HubError) -> Result<T, HubError> {
    serde_json::from_str(text).map_err(|e| on_error(e.to_string()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, HubError> + Send + 'static) -> Result<T, HubError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| HubError::Io(e.to_string()))?
}

async fn health() -> Json<Value> {
    Json(json!({"status": "ok"}))
}

#[derive(Deserialize)]
struct FilterParams {
    filter: Option<String>,
}

async fn list_documents(State(store): State<AppState>, Query(q): Query<FilterParams>) -> ApiResult<Json<Value>> {
    let filter = parse_filter(q.filter.as_deref().unwrap_or(""))?;
    Ok(Json(serde_json::to_value(store.query(&filter)).expect("hits serialize")))
}

async fn put_document(State(store): State<AppState>, Path(id): Path<String>, body: String) -> ApiResult<Response> {
    let doc = tilt::parse(&body)?;
    if doc.meta.id != id {
        return Err(ValidationError::new("meta/id", format!("{:?} does not match the URL id {id:?}", doc.meta.id)).into());
    }
    let version = doc.meta.version;
    let etag = blocking(move || store.put(doc)).await?;
    let mut resp = (StatusCode::CREATED, Json(json!({"id": id, "version": version, "etag": etag}))).into_response();
    resp.headers_mut().insert(header::ETAG, etag_header(&etag));
    Ok(resp)
}

#[derive(Deserialize)]
struct VersionParam {
    version: Option<u64>,
}

async fn get_document(State(store): State<AppState>, Path(id): Path<String>, Query(q): Query<VersionParam>) -> ApiResult<Response> {
    let record = store.fetch(&id, q.version)?;
    let mut resp = Json(to_value(&record.doc)).into_response();
    resp.headers_mut().insert(header::ETAG, etag_header(&record.etag));
    let stored = HeaderValue::from_str(&record.stored_at.to_rfc3339()).expect("timestamp is a valid header value");
    resp.headers_mut().insert("x-stored-at", stored);
    Ok(resp)
}

async fn delete_document(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    blocking(move || store.delete(&id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn versions(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Vec<u64>>> {
    Ok(Json(store.versions(&id)?))
}

async fn completeness(State(store): State<AppState>, Path(id): Path<String>, Query(q): Query<VersionParam>) -> ApiResult<Json<Value>> {
    let record = store.fetch(&id, q.version)?;
    Ok(Json(serde_json::to_value(check_completeness(&record.doc)).expect("report serializes")))
}

#[derive(Deserialize)]
struct DiffParams {
    from: Option<u64>,
    to: Option<u64>,
}

/// `to` defaults to the latest version, `from` to the version before `to`.
async fn diff(State(store): State<AppState>, Path(id): Path<String>, Query(q): Query<DiffParams>) -> ApiResult<Json<Value>> {
    let versions = store.versions(&id)?;
    let to = q.to.unwrap_or(*versions.last().expect("stored ids have versions"));
    let from = match q.from {
        Some(v) => v,
        None => versions.iter().copied().filter(|&v| v < to).max().unwrap_or(to),
    };
    let old = store.fetch(&id, Some(from))?;
    let new = store.fetch(&id, Some(to))?;
    Ok(Json(serde_json::to_value(tilt::diff(&old.doc, &new.doc)).expect("diff serializes")))
}

async fn answers(State(store): State<AppState>, Path(id): Path<String>, body: String) -> ApiResult<Json<Value>> {
    let intent: Intent = parse_body(&body, HubError::InvalidIntent)?;
    let record = store.fetch(&id, None)?;
    Ok(Json(serde_json::to_value(answer_question(&record.doc, &intent)?).expect("answer serializes")))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct NewPolicy {
    id: Option<String>,
    source_url: Option<String>,
    body: String,
}

async fn create_policy(State(store): State<AppState>, body: String) -> ApiResult<Response> {
    let p: NewPolicy = parse_body(&body, |m| ValidationError::new("", m).into())?;
    let id = p.id.filter(|s| !s.trim().is_empty()).unwrap_or_else(|| {
        let digest = hex::encode(Sha256::digest(p.body.as_bytes()));
        format!("policy-{}", &digest[..12])
    });
    let policy = PolicyText::new(id, p.source_url, p.body)?;
    let policy = blocking(move || store.put_policy(policy)).await?;
    Ok((StatusCode::CREATED, Json(policy)).into_response())
}

async fn list_policies(State(store): State<AppState>) -> Json<Vec<String>> {
    Json(store.policy_ids())
}

async fn get_policy(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<PolicyText>> {
    Ok(Json(store.policy(&id)?))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct NewTask {
    id: Option<String>,
    policy_id: String,
}

async fn create_task(State(store): State<AppState>, body: String) -> ApiResult<Response> {
    let t: NewTask = parse_body(&body, |m| ValidationError::new("", m).into())?;
    let policy = store.policy(&t.policy_id)?;
    let id = t.id.filter(|s| !s.trim().is_empty()).unwrap_or_else(|| {
        let existing = store.task_ids().iter().filter(|i| i.starts_with(&format!("{}-task-", policy.id))).count();
        format!("{}-task-{}", policy.id, existing + 1)
    });
    let task = annotation::create_task(id.clone(), &policy)?;
    let task = blocking(move || store.update_task(&id, Some(task), |_, _| Ok(()))).await?;
    Ok((StatusCode::CREATED, Json(task)).into_response())
}

async fn list_tasks(State(store): State<AppState>) -> Json<Vec<String>> {
    Json(store.task_ids())
}

fn task_view(task: &annotation::AnnotationTask) -> Value {
    let mut next = serde_json::to_value(task.next_question()).expect("question serializes");
    next["progress"] = json!(task.progress());
    next
}

async fn get_task(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(serde_json::to_value(store.task(&id)?).expect("task serializes")))
}

async fn next_question(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(task_view(&store.task(&id)?)))
}

async fn submit(State(store): State<AppState>, Path(id): Path<String>, body: String) -> ApiResult<Json<Value>> {
    let submission: Submission = parse_body(&body, |m| ValidationError::new("", m).into())?;
    let task = blocking(move || {
        store.update_task(&id, None, |task, policy| Ok(task.submit(policy, submission, Utc::now())?))
    })
    .await?;
    Ok(Json(json!({"task": task, "next": task_view(&task)})))
}

#[derive(Deserialize)]
struct FieldParam {
    field: String,
}

async fn suggestions(State(store): State<AppState>, Path(id): Path<String>, Query(q): Query<FieldParam>) -> ApiResult<Json<Value>> {
    let field: FieldKey = q.field.parse()?;
    let task = store.task(&id)?;
    let policy = store.policy(&task.policy_id)?;
    let list = annotation::suggest(&task, &policy, field)?;
    Ok(Json(serde_json::to_value(list).expect("suggestions serialize")))
}

async fn export(State(store): State<AppState>, Path(id): Path<String>, Query(seed): Query<ExportSeed>) -> ApiResult<Json<Value>> {
    let task = store.task(&id)?;
    let doc = annotation::export_tilt(&task, &seed)?;
    Ok(Json(to_value(&doc)))
}

async fn ui_missing() -> ApiError {
    ApiError(HubError::NotFound("no UI assets configured".into()))
}

pub fn router(store: Arc<Store>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/documents", get(list_documents))
        .route("/documents/{id}", get(get_document).put(put_document).delete(delete_document))
        .route("/documents/{id}/versions", get(versions))
        .route("/documents/{id}/completeness", get(completeness))
        .route("/documents/{id}/diff", get(diff))
        .route("/documents/{id}/answers", post(answers))
        .route("/policies", get(list_policies).post(create_policy))
        .route("/policies/{id}", get(get_policy))
        .route("/tasks", get(list_tasks).post(create_task))
        .route("/tasks/{id}", get(get_task))
        .route("/tasks/{id}/next", get(next_question))
        .route("/tasks/{id}/submissions", post(submit))
        .route("/tasks/{id}/suggestions", get(suggestions))
        .route("/tasks/{id}/export", get(export))
        .with_state(store);
    match ui_dir {
        Some(dir) => api.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api.route("/ui", get(ui_missing)).route("/ui/{*rest}", get(ui_missing)),
    }
}

/// Opens the store, binds, prints `listening on <addr>` to stdout and
/// serves until Ctrl-C.
pub async fn serve(config: ServerConfig) -> Result<(), HubError> {
    let data_dir = config.data_dir.clone();
    let store = Arc::new(tokio::task::spawn_blocking(move || Store::open(data_dir)).await.map_err(|e| HubError::Io(e.to_string()))??);
    let listener = tokio::net::TcpListener::bind(SocketAddr::new(config.host, config.port)).await?;
    let addr = listener.local_addr()?;
    {
        let mut out = std::io::stdout().lock();
        writeln!(out, "listening on {addr}")?;
        out.flush()?;
    }
    log::info!("serving {} on {addr}", config.data_dir.display());
    axum::serve(listener, router(store, config.ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    #[test]
    fn flags_win_over_environment() {
        let env: BTreeMap<&str, &str> = BTreeMap::from([(PORT_ENV, "9001"), (DATA_DIR_ENV, "/srv/tilt")]);
        let lookup = |k: &str| env.get(k).map(|v| v.to_string());
        let c = ServerConfig::resolve(Some(7000), Some("/tmp/x".into()), lookup).unwrap();
        assert_eq!((c.port, c.data_dir), (7000, PathBuf::from("/tmp/x")));
        let c = ServerConfig::resolve(None, None, lookup).unwrap();
        assert_eq!((c.port, c.data_dir), (9001, PathBuf::from("/srv/tilt")));
        let c = ServerConfig::resolve(None, None, |_| None).unwrap();
        assert_eq!((c.port, c.data_dir), (DEFAULT_PORT, PathBuf::from("tilt-hub-data")));
        assert!(ServerConfig::resolve(None, None, |_| Some("http".into())).is_err());
    }
}
