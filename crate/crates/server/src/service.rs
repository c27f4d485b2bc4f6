//! HTTP job service under `/api/v1`.

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::multipart::MultipartRejection;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

use sashimi_core::pipeline::AnalysisConfig;
use sashimi_core::parse_csv;

use crate::artifacts::{compute, resolve_types, Artifacts};
use crate::jobs::{content_type, JobState, JobStore, ARTIFACT_NAMES};

pub const DEFAULT_MAX_UPLOAD: usize = 4 * 1024 * 1024;
pub const DEFAULT_MAX_POINTS: usize = 500_000;
/// Room for the config part and multipart framing on top of the file limit.
const MULTIPART_SLACK: usize = 256 * 1024;

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_upload: usize,
    pub workers: usize,
    pub data_dir: PathBuf,
    pub static_dir: Option<PathBuf>,
    pub retention: Duration,
    pub max_points: usize,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            max_upload: DEFAULT_MAX_UPLOAD,
            workers: default_workers(),
            data_dir: data_dir.into(),
            static_dir: None,
            retention: Duration::from_secs(24 * 3600),
            max_points: DEFAULT_MAX_POINTS,
        }
    }
}

#[derive(Clone)]
struct AppState {
    cfg: Arc<ServiceConfig>,
    store: Arc<JobStore>,
    pool: Arc<Semaphore>,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({"error": self.1}))).into_response()
    }
}

fn api(status: StatusCode, msg: impl Into<String>) -> ApiError {
    ApiError(status, msg.into())
}

pub fn router(cfg: ServiceConfig) -> Router {
    let state = AppState {
        pool: Arc::new(Semaphore::new(cfg.workers.max(1))),
        store: Arc::new(JobStore::new(cfg.data_dir.clone())),
        cfg: Arc::new(cfg),
    };
    spawn_reaper(state.clone());
    let body_limit = state.cfg.max_upload.saturating_add(MULTIPART_SLACK);
    let api = Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/jobs", post(submit).layer(DefaultBodyLimit::max(body_limit)))
        .route("/api/v1/jobs/{id}", get(status))
        .route("/api/v1/jobs/{id}/artifacts/{name}", get(artifact))
        .with_state(state.clone());
    match &state.cfg.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Bind `addr` and serve in the background; returns the bound address.
pub async fn start(
    cfg: ServiceConfig,
    addr: SocketAddr,
) -> io::Result<(SocketAddr, tokio::task::JoinHandle<io::Result<()>>)> {
    tokio::fs::create_dir_all(&cfg.data_dir).await?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let bound = listener.local_addr()?;
    let app = router(cfg);
    Ok((bound, tokio::spawn(async move { axum::serve(listener, app).await })))
}

/// Periodically drop finished jobs past the retention period, with their files.
fn spawn_reaper(state: AppState) {
    let Ok(rt) = tokio::runtime::Handle::try_current() else { return };
    let period = (state.cfg.retention / 4).clamp(Duration::from_secs(1), Duration::from_secs(3600));
    rt.spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            for dir in state.store.expire(state.cfg.retention) {
                let _ = tokio::fs::remove_dir_all(dir).await;
            }
        }
    });
}

async fn health(State(s): State<AppState>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "workers": s.cfg.workers,
        "max_upload": s.cfg.max_upload,
        "jobs": s.store.len(),
    }))
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    let status = e.status();
    if status == StatusCode::PAYLOAD_TOO_LARGE {
        api(status, "upload exceeds the size limit")
    } else {
        api(StatusCode::BAD_REQUEST, format!("malformed multipart body: {}", e.body_text()))
    }
}

fn stem(file_name: &str) -> String {
    let base = file_name.rsplit(['/', '\\']).next().unwrap_or(file_name);
    let s = std::path::Path::new(base).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if s.is_empty() { "image".into() } else { s }
}

async fn submit(
    State(s): State<AppState>,
    multipart: Result<Multipart, MultipartRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let mut mp = multipart.map_err(|e| api(StatusCode::BAD_REQUEST, e.body_text()))?;
    let mut file: Option<(String, Vec<u8>)> = None;
    let mut config_text: Option<String> = None;
    while let Some(mut field) = mp.next_field().await.map_err(multipart_error)? {
        match field.name() {
            Some("file") => {
                let name = stem(field.file_name().unwrap_or("image"));
                let mut buf = Vec::new();
                while let Some(chunk) = field.chunk().await.map_err(multipart_error)? {
                    if buf.len() + chunk.len() > s.cfg.max_upload {
                        return Err(api(
                            StatusCode::PAYLOAD_TOO_LARGE,
                            format!("file exceeds the {} byte upload limit", s.cfg.max_upload),
                        ));
                    }
                    buf.extend_from_slice(&chunk);
                }
                file = Some((name, buf));
            }
            Some("config") => config_text = Some(field.text().await.map_err(multipart_error)?),
            _ => {}
        }
    }
    let (image, bytes) = file.ok_or_else(|| api(StatusCode::BAD_REQUEST, "missing `file` part"))?;
    let config_text = config_text.ok_or_else(|| api(StatusCode::BAD_REQUEST, "missing `config` part"))?;

    let unprocessable = |m: String| api(StatusCode::UNPROCESSABLE_ENTITY, m);
    let mut config: AnalysisConfig =
        serde_json::from_str(&config_text).map_err(|e| unprocessable(format!("invalid configuration: {e}")))?;
    let pattern = parse_csv(&bytes, s.cfg.max_upload).map_err(|e| unprocessable(e.to_string()))?;
    if pattern.len() > s.cfg.max_points {
        return Err(unprocessable(format!("{} points exceed the limit of {}", pattern.len(), s.cfg.max_points)));
    }
    let patterns = vec![(image, pattern)];
    resolve_types(&mut config, &patterns).map_err(|e| unprocessable(e.to_string()))?;
    config.validate().map_err(|e| unprocessable(e.to_string()))?;

    let job = s.store.create(config.clone());
    let id = job.id.clone();
    tokio::spawn(run_job(s.clone(), id.clone(), job.dir, config, patterns));
    Ok((StatusCode::CREATED, Json(json!({"job_id": id}))))
}

async fn run_job(
    s: AppState,
    id: String,
    dir: PathBuf,
    config: AnalysisConfig,
    patterns: Vec<(String, sashimi_core::MarkedPointPattern)>,
) {
    let Ok(_permit) = s.pool.clone().acquire_owned().await else { return };
    if s.store.start(&id).is_err() {
        return;
    }
    let store = s.store.clone();
    let job_id = id.clone();
    let res = tokio::task::spawn_blocking(move || {
        compute(&patterns, &config, &|f| store.set_progress(&job_id, f * 0.99)).map_err(|e| e.to_string())
    })
    .await
    .unwrap_or_else(|e| Err(format!("worker panicked: {e}")));
    let outcome = match res {
        Ok(arts) => persist(&dir, &arts).await.map_err(|e| format!("cannot store artifacts: {e}")),
        Err(e) => Err(e),
    };
    let _ = match outcome {
        Ok(()) => s.store.finish(&id),
        Err(e) => s.store.fail(&id, e),
    };
}

async fn persist(dir: &std::path::Path, arts: &Artifacts) -> io::Result<()> {
    tokio::fs::create_dir_all(dir).await?;
    let (curves, diagram) = arts
        .images
        .first()
        .map(|i| (i.curves_json.as_str(), i.diagram_csv.as_str()))
        .unwrap_or(("{}", "pair,dim,birth,death,capped\n"));
    for (name, body) in ARTIFACT_NAMES.iter().zip([arts.features_csv.as_str(), curves, &arts.manifest_json, diagram]) {
        tokio::fs::write(dir.join(name), body).await?;
    }
    Ok(())
}

async fn status(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let job = s.store.get(&id).ok_or_else(|| api(StatusCode::NOT_FOUND, format!("unknown job {id}")))?;
    let artifacts: Value = if job.state == JobState::Done {
        ARTIFACT_NAMES.iter().map(|n| (n.to_string(), json!(format!("/api/v1/jobs/{id}/artifacts/{n}")))).collect()
    } else {
        json!({})
    };
    Ok(Json(json!({
        "job_id": job.id,
        "state": job.state,
        "progress": job.progress,
        "error": job.error,
        "created": job.created,
        "completed": job.completed,
        "config": job.config,
        "artifacts": artifacts,
    })))
}

async fn artifact(State(s): State<AppState>, Path((id, name)): Path<(String, String)>) -> Result<Response, ApiError> {
    let job = s.store.get(&id).ok_or_else(|| api(StatusCode::NOT_FOUND, format!("unknown job {id}")))?;
    let Some(&name) = ARTIFACT_NAMES.iter().find(|n| **n == name) else {
        return Err(api(StatusCode::NOT_FOUND, format!("unknown artifact {name}")));
    };
    if job.state != JobState::Done {
        let state = serde_json::to_value(job.state).unwrap_or_default();
        return Err(api(StatusCode::CONFLICT, format!("job is {}", state.as_str().unwrap_or("not done"))));
    }
    let bytes = tokio::fs::read(job.dir.join(name))
        .await
        .map_err(|_| api(StatusCode::NOT_FOUND, format!("artifact {name} has expired")))?;
    Ok((
        [
            (header::CONTENT_TYPE, content_type(name).to_string()),
            (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{name}\"")),
        ],
        bytes,
    )
        .into_response())
}
