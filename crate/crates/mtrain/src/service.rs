//! HTTP service hosting course packages and trainee sessions.
//!
//! | method | path | body / reply |
//! |---|---|---|
//! | GET  | `/courses` | `[CourseCatalogEntry]` |
//! | GET  | `/courses/{id}/package` | manifest JSON |
//! | GET  | `/courses/{id}/assets/{path}` | asset bytes |
//! | POST | `/sessions` | `{trainee_id, course_id, procedure_id}` → `{session_id}` |
//! | GET  | `/sessions/{id}` | session snapshot |
//! | POST | `/sessions/{id}/events` | `SessionEvent` → session snapshot |
//! | POST | `/sessions/{id}/practice/attempts` | `{part_number}` → `{result, alert?, progress}` |
//! | GET  | `/sessions/{id}/metrics` | `SessionMetrics` |
//! | GET  | `/reports/effectiveness?baseline=&observed=[&expect=]` | `EffectivenessReport` |
//!
//! Clients are not trusted: every event is re-adjudicated by the engines.
//! Each session sits behind its own lock so writes to one session are
//! serialized while other sessions proceed.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::net::SocketAddr;
use std::path::{Path as FsPath, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use mtrain_core::metrics::{effectiveness_report, MetricsError};
use mtrain_core::practice::{Alert, AttemptOutcome, PracticeError, PracticeProgress};
use mtrain_core::run::{RunError, TraineeRun};
use mtrain_core::session::{SessionError, SessionEvent};
use mtrain_core::{validate_package, CourseId, CoursePackage, Direction, PartNumber, ProcedureId, ValidationReport};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::package::{asset_path_in_layout, parse_package, ParseError, MANIFEST};
use crate::report::{load_expected, load_times, DatasetError};

/// Environment variable naming the default courseware directory for `serve`.
pub const COURSEWARE_DIR_ENV: &str = "MTRAIN_COURSEWARE_DIR";

/// Subdirectory of the courseware directory holding report datasets.
pub const REPORTS_DIR: &str = "reports";

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path} failed validation:\n{report}")]
    Invalid { path: PathBuf, report: ValidationReport },
    #[error("course id {0} is used by more than one package")]
    DuplicateCourse(CourseId),
    #[error("binding {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcedureSummary {
    pub procedure_id: ProcedureId,
    pub direction: Direction,
    pub step_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseCatalogEntry {
    pub course_id: CourseId,
    pub title: String,
    pub procedures: Vec<ProcedureSummary>,
}

#[derive(Debug)]
pub struct HostedCourse {
    pub package: Arc<CoursePackage>,
    pub root: PathBuf,
}

/// Validated packages keyed by course id.
#[derive(Debug, Default)]
pub struct Catalog {
    pub courses: BTreeMap<CourseId, HostedCourse>,
}

impl Catalog {
    pub fn entries(&self) -> Vec<CourseCatalogEntry> {
        self.courses
            .values()
            .map(|c| CourseCatalogEntry {
                course_id: c.package.course_id.clone(),
                title: c.package.title.clone(),
                procedures: c
                    .package
                    .procedures
                    .iter()
                    .map(|p| ProcedureSummary {
                        procedure_id: p.procedure_id.clone(),
                        direction: p.direction,
                        step_count: p.steps.len(),
                    })
                    .collect(),
            })
            .collect()
    }
}

/// Loads every package directory (a subdirectory holding a manifest) under
/// `dir`. Any package with validation errors fails the whole load.
pub fn load_catalog(dir: &FsPath) -> Result<Catalog, ServeError> {
    let io_err = |source| ServeError::Io { path: dir.to_path_buf(), source };
    let mut roots: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_err)?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.join(MANIFEST).is_file())
        .collect();
    roots.sort();

    let mut catalog = Catalog::default();
    for root in roots {
        let package = parse_package(&root).map_err(|source| ServeError::Parse { path: root.clone(), source })?;
        let report = validate_package(&package);
        if !report.is_accepted() {
            return Err(ServeError::Invalid { path: root, report });
        }
        let id = package.course_id.clone();
        if catalog.courses.contains_key(&id) {
            return Err(ServeError::DuplicateCourse(id));
        }
        catalog.courses.insert(id, HostedCourse { package: Arc::new(package), root });
    }
    Ok(catalog)
}

struct LiveSession {
    run: TraineeRun,
    started: Instant,
}

impl LiveSession {
    /// Wall-clock time since the session started, never earlier than the
    /// last logged event.
    fn now_ms(&self) -> u64 {
        let elapsed = self.started.elapsed().as_millis() as u64;
        elapsed.max(self.run.session().last_timestamp_ms())
    }
}

pub struct AppState {
    catalog: Catalog,
    reports_dir: PathBuf,
    sessions: Mutex<HashMap<String, Arc<Mutex<LiveSession>>>>,
    next_session: AtomicU64,
}

impl AppState {
    pub fn new(catalog: Catalog, reports_dir: PathBuf) -> Self {
        Self { catalog, reports_dir, sessions: Mutex::default(), next_session: AtomicU64::new(1) }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<LiveSession>>, ApiError> {
        self.sessions
            .lock()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no session {id}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn not_found(message: String) -> Self {
        Self { status: StatusCode::NOT_FOUND, code: "not_found", message }
    }

    fn bad_request(message: String) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: "bad_request", message }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}

impl From<RunError> for ApiError {
    fn from(err: RunError) -> Self {
        use StatusCode as S;
        let (status, code) = match &err {
            RunError::Session(e) => match e {
                SessionError::UnknownCourse(_) | SessionError::UnknownProcedure(_) => (S::NOT_FOUND, "not_found"),
                SessionError::Locked { .. } => (S::CONFLICT, "locked"),
                SessionError::NotEntered(_) | SessionError::OutsideModule { .. } => (S::CONFLICT, "wrong_module"),
                SessionError::EvidenceInsufficient { .. } | SessionError::EvidenceRequired => {
                    (S::CONFLICT, "evidence_insufficient")
                }
                SessionError::NonMonotonicTimestamp { .. } => (S::UNPROCESSABLE_ENTITY, "non_monotonic_timestamp"),
            },
            RunError::Familiarization(_) => (S::UNPROCESSABLE_ENTITY, "unknown_part"),
            RunError::Playback(_) | RunError::StepMismatch { .. } => (S::CONFLICT, "playback"),
            RunError::Practice(e) => match e {
                PracticeError::PartNotMovable(_) => (S::UNPROCESSABLE_ENTITY, "part_not_movable"),
                PracticeError::AlertPending => (S::CONFLICT, "alert_pending"),
                PracticeError::SessionComplete => (S::CONFLICT, "practice_complete"),
                PracticeError::NoAlert => (S::CONFLICT, "no_alert"),
                PracticeError::EmptyProcedure => (S::CONFLICT, "empty_procedure"),
            },
            RunError::ClaimMismatch { .. } => (S::CONFLICT, "claim_mismatch"),
        };
        Self { status, code, message: err.to_string() }
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/courses", get(list_courses))
        .route("/courses/{id}/package", get(get_package))
        .route("/courses/{id}/assets/{*path}", get(get_asset))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/practice/attempts", post(post_attempt))
        .route("/sessions/{id}/metrics", get(get_metrics))
        .route("/reports/effectiveness", get(get_effectiveness))
        .with_state(state)
}

/// Loads and validates `courseware_dir`, then serves until the process
/// exits.
pub async fn serve(courseware_dir: &FsPath, addr: SocketAddr) -> Result<(), ServeError> {
    let catalog = load_catalog(courseware_dir)?;
    let state = Arc::new(AppState::new(catalog, courseware_dir.join(REPORTS_DIR)));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| ServeError::Bind { addr, source })?;
    let local = listener.local_addr().map_err(|source| ServeError::Bind { addr, source })?;
    eprintln!("serving {} course(s) on http://{local}", state.catalog.courses.len());
    axum::serve(listener, router(state)).await.map_err(|source| ServeError::Io { path: courseware_dir.into(), source })
}

async fn list_courses(State(state): State<Arc<AppState>>) -> Json<Vec<CourseCatalogEntry>> {
    Json(state.catalog.entries())
}

fn course<'a>(state: &'a AppState, id: &str) -> ApiResult<&'a HostedCourse> {
    state
        .catalog
        .courses
        .get(&CourseId::from(id))
        .ok_or_else(|| ApiError::not_found(format!("no course {id}")))
}

async fn get_package(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let course = course(&state, &id)?;
    Ok(Json(&*course.package).into_response())
}

async fn get_asset(State(state): State<Arc<AppState>>, Path((id, path)): Path<(String, String)>) -> ApiResult<Response> {
    let course = course(&state, &id)?;
    let asset = mtrain_core::AssetPath::new(path);
    if !asset_path_in_layout(&asset) || !course.package.asset_index.contains(&asset) {
        return Err(ApiError::not_found(format!("no asset {asset} in {id}")));
    }
    let file = course.root.join(asset.as_str());
    let bytes = tokio::fs::read(&file)
        .await
        .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, code: "io", message: e.to_string() })?;
    let content_type = match asset.as_str().rsplit('.').next() {
        Some("glb") => "model/gltf-binary",
        Some("ogg") => "audio/ogg",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}

#[derive(Debug, Deserialize)]
struct CreateSession {
    trainee_id: String,
    course_id: CourseId,
    procedure_id: ProcedureId,
}

async fn create_session(State(state): State<Arc<AppState>>, Json(req): Json<CreateSession>) -> ApiResult<Response> {
    let course = course(&state, req.course_id.as_str())?;
    let n = state.next_session.fetch_add(1, Ordering::Relaxed);
    let session_id = format!("s-{n}");
    let run = TraineeRun::start(course.package.clone(), session_id.clone(), req.trainee_id, &req.procedure_id)?;
    let live = LiveSession { run, started: Instant::now() };
    state
        .sessions
        .lock()
        .expect("session table poisoned")
        .insert(session_id.clone(), Arc::new(Mutex::new(live)));
    Ok((StatusCode::CREATED, Json(json!({ "session_id": session_id }))).into_response())
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let live = state.session(&id)?;
    let live = live.lock().expect("session poisoned");
    Ok(Json(live.run.snapshot()).into_response())
}

async fn post_event(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(event): Json<SessionEvent>,
) -> ApiResult<Response> {
    let live = state.session(&id)?;
    let mut live = live.lock().expect("session poisoned");
    live.run.apply(event)?;
    Ok(Json(live.run.snapshot()).into_response())
}

#[derive(Debug, Deserialize)]
struct AttemptRequest {
    part_number: PartNumber,
    /// Client clock in ms since session start; server clock when absent.
    #[serde(default)]
    timestamp_ms: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AttemptResponse {
    pub result: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alert: Option<Alert>,
    pub progress: PracticeProgress,
}

async fn post_attempt(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<AttemptRequest>,
) -> ApiResult<Json<AttemptResponse>> {
    let live = state.session(&id)?;
    let mut live = live.lock().expect("session poisoned");
    let now = req.timestamp_ms.unwrap_or_else(|| live.now_ms());
    let outcome = live.run.attempt(&req.part_number, now)?;
    let progress = live.run.practice().expect("attempt succeeded").progress();
    let (result, alert) = match outcome {
        AttemptOutcome::Accepted => ("accepted", None),
        AttemptOutcome::Rejected { alert } => ("rejected", Some(alert)),
    };
    Ok(Json(AttemptResponse { result: result.into(), alert, progress }))
}

async fn get_metrics(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let live = state.session(&id)?;
    let live = live.lock().expect("session poisoned");
    let metrics = live
        .run
        .metrics()
        .map_err(|e| ApiError { status: StatusCode::CONFLICT, code: "malformed_log", message: e.to_string() })?;
    Ok(Json(metrics).into_response())
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    baseline: String,
    observed: String,
    expect: Option<String>,
}

fn dataset_path(dir: &FsPath, name: &str) -> ApiResult<PathBuf> {
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if !ok {
        return Err(ApiError::bad_request(format!("bad dataset name {name:?}")));
    }
    Ok(dir.join(format!("{name}.json")))
}

fn dataset_error(err: DatasetError) -> ApiError {
    match err {
        DatasetError::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => {
            ApiError::not_found("no such dataset".into())
        }
        other => ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, code: "dataset", message: other.to_string() },
    }
}

async fn get_effectiveness(State(state): State<Arc<AppState>>, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    let baseline = load_times(&dataset_path(&state.reports_dir, &q.baseline)?).map_err(dataset_error)?;
    let observed = load_times(&dataset_path(&state.reports_dir, &q.observed)?).map_err(dataset_error)?;
    let expected = match &q.expect {
        Some(name) => load_expected(&dataset_path(&state.reports_dir, name)?).map_err(dataset_error)?,
        None => Vec::new(),
    };
    let report = effectiveness_report(&baseline, &observed, &expected).map_err(|e| match e {
        MetricsError::NameMismatch(_) => ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, code: "name_mismatch", message: e.to_string() },
        other => ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, code: "bad_dataset", message: other.to_string() },
    })?;
    Ok(Json(report).into_response())
}
