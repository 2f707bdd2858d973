//! HTTP+JSON front end of the grading service.
//!
//! Grader-facing routes return only blinded views; arm labels leave the
//! server solely through `results`, which refuses open studies unless the
//! caller holds the reveal key.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use precise_core::error::GradingError;
use precise_core::grading::{GradingService, RubricKind, StudySpec};
use precise_core::simplify::read_pairs;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::commands::require_file;
use crate::{CliError, ServeArgs};

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
    kind: &'static str,
}

/// A failed request: status plus a `{error, kind}` body.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, kind: "bad_request", message: message.into() }
    }
}

impl From<GradingError> for ApiError {
    fn from(e: GradingError) -> Self {
        let (status, kind) = match &e {
            GradingError::EmptyPairs | GradingError::NoGraders | GradingError::DuplicateToken => {
                (StatusCode::BAD_REQUEST, "invalid_study")
            }
            GradingError::UnknownStudy(_) => (StatusCode::NOT_FOUND, "unknown_study"),
            GradingError::UnknownToken => (StatusCode::FORBIDDEN, "unknown_token"),
            GradingError::UnknownItem(_) => (StatusCode::NOT_FOUND, "unknown_item"),
            GradingError::ScoreOutOfRange(_) => (StatusCode::UNPROCESSABLE_ENTITY, "score_out_of_range"),
            GradingError::DuplicateScore { .. } => (StatusCode::CONFLICT, "duplicate_score"),
            GradingError::BlindingViolation(_) => (StatusCode::FORBIDDEN, "blinded"),
            GradingError::CorruptLog { .. } | GradingError::Io { .. } | GradingError::Stats(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        if status.is_server_error() {
            tracing::error!("{e}");
        }
        Self { status, kind, message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message, kind: self.kind })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn blocking<T, F>(svc: &Arc<GradingService>, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&GradingService) -> Result<T, GradingError> + Send + 'static,
{
    let svc = Arc::clone(svc);
    match tokio::task::spawn_blocking(move || f(&svc)).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, kind: "internal", message: e.to_string() }),
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateStudy {
    pub rubric: String,
    pub pairs_path: PathBuf,
    pub grader_tokens: Vec<String>,
    pub seed: u64,
    #[serde(default)]
    pub per_grader_order: bool,
}

#[derive(Debug, Serialize)]
struct Created {
    study_id: String,
}

async fn create_study(State(svc): State<Arc<GradingService>>, Json(req): Json<CreateStudy>) -> Result<Response, ApiError> {
    let rubric: RubricKind = req.rubric.parse().map_err(ApiError::bad_request)?;
    let pairs = read_pairs(&req.pairs_path).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let spec = StudySpec { pairs, rubric, grader_tokens: req.grader_tokens, seed: req.seed, per_grader_order: req.per_grader_order };
    let study_id = blocking(&svc, move |s| s.create_study(&spec)).await?;
    Ok((StatusCode::CREATED, Json(Created { study_id })).into_response())
}

async fn list_studies(State(svc): State<Arc<GradingService>>) -> Json<Vec<String>> {
    Json(svc.study_ids())
}

async fn study_info(State(svc): State<Arc<GradingService>>, Path(id): Path<String>) -> ApiResult<precise_core::grading::StudyInfo> {
    blocking(&svc, move |s| s.info(&id)).await.map(Json)
}

#[derive(Debug, Deserialize)]
struct TokenQuery {
    token: String,
}

async fn next_item(
    State(svc): State<Arc<GradingService>>,
    Path(id): Path<String>,
    Query(q): Query<TokenQuery>,
) -> ApiResult<precise_core::grading::NextItem> {
    blocking(&svc, move |s| s.next_item(&id, &q.token)).await.map(Json)
}

#[derive(Debug, Deserialize)]
struct SubmitScore {
    token: String,
    item_id: String,
    score: i64,
}

async fn submit_score(
    State(svc): State<Arc<GradingService>>,
    Path(id): Path<String>,
    Json(req): Json<SubmitScore>,
) -> ApiResult<precise_core::grading::Ack> {
    blocking(&svc, move |s| s.submit_score(&id, &req.token, &req.item_id, req.score)).await.map(Json)
}

async fn progress(State(svc): State<Arc<GradingService>>, Path(id): Path<String>) -> ApiResult<precise_core::grading::Progress> {
    blocking(&svc, move |s| s.progress(&id)).await.map(Json)
}

#[derive(Debug, Deserialize)]
struct RevealQuery {
    reveal: Option<String>,
}

async fn results(
    State(svc): State<Arc<GradingService>>,
    Path(id): Path<String>,
    Query(q): Query<RevealQuery>,
) -> ApiResult<precise_core::grading::StudyResults> {
    blocking(&svc, move |s| s.results(&id, q.reveal.as_deref())).await.map(Json)
}

/// The API routes, plus `static_dir` served at `/` when given.
pub fn router(svc: Arc<GradingService>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/studies", post(create_study).get(list_studies))
        .route("/api/studies/{id}", get(study_info))
        .route("/api/studies/{id}/next", get(next_item))
        .route("/api/studies/{id}/scores", post(submit_score))
        .route("/api/studies/{id}/progress", get(progress))
        .route("/api/studies/{id}/results", get(results))
        .with_state(svc);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn random_token() -> String {
    use rand::Rng;
    format!("{:016x}{:016x}", rand::thread_rng().gen::<u64>(), rand::thread_rng().gen::<u64>())
}

pub(crate) fn serve(a: ServeArgs) -> Result<(), CliError> {
    if let Some(p) = &a.pairs {
        require_file(p, "--pairs")?;
    }
    if let Some(d) = &a.static_dir {
        if !d.is_dir() {
            return Err(CliError::Usage(format!("--static {}: not a directory", d.display())));
        }
    }
    let mut svc = GradingService::open(&a.log).map_err(CliError::data)?;
    if let Some(key) = a.reveal_key.clone().filter(|k| !k.is_empty()) {
        svc = svc.with_reveal_key(key);
    }

    if let (Some(path), Some(rubric)) = (&a.pairs, a.rubric) {
        let (tokens, generated) = match (&a.tokens, a.graders) {
            (Some(t), _) => (t.clone(), false),
            (None, Some(n)) => ((0..n).map(|_| random_token()).collect(), true),
            (None, None) => unreachable!("clap requires one grader source"),
        };
        let pairs = read_pairs(path).map_err(CliError::data)?;
        let spec = StudySpec { pairs, rubric: rubric.into(), grader_tokens: tokens.clone(), seed: a.seed, per_grader_order: a.per_grader_order };
        let (study_id, created) = svc.resume_or_create_study(&spec).map_err(CliError::data)?;
        eprintln!("{} study {study_id}", if created { "created" } else { "resuming" });
        println!("study_id {study_id}");
        if generated {
            for (g, t) in tokens.iter().enumerate() {
                println!("G{} {t}", g + 1);
            }
        }
    }

    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("--host {} --port {}: {e}", a.host, a.port)))?;
    let app = router(Arc::new(svc), a.static_dir);
    let rt = tokio::runtime::Runtime::new().map_err(CliError::data)?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| CliError::Data(format!("bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(CliError::data)?;
        eprintln!("listening on http://{local}");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(CliError::data)
    })
}
