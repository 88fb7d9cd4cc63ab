//! HTTP service over the job store.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::{Body, Bytes};
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

use gddforge_core::config::{Config, ExtractionMode, Resources};
use gddforge_core::eval::{aggregate, ingest_scores, render_report, EvalError, EvaluationReport, ReportFormat};
use gddforge_core::generate::{generate_all, BackendConfig, ChatBackend};
use gddforge_core::ingest::{load_document, DocFormat, DocumentInput, IngestError};
use gddforge_core::job::{Job, JobError, JobStore};
use gddforge_core::package::PackageError;
use gddforge_core::spec::{validate_value, GAMESPEC_SCHEMA};

use crate::archive::zip_dir;

const UPLOAD_LIMIT: usize = 16 * 1024 * 1024;

pub struct AppState {
    pub store: JobStore,
    pub config: Config,
    pub resources: Resources,
    pub token: Option<String>,
    pub eval: Mutex<Option<EvaluationReport>>,
}

impl AppState {
    pub fn new(config: Config) -> Result<Self, String> {
        let resources = config.resources().map_err(|e| e.to_string())?;
        let store = JobStore::open(&config.data_dir).map_err(|e| e.to_string())?;
        let token = config.auth_token_env.as_deref().and_then(|k| std::env::var(k).ok());
        Ok(Self {
            store,
            config,
            resources,
            token,
            eval: Mutex::new(None),
        })
    }
}

type Shared = Arc<AppState>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    detail: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            detail: None,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "ValidationError", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": { "code": self.code, "message": self.message } });
        if let Some(d) = self.detail {
            body["error"]["detail"] = d;
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<JobError> for ApiError {
    fn from(e: JobError) -> Self {
        let message = e.to_string();
        match e {
            JobError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "NotFound", message),
            JobError::WrongState { state, action, .. } => ApiError {
                detail: Some(json!({ "state": state, "action": action })),
                ..ApiError::new(StatusCode::CONFLICT, "WrongState", message)
            },
            JobError::Invalid(_) => ApiError::bad_request(message),
            JobError::Generation { report } => ApiError {
                detail: Some(serde_json::to_value(&*report).expect("reports serialize")),
                ..ApiError::new(StatusCode::BAD_GATEWAY, "GenerationFailed", message)
            },
            JobError::Package(PackageError::PackageExists(_)) => {
                ApiError::new(StatusCode::CONFLICT, "PackageExists", message)
            }
            JobError::Package(_) | JobError::Io(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "IoError", message)
            }
        }
    }
}

impl From<EvalError> for ApiError {
    fn from(e: EvalError) -> Self {
        let code = e.code();
        let message = e.to_string();
        let mut err = ApiError::bad_request(message);
        err.code = code;
        err
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs blocking store work off the async runtime.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
}

pub fn router(state: Shared) -> Router {
    let api = Router::new()
        .route("/jobs", post(create_job).get(list_jobs))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/spec", get(get_spec).put(put_spec))
        .route("/jobs/{id}/plan", post(run_plan).get(get_plan))
        .route("/jobs/{id}/plan/selection", patch(patch_selection))
        .route("/jobs/{id}/generate", post(generate))
        .route("/jobs/{id}/generation", get(get_generation))
        .route("/jobs/{id}/scripts", get(list_scripts))
        .route("/jobs/{id}/scripts/{sid}", get(get_script))
        .route("/jobs/{id}/reports", get(get_reports))
        .route("/jobs/{id}/package", post(make_package).get(download_package))
        .route("/eval/scores", post(post_scores))
        .route("/eval/report", get(get_report))
        .route("/schema/gamespec", get(schema))
        .route("/ui/{*path}", get(static_file))
        .layer(middleware::from_fn_with_state(state.clone(), auth));
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .merge(api)
        .layer(DefaultBodyLimit::max(UPLOAD_LIMIT))
        .with_state(state)
}

async fn auth(State(state): State<Shared>, headers: HeaderMap, req: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let given = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given != Some(token.as_str()) {
            return ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", "missing or invalid bearer token")
                .into_response();
        }
    }
    next.run(req).await
}

fn job_view(job: &Job) -> Value {
    let id = &job.job_id;
    let mut links = serde_json::Map::new();
    let mut link = |name: &str, path: String, ok: bool| {
        if ok {
            links.insert(name.to_string(), Value::String(path));
        }
    };
    use gddforge_core::job::Action;
    link("spec", format!("/jobs/{id}/spec"), job.permits(Action::ReadSpec));
    link("plan", format!("/jobs/{id}/plan"), job.permits(Action::ReadPlan));
    link("generation", format!("/jobs/{id}/generation"), job.artifacts.iter().any(|a| a == "generation.json"));
    link("scripts", format!("/jobs/{id}/scripts"), job.permits(Action::ReadScripts));
    link("reports", format!("/jobs/{id}/reports"), job.permits(Action::ReadReports));
    link("package", format!("/jobs/{id}/package"), job.permits(Action::DownloadPackage));
    let mut v = serde_json::to_value(job).expect("jobs serialize");
    v["links"] = Value::Object(links);
    v
}

#[derive(Deserialize, Default)]
struct CreateQuery {
    #[serde(default)]
    wait: bool,
}

fn extraction_backend(state: &AppState) -> ApiResult<Option<Box<dyn ChatBackend>>> {
    match state.config.extraction {
        ExtractionMode::Heuristic => Ok(None),
        ExtractionMode::Llm => state
            .config
            .backend
            .build()
            .map(Some)
            .map_err(|e| ApiError::bad_request(e.to_string())),
    }
}

async fn create_job(
    State(state): State<Shared>,
    Query(q): Query<CreateQuery>,
    mut multipart: Multipart,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let mut document: Option<(Vec<u8>, Option<String>)> = None;
    let mut format: Option<String> = None;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| ApiError::bad_request(e.to_string()))?
    {
        match field.name() {
            Some("document") => {
                let name = field.file_name().map(str::to_string);
                let bytes = field.bytes().await.map_err(|e| ApiError::bad_request(e.to_string()))?;
                document = Some((bytes.to_vec(), name));
            }
            Some("format") => {
                format = Some(field.text().await.map_err(|e| ApiError::bad_request(e.to_string()))?);
            }
            _ => {}
        }
    }
    let (bytes, name) = document.ok_or_else(|| ApiError::bad_request("multipart field `document` is required"))?;
    let format = match (format.as_deref().map(str::trim), &name) {
        (Some(f), _) if !f.is_empty() => f.parse::<DocFormat>().map_err(|e: IngestError| ApiError::bad_request(e.to_string()))?,
        (_, Some(n)) => DocFormat::from_path(std::path::Path::new(n)).map_err(|e| ApiError::bad_request(e.to_string()))?,
        _ => return Err(ApiError::bad_request("document format is required")),
    };

    let st = state.clone();
    let job = blocking(move || {
        let doc = load_document(
            DocumentInput::upload(&bytes, name),
            format,
            st.config.converter(format),
        )
        .map_err(|e| match e {
            IngestError::Io(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "IoError", e.to_string()),
            _ => ApiError::bad_request(e.to_string()),
        })?;
        Ok(st.store.create(&doc)?)
    })
    .await?;

    let id = job.job_id.clone();
    let st = state.clone();
    let extract = move || -> ApiResult<Job> {
        let backend = extraction_backend(&st)?;
        Ok(st.store.extract(&id, &st.resources, backend.as_deref())?)
    };
    if q.wait {
        let job = blocking(extract).await?;
        return Ok((StatusCode::CREATED, Json(job_view(&job))));
    }
    tokio::task::spawn_blocking(move || {
        if let Err(e) = extract() {
            tracing::error!("extraction failed: {}", e.message);
        }
    });
    Ok((StatusCode::CREATED, Json(job_view(&job))))
}

async fn list_jobs(State(state): State<Shared>) -> Json<Value> {
    Json(Value::Array(state.store.list().iter().map(job_view).collect()))
}

async fn get_job(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(job_view(&state.store.get(&id)?)))
}

async fn get_spec(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let spec = state.store.spec(&id)?;
    Ok(Json(serde_json::to_value(spec).expect("specs serialize")))
}

async fn put_spec(State(state): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let value: Value = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let spec = validate_value(&value).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let job = blocking(move || Ok(state.store.put_spec(&id, &spec)?)).await?;
    Ok(Json(job_view(&job)))
}

async fn run_plan(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let plan = blocking(move || Ok(state.store.plan(&id, &state.resources)?)).await?;
    Ok(Json(serde_json::to_value(plan).expect("plans serialize")))
}

async fn get_plan(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(serde_json::to_value(state.store.get_plan(&id)?).expect("plans serialize")))
}

#[derive(Deserialize)]
struct SelectionBody {
    script_id: String,
    selected: bool,
}

async fn patch_selection(State(state): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let b: SelectionBody = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let change = blocking(move || Ok(state.store.select(&id, &b.script_id, b.selected)?)).await?;
    Ok(Json(json!({ "plan": change.plan, "cascaded": change.cascaded })))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GenerateBody {
    /// Partial backend configuration merged over the service's.
    #[serde(default)]
    backend: Option<Value>,
    #[serde(default)]
    wait: bool,
}

fn merge(base: &mut Value, over: &Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o.clone(),
    }
}

fn backend_config(base: &BackendConfig, over: Option<&Value>) -> ApiResult<BackendConfig> {
    let Some(over) = over else {
        return Ok(base.clone());
    };
    let mut v = serde_json::to_value(base).expect("configs serialize");
    merge(&mut v, over);
    serde_json::from_value(v).map_err(|e| ApiError::bad_request(format!("backend: {e}")))
}

async fn generate(State(state): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: GenerateBody = if body.iter().all(u8::is_ascii_whitespace) {
        GenerateBody::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    let cfg = backend_config(&state.config.backend, req.backend.as_ref())?;
    let backend = cfg.build().map_err(|e| ApiError::bad_request(e.to_string()))?;
    let (spec, plan) = {
        let (st, id) = (state.clone(), id.clone());
        blocking(move || Ok(st.store.begin_generation(&id)?)).await?
    };
    let run = move || -> ApiResult<Job> {
        let report = generate_all(&spec, &plan, backend.as_ref(), cfg.concurrency);
        Ok(state
            .store
            .finish_generation(&id, report, &backend.label(), &state.resources)?)
    };
    if req.wait {
        let job = blocking(run).await?;
        return Ok((StatusCode::OK, Json(job_view(&job))).into_response());
    }
    let handle = tokio::task::spawn_blocking(run);
    tokio::spawn(async move {
        match handle.await {
            Ok(Err(e)) => tracing::warn!("generation finished with error: {}", e.message),
            Err(e) => tracing::error!("generation task panicked: {e}"),
            Ok(Ok(_)) => {}
        }
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "status": "generating" }))).into_response())
}

async fn get_generation(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    state.store.get(&id)?;
    let report = state
        .store
        .generation(&id)
        .map_err(|_| ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no generation run yet"))?;
    Ok(Json(serde_json::to_value(report).expect("reports serialize")))
}

async fn list_scripts(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let scripts = state.store.scripts(&id)?;
    let list: Vec<Value> = scripts
        .iter()
        .map(|s| {
            json!({
                "script_id": s.script_id,
                "class_name": s.class_name,
                "file_name": s.file_name,
                "backend": s.backend,
                "attempt": s.attempt,
                "warnings": s.warnings,
            })
        })
        .collect();
    Ok(Json(Value::Array(list)))
}

async fn get_script(State(state): State<Shared>, Path((id, sid)): Path<(String, String)>) -> ApiResult<Response> {
    let scripts = state.store.scripts(&id)?;
    let script = scripts
        .into_iter()
        .find(|s| s.script_id == sid)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "NotFound", format!("unknown script `{sid}`")))?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], script.source).into_response())
}

async fn get_reports(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(serde_json::to_value(state.store.reports(&id)?).expect("reports serialize")))
}

#[derive(Deserialize)]
struct PackageBody {
    out_name: String,
}

async fn make_package(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let b: PackageBody = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let manifest = blocking(move || Ok(state.store.package(&id, &b.out_name)?)).await?;
    Ok((StatusCode::CREATED, Json(serde_json::to_value(manifest).expect("manifests serialize"))))
}

async fn download_package(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let dir = state.store.package_dir(&id)?;
    let name = dir.file_name().map_or("package".to_string(), |n| n.to_string_lossy().into_owned());
    let bytes = blocking(move || {
        zip_dir(&dir).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "IoError", e.to_string()))
    })
    .await?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/zip".to_string()),
            (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{name}.zip\"")),
        ],
        Body::from(bytes),
    )
        .into_response())
}

async fn post_scores(State(state): State<Shared>, body: Bytes) -> ApiResult<Json<Value>> {
    let text = std::str::from_utf8(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let records = ingest_scores(text)?;
    let report = aggregate(&records)?;
    let value = serde_json::to_value(&report).expect("reports serialize");
    *state.eval.lock().unwrap_or_else(|p| p.into_inner()) = Some(report);
    Ok(Json(value))
}

#[derive(Deserialize)]
struct ReportQuery {
    format: Option<String>,
}

async fn get_report(State(state): State<Shared>, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    let format: ReportFormat = q
        .format
        .as_deref()
        .unwrap_or("json")
        .parse()
        .map_err(ApiError::bad_request)?;
    let report = state
        .eval
        .lock()
        .unwrap_or_else(|p| p.into_inner())
        .clone()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no scores uploaded yet"))?;
    let content_type = match format {
        ReportFormat::Json => "application/json",
        ReportFormat::Csv | ReportFormat::RadarCsv => "text/csv; charset=utf-8",
        ReportFormat::TableText => "text/plain; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], render_report(&report, format)).into_response())
}

async fn schema() -> Response {
    ([(header::CONTENT_TYPE, "application/schema+json")], GAMESPEC_SCHEMA).into_response()
}

async fn static_file(State(state): State<Shared>, Path(path): Path<String>) -> ApiResult<Response> {
    let not_found = || ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such file");
    let root: PathBuf = state.config.static_dir.clone().ok_or_else(not_found)?;
    if path.split('/').any(|p| p == ".." || p.is_empty()) {
        return Err(not_found());
    }
    let file = path.split('/').fold(root, |p, s| p.join(s));
    let bytes = tokio::fs::read(&file).await.map_err(|_| not_found())?;
    let mime = match file.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}
