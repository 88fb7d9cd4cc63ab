//! Persistent jobs: one directory per job holding its artifacts, an atomic
//! `state.json` and an append-only `events.jsonl`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyze::{analyze_with, set_selection, AnalyzeError, ScriptPlan, SelectionChange};
use crate::config::Resources;
use crate::generate::{generate_all, ChatBackend, GeneratedScript, JobReport};
use crate::ingest::{segment_sections, SourceDocument};
use crate::package::{generate_docs, render_package, write_package, PackageError, TemplateManifest};
use crate::spec::{append_training_pair, extract_spec, ExtractMode, GameSpec};
use crate::validate::{score_proxies, PlanReport};

const STATE_FILE: &str = "state.json";
const EVENTS_FILE: &str = "events.jsonl";
const DOCUMENT_FILE: &str = "document.json";
const SPEC_FILE: &str = "spec.json";
const PLAN_FILE: &str = "plan.json";
const GENERATION_FILE: &str = "generation.json";
const REPORTS_FILE: &str = "reports.json";
const PACKAGE_DIR: &str = "package";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Ingested,
    SpecReady,
    PlanReady,
    Generating,
    Validated,
    Packaged,
    Failed,
}

impl JobState {
    pub const ALL: [JobState; 7] = [
        JobState::Ingested,
        JobState::SpecReady,
        JobState::PlanReady,
        JobState::Generating,
        JobState::Validated,
        JobState::Packaged,
        JobState::Failed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JobState::Ingested => "ingested",
            JobState::SpecReady => "spec_ready",
            JobState::PlanReady => "plan_ready",
            JobState::Generating => "generating",
            JobState::Validated => "validated",
            JobState::Packaged => "packaged",
            JobState::Failed => "failed",
        }
    }
}

impl fmt::Display for JobState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Operations gated by job state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    ReadSpec,
    EditSpec,
    Plan,
    ReadPlan,
    Select,
    Generate,
    ReadScripts,
    ReadReports,
    Package,
    DownloadPackage,
    ExportPairs,
}

impl Action {
    pub const ALL: [Action; 11] = [
        Action::ReadSpec,
        Action::EditSpec,
        Action::Plan,
        Action::ReadPlan,
        Action::Select,
        Action::Generate,
        Action::ReadScripts,
        Action::ReadReports,
        Action::Package,
        Action::DownloadPackage,
        Action::ExportPairs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::ReadSpec => "read_spec",
            Action::EditSpec => "edit_spec",
            Action::Plan => "plan",
            Action::ReadPlan => "read_plan",
            Action::Select => "select",
            Action::Generate => "generate",
            Action::ReadScripts => "read_scripts",
            Action::ReadReports => "read_reports",
            Action::Package => "package",
            Action::DownloadPackage => "download_package",
            Action::ExportPairs => "export_pairs",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// States in which `action` is permitted, for jobs that have not failed.
fn permitted_states(action: Action) -> &'static [JobState] {
    use JobState::*;
    match action {
        Action::ReadSpec => &[SpecReady, PlanReady, Generating, Validated, Packaged],
        Action::EditSpec => &[SpecReady, PlanReady, Validated, Packaged],
        Action::Plan => &[SpecReady, PlanReady],
        Action::ReadPlan => &[PlanReady, Generating, Validated, Packaged],
        Action::Select => &[PlanReady],
        Action::Generate => &[PlanReady],
        Action::ReadScripts | Action::ReadReports | Action::Package | Action::ExportPairs => &[Validated, Packaged],
        Action::DownloadPackage => &[Packaged],
    }
}

/// The state-machine table. A failed job keeps read access to whatever the
/// state it failed from had, may always take an edited spec, and may retry
/// generation when it is resumable.
pub fn allowed(action: Action, state: JobState, failed_from: Option<JobState>, resumable: bool) -> bool {
    if state != JobState::Failed {
        return permitted_states(action).contains(&state);
    }
    match action {
        Action::EditSpec => true,
        Action::Generate => resumable,
        Action::ReadSpec | Action::ReadPlan => failed_from.is_some_and(|s| permitted_states(action).contains(&s)),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub state: JobState,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub state: JobState,
    pub history: Vec<Transition>,
    pub error: Option<String>,
    /// State the job was in when it failed.
    #[serde(default)]
    pub failed_from: Option<JobState>,
    #[serde(default)]
    pub resumable: bool,
    pub document_name: Option<String>,
    /// Artifact names currently present in the job directory.
    pub artifacts: Vec<String>,
    /// Backend label of the last generation run.
    pub backend: Option<String>,
    pub generation_runs: u32,
    /// Directory of the latest package.
    pub package_path: Option<PathBuf>,
}

impl Job {
    pub fn permits(&self, action: Action) -> bool {
        allowed(action, self.state, self.failed_from, self.resumable)
    }

    pub fn updated_at(&self) -> Option<DateTime<Utc>> {
        self.history.last().map(|t| t.at)
    }

    fn has(&self, artifact: &str) -> bool {
        self.artifacts.iter().any(|a| a == artifact)
    }
}

#[derive(Debug, Error)]
pub enum JobError {
    #[error("unknown job `{0}`")]
    NotFound(String),
    #[error("job `{job_id}` is {state}; {action} is not allowed")]
    WrongState {
        job_id: String,
        state: JobState,
        action: Action,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("generation incomplete: {} failed, {} skipped", report.failed.len(), report.skipped.len())]
    Generation { report: Box<JobReport> },
    #[error(transparent)]
    Package(#[from] PackageError),
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for JobError {
    fn from(e: std::io::Error) -> Self {
        JobError::Io(e.to_string())
    }
}

impl From<AnalyzeError> for JobError {
    fn from(e: AnalyzeError) -> Self {
        JobError::Invalid(e.to_string())
    }
}

#[derive(Serialize)]
struct Event<'a> {
    at: DateTime<Utc>,
    from: Option<JobState>,
    to: JobState,
    detail: &'a str,
}

/// Job directories under one root. Operations on a job are serialized by a
/// per-job lock; generation itself runs without holding it, so reads stay
/// available while a job is `generating`.
pub struct JobStore {
    root: PathBuf,
    jobs: Mutex<BTreeMap<String, Arc<Mutex<Job>>>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), JobError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifacts always serialize");
    bytes.push(b'\n');
    Ok(write_atomic(path, &bytes)?)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, JobError> {
    let bytes = fs::read(path).map_err(|e| JobError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| JobError::Io(format!("{}: {e}", path.display())))
}

fn valid_package_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 64
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl JobStore {
    /// Opens (creating if needed) the store at `root` and reloads every job.
    /// Jobs found in `generating` were interrupted; they become failed and
    /// resumable.
    pub fn open(root: &Path) -> Result<Self, JobError> {
        let jobs_dir = root.join("jobs");
        fs::create_dir_all(&jobs_dir)?;
        let store = JobStore {
            root: root.to_path_buf(),
            jobs: Mutex::new(BTreeMap::new()),
        };
        let mut loaded = BTreeMap::new();
        for entry in fs::read_dir(&jobs_dir)? {
            let dir = entry?.path();
            let state = dir.join(STATE_FILE);
            if !state.is_file() {
                continue;
            }
            let mut job: Job = match read_json(&state) {
                Ok(j) => j,
                Err(e) => {
                    tracing::warn!("skipping unreadable job at {}: {e}", dir.display());
                    continue;
                }
            };
            if job.state == JobState::Generating {
                tracing::warn!(job = %job.job_id, "job was interrupted during generation");
                store.fail(&mut job, "interrupted during generation", true)?;
            }
            loaded.insert(job.job_id.clone(), Arc::new(Mutex::new(job)));
        }
        *lock(&store.jobs) = loaded;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn job_dir(&self, job_id: &str) -> PathBuf {
        self.root.join("jobs").join(job_id)
    }

    fn handle(&self, job_id: &str) -> Result<Arc<Mutex<Job>>, JobError> {
        lock(&self.jobs)
            .get(job_id)
            .cloned()
            .ok_or_else(|| JobError::NotFound(job_id.to_string()))
    }

    fn persist(&self, job: &Job) -> Result<(), JobError> {
        write_json(&self.job_dir(&job.job_id).join(STATE_FILE), job)
    }

    fn transition(&self, job: &mut Job, to: JobState, detail: &str) -> Result<(), JobError> {
        let from = job.history.last().map(|t| t.state);
        let at = Utc::now();
        job.state = to;
        job.history.push(Transition { state: to, at });
        if to != JobState::Failed {
            job.error = None;
            job.failed_from = None;
            job.resumable = false;
        }
        let mut line = serde_json::to_string(&Event { at, from, to, detail }).expect("events serialize");
        line.push('\n');
        let mut events = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.job_dir(&job.job_id).join(EVENTS_FILE))?;
        events.write_all(line.as_bytes())?;
        self.persist(job)
    }

    fn fail(&self, job: &mut Job, error: &str, resumable: bool) -> Result<(), JobError> {
        let from = job.state;
        self.transition(job, JobState::Failed, error)?;
        job.error = Some(error.to_string());
        job.failed_from = Some(if from == JobState::Failed {
            job.failed_from.unwrap_or(from)
        } else {
            from
        });
        job.resumable = resumable;
        self.persist(job)
    }

    fn require(job: &Job, action: Action) -> Result<(), JobError> {
        if job.permits(action) {
            Ok(())
        } else {
            Err(JobError::WrongState {
                job_id: job.job_id.clone(),
                state: job.state,
                action,
            })
        }
    }

    fn set_artifact(&self, job: &mut Job, name: &str, present: bool) {
        job.artifacts.retain(|a| a != name);
        if present {
            job.artifacts.push(name.to_string());
            job.artifacts.sort();
        }
    }

    fn artifact<T: DeserializeOwned>(&self, job: &Job, name: &str) -> Result<T, JobError> {
        if !job.has(name) {
            return Err(JobError::Io(format!("job `{}` has no {name}", job.job_id)));
        }
        read_json(&self.job_dir(&job.job_id).join(name))
    }

    pub fn create(&self, doc: &SourceDocument) -> Result<Job, JobError> {
        let job_id = format!("job-{}", uuid::Uuid::new_v4().simple());
        fs::create_dir_all(self.job_dir(&job_id))?;
        write_json(&self.job_dir(&job_id).join(DOCUMENT_FILE), doc)?;
        let mut job = Job {
            job_id: job_id.clone(),
            state: JobState::Ingested,
            history: Vec::new(),
            error: None,
            failed_from: None,
            resumable: false,
            document_name: doc.name.clone(),
            artifacts: vec![DOCUMENT_FILE.to_string()],
            backend: None,
            generation_runs: 0,
            package_path: None,
        };
        self.transition(&mut job, JobState::Ingested, "document ingested")?;
        lock(&self.jobs).insert(job_id, Arc::new(Mutex::new(job.clone())));
        Ok(job)
    }

    pub fn get(&self, job_id: &str) -> Result<Job, JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h).clone();
        Ok(job)
    }

    pub fn list(&self) -> Vec<Job> {
        let handles: Vec<_> = lock(&self.jobs).values().cloned().collect();
        handles.iter().map(|h| lock(h).clone()).collect()
    }

    pub fn document(&self, job_id: &str) -> Result<SourceDocument, JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h);
        self.artifact(&job, DOCUMENT_FILE)
    }

    /// Extracts the GameSpec of a freshly ingested job. Extraction errors move
    /// the job to failed.
    pub fn extract(&self, job_id: &str, res: &Resources, backend: Option<&dyn ChatBackend>) -> Result<Job, JobError> {
        let h = self.handle(job_id)?;
        let mut job = lock(&h);
        if job.state != JobState::Ingested {
            return Err(JobError::WrongState {
                job_id: job.job_id.clone(),
                state: job.state,
                action: Action::EditSpec,
            });
        }
        let doc: SourceDocument = self.artifact(&job, DOCUMENT_FILE)?;
        let mode = match backend {
            Some(b) => ExtractMode::LlmAssisted(b),
            None => ExtractMode::Heuristic,
        };
        match extract_spec(&segment_sections(&doc), &res.lexicon, mode) {
            Ok(extraction) => {
                write_json(&self.job_dir(job_id).join(SPEC_FILE), &extraction.spec)?;
                self.set_artifact(&mut job, SPEC_FILE, true);
                let detail = extraction
                    .fallback_reason
                    .map_or("spec extracted".to_string(), |r| format!("heuristic fallback: {r}"));
                self.transition(&mut job, JobState::SpecReady, &detail)?;
            }
            Err(e) => self.fail(&mut job, &format!("extraction failed: {e}"), false)?,
        }
        Ok(job.clone())
    }

    pub fn spec(&self, job_id: &str) -> Result<GameSpec, JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h);
        Self::require(&job, Action::ReadSpec)?;
        self.artifact(&job, SPEC_FILE)
    }

    /// Replaces the GameSpec and resets the job to `spec_ready`, dropping the
    /// plan and everything derived from it.
    pub fn put_spec(&self, job_id: &str, spec: &GameSpec) -> Result<Job, JobError> {
        spec.check_invariants().map_err(|e| JobError::Invalid(e.to_string()))?;
        let h = self.handle(job_id)?;
        let mut job = lock(&h);
        Self::require(&job, Action::EditSpec)?;
        let dir = self.job_dir(job_id);
        write_json(&dir.join(SPEC_FILE), spec)?;
        self.set_artifact(&mut job, SPEC_FILE, true);
        for name in [PLAN_FILE, GENERATION_FILE, REPORTS_FILE] {
            if job.has(name) {
                let _ = fs::remove_file(dir.join(name));
                self.set_artifact(&mut job, name, false);
            }
        }
        job.package_path = None;
        self.transition(&mut job, JobState::SpecReady, "spec replaced")?;
        Ok(job.clone())
    }

    pub fn plan(&self, job_id: &str, res: &Resources) -> Result<ScriptPlan, JobError> {
        let h = self.handle(job_id)?;
        let mut job = lock(&h);
        Self::require(&job, Action::Plan)?;
        let spec: GameSpec = self.artifact(&job, SPEC_FILE)?;
        let plan = analyze_with(&spec, &res.rules);
        write_json(&self.job_dir(job_id).join(PLAN_FILE), &plan)?;
        self.set_artifact(&mut job, PLAN_FILE, true);
        self.transition(
            &mut job,
            JobState::PlanReady,
            &format!("{} scripts planned", plan.requirements.len()),
        )?;
        Ok(plan)
    }

    pub fn get_plan(&self, job_id: &str) -> Result<ScriptPlan, JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h);
        Self::require(&job, Action::ReadPlan)?;
        self.artifact(&job, PLAN_FILE)
    }

    pub fn select(&self, job_id: &str, script_id: &str, selected: bool) -> Result<SelectionChange, JobError> {
        let h = self.handle(job_id)?;
        let mut job = lock(&h);
        Self::require(&job, Action::Select)?;
        let plan: ScriptPlan = self.artifact(&job, PLAN_FILE)?;
        let change = set_selection(&plan, script_id, selected)?;
        write_json(&self.job_dir(job_id).join(PLAN_FILE), &change.plan)?;
        self.set_artifact(&mut job, PLAN_FILE, true);
        self.persist(&job)?;
        Ok(change)
    }

    /// Moves the job to `generating` and returns its inputs.
    pub fn begin_generation(&self, job_id: &str) -> Result<(GameSpec, ScriptPlan), JobError> {
        let h = self.handle(job_id)?;
        let mut job = lock(&h);
        Self::require(&job, Action::Generate)?;
        let spec: GameSpec = self.artifact(&job, SPEC_FILE)?;
        let plan: ScriptPlan = self.artifact(&job, PLAN_FILE)?;
        if plan.generation_order.is_empty() {
            return Err(JobError::Invalid("no scripts are selected".into()));
        }
        job.generation_runs += 1;
        let detail = format!("generation run {}", job.generation_runs);
        self.transition(&mut job, JobState::Generating, &detail)?;
        Ok((spec, plan))
    }

    /// Stores a generation result. Complete runs are validated and the job
    /// moves to `validated`; incomplete runs leave it failed and resumable.
    pub fn finish_generation(
        &self,
        job_id: &str,
        report: JobReport,
        backend: &str,
        res: &Resources,
    ) -> Result<Job, JobError> {
        let h = self.handle(job_id)?;
        let mut job = lock(&h);
        if job.state != JobState::Generating {
            return Err(JobError::WrongState {
                job_id: job.job_id.clone(),
                state: job.state,
                action: Action::Generate,
            });
        }
        let dir = self.job_dir(job_id);
        write_json(&dir.join(GENERATION_FILE), &report)?;
        self.set_artifact(&mut job, GENERATION_FILE, true);
        job.backend = Some(backend.to_string());
        if !report.is_complete() {
            let msg = format!(
                "generation incomplete: {} failed, {} skipped",
                report.failed.len(),
                report.skipped.len()
            );
            self.fail(&mut job, &msg, true)?;
            return Err(JobError::Generation { report: Box::new(report) });
        }
        let spec: GameSpec = self.artifact(&job, SPEC_FILE)?;
        let plan: ScriptPlan = self.artifact(&job, PLAN_FILE)?;
        let reports = score_proxies(&report.generated, &spec, &plan, &res.validate);
        write_json(&dir.join(REPORTS_FILE), &reports)?;
        self.set_artifact(&mut job, REPORTS_FILE, true);
        let detail = format!("{}/{} scripts structurally ok", reports.structural_ok, reports.scripts.len());
        self.transition(&mut job, JobState::Validated, &detail)?;
        Ok(job.clone())
    }

    /// Runs a whole generation synchronously.
    pub fn run_generation(
        &self,
        job_id: &str,
        backend: &dyn ChatBackend,
        concurrency: usize,
        res: &Resources,
    ) -> Result<Job, JobError> {
        let (spec, plan) = self.begin_generation(job_id)?;
        let report = generate_all(&spec, &plan, backend, concurrency);
        self.finish_generation(job_id, report, &backend.label(), res)
    }

    /// Latest generation result, complete or not.
    pub fn generation(&self, job_id: &str) -> Result<JobReport, JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h);
        self.artifact(&job, GENERATION_FILE)
    }

    pub fn scripts(&self, job_id: &str) -> Result<Vec<GeneratedScript>, JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h);
        Self::require(&job, Action::ReadScripts)?;
        Ok(self.artifact::<JobReport>(&job, GENERATION_FILE)?.generated)
    }

    pub fn reports(&self, job_id: &str) -> Result<PlanReport, JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h);
        Self::require(&job, Action::ReadReports)?;
        self.artifact(&job, REPORTS_FILE)
    }

    /// Writes the template package to `<job>/package/<out_name>`.
    pub fn package(&self, job_id: &str, out_name: &str) -> Result<TemplateManifest, JobError> {
        if !valid_package_name(out_name) {
            return Err(JobError::Invalid(format!("invalid package name `{out_name}`")));
        }
        let out = self.job_dir(job_id).join(PACKAGE_DIR).join(out_name);
        self.package_at(job_id, &out, false)
    }

    /// Writes the template package to an arbitrary directory.
    pub fn package_at(&self, job_id: &str, out: &Path, overwrite: bool) -> Result<TemplateManifest, JobError> {
        let h = self.handle(job_id)?;
        let mut job = lock(&h);
        Self::require(&job, Action::Package)?;
        let spec: GameSpec = self.artifact(&job, SPEC_FILE)?;
        let plan: ScriptPlan = self.artifact(&job, PLAN_FILE)?;
        let scripts = self.artifact::<JobReport>(&job, GENERATION_FILE)?.generated;
        let reports: PlanReport = self.artifact(&job, REPORTS_FILE)?;
        let docs = generate_docs(&plan, &scripts, &reports.scripts);
        let backend = job.backend.clone().unwrap_or_default();
        let contents = render_package(&spec.title, &plan, &scripts, &docs, &backend, Utc::now());
        let manifest = write_package(out, &contents, overwrite)?;
        job.package_path = Some(out.to_path_buf());
        self.transition(&mut job, JobState::Packaged, &format!("packaged {}", manifest.template_id))?;
        Ok(manifest)
    }

    /// Directory of the latest package.
    pub fn package_dir(&self, job_id: &str) -> Result<PathBuf, JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h);
        Self::require(&job, Action::DownloadPackage)?;
        job.package_path
            .clone()
            .ok_or_else(|| JobError::Io(format!("job `{job_id}` has no package")))
    }

    pub fn export_pairs(&self, job_id: &str, out: &Path) -> Result<(), JobError> {
        let h = self.handle(job_id)?;
        let job = lock(&h);
        Self::require(&job, Action::ExportPairs)?;
        let spec: GameSpec = self.artifact(&job, SPEC_FILE)?;
        let scripts = self.artifact::<JobReport>(&job, GENERATION_FILE)?.generated;
        append_training_pair(out, &spec, &scripts)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::MockBackend;
    use crate::ingest::{load_document, DocFormat, DocumentInput};

    const GDD: &str = "# Sky Hopper\n\nGenre: Platformer\n\n## Mechanics\n- Double jump\n- Wall slide\n\n## Characters\nPlayer: a small fox\nEnemies: slimes, bats\n\n## Levels\n- Forest\n- Caves\n";

    fn store() -> (tempfile::TempDir, JobStore) {
        let dir = tempfile::tempdir().unwrap();
        let store = JobStore::open(dir.path()).unwrap();
        (dir, store)
    }

    fn ingested(store: &JobStore) -> Job {
        let doc = load_document(DocumentInput::upload(GDD.as_bytes(), Some("sky.md".into())), DocFormat::Md, None)
            .unwrap();
        store.create(&doc).unwrap()
    }

    fn state_after(store: &JobStore, id: &str) -> JobState {
        store.get(id).unwrap().state
    }

    #[test]
    fn happy_path() {
        let (_d, store) = store();
        let res = Resources::default();
        let job = ingested(&store);
        assert_eq!(job.state, JobState::Ingested);
        let job = store.extract(&job.job_id, &res, None).unwrap();
        assert_eq!(job.state, JobState::SpecReady);
        assert_eq!(store.spec(&job.job_id).unwrap().title, "Sky Hopper");
        let plan = store.plan(&job.job_id, &res).unwrap();
        assert!(!plan.generation_order.is_empty());
        store
            .run_generation(&job.job_id, &MockBackend::new(), 2, &res)
            .unwrap();
        assert_eq!(state_after(&store, &job.job_id), JobState::Validated);
        assert_eq!(store.scripts(&job.job_id).unwrap().len(), plan.generation_order.len());
        let manifest = store.package(&job.job_id, "sky").unwrap();
        let dir = store.package_dir(&job.job_id).unwrap();
        assert!(crate::package::verify(&manifest, &dir).is_empty());
        assert!(matches!(
            store.package(&job.job_id, "sky"),
            Err(JobError::Package(PackageError::PackageExists(_)))
        ));
        let history: Vec<JobState> = store.get(&job.job_id).unwrap().history.iter().map(|t| t.state).collect();
        use JobState::*;
        assert_eq!(history, [Ingested, SpecReady, PlanReady, Generating, Validated, Packaged]);
        let events = fs::read_to_string(store.job_dir(&job.job_id).join(EVENTS_FILE)).unwrap();
        assert_eq!(events.lines().count(), 6);
    }

    #[test]
    fn out_of_order_is_rejected() {
        let (_d, store) = store();
        let res = Resources::default();
        let job = ingested(&store);
        let id = &job.job_id;
        assert!(matches!(store.begin_generation(id), Err(JobError::WrongState { .. })));
        assert!(matches!(store.plan(id, &res), Err(JobError::WrongState { .. })));
        assert!(matches!(store.package(id, "p"), Err(JobError::WrongState { .. })));
        store.extract(id, &res, None).unwrap();
        assert!(matches!(store.select(id, "game_manager", false), Err(JobError::WrongState { .. })));
        assert!(matches!(store.get(id), Ok(Job { state: JobState::SpecReady, .. })));
        assert!(matches!(store.get("job-nope"), Err(JobError::NotFound(_))));
    }

    #[test]
    fn spec_edit_resets() {
        let (_d, store) = store();
        let res = Resources::default();
        let id = ingested(&store).job_id;
        store.extract(&id, &res, None).unwrap();
        store.plan(&id, &res).unwrap();
        store.run_generation(&id, &MockBackend::new(), 1, &res).unwrap();
        let mut spec = store.spec(&id).unwrap();
        spec.title = "Sky Hopper II".into();
        let job = store.put_spec(&id, &spec).unwrap();
        assert_eq!(job.state, JobState::SpecReady);
        assert_eq!(job.artifacts, [DOCUMENT_FILE, SPEC_FILE]);
        assert!(matches!(store.get_plan(&id), Err(JobError::WrongState { .. })));
        spec.title = "  ".into();
        assert!(matches!(store.put_spec(&id, &spec), Err(JobError::Invalid(_))));
    }

    #[test]
    fn crash_during_generation_recovers_as_resumable() {
        let dir = tempfile::tempdir().unwrap();
        let res = Resources::default();
        let id = {
            let store = JobStore::open(dir.path()).unwrap();
            let id = ingested(&store).job_id;
            store.extract(&id, &res, None).unwrap();
            store.plan(&id, &res).unwrap();
            store.begin_generation(&id).unwrap();
            id
        };
        let store = JobStore::open(dir.path()).unwrap();
        let job = store.get(&id).unwrap();
        assert_eq!(job.state, JobState::Failed);
        assert!(job.resumable);
        assert_eq!(job.failed_from, Some(JobState::Generating));
        assert!(store.get_plan(&id).is_ok());
        store.run_generation(&id, &MockBackend::new(), 2, &res).unwrap();
        let job = store.get(&id).unwrap();
        assert_eq!(job.state, JobState::Validated);
        assert_eq!(job.generation_runs, 2);
        assert!(job.error.is_none());
    }

    #[test]
    fn failed_generation_keeps_report() {
        let (_d, store) = store();
        let res = Resources::default();
        let id = ingested(&store).job_id;
        store.extract(&id, &res, None).unwrap();
        store.plan(&id, &res).unwrap();
        let backend = MockBackend::new().failing(&["PlayerController"]);
        match store.run_generation(&id, &backend, 2, &res) {
            Err(JobError::Generation { report }) => {
                assert_eq!(report.failed.len(), 1);
                assert!(!report.skipped.is_empty());
            }
            other => panic!("{other:?}"),
        }
        let job = store.get(&id).unwrap();
        assert_eq!((job.state, job.resumable), (JobState::Failed, true));
        assert_eq!(store.generation(&id).unwrap().failed[0].class_name, "PlayerController");
        store.run_generation(&id, &MockBackend::new(), 2, &res).unwrap();
    }

    #[test]
    fn no_action_moves_backward() {
        let order = |s: JobState| JobState::ALL.iter().position(|x| *x == s).unwrap();
        let target = |a: Action| match a {
            Action::EditSpec => Some(JobState::SpecReady),
            Action::Plan => Some(JobState::PlanReady),
            Action::Generate => Some(JobState::Generating),
            Action::Package => Some(JobState::Packaged),
            _ => None,
        };
        for s in JobState::ALL.into_iter().filter(|s| *s != JobState::Failed) {
            for a in Action::ALL {
                if let (true, Some(t)) = (allowed(a, s, None, false), target(a)) {
                    assert!(a == Action::EditSpec || order(t) >= order(s), "{a} from {s}");
                }
            }
        }
    }
}
