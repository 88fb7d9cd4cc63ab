//! Command-line interface. Results go to stdout; failures are a single JSON
//! object on stderr plus a nonzero exit code.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gddforge_core::analyze::snake_case;
use gddforge_core::config::{parse_backend_kind, Config, ConfigError, ExtractionMode, Resources};
use gddforge_core::eval::{aggregate, ingest_file, render_report, EvalError, EvaluationReport, ReportFormat};
use gddforge_core::generate::{BackendError, GeneratedScript};
use gddforge_core::ingest::{load_file, DocFormat, IngestError};
use gddforge_core::job::{JobError, JobState, JobStore};
use gddforge_core::package::{load_manifest, verify, PackageError, MANIFEST_FILE};
use gddforge_core::spec::validate_spec;
use gddforge_core::validate::{validate_script, PlanReport};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gddforge", version, about = "Game design documents to Unity script templates")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Job store directory (overrides `data_dir`).
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a design document into a new job and extract its spec.
    Ingest {
        file: PathBuf,
        /// txt, md, pdf or docx; inferred from the extension by default.
        #[arg(long)]
        format: Option<String>,
    },
    /// Print a job's spec, or replace it with `--set`.
    Spec {
        job: String,
        #[arg(long)]
        set: Option<PathBuf>,
    },
    /// Derive the script plan (or print it with `--show`).
    Plan {
        job: String,
        #[arg(long)]
        show: bool,
    },
    /// Select or deselect one script; dependencies cascade.
    Select { job: String, script: String, state: Toggle },
    /// Generate, validate and package a job's scripts.
    Generate {
        job: String,
        /// mock or http.
        #[arg(long)]
        backend: Option<String>,
        /// Package directory; defaults to the job's own package folder.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        overwrite: bool,
    },
    /// Check every .cs file under a directory.
    Validate { dir: PathBuf },
    /// Aggregate rubric scores into a report.
    Eval {
        scores: PathBuf,
        #[arg(long, default_value = "table_text")]
        format: String,
        /// A job's reports.json whose mean proxy scores are shown separately.
        #[arg(long)]
        proxies: Option<PathBuf>,
    },
    /// Append a job's spec and scripts to a JSONL training corpus.
    ExportPairs {
        job: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub code: String,
    pub message: String,
    pub detail: Option<Value>,
}

impl CliError {
    pub fn new(exit_code: i32, code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            exit_code,
            code: code.into(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut v = json!({ "error": { "code": self.code, "message": self.message, "exit_code": self.exit_code } });
        if let Some(d) = &self.detail {
            v["error"]["detail"] = d.clone();
        }
        v.to_string()
    }
}

impl From<JobError> for CliError {
    fn from(e: JobError) -> Self {
        let message = e.to_string();
        match e {
            JobError::NotFound(_) => CliError::new(EXIT_USAGE, "NotFound", message),
            JobError::WrongState { .. } => CliError::new(EXIT_USAGE, "WrongState", message),
            JobError::Invalid(_) => CliError::new(EXIT_VALIDATION, "ValidationError", message),
            JobError::Generation { report } => CliError {
                detail: Some(serde_json::to_value(&*report).expect("reports serialize")),
                ..CliError::new(EXIT_BACKEND, "GenerationFailed", message)
            },
            JobError::Package(PackageError::PackageExists(_)) => CliError::new(EXIT_IO, "PackageExists", message),
            JobError::Package(_) | JobError::Io(_) => CliError::new(EXIT_IO, "IoError", message),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Read { .. } => EXIT_IO,
            ConfigError::Invalid(_) => EXIT_USAGE,
        };
        CliError::new(code, "ConfigError", e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let exit = if matches!(e, EvalError::Io(_)) { EXIT_IO } else { EXIT_VALIDATION };
        CliError::new(exit, e.code(), e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let exit = match e {
            IngestError::Io(_) | IngestError::ConverterFailed(_) => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        CliError::new(exit, "IngestError", e.to_string())
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        let exit = if matches!(e, BackendError::Config(_)) { EXIT_USAGE } else { EXIT_BACKEND };
        CliError::new(exit, "BackendError", e.to_string())
    }
}

fn io_error(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::new(EXIT_IO, "IoError", format!("{context}: {e}"))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

struct Ctx {
    config: Config,
    resources: Resources,
}

impl Ctx {
    fn load(cli: &Cli) -> Result<Self, CliError> {
        let mut config = Config::load(cli.config.as_deref())?;
        if let Some(store) = &cli.store {
            config.data_dir = store.clone();
        }
        let resources = config.resources()?;
        Ok(Self { config, resources })
    }

    fn store(&self) -> Result<JobStore, CliError> {
        Ok(JobStore::open(&self.config.data_dir)?)
    }
}

/// Runs one command, writing its result to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Ctx::load(&cli)?;
    let text = match cli.command {
        Command::Ingest { file, format } => {
            let declared = format.as_deref().map(str::parse::<DocFormat>).transpose()?;
            let declared_or_path = match declared {
                Some(f) => f,
                None => DocFormat::from_path(&file)?,
            };
            let doc = load_file(&file, declared, ctx.config.converter(declared_or_path))?;
            let store = ctx.store()?;
            let job = store.create(&doc)?;
            let backend = match ctx.config.extraction {
                ExtractionMode::Heuristic => None,
                ExtractionMode::Llm => Some(ctx.config.backend.build()?),
            };
            let job = store.extract(&job.job_id, &ctx.resources, backend.as_deref())?;
            if job.state == JobState::Failed {
                return Err(CliError::new(
                    EXIT_VALIDATION,
                    "ExtractionFailed",
                    job.error.unwrap_or_default(),
                ));
            }
            pretty(&job)
        }
        Command::Spec { job, set } => {
            let store = ctx.store()?;
            match set {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| io_error(&path.display().to_string(), e))?;
                    let spec = validate_spec(&text)
                        .map_err(|e| CliError::new(EXIT_VALIDATION, "SchemaViolation", e.to_string()))?;
                    pretty(&store.put_spec(&job, &spec)?)
                }
                None => store.spec(&job)?.to_json_pretty(),
            }
        }
        Command::Plan { job, show } => {
            let store = ctx.store()?;
            if show {
                pretty(&store.get_plan(&job)?)
            } else {
                pretty(&store.plan(&job, &ctx.resources)?)
            }
        }
        Command::Select { job, script, state } => {
            let store = ctx.store()?;
            let change = store.select(&job, &script, matches!(state, Toggle::On))?;
            pretty(&json!({ "plan": change.plan, "cascaded": change.cascaded }))
        }
        Command::Generate {
            job,
            backend,
            out,
            overwrite,
        } => {
            let mut cfg = ctx.config.backend.clone();
            if let Some(kind) = backend {
                cfg.kind = parse_backend_kind(&kind)?;
            }
            let chat = cfg.build()?;
            let store = ctx.store()?;
            if store.get(&job)?.state == JobState::SpecReady {
                store.plan(&job, &ctx.resources)?;
            }
            store.run_generation(&job, chat.as_ref(), cfg.concurrency, &ctx.resources)?;
            let manifest = match out {
                Some(dir) => store.package_at(&job, &dir, overwrite)?,
                None => store.package(&job, "default")?,
            };
            pretty(&manifest)
        }
        Command::Validate { dir } => {
            let (report, failing) = validate_dir(&dir, &ctx.resources)?;
            writeln!(out, "{}", pretty(&report)).map_err(|e| io_error("stdout", e))?;
            if !failing.is_empty() {
                return Err(CliError {
                    detail: Some(json!({ "files": failing })),
                    ..CliError::new(
                        EXIT_VALIDATION,
                        "ValidationFailed",
                        format!("{} file(s) failed validation: {}", failing.len(), failing.join(", ")),
                    )
                });
            }
            return Ok(());
        }
        Command::Eval {
            scores,
            format,
            proxies,
        } => {
            let format: ReportFormat = format.parse().map_err(|e: String| CliError::new(EXIT_USAGE, "Usage", e))?;
            let records = ingest_file(&scores)?;
            let mut report: EvaluationReport = aggregate(&records)?;
            if let Some(path) = proxies {
                let text = fs::read_to_string(&path).map_err(|e| io_error(&path.display().to_string(), e))?;
                let plan_report: PlanReport = serde_json::from_str(&text)
                    .map_err(|e| CliError::new(EXIT_VALIDATION, "ParseError", format!("{}: {e}", path.display())))?;
                let label = path
                    .parent()
                    .and_then(|p| p.file_name())
                    .map_or("proxy".to_string(), |n| n.to_string_lossy().into_owned());
                report.attach_proxies(&label, &plan_report.mean_proxies);
            }
            render_report(&report, format).trim_end().to_string()
        }
        Command::ExportPairs { job, out: path } => {
            let store = ctx.store()?;
            store.export_pairs(&job, &path)?;
            pretty(&json!({ "job_id": job, "appended_to": path }))
        }
        Command::Serve { bind } => {
            let mut config = ctx.config;
            if let Some(b) = bind {
                config.bind = b;
            }
            crate::serve(config).map_err(|e| CliError::new(EXIT_IO, "ServeError", e))?;
            return Ok(());
        }
    };
    writeln!(out, "{text}").map_err(|e| io_error("stdout", e))
}

fn collect_cs(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_cs(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "cs") {
            out.push(path);
        }
    }
    Ok(())
}

/// Validates every `.cs` file under `dir` (and the manifest, when present).
/// Returns the report and the relative paths of files with error findings.
pub fn validate_dir(dir: &Path, res: &Resources) -> Result<(Value, Vec<String>), CliError> {
    let mut files = Vec::new();
    collect_cs(dir, &mut files).map_err(|e| io_error(&dir.display().to_string(), e))?;
    files.sort();
    let stems: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_string))
        .collect();
    let classes: BTreeSet<String> = stems.iter().cloned().collect();
    let mut entries = Vec::new();
    let mut failing = Vec::new();
    for (path, stem) in files.iter().zip(&stems) {
        let bytes = fs::read(path).map_err(|e| io_error(&path.display().to_string(), e))?;
        let source = String::from_utf8_lossy(&bytes);
        let script = GeneratedScript::new(&snake_case(stem), stem, &source, "file", "", 0, 1);
        let report = validate_script(&script, None, &BTreeSet::new(), &classes, &res.validate);
        let rel: Vec<String> = path
            .strip_prefix(dir)
            .unwrap_or(path)
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        let rel = rel.join("/");
        if !report.structural_ok {
            failing.push(rel.clone());
        }
        entries.push(json!({
            "path": rel,
            "class_name": report.class_name,
            "structural_ok": report.structural_ok,
            "findings": report.findings,
            "proxy_scores": report.proxy_scores,
        }));
    }
    let mut report = json!({ "files": entries });
    if dir.join(MANIFEST_FILE).is_file() {
        let manifest = load_manifest(dir).map_err(|e| CliError::new(EXIT_VALIDATION, "ManifestError", e.to_string()))?;
        let mismatches = verify(&manifest, dir);
        for m in &mismatches {
            failing.push(format!("{MANIFEST_FILE}: {m:?}"));
        }
        report["manifest"] = json!({ "template_id": manifest.template_id, "mismatches": mismatches });
    }
    report["failing"] = json!(failing);
    Ok((report, failing))
}
