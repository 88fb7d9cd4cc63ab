//! Service and CLI configuration: a TOML file plus environment overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyze::RuleTable;
use crate::generate::{BackendConfig, BackendKind};
use crate::ingest::{Converter, DocFormat};
use crate::spec::Lexicon;
use crate::validate::{CompilerHook, ProxyWeights, ValidateOptions};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {message}")]
    Read { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMode {
    #[default]
    Heuristic,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Root of the job store.
    pub data_dir: PathBuf,
    pub bind: String,
    /// Environment variable holding an optional bearer token for the API.
    pub auth_token_env: Option<String>,
    /// Directory of static web assets served under `/ui`.
    pub static_dir: Option<PathBuf>,
    pub extraction: ExtractionMode,
    pub lexicon: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub proxy_weights: Option<PathBuf>,
    /// Keyed by format name (`pdf`, `docx`).
    pub converters: BTreeMap<String, Converter>,
    pub compiler: Option<CompilerHook>,
    pub backend: BackendConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("gddforge-data"),
            bind: "127.0.0.1:8080".to_string(),
            auth_token_env: None,
            static_dir: None,
            extraction: ExtractionMode::Heuristic,
            lexicon: None,
            rules: None,
            proxy_weights: None,
            converters: BTreeMap::new(),
            compiler: None,
            backend: BackendConfig::default(),
        }
    }
}

/// Environment variables read by [`Config::apply_env`].
pub const ENV_KEYS: &[&str] = &[
    "GDDFORGE_DATA_DIR",
    "GDDFORGE_BIND",
    "GDDFORGE_EXTRACTION",
    "GDDFORGE_BACKEND",
    "GDDFORGE_BASE_URL",
    "GDDFORGE_MODEL",
    "GDDFORGE_API_KEY_ENV",
    "GDDFORGE_CONCURRENCY",
];

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Loads `path` if given (defaults otherwise) and applies the process
    /// environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = get("GDDFORGE_DATA_DIR") {
            self.data_dir = PathBuf::from(v);
        }
        if let Some(v) = get("GDDFORGE_BIND") {
            self.bind = v;
        }
        if let Some(v) = get("GDDFORGE_EXTRACTION") {
            self.extraction = match v.as_str() {
                "heuristic" => ExtractionMode::Heuristic,
                "llm" => ExtractionMode::Llm,
                _ => return Err(ConfigError::Invalid(format!("GDDFORGE_EXTRACTION=`{v}`"))),
            };
        }
        if let Some(v) = get("GDDFORGE_BACKEND") {
            self.backend.kind = parse_backend_kind(&v)?;
        }
        if let Some(v) = get("GDDFORGE_BASE_URL") {
            self.backend.base_url = Some(v);
        }
        if let Some(v) = get("GDDFORGE_MODEL") {
            self.backend.model = v;
        }
        if let Some(v) = get("GDDFORGE_API_KEY_ENV") {
            self.backend.api_key_env = Some(v);
        }
        if let Some(v) = get("GDDFORGE_CONCURRENCY") {
            self.backend.concurrency = v
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("GDDFORGE_CONCURRENCY=`{v}`")))?;
        }
        Ok(())
    }

    pub fn converter(&self, format: DocFormat) -> Option<&Converter> {
        self.converters.get(format.as_str())
    }

    /// Loads the lexicon, rule table and proxy weights named by the config,
    /// falling back to the built-in ones.
    pub fn resources(&self) -> Result<Resources, ConfigError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|e| ConfigError::Read {
                path: p.display().to_string(),
                message: e.to_string(),
            })
        };
        let lexicon = match &self.lexicon {
            Some(p) => Lexicon::from_toml(&read(p)?).map_err(|e| ConfigError::Invalid(e.to_string()))?,
            None => Lexicon::default(),
        };
        let rules = match &self.rules {
            Some(p) => RuleTable::from_toml(&read(p)?).map_err(|e| ConfigError::Invalid(e.to_string()))?,
            None => RuleTable::builtin(),
        };
        let weights = match &self.proxy_weights {
            Some(p) => ProxyWeights::from_toml(&read(p)?).map_err(|e| ConfigError::Invalid(e.to_string()))?,
            None => ProxyWeights::builtin(),
        };
        self.backend
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Resources {
            lexicon,
            rules,
            validate: ValidateOptions {
                weights,
                compiler: self.compiler.clone(),
            },
        })
    }
}

pub fn parse_backend_kind(s: &str) -> Result<BackendKind, ConfigError> {
    match s {
        "mock" => Ok(BackendKind::Mock),
        "http" | "http_chat" => Ok(BackendKind::HttpChat),
        _ => Err(ConfigError::Invalid(format!("unknown backend `{s}`"))),
    }
}

/// Loaded data files shared by all pipeline stages.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub lexicon: Lexicon,
    pub rules: RuleTable,
    pub validate: ValidateOptions,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_with_env_overrides() {
        let mut cfg = Config::from_toml(
            r#"
data_dir = "/var/lib/gddforge"
extraction = "llm"

[converters.pdf]
command = "pdftotext"
args = ["-layout"]

[backend]
kind = "http_chat"
base_url = "http://localhost:9000/v1"
concurrency = 4
"#,
        )
        .unwrap();
        assert_eq!(cfg.extraction, ExtractionMode::Llm);
        assert_eq!(cfg.converter(DocFormat::Pdf).unwrap().args, ["-layout"]);
        assert!(cfg.converter(DocFormat::Docx).is_none());
        assert_eq!(cfg.backend.concurrency, 4);
        assert_eq!(cfg.backend.max_retries, 3);

        let env: BTreeMap<&str, &str> = [("GDDFORGE_BACKEND", "mock"), ("GDDFORGE_CONCURRENCY", "1")].into();
        cfg.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.backend.kind, BackendKind::Mock);
        assert_eq!(cfg.backend.concurrency, 1);
        assert_eq!(cfg.data_dir, PathBuf::from("/var/lib/gddforge"));
    }

    #[test]
    fn rejects_unknown_keys_and_values() {
        assert!(Config::from_toml("dta_dir = \"x\"").is_err());
        let mut cfg = Config::default();
        assert!(cfg
            .apply_env(|k| (k == "GDDFORGE_BACKEND").then(|| "carrier-pigeon".to_string()))
            .is_err());
    }

    #[test]
    fn default_resources_load() {
        let res = Config::default().resources().unwrap();
        assert!(res.validate.compiler.is_none());
    }
}
