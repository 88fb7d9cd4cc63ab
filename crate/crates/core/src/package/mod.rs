//! Script documentation and the on-disk template package.

mod docs;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyze::{ScriptCategory, ScriptPlan};
use crate::digest::sha256_hex;
use crate::generate::GeneratedScript;

pub use docs::{generate_docs, render_markdown, render_setup_guide, script_path, Customization, ScriptDoc};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SETUP_GUIDE_FILE: &str = "Docs/SETUP_GUIDE.md";
pub const TOOL_VERSION: &str = concat!("gddforge ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum PackageError {
    #[error("package already exists at {0}")]
    PackageExists(PathBuf),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("manifest is not valid JSON: {0}")]
    Manifest(#[from] serde_json::Error),
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> PackageError {
    let context = context.into();
    move |source| PackageError::Io { context, source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestScript {
    pub file_name: String,
    /// Relative to the package root, `/`-separated.
    pub path: String,
    pub content_digest: String,
    pub category: ScriptCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestDoc {
    pub path: String,
    pub content_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateManifest {
    pub template_id: String,
    pub created_at: DateTime<Utc>,
    pub spec_digest: String,
    pub plan_digest: String,
    pub scripts: Vec<ManifestScript>,
    pub docs: Vec<ManifestDoc>,
    pub backend: String,
    pub tool_version: String,
    /// Covers every file digest plus the GameSpec, plan, backend and tool
    /// version. `created_at` is excluded so reruns compare equal.
    pub package_digest: String,
}

impl TemplateManifest {
    fn compute_digest(&self) -> String {
        let mut text = format!(
            "spec {}\nplan {}\nbackend {}\ntool {}\n",
            self.spec_digest, self.plan_digest, self.backend, self.tool_version
        );
        let mut files: Vec<(&str, &str)> = self
            .scripts
            .iter()
            .map(|s| (s.path.as_str(), s.content_digest.as_str()))
            .chain(self.docs.iter().map(|d| (d.path.as_str(), d.content_digest.as_str())))
            .collect();
        files.sort();
        for (path, digest) in files {
            text.push_str(&format!("{path} {digest}\n"));
        }
        sha256_hex(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest always serializes");
        s.push('\n');
        s
    }

    /// Every listed path, scripts first.
    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.scripts
            .iter()
            .map(|s| s.path.as_str())
            .chain(self.docs.iter().map(|d| d.path.as_str()))
    }
}

/// A fully rendered package, ready to be written or zipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackageContents {
    /// Relative path to file bytes, manifest excluded.
    pub files: BTreeMap<String, Vec<u8>>,
    pub manifest: TemplateManifest,
}

impl PackageContents {
    /// All files including `manifest.json`, in path order.
    pub fn all_files(&self) -> Vec<(String, Vec<u8>)> {
        let mut out: Vec<(String, Vec<u8>)> = self.files.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        out.push((MANIFEST_FILE.to_string(), self.manifest.to_json().into_bytes()));
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// Lays out scripts, per-script docs, the setup guide and the manifest.
pub fn render_package(
    title: &str,
    plan: &ScriptPlan,
    scripts: &[GeneratedScript],
    docs: &[ScriptDoc],
    backend: &str,
    created_at: DateTime<Utc>,
) -> PackageContents {
    let mut files = BTreeMap::new();
    let mut manifest_scripts = Vec::new();
    let mut manifest_docs = Vec::new();

    let ordered = plan
        .generation_order
        .iter()
        .filter_map(|id| scripts.iter().find(|s| &s.script_id == id))
        .chain(scripts.iter().filter(|s| !plan.generation_order.contains(&s.script_id)));
    for script in ordered {
        let category = plan
            .requirement(&script.script_id)
            .map_or(ScriptCategory::GameManagement, |r| r.category);
        let path = script_path(category, &script.file_name);
        let bytes = script.source.clone().into_bytes();
        manifest_scripts.push(ManifestScript {
            file_name: script.file_name.clone(),
            path: path.clone(),
            content_digest: sha256_hex(&bytes),
            category,
        });
        files.insert(path, bytes);

        if let Some(doc) = docs.iter().find(|d| d.script_id == script.script_id) {
            let path = format!("Docs/{}.md", doc.class_name);
            let bytes = render_markdown(doc).into_bytes();
            manifest_docs.push(ManifestDoc {
                path: path.clone(),
                content_digest: sha256_hex(&bytes),
            });
            files.insert(path, bytes);
        }
    }
    let guide = render_setup_guide(title, plan, docs).into_bytes();
    manifest_docs.push(ManifestDoc {
        path: SETUP_GUIDE_FILE.to_string(),
        content_digest: sha256_hex(&guide),
    });
    files.insert(SETUP_GUIDE_FILE.to_string(), guide);

    let mut manifest = TemplateManifest {
        template_id: String::new(),
        created_at,
        spec_digest: plan.spec_digest.clone(),
        plan_digest: plan.digest(),
        scripts: manifest_scripts,
        docs: manifest_docs,
        backend: backend.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        package_digest: String::new(),
    };
    manifest.package_digest = manifest.compute_digest();
    manifest.template_id = format!("tpl-{}", &manifest.package_digest[..12]);
    PackageContents { files, manifest }
}

fn native(root: &Path, rel: &str) -> PathBuf {
    rel.split('/').fold(root.to_path_buf(), |p, part| p.join(part))
}

/// Writes the package atomically: everything goes to a sibling staging
/// directory which is then renamed onto `out_dir`.
pub fn write_package(out_dir: &Path, contents: &PackageContents, overwrite: bool) -> Result<TemplateManifest, PackageError> {
    write_package_inner(out_dir, contents, overwrite, &|| Ok(()))
}

pub(crate) fn write_package_inner(
    out_dir: &Path,
    contents: &PackageContents,
    overwrite: bool,
    before_rename: &dyn Fn() -> io::Result<()>,
) -> Result<TemplateManifest, PackageError> {
    if out_dir.exists() && !overwrite {
        return Err(PackageError::PackageExists(out_dir.to_path_buf()));
    }
    let parent = match out_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(io_err(format!("creating {}", parent.display())))?;
    let staging = tempfile::Builder::new()
        .prefix(".gddforge-staging-")
        .tempdir_in(&parent)
        .map_err(io_err("creating staging directory"))?;

    for (rel, bytes) in contents.all_files() {
        let path = native(staging.path(), &rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))?;
        }
        fs::write(&path, bytes).map_err(io_err(format!("writing {rel}")))?;
    }
    before_rename().map_err(io_err("before rename"))?;

    if out_dir.exists() {
        let backup = tempfile::Builder::new()
            .prefix(".gddforge-old-")
            .tempdir_in(&parent)
            .map_err(io_err("creating backup directory"))?;
        let backup_path = backup.path().join("previous");
        fs::rename(out_dir, &backup_path).map_err(io_err(format!("moving aside {}", out_dir.display())))?;
        if let Err(e) = fs::rename(staging.path(), out_dir) {
            let _ = fs::rename(&backup_path, out_dir);
            return Err(io_err(format!("renaming onto {}", out_dir.display()))(e));
        }
        // `backup` removes the previous version when dropped.
    } else {
        fs::rename(staging.path(), out_dir).map_err(io_err(format!("renaming onto {}", out_dir.display())))?;
    }
    let _ = staging.keep();
    Ok(contents.manifest.clone())
}

pub fn load_manifest(dir: &Path) -> Result<TemplateManifest, PackageError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(format!("reading {}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Mismatch {
    Missing(String),
    Digest { path: String, expected: String, actual: String },
    PackageDigest { expected: String, actual: String },
}

/// Checks that every listed file exists with the listed digest. An empty
/// result means the package is coherent.
pub fn verify(manifest: &TemplateManifest, dir: &Path) -> Vec<Mismatch> {
    let mut out = Vec::new();
    let listed = manifest
        .scripts
        .iter()
        .map(|s| (&s.path, &s.content_digest))
        .chain(manifest.docs.iter().map(|d| (&d.path, &d.content_digest)));
    for (path, expected) in listed {
        match fs::read(native(dir, path)) {
            Ok(bytes) => {
                let actual = sha256_hex(&bytes);
                if &actual != expected {
                    out.push(Mismatch::Digest {
                        path: path.clone(),
                        expected: expected.clone(),
                        actual,
                    });
                }
            }
            Err(_) => out.push(Mismatch::Missing(path.clone())),
        }
    }
    let actual = manifest.compute_digest();
    if actual != manifest.package_digest {
        out.push(Mismatch::PackageDigest {
            expected: manifest.package_digest.clone(),
            actual,
        });
    }
    out
}
