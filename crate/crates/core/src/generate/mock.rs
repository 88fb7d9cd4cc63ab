//! Deterministic offline backend serving C# fixtures by class name.

use std::collections::BTreeMap;
use std::path::Path;

use super::backend::{BackendError, ChatBackend, ChatReply, ChatRequest, MockOptions, Role};

const CLASS_PLACEHOLDER: &str = "__CLASS__";
const NOTES_PLACEHOLDER: &str = "__NOTES__";
const EXTRACTION_TAG: &str = "GameSpec";
/// Heading in the user prompt whose bullet lines the mock echoes as comments.
pub(crate) const DESIGN_DETAILS_HEADING: &str = "Design details:";

const BUILTIN: &[(&str, &str)] = &[
    ("BossController", include_str!("../../fixtures/mock/BossController.cs")),
    ("CameraController", include_str!("../../fixtures/mock/CameraController.cs")),
    ("CombatSystem", include_str!("../../fixtures/mock/CombatSystem.cs")),
    ("EnemyAI", include_str!("../../fixtures/mock/EnemyAI.cs")),
    ("EnemyVariant", include_str!("../../fixtures/mock/EnemyVariant.cs")),
    ("GameManager", include_str!("../../fixtures/mock/GameManager.cs")),
    ("Generic", include_str!("../../fixtures/mock/Generic.cs")),
    ("InteractionSystem", include_str!("../../fixtures/mock/InteractionSystem.cs")),
    ("InventorySystem", include_str!("../../fixtures/mock/InventorySystem.cs")),
    ("LevelManager", include_str!("../../fixtures/mock/LevelManager.cs")),
    ("MovementSystem", include_str!("../../fixtures/mock/MovementSystem.cs")),
    ("PlayerController", include_str!("../../fixtures/mock/PlayerController.cs")),
    ("UIManager", include_str!("../../fixtures/mock/UIManager.cs")),
];

/// Serves `<ClassName>` fixtures with the class name and the prompt's design
/// details substituted in. When a class has several variants
/// (`Name.cs`, `Name.1.cs`, ...) the prompt digest picks one.
pub struct MockBackend {
    library: BTreeMap<String, Vec<String>>,
    fail_tags: Vec<String>,
}

impl MockBackend {
    pub fn new() -> Self {
        let library = BUILTIN
            .iter()
            .map(|(name, text)| (name.to_string(), vec![text.to_string()]))
            .collect();
        Self {
            library,
            fail_tags: Vec::new(),
        }
    }

    pub fn from_options(opts: &MockOptions) -> Result<Self, BackendError> {
        let mut mock = MockBackend::new();
        if let Some(dir) = &opts.fixtures_dir {
            mock.load_dir(dir)?;
        }
        mock.fail_tags = opts.fail_tags.clone();
        Ok(mock)
    }

    pub fn failing(mut self, tags: &[&str]) -> Self {
        self.fail_tags = tags.iter().map(|t| t.to_string()).collect();
        self
    }

    pub fn with_fixture(mut self, tag: &str, text: &str) -> Self {
        self.library.insert(tag.to_string(), vec![text.to_string()]);
        self
    }

    fn load_dir(&mut self, dir: &Path) -> Result<(), BackendError> {
        let read_err = |e: std::io::Error| BackendError::Config(format!("{}: {e}", dir.display()));
        let mut overrides: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for entry in std::fs::read_dir(dir).map_err(read_err)? {
            let path = entry.map_err(read_err)?.path();
            let Some(file) = path.file_name().and_then(|f| f.to_str()) else {
                continue;
            };
            let Some(stem) = file.strip_suffix(".cs").or_else(|| file.strip_suffix(".json")) else {
                continue;
            };
            let class = stem.split('.').next().unwrap_or(stem).to_string();
            let text = std::fs::read_to_string(&path).map_err(read_err)?;
            overrides.entry(class).or_default().insert(file.to_string(), text);
        }
        for (class, variants) in overrides {
            self.library.insert(class, variants.into_values().collect());
        }
        Ok(())
    }

    fn template_for(&self, tag: &str) -> &[String] {
        if let Some(v) = self.library.get(tag) {
            return v;
        }
        if tag == EXTRACTION_TAG {
            return &[];
        }
        if tag.ends_with("EnemyAI") {
            if let Some(v) = self.library.get("EnemyVariant") {
                return v;
            }
        }
        self.library.get("Generic").map(Vec::as_slice).unwrap_or(&[])
    }
}

impl Default for MockBackend {
    fn default() -> Self {
        Self::new()
    }
}

fn design_notes(request: &ChatRequest) -> String {
    let Some(user) = request.messages.iter().rev().find(|m| m.role == Role::User) else {
        return String::new();
    };
    let mut lines = Vec::new();
    let mut inside = false;
    for line in user.content.lines() {
        if line.trim() == DESIGN_DETAILS_HEADING {
            inside = true;
            continue;
        }
        if inside {
            if line.trim().is_empty() {
                break;
            }
            lines.push(format!("// {}", line.trim()));
        }
    }
    if lines.is_empty() {
        return "//".to_string();
    }
    let mut out = vec!["// Design notes:".to_string()];
    out.extend(lines);
    out.join("\n")
}

impl ChatBackend for MockBackend {
    fn label(&self) -> String {
        "mock".to_string()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatReply, BackendError> {
        if self.fail_tags.iter().any(|t| t == &request.tag) {
            return Err(BackendError::Injected(request.tag.clone()));
        }
        let variants = self.template_for(&request.tag);
        if variants.is_empty() {
            // Extraction and unknown tags without fixtures get an empty object.
            return Ok(ChatReply {
                text: "{}".to_string(),
                attempts: 1,
                latency_ms: 0,
            });
        }
        let digest = request.digest();
        let pick = u64::from_str_radix(&digest[..8], 16).unwrap_or(0) as usize % variants.len();
        let template = &variants[pick];
        if !template.contains(CLASS_PLACEHOLDER) && template.trim_start().starts_with('{') {
            return Ok(ChatReply {
                text: template.clone(),
                attempts: 1,
                latency_ms: 0,
            });
        }
        let source = template
            .replace(CLASS_PLACEHOLDER, &request.tag)
            .replace(NOTES_PLACEHOLDER, &design_notes(request));
        Ok(ChatReply {
            text: format!("Here is the `{}` script.\n\n```csharp\n{}```\n", request.tag, source),
            attempts: 1,
            latency_ms: 0,
        })
    }
}
