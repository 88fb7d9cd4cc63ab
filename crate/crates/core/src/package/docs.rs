use serde::{Deserialize, Serialize};

use crate::analyze::{ScriptCategory, ScriptPlan};
use crate::generate::GeneratedScript;
use crate::validate::{summarize_class, ClassSummary, Severity, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Customization {
    pub field_name: String,
    pub type_text: String,
    pub guidance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptDoc {
    pub script_id: String,
    pub class_name: String,
    pub category: ScriptCategory,
    /// Path of the script inside the package.
    pub script_path: String,
    pub usage: String,
    pub public_methods: Vec<String>,
    /// Class names this script depends on.
    pub dependencies: Vec<String>,
    pub customization: Vec<Customization>,
    pub setup_steps: Vec<String>,
    pub notes: Vec<String>,
}

pub fn script_path(category: ScriptCategory, file_name: &str) -> String {
    format!("Scripts/{}/{}", category.folder(), file_name)
}

fn host_object(category: ScriptCategory) -> &'static str {
    match category {
        ScriptCategory::CharacterController
        | ScriptCategory::Movement
        | ScriptCategory::Inventory
        | ScriptCategory::EnvironmentInteraction => "the player GameObject",
        ScriptCategory::Combat => "every GameObject that deals or takes damage",
        ScriptCategory::EnemyAi => "the enemy prefab",
        ScriptCategory::Camera => "the Main Camera",
        ScriptCategory::GameManagement => "an empty GameObject in the first scene",
        ScriptCategory::Ui => "the HUD Canvas",
    }
}

fn category_steps(category: ScriptCategory, class: &str) -> Vec<String> {
    let mut steps = match category {
        ScriptCategory::CharacterController => vec![
            "Create a player GameObject with a Rigidbody2D (or Rigidbody) and a Collider.".to_string(),
            format!("Attach `{class}` to the player and tag the object `Player`."),
        ],
        ScriptCategory::Movement => vec![format!(
            "Attach `{class}` to the player next to its controller and tune the speeds in the Inspector."
        )],
        ScriptCategory::Combat => vec![
            format!("Attach `{class}` to the player and to each enemy that can fight."),
            "Put hittable objects on a dedicated layer and select it in the Inspector.".to_string(),
        ],
        ScriptCategory::EnemyAi => vec![
            format!("Create an enemy prefab with a Collider and attach `{class}`."),
            "Assign the player Transform as the target, or leave it empty to find the `Player` tag at runtime."
                .to_string(),
        ],
        ScriptCategory::Camera => vec![
            format!("Attach `{class}` to the Main Camera."),
            "Drag the player object into the camera's target field.".to_string(),
        ],
        ScriptCategory::GameManagement => vec![format!(
            "Create an empty GameObject named `{class}` in the first scene and attach the script."
        )],
        ScriptCategory::Ui => vec![
            format!("Create a Canvas for the HUD and attach `{class}` to it."),
            "Link the text and image elements to the script's fields in the Inspector.".to_string(),
        ],
        ScriptCategory::Inventory => vec![format!(
            "Attach `{class}` to the player; pickups call into it when collected."
        )],
        ScriptCategory::EnvironmentInteraction => vec![
            format!("Attach `{class}` to the player."),
            "Give interactable objects a trigger Collider.".to_string(),
        ],
    };
    steps.retain(|s| !s.is_empty());
    steps
}

fn guidance(type_text: &str) -> String {
    let t = type_text.trim_end_matches("[]");
    match t {
        "float" | "int" | "double" => "Numeric tuning value; adjust in the Inspector.".to_string(),
        "bool" => "Toggle this behaviour on or off.".to_string(),
        "string" => "Text shown or used as a key; edit freely.".to_string(),
        "LayerMask" => "Select the layers this script should react to.".to_string(),
        "KeyCode" => "Input key; change to rebind.".to_string(),
        "Transform" | "GameObject" | "Rigidbody" | "Rigidbody2D" | "Camera" | "Animator" => {
            "Scene reference; drag the matching object into this slot.".to_string()
        }
        _ if type_text.ends_with("[]") || type_text.starts_with("List<") => {
            "List of entries; add one element per item.".to_string()
        }
        _ => format!("Assign a `{type_text}` in the Inspector."),
    }
}

fn method_signature(m: &crate::validate::MethodSig) -> String {
    format!("{} {}({})", m.return_type, m.name, m.parameters)
}

/// Template-based docs for each generated script.
pub fn generate_docs(plan: &ScriptPlan, scripts: &[GeneratedScript], reports: &[ValidationReport]) -> Vec<ScriptDoc> {
    scripts
        .iter()
        .map(|script| {
            let category = plan
                .requirement(&script.script_id)
                .map_or(ScriptCategory::GameManagement, |r| r.category);
            let summary: Option<ClassSummary> = summarize_class(&script.source)
                .ok()
                .and_then(|all| {
                    let first = all.first().cloned();
                    all.into_iter().find(|c| c.class_name == script.class_name).or(first)
                });
            let dependencies: Vec<String> = plan
                .dependencies(&script.script_id)
                .into_iter()
                .map(|r| {
                    scripts
                        .iter()
                        .find(|s| s.script_id == r.script_id)
                        .map_or(r.class_name.clone(), |s| s.class_name.clone())
                })
                .collect();
            let public_methods: Vec<String> = summary
                .iter()
                .flat_map(|s| s.public_methods.iter().map(method_signature))
                .collect();
            let customization: Vec<Customization> = summary
                .iter()
                .flat_map(|s| s.serialized_fields.iter())
                .map(|f| Customization {
                    field_name: f.name.clone(),
                    type_text: f.type_text.clone(),
                    guidance: guidance(&f.type_text),
                })
                .collect();

            let mut usage = format!(
                "`{}` is a {} script. Attach it to {}.",
                script.class_name,
                category.as_str().replace('_', " "),
                host_object(category)
            );
            if let Some(s) = &summary {
                if !s.unity_messages.is_empty() {
                    usage.push_str(&format!(" Unity calls its {} methods.", s.unity_messages.join(", ")));
                }
                if !s.public_methods.is_empty() {
                    let names: Vec<String> = s.public_methods.iter().map(|m| format!("`{}`", m.name)).collect();
                    usage.push_str(&format!(" Other scripts can call {}.", names.join(", ")));
                }
            }

            let mut setup_steps = Vec::new();
            if !dependencies.is_empty() {
                setup_steps.push(format!("Set up {} first.", dependencies.join(", ")));
            }
            setup_steps.extend(category_steps(category, &script.class_name));
            if !customization.is_empty() {
                setup_steps.push(format!(
                    "Review the {} Inspector field(s) listed under Customization.",
                    customization.len()
                ));
            }

            let notes = reports
                .iter()
                .find(|r| r.script_id == script.script_id)
                .map(|r| {
                    r.findings
                        .iter()
                        .filter(|f| f.severity != Severity::Info)
                        .map(|f| format!("{} (line {}): {}", f.code, f.line, f.message))
                        .collect()
                })
                .unwrap_or_default();

            ScriptDoc {
                script_id: script.script_id.clone(),
                class_name: script.class_name.clone(),
                category,
                script_path: script_path(category, &script.file_name),
                usage,
                public_methods,
                dependencies,
                customization,
                setup_steps,
                notes,
            }
        })
        .collect()
}

/// Markdown page for one script.
pub fn render_markdown(doc: &ScriptDoc) -> String {
    let mut out = format!("# {}\n\n", doc.class_name);
    out.push_str(&format!("- Category: {}\n- File: `{}`\n\n", doc.category, doc.script_path));
    out.push_str(&format!("## Usage\n\n{}\n\n", doc.usage));
    out.push_str("## Public methods\n\n");
    if doc.public_methods.is_empty() {
        out.push_str("None.\n\n");
    } else {
        for m in &doc.public_methods {
            out.push_str(&format!("- `{m}`\n"));
        }
        out.push('\n');
    }
    out.push_str("## Dependencies\n\n");
    if doc.dependencies.is_empty() {
        out.push_str("None.\n\n");
    } else {
        for d in &doc.dependencies {
            out.push_str(&format!("- [{d}]({d}.md)\n"));
        }
        out.push('\n');
    }
    out.push_str("## Customization\n\n");
    if doc.customization.is_empty() {
        out.push_str("No Inspector fields.\n\n");
    } else {
        out.push_str("| Field | Type | Guidance |\n|---|---|---|\n");
        for c in &doc.customization {
            out.push_str(&format!("| `{}` | `{}` | {} |\n", c.field_name, c.type_text, c.guidance));
        }
        out.push('\n');
    }
    out.push_str("## Setup\n\n");
    for (i, step) in doc.setup_steps.iter().enumerate() {
        out.push_str(&format!("{}. {step}\n", i + 1));
    }
    if !doc.notes.is_empty() {
        out.push_str("\n## Validation notes\n\n");
        for n in &doc.notes {
            out.push_str(&format!("- {n}\n"));
        }
    }
    out
}

/// Setup steps of all scripts, dependencies first.
pub fn render_setup_guide(title: &str, plan: &ScriptPlan, docs: &[ScriptDoc]) -> String {
    let mut out = format!("# Scene setup guide: {title}\n\n");
    out.push_str("Follow the sections in order; each script's dependencies come before it.\n");
    for id in &plan.generation_order {
        let Some(doc) = docs.iter().find(|d| &d.script_id == id) else {
            continue;
        };
        out.push_str(&format!("\n## {}\n\n", doc.class_name));
        for (i, step) in doc.setup_steps.iter().enumerate() {
            out.push_str(&format!("{}. {step}\n", i + 1));
        }
    }
    out
}
