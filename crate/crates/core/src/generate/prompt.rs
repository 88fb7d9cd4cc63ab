use serde::{Deserialize, Serialize};

use super::backend::{ChatMessage, ChatRequest};
use super::mock::DESIGN_DETAILS_HEADING;
use super::pipeline::{GenerateError, GeneratedScript};
use crate::analyze::ScriptPlan;
use crate::spec::GameSpec;
use crate::validate::summarize_class;

const SYSTEM_TEXT: &str = "You are an expert Unity developer who writes clean, idiomatic C# for Unity 2022 LTS. \
You write one MonoBehaviour per file, expose tuning values with [SerializeField], cache component \
references in Awake or Start, and keep methods short and focused.";

const OVERVIEW_LIMIT: usize = 400;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextScript {
    pub class_name: String,
    pub public_surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub script_id: String,
    pub class_name: String,
    pub system_text: String,
    pub user_text: String,
    pub context_scripts: Vec<ContextScript>,
    pub token_estimate: usize,
}

impl PromptBundle {
    pub fn to_request(&self) -> ChatRequest {
        ChatRequest::new(
            self.class_name.clone(),
            vec![ChatMessage::system(&self.system_text), ChatMessage::user(&self.user_text)],
        )
    }

    pub fn digest(&self) -> String {
        self.to_request().digest()
    }
}

/// Rough token count: about four characters per token.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

fn truncate_chars(s: &str, limit: usize) -> String {
    match s.char_indices().nth(limit) {
        Some((idx, _)) => format!("{}...", s[..idx].trim_end()),
        None => s.to_string(),
    }
}

/// Builds the prompt for one script. Every dependency of `script_id` must
/// already be in `done`; their public members are passed as context.
pub fn build_prompt(
    spec: &GameSpec,
    plan: &ScriptPlan,
    script_id: &str,
    done: &[GeneratedScript],
) -> Result<PromptBundle, GenerateError> {
    let req = plan
        .requirement(script_id)
        .ok_or_else(|| GenerateError::UnknownScript(script_id.to_string()))?;

    let mut context_scripts = Vec::new();
    for dep in plan.dependencies(script_id) {
        let script = done
            .iter()
            .find(|s| s.script_id == dep.script_id)
            .ok_or_else(|| GenerateError::MissingDependency {
                script: script_id.to_string(),
                dependency: dep.script_id.clone(),
            })?;
        let surface = summarize_class(&script.source)
            .ok()
            .and_then(|classes| classes.into_iter().find(|c| c.class_name == script.class_name))
            .map(|c| c.public_surface())
            .unwrap_or_else(|| format!("public class {}", script.class_name));
        context_scripts.push(ContextScript {
            class_name: script.class_name.clone(),
            public_surface: surface,
        });
    }

    let mut user = String::new();
    user.push_str(&format!(
        "Write the Unity C# script `{}` for the game \"{}\" ({}).\n",
        req.class_name,
        spec.title,
        spec.genre.label()
    ));
    user.push_str(&format!("Category: {}\n", req.category));
    user.push_str(&format!("Why it is needed: {}\n\n", req.rationale));

    let values = spec.field_values(&req.trigger_path).unwrap_or_default();
    if !values.is_empty() {
        user.push_str(DESIGN_DETAILS_HEADING);
        user.push('\n');
        for v in &values {
            user.push_str(&format!("- {v}\n"));
        }
        user.push('\n');
    }
    if !spec.overview.trim().is_empty() {
        user.push_str(&format!(
            "Game overview: {}\n\n",
            truncate_chars(spec.overview.trim(), OVERVIEW_LIMIT)
        ));
    }
    if !context_scripts.is_empty() {
        user.push_str("These scripts already exist and can be referenced:\n");
        for c in &context_scripts {
            user.push_str(&c.public_surface);
            user.push_str("\n\n");
        }
    }
    user.push_str("Requirements:\n");
    user.push_str(&format!(
        "- Output exactly one C# file that declares `public class {}`.\n",
        req.class_name
    ));
    user.push_str("- Put the whole file inside a single ```csharp fenced code block and nothing else.\n");
    user.push_str("- Derive from MonoBehaviour and expose tuning values with [SerializeField].\n");

    let token_estimate = estimate_tokens(SYSTEM_TEXT) + estimate_tokens(&user);
    Ok(PromptBundle {
        script_id: req.script_id.clone(),
        class_name: req.class_name.clone(),
        system_text: SYSTEM_TEXT.to_string(),
        user_text: user,
        context_scripts,
        token_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyze::analyze;
    use crate::spec::Genre;

    fn rpg() -> (GameSpec, ScriptPlan) {
        let mut spec = GameSpec::new("Shards", Genre::ActionRpg);
        spec.mechanics.combat = vec!["sword combos".into(), "dodge roll".into()];
        spec.characters.enemies = vec!["Skeleton".into()];
        let plan = analyze(&spec);
        (spec, plan)
    }

    #[test]
    fn leaf_has_no_context() {
        let (spec, plan) = rpg();
        let p = build_prompt(&spec, &plan, "combat_system", &[]).unwrap();
        assert!(p.context_scripts.is_empty());
        assert!(p.user_text.contains("- sword combos\n- dodge roll\n"));
        assert!(p.user_text.contains("Category: combat"));
        assert!(p.token_estimate > 0);
    }

    #[test]
    fn missing_dependency() {
        let (spec, plan) = rpg();
        assert!(matches!(
            build_prompt(&spec, &plan, "enemy_ai", &[]),
            Err(GenerateError::MissingDependency { ref dependency, .. }) if dependency == "combat_system"
        ));
    }

    #[test]
    fn dependency_surface_is_embedded() {
        let (spec, plan) = rpg();
        let source = "using UnityEngine;\npublic class CombatSystem : MonoBehaviour {\n  [SerializeField] private float dmg = 1f;\n  public void DealDamage(GameObject target, float amount) { }\n  private void Hidden() { }\n}";
        let done = vec![GeneratedScript::new("combat_system", "CombatSystem", source, "test", "d", 0, 1)];
        let p = build_prompt(&spec, &plan, "enemy_ai", &done).unwrap();
        assert_eq!(p.context_scripts.len(), 1);
        assert_eq!(p.context_scripts[0].class_name, "CombatSystem");
        assert_eq!(
            p.context_scripts[0].public_surface,
            "public class CombatSystem : MonoBehaviour\n  public void DealDamage(GameObject target, float amount)"
        );
        assert!(p.user_text.contains("public void DealDamage(GameObject target, float amount)"));
        assert!(!p.user_text.contains("Hidden"));
    }

    #[test]
    fn digest_is_stable() {
        let (spec, plan) = rpg();
        let a = build_prompt(&spec, &plan, "combat_system", &[]).unwrap();
        let b = build_prompt(&spec, &plan, "combat_system", &[]).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a, b);
    }
}
