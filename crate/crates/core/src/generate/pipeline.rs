use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::backend::{BackendError, ChatBackend};
use super::parse::{parse_response, ResponseError};
use super::prompt::build_prompt;
use crate::analyze::ScriptPlan;
use crate::spec::GameSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("unknown script `{0}`")]
    UnknownScript(String),
    #[error("`{script}` depends on `{dependency}`, which has not been generated")]
    MissingDependency { script: String, dependency: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Response(#[from] ResponseError),
}

impl GenerateError {
    /// Stable identifier for reports.
    pub fn code(&self) -> &'static str {
        match self {
            GenerateError::UnknownScript(_) => "UnknownScript",
            GenerateError::MissingDependency { .. } => "MissingDependency",
            GenerateError::Backend(e) => match e {
                BackendError::Timeout { .. } => "Timeout",
                BackendError::AuthFailure(_) => "AuthFailure",
                BackendError::RateLimited { .. } => "RateLimited",
                BackendError::ServerError { .. } => "ServerError",
                BackendError::Rejected { .. } => "Rejected",
                BackendError::MalformedBackendResponse(_) => "MalformedBackendResponse",
                BackendError::Transport(_) => "Transport",
                BackendError::Config(_) => "Config",
                BackendError::Injected(_) => "InjectedFailure",
            },
            GenerateError::Response(ResponseError::NoCodeFound) => "NoCodeFound",
            GenerateError::Response(ResponseError::EmptyCodeBlock) => "EmptyCodeBlock",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedScript {
    pub script_id: String,
    pub class_name: String,
    pub source: String,
    pub file_name: String,
    pub backend: String,
    pub prompt_digest: String,
    pub latency_ms: u64,
    pub attempt: u32,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl GeneratedScript {
    pub fn new(
        script_id: &str,
        class_name: &str,
        source: &str,
        backend: &str,
        prompt_digest: &str,
        latency_ms: u64,
        attempt: u32,
    ) -> Self {
        Self {
            script_id: script_id.to_string(),
            class_name: class_name.to_string(),
            source: source.to_string(),
            file_name: format!("{class_name}.cs"),
            backend: backend.to_string(),
            prompt_digest: prompt_digest.to_string(),
            latency_ms,
            attempt: attempt.max(1),
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedScript {
    pub script_id: String,
    pub class_name: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedScript {
    pub script_id: String,
    pub class_name: String,
    /// Failed or skipped dependencies that blocked this script.
    pub blocked_by: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobReport {
    /// In generation order.
    pub generated: Vec<GeneratedScript>,
    pub failed: Vec<FailedScript>,
    pub skipped: Vec<SkippedScript>,
}

impl JobReport {
    pub fn is_complete(&self) -> bool {
        self.failed.is_empty() && self.skipped.is_empty()
    }
}

/// Progress notifications from [`generate_all_observed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptEvent {
    Started(String),
    Generated(String),
    Failed(String, String),
    Skipped(String),
}

/// Generates one script: prompt, backend call, response parsing.
pub fn generate_script(
    spec: &GameSpec,
    plan: &ScriptPlan,
    script_id: &str,
    done: &[GeneratedScript],
    backend: &dyn ChatBackend,
) -> Result<GeneratedScript, GenerateError> {
    let prompt = build_prompt(spec, plan, script_id, done)?;
    let request = prompt.to_request();
    let reply = backend.complete(&request)?;
    let parsed = parse_response(&reply.text, &prompt.class_name)?;
    let mut script = GeneratedScript::new(
        script_id,
        &parsed.class_name,
        &parsed.source,
        &backend.label(),
        &request.digest(),
        reply.latency_ms,
        reply.attempts,
    );
    script.warnings = parsed.warnings;
    Ok(script)
}

pub fn generate_all(
    spec: &GameSpec,
    plan: &ScriptPlan,
    backend: &dyn ChatBackend,
    concurrency: usize,
) -> JobReport {
    generate_all_observed(spec, plan, backend, concurrency, &|_| {})
}

/// Generates every selected script in dependency order. Scripts at the same
/// depth run up to `concurrency` at a time; results are committed in plan
/// order, so output does not depend on completion order.
pub fn generate_all_observed(
    spec: &GameSpec,
    plan: &ScriptPlan,
    backend: &dyn ChatBackend,
    concurrency: usize,
    observer: &(dyn Fn(&ScriptEvent) + Sync),
) -> JobReport {
    let concurrency = concurrency.max(1);
    let depths = plan.depths();
    let mut levels: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for id in &plan.generation_order {
        levels
            .entry(depths.get(id).copied().unwrap_or(0))
            .or_default()
            .push(id.as_str());
    }

    let mut done: Vec<GeneratedScript> = Vec::new();
    let mut blocked: HashMap<String, ()> = HashMap::new();
    let mut report = JobReport::default();
    let class_of = |id: &str| plan.requirement(id).map(|r| r.class_name.clone()).unwrap_or_default();

    for ids in levels.values() {
        let mut runnable = Vec::new();
        for id in ids {
            let blockers: Vec<String> = plan
                .dependencies(id)
                .into_iter()
                .filter(|d| blocked.contains_key(&d.script_id))
                .map(|d| d.script_id.clone())
                .collect();
            if blockers.is_empty() {
                runnable.push(*id);
            } else {
                observer(&ScriptEvent::Skipped(id.to_string()));
                blocked.insert(id.to_string(), ());
                report.skipped.push(SkippedScript {
                    script_id: id.to_string(),
                    class_name: class_of(id),
                    blocked_by: blockers,
                });
            }
        }

        for chunk in runnable.chunks(concurrency) {
            let snapshot = &done;
            let results: Vec<Result<GeneratedScript, GenerateError>> = std::thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|id| {
                        s.spawn(move || {
                            observer(&ScriptEvent::Started(id.to_string()));
                            generate_script(spec, plan, id, snapshot, backend)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("generation worker panicked"))
                    .collect()
            });
            for (id, result) in chunk.iter().zip(results) {
                match result {
                    Ok(script) => {
                        observer(&ScriptEvent::Generated(id.to_string()));
                        done.push(script);
                    }
                    Err(e) => {
                        tracing::warn!(script = %id, error = %e, "script generation failed");
                        observer(&ScriptEvent::Failed(id.to_string(), e.to_string()));
                        blocked.insert(id.to_string(), ());
                        report.failed.push(FailedScript {
                            script_id: id.to_string(),
                            class_name: class_of(id),
                            code: e.code().to_string(),
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
    }

    let position: HashMap<&str, usize> = plan
        .generation_order
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    done.sort_by_key(|s| position.get(s.script_id.as_str()).copied().unwrap_or(usize::MAX));
    report.failed.sort_by_key(|s| position.get(s.script_id.as_str()).copied().unwrap_or(usize::MAX));
    report.skipped.sort_by_key(|s| position.get(s.script_id.as_str()).copied().unwrap_or(usize::MAX));
    report.generated = done;
    report
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    use super::*;
    use crate::analyze::{analyze, set_selection};
    use crate::generate::{ChatReply, ChatRequest, MockBackend};
    use crate::spec::Genre;

    fn rpg() -> (GameSpec, ScriptPlan) {
        let mut spec = GameSpec::new("Shards", Genre::ActionRpg);
        spec.mechanics.movement = vec!["dodge roll".into()];
        spec.mechanics.combat = vec!["sword combos".into()];
        spec.characters.enemies = vec!["Skeleton".into()];
        spec.characters.boss = Some("Lich King".into());
        (spec.clone(), analyze(&spec))
    }

    fn ids(scripts: &[GeneratedScript]) -> Vec<&str> {
        scripts.iter().map(|s| s.script_id.as_str()).collect()
    }

    #[test]
    fn four_script_plan_in_order() {
        let mut spec = GameSpec::new("Hop", Genre::Platformer);
        spec.mechanics.movement = vec!["jump".into()];
        let plan = analyze(&spec);
        assert_eq!(plan.generation_order.len(), 4);
        let report = generate_all(&spec, &plan, &MockBackend::new(), 2);
        assert!(report.is_complete());
        assert_eq!(ids(&report.generated), plan.generation_order.iter().map(String::as_str).collect::<Vec<_>>());
        for s in &report.generated {
            assert_eq!(s.file_name, format!("{}.cs", s.class_name));
            assert!(!s.source.is_empty());
        }
    }

    #[test]
    fn failure_skips_exactly_the_dependents() {
        let (spec, plan) = rpg();
        let mock = MockBackend::new().failing(&["CombatSystem"]);
        let report = generate_all(&spec, &plan, &mock, 2);
        assert_eq!(report.failed.len(), 1);
        assert_eq!(report.failed[0].script_id, "combat_system");
        assert_eq!(report.failed[0].code, "InjectedFailure");
        let skipped: BTreeSet<&str> = report.skipped.iter().map(|s| s.script_id.as_str()).collect();
        assert_eq!(skipped, BTreeSet::from(["enemy_ai", "boss_controller"]));
        let generated: BTreeSet<&str> = ids(&report.generated).into_iter().collect();
        for id in &plan.generation_order {
            let id = id.as_str();
            assert!(generated.contains(id) ^ (id == "combat_system" || skipped.contains(id)));
        }
    }

    #[test]
    fn reruns_are_byte_identical() {
        let (spec, plan) = rpg();
        let a = generate_all(&spec, &plan, &MockBackend::new(), 3);
        let b = generate_all(&spec, &plan, &MockBackend::new(), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn deselected_scripts_are_not_generated() {
        let (spec, plan) = rpg();
        let plan = set_selection(&plan, "combat_system", false).unwrap().plan;
        let report = generate_all(&spec, &plan, &MockBackend::new(), 2);
        assert!(!ids(&report.generated).contains(&"enemy_ai"));
        assert!(report.skipped.is_empty());
    }

    /// Records call order and checks dependencies were parsed first.
    struct Recorder {
        inner: MockBackend,
        calls: Mutex<Vec<String>>,
        in_flight: AtomicUsize,
        peak: AtomicUsize,
    }

    impl ChatBackend for Recorder {
        fn label(&self) -> String {
            "recorder".into()
        }
        fn complete(&self, request: &ChatRequest) -> Result<ChatReply, BackendError> {
            let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
            self.peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(5));
            self.calls.lock().unwrap().push(request.tag.clone());
            let r = self.inner.complete(request);
            self.in_flight.fetch_sub(1, Ordering::SeqCst);
            r
        }
    }

    #[test]
    fn dependencies_finish_before_dependents_start_and_cap_holds() {
        let (spec, plan) = rpg();
        let rec = Recorder {
            inner: MockBackend::new(),
            calls: Mutex::new(Vec::new()),
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        };
        let report = generate_all(&spec, &plan, &rec, 2);
        assert!(report.is_complete());
        assert!(rec.peak.load(Ordering::SeqCst) <= 2);
        let calls = rec.calls.lock().unwrap().clone();
        for e in &plan.edges {
            let from = &plan.requirement(&e.from).unwrap().class_name;
            let to = &plan.requirement(&e.to).unwrap().class_name;
            let fi = calls.iter().position(|c| c == from).unwrap();
            let ti = calls.iter().position(|c| c == to).unwrap();
            assert!(ti < fi, "{to} must be generated before {from}");
        }
    }
}
