use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::structure::{check_tokens, Finding, Severity};
use super::summary::{scan_tokens, ClassScan, SourceScan};
use super::token::{tokenize, TokenKind};
use crate::analyze::{ScriptCategory, ScriptPlan};
use crate::generate::GeneratedScript;
use crate::rubric::Criterion;
use crate::spec::GameSpec;

const BUILTIN_WEIGHTS: &str = include_str!("../../data/proxy_weights.toml");

#[derive(Debug, Error)]
pub enum WeightsError {
    #[error("invalid proxy weights: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CompilationWeights {
    pub default_error_weight: f64,
    #[serde(default)]
    pub error_weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BestPracticeWeights {
    pub monobehaviour_base: f64,
    pub get_component_in_update: f64,
    pub serialized_fields: f64,
    pub input_handling: f64,
    pub unity_bases: Vec<String>,
    pub input_categories: Vec<ScriptCategory>,
    pub input_identifiers: Vec<String>,
    pub update_methods: Vec<String>,
    pub get_component_calls: Vec<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModularityWeights {
    pub methods_min: usize,
    pub methods_max: usize,
    pub max_method_lines: usize,
    pub methods_out_of_range: f64,
    pub long_method: f64,
    pub multiple_classes: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AdherenceSettings {
    pub min_keyword_length: usize,
    pub stopwords: Vec<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProxyWeights {
    pub compilation: CompilationWeights,
    pub best_practices: BestPracticeWeights,
    pub modularity: ModularityWeights,
    pub adherence: AdherenceSettings,
}

impl ProxyWeights {
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN_WEIGHTS).expect("built-in proxy weights are valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, WeightsError> {
        let w: ProxyWeights = toml::from_str(text).map_err(|e| WeightsError::Invalid(e.to_string()))?;
        let bp = &w.best_practices;
        let m = &w.modularity;
        let all = [
            w.compilation.default_error_weight,
            bp.monobehaviour_base,
            bp.get_component_in_update,
            bp.serialized_fields,
            bp.input_handling,
            m.methods_out_of_range,
            m.long_method,
            m.multiple_classes,
        ];
        if all
            .iter()
            .chain(w.compilation.error_weights.values())
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(WeightsError::Invalid("weights must be finite and non-negative".into()));
        }
        if m.methods_min > m.methods_max {
            return Err(WeightsError::Invalid("methods_min exceeds methods_max".into()));
        }
        Ok(w)
    }

    pub fn from_file(path: &Path) -> Result<Self, WeightsError> {
        let text = std::fs::read_to_string(path).map_err(|source| WeightsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn error_weight(&self, code: &str) -> f64 {
        self.compilation
            .error_weights
            .get(code)
            .copied()
            .unwrap_or(self.compilation.default_error_weight)
    }
}

impl Default for ProxyWeights {
    fn default() -> Self {
        Self::builtin()
    }
}

/// An external command that compiles one `.cs` file; exit status 0 means
/// it compiled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilerHook {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
}

impl CompilerHook {
    pub fn check(&self, file_name: &str, source: &str) -> Option<Finding> {
        let dir = match tempfile::tempdir() {
            Ok(d) => d,
            Err(e) => return Some(Finding::warning("ExternalCompilerUnavailable", 1, e.to_string())),
        };
        let path = dir.path().join(file_name);
        if let Err(e) = std::fs::write(&path, source) {
            return Some(Finding::warning("ExternalCompilerUnavailable", 1, e.to_string()));
        }
        match Command::new(&self.command).args(&self.args).arg(&path).output() {
            Ok(out) if out.status.success() => None,
            Ok(out) => {
                let stderr = String::from_utf8_lossy(&out.stderr);
                let stdout = String::from_utf8_lossy(&out.stdout);
                let first = stderr.lines().chain(stdout.lines()).find(|l| !l.trim().is_empty());
                Some(Finding::error(
                    "ExternalCompilerFailed",
                    1,
                    first.unwrap_or("compiler reported failure").trim().to_string(),
                ))
            }
            Err(e) => Some(Finding::warning(
                "ExternalCompilerUnavailable",
                1,
                format!("{}: {e}", self.command),
            )),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    pub weights: ProxyWeights,
    pub compiler: Option<CompilerHook>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub script_id: String,
    pub class_name: String,
    pub structural_ok: bool,
    pub findings: Vec<Finding>,
    pub proxy_scores: BTreeMap<Criterion, f64>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub scripts: Vec<ValidationReport>,
    /// Mean of each proxy over the validated scripts.
    pub mean_proxies: BTreeMap<Criterion, f64>,
    pub structural_ok: usize,
    /// Selected scripts with no generated source.
    pub missing: Vec<String>,
}

/// Lowercased keywords from the GameSpec values behind a requirement.
pub fn spec_keywords(values: &[String], settings: &AdherenceSettings) -> BTreeSet<String> {
    values
        .iter()
        .flat_map(|v| v.split(|c: char| !c.is_alphanumeric()))
        .map(str::to_lowercase)
        .filter(|w| w.chars().count() >= settings.min_keyword_length)
        .filter(|w| !w.chars().all(|c| c.is_ascii_digit()))
        .filter(|w| !settings.stopwords.iter().any(|s| s == w))
        .collect()
}

/// 5 * covered / total, or 5 when there is nothing to cover.
pub fn adherence_score(keywords: &BTreeSet<String>, source: &str) -> (f64, usize) {
    if keywords.is_empty() {
        return (5.0, 0);
    }
    let haystack: String = tokenize(source)
        .into_iter()
        .filter(|t| matches!(t.kind, TokenKind::Identifier | TokenKind::Comment))
        .map(|t| t.text.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ");
    let covered = keywords.iter().filter(|k| haystack.contains(k.as_str())).count();
    (5.0 * covered as f64 / keywords.len() as f64, covered)
}

/// 5 * (1 - min(1, sum of error weights)).
pub fn compilation_score(findings: &[Finding], weights: &ProxyWeights) -> f64 {
    let penalty: f64 = findings
        .iter()
        .filter(|f| f.is_error())
        .map(|f| weights.error_weight(&f.code))
        .sum();
    5.0 * (1.0 - penalty.min(1.0))
}

fn clamp5(x: f64) -> f64 {
    x.clamp(0.0, 5.0)
}

fn primary_class<'a>(scan: &'a SourceScan<'_>, class_name: &str) -> Option<&'a ClassScan> {
    scan.classes
        .iter()
        .find(|c| c.summary.class_name == class_name)
        .or_else(|| scan.classes.first())
}

struct Checks {
    findings: Vec<Finding>,
    best_practices: f64,
    modularity: f64,
    metrics: BTreeMap<String, f64>,
}

fn rule_checks(
    scan: &SourceScan<'_>,
    class_name: &str,
    category: Option<ScriptCategory>,
    plan_classes: &BTreeSet<String>,
    w: &ProxyWeights,
) -> Checks {
    let bp = &w.best_practices;
    let md = &w.modularity;
    let mut findings = Vec::new();
    let mut metrics = BTreeMap::new();
    let mut best = 5.0;
    let mut modular = 5.0;

    let Some(class) = primary_class(scan, class_name) else {
        return Checks {
            findings,
            best_practices: 0.0,
            modularity: 0.0,
            metrics,
        };
    };
    let s = &class.summary;

    let unity_base = s
        .base_types
        .iter()
        .any(|b| bp.unity_bases.contains(b) || plan_classes.contains(b));
    if !unity_base {
        best -= bp.monobehaviour_base;
        findings.push(Finding::warning(
            "MissingMonoBehaviourBase",
            1,
            format!("`{}` does not derive from MonoBehaviour", s.class_name),
        ));
    }

    let mut get_component_hits = 0;
    for m in class.methods.iter().filter(|m| bp.update_methods.contains(&m.name)) {
        for t in &scan.sig[m.body.clone()] {
            if t.kind == TokenKind::Identifier && bp.get_component_calls.contains(&t.text) {
                get_component_hits += 1;
                findings.push(Finding::warning(
                    "GetComponentInUpdate",
                    t.line,
                    format!("`{}` called inside `{}`; cache the reference in Awake or Start", t.text, m.name),
                ));
            }
        }
    }
    if get_component_hits > 0 {
        best -= bp.get_component_in_update;
    }

    if s.serialized_fields.is_empty() {
        best -= bp.serialized_fields;
        findings.push(Finding::warning(
            "NoSerializedFields",
            1,
            "no inspector-tunable fields ([SerializeField] or public)",
        ));
    }

    if category.is_some_and(|c| bp.input_categories.contains(&c)) {
        let reads_input = scan
            .sig
            .iter()
            .any(|t| t.kind == TokenKind::Identifier && bp.input_identifiers.contains(&t.text));
        if !reads_input {
            best -= bp.input_handling;
            findings.push(Finding::warning(
                "NoInputHandling",
                1,
                "movement script never reads player input",
            ));
        }
    }

    let count = s.method_count;
    if count < md.methods_min || count > md.methods_max {
        modular -= md.methods_out_of_range;
        findings.push(Finding::info(
            "MethodCountOutOfRange",
            1,
            format!("{count} methods; expected {}-{}", md.methods_min, md.methods_max),
        ));
    }
    let longest = class
        .methods
        .iter()
        .max_by_key(|m| m.end_line - m.start_line + 1);
    let max_lines = longest.map_or(0, |m| m.end_line - m.start_line + 1);
    if let Some(m) = longest.filter(|_| max_lines > md.max_method_lines) {
        modular -= md.long_method;
        findings.push(Finding::info(
            "LongMethod",
            m.start_line,
            format!("`{}` spans {max_lines} lines (limit {})", m.name, md.max_method_lines),
        ));
    }
    let top_level = scan.classes.len();
    if top_level > 1 {
        modular -= md.multiple_classes;
        findings.push(Finding::info(
            "MultipleClassesPerFile",
            1,
            format!("{top_level} types declared in one file"),
        ));
    }

    metrics.insert("method_count".into(), count as f64);
    metrics.insert("max_method_lines".into(), max_lines as f64);
    metrics.insert("serialized_fields".into(), s.serialized_fields.len() as f64);
    metrics.insert("public_methods".into(), s.public_methods.len() as f64);
    metrics.insert("types_declared".into(), top_level as f64);
    metrics.insert("get_component_in_update".into(), get_component_hits as f64);

    Checks {
        findings,
        best_practices: clamp5(best),
        modularity: clamp5(modular),
        metrics,
    }
}

fn generation_warning(w: &str) -> Finding {
    let code = w.split(':').next().unwrap_or("GenerationWarning").trim();
    let severity = if code == "DiscardedBlocks" {
        Severity::Info
    } else {
        Severity::Warning
    };
    Finding::new(severity, code, 1, w)
}

/// Validates one script. `keywords` is the adherence target set.
pub fn validate_script(
    script: &GeneratedScript,
    category: Option<ScriptCategory>,
    keywords: &BTreeSet<String>,
    plan_classes: &BTreeSet<String>,
    opts: &ValidateOptions,
) -> ValidationReport {
    let w = &opts.weights;
    let tokens = tokenize(&script.source);
    let mut findings = check_tokens(&script.source, &tokens);
    if let Some(hook) = &opts.compiler {
        findings.extend(hook.check(&script.file_name, &script.source));
    }
    let structural_ok = !findings.iter().any(Finding::is_error);
    let compilation = compilation_score(&findings, w);

    let scan = scan_tokens(&script.source, &tokens);
    let braces_ok = !findings.iter().any(|f| f.code == "UnbalancedBraces");
    let checks = if braces_ok {
        rule_checks(&scan, &script.class_name, category, plan_classes, w)
    } else {
        Checks {
            findings: vec![Finding::warning(
                "StructureTooBroken",
                1,
                "braces do not balance; class-level checks skipped",
            )],
            best_practices: 0.0,
            modularity: 0.0,
            metrics: BTreeMap::new(),
        }
    };
    findings.extend(checks.findings);
    findings.extend(script.warnings.iter().map(|w| generation_warning(w)));

    let (adherence, covered) = adherence_score(keywords, &script.source);
    let mut metrics = checks.metrics;
    metrics.insert("keywords_total".into(), keywords.len() as f64);
    metrics.insert("keywords_covered".into(), covered as f64);
    metrics.insert("lines".into(), script.source.lines().count() as f64);
    metrics.insert(
        "error_findings".into(),
        findings.iter().filter(|f| f.is_error()).count() as f64,
    );

    let proxy_scores = BTreeMap::from([
        (Criterion::Compilation, clamp5(compilation)),
        (Criterion::Adherence, clamp5(adherence)),
        (Criterion::BestPractices, checks.best_practices),
        (Criterion::Modularity, checks.modularity),
    ]);
    ValidationReport {
        script_id: script.script_id.clone(),
        class_name: script.class_name.clone(),
        structural_ok,
        findings,
        proxy_scores,
        metrics,
    }
}

/// Proxy scores for every generated script plus plan-level means.
pub fn score_proxies(
    scripts: &[GeneratedScript],
    spec: &GameSpec,
    plan: &ScriptPlan,
    opts: &ValidateOptions,
) -> PlanReport {
    let plan_classes: BTreeSet<String> = plan.requirements.iter().map(|r| r.class_name.clone()).collect();
    let reports: Vec<ValidationReport> = scripts
        .iter()
        .map(|script| {
            let req = plan.requirement(&script.script_id);
            let values = req
                .and_then(|r| spec.field_values(&r.trigger_path))
                .unwrap_or_default();
            let keywords = spec_keywords(&values, &opts.weights.adherence);
            validate_script(script, req.map(|r| r.category), &keywords, &plan_classes, opts)
        })
        .collect();
    let mut mean_proxies = BTreeMap::new();
    if !reports.is_empty() {
        for c in Criterion::ALL {
            let sum: f64 = reports.iter().map(|r| r.proxy_scores[&c]).sum();
            mean_proxies.insert(c, sum / reports.len() as f64);
        }
    }
    let generated: BTreeSet<&str> = scripts.iter().map(|s| s.script_id.as_str()).collect();
    let missing = plan
        .generation_order
        .iter()
        .filter(|id| !generated.contains(id.as_str()))
        .cloned()
        .collect();
    PlanReport {
        structural_ok: reports.iter().filter(|r| r.structural_ok).count(),
        scripts: reports,
        mean_proxies,
        missing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn script(class: &str, source: &str) -> GeneratedScript {
        GeneratedScript::new(&crate::analyze::snake_case(class), class, source, "test", "d", 0, 1)
    }

    const GOOD: &str = r#"using UnityEngine;

public class Mover : MonoBehaviour
{
    [SerializeField] private float speed = 5f;
    private Rigidbody2D body;

    private void Awake()
    {
        body = GetComponent<Rigidbody2D>();
    }

    private void Update()
    {
        float x = Input.GetAxis("Horizontal");
        body.velocity = new Vector2(x * speed, body.velocity.y);
    }

    public void Stop()
    {
        body.velocity = Vector2.zero;
    }
}
"#;

    fn report(source: &str, category: Option<ScriptCategory>) -> ValidationReport {
        validate_script(
            &script("Mover", source),
            category,
            &BTreeSet::new(),
            &BTreeSet::new(),
            &ValidateOptions::default(),
        )
    }

    #[test]
    fn clean_script_scores_full_marks() {
        let r = report(GOOD, Some(ScriptCategory::Movement));
        assert!(r.structural_ok, "{:?}", r.findings);
        assert_eq!(r.proxy_scores[&Criterion::Compilation], 5.0);
        assert_eq!(r.proxy_scores[&Criterion::BestPractices], 5.0);
        assert_eq!(r.proxy_scores[&Criterion::Modularity], 5.0);
        assert_eq!(r.proxy_scores.len(), 4);
    }

    #[test]
    fn get_component_in_update_costs_its_weight() {
        let bad = GOOD.replace(
            "float x = Input.GetAxis(\"Horizontal\");",
            "float x = Input.GetAxis(\"Horizontal\");\n        GetComponent<Animator>().SetFloat(\"x\", x);",
        );
        let r = report(&bad, Some(ScriptCategory::Movement));
        assert!(r.findings.iter().any(|f| f.code == "GetComponentInUpdate"));
        let weight = ProxyWeights::builtin().best_practices.get_component_in_update;
        assert_eq!(r.proxy_scores[&Criterion::BestPractices], 5.0 - weight);
    }

    #[test]
    fn missing_input_only_matters_for_movement() {
        let no_input = GOOD.replace("Input.GetAxis(\"Horizontal\")", "1f");
        let w = ProxyWeights::builtin().best_practices.input_handling;
        assert_eq!(report(&no_input, Some(ScriptCategory::Movement)).proxy_scores[&Criterion::BestPractices], 5.0 - w);
        assert_eq!(report(&no_input, Some(ScriptCategory::Camera)).proxy_scores[&Criterion::BestPractices], 5.0);
    }

    #[test]
    fn adherence_four_of_eight() {
        let keywords: BTreeSet<String> = ["jump", "dash", "slide", "coin", "lava", "spike", "glide", "swim"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let source = "public class P : MonoBehaviour {\n  // handles jump and dash\n  float slideSpeed; int coinCount;\n}";
        let (score, covered) = adherence_score(&keywords, source);
        assert_eq!(covered, 4);
        assert_eq!(score, 2.5);
    }

    #[test]
    fn keywords_drop_stopwords_and_short_words() {
        let s = ProxyWeights::builtin().adherence;
        let k = spec_keywords(&["Jump onto the moving platforms".into(), "go up".into()], &s);
        let k: Vec<_> = k.into_iter().collect();
        assert_eq!(k, ["jump", "moving", "platforms"]);
    }

    #[test]
    fn broken_script_loses_compilation_points() {
        let r = report("public class Mover : MonoBehaviour {", None);
        assert!(!r.structural_ok);
        assert!(r.proxy_scores[&Criterion::Compilation] < 5.0);
        assert_eq!(r.proxy_scores[&Criterion::Modularity], 0.0);
    }

    #[test]
    fn weights_reject_negative_values() {
        let text = BUILTIN_WEIGHTS.replace("long_method = 1.5", "long_method = -1.0");
        assert!(ProxyWeights::from_toml(&text).is_err());
    }

    fn arb_finding() -> impl Strategy<Value = Finding> {
        let codes = prop::sample::select(vec![
            "UnbalancedBraces",
            "UnterminatedString",
            "TruncatedSource",
            "SomethingElse",
        ]);
        (codes, prop::sample::select(vec![Severity::Error, Severity::Warning, Severity::Info]))
            .prop_map(|(c, s)| Finding::new(s, c, 1, "x"))
    }

    proptest! {
        #[test]
        fn adding_an_error_never_raises_compilation(
            base in prop::collection::vec(arb_finding(), 0..6),
            extra in arb_finding(),
        ) {
            let w = ProxyWeights::builtin();
            let before = compilation_score(&base, &w);
            let mut more = base.clone();
            more.push(Finding::error(&extra.code, 1, "x"));
            let after = compilation_score(&more, &w);
            prop_assert!(after <= before);
            prop_assert!((0.0..=5.0).contains(&after));
        }

        #[test]
        fn proxies_stay_in_bounds(src in "[a-zA-Z{}()\\[\\];\"'/* \n=.:<>,]{0,300}") {
            let r = validate_script(
                &script("A", &src),
                Some(ScriptCategory::Movement),
                &["jump".to_string()].into_iter().collect(),
                &BTreeSet::new(),
                &ValidateOptions::default(),
            );
            for v in r.proxy_scores.values() {
                prop_assert!((0.0..=5.0).contains(v));
            }
            prop_assert_eq!(r.structural_ok, !r.findings.iter().any(|f| f.is_error()));
        }
    }
}
