//! Maps a GameSpec onto the Unity scripts it needs, with a dependency DAG.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec::{GameSpec, FIELD_PATHS};

const BUILTIN_RULES: &str = include_str!("../data/rules.toml");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyzeError {
    #[error("unknown script `{0}`")]
    UnknownScript(String),
    #[error("dependency cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("edge {from} -> {to} references a missing script")]
    DanglingEdge { from: String, to: String },
    #[error("duplicate class name `{0}`")]
    DuplicateClass(String),
    #[error("invalid rule table: {0}")]
    Rules(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptCategory {
    Movement,
    Combat,
    Inventory,
    EnvironmentInteraction,
    CharacterController,
    Camera,
    GameManagement,
    EnemyAi,
    Ui,
}

impl ScriptCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ScriptCategory::Movement => "movement",
            ScriptCategory::Combat => "combat",
            ScriptCategory::Inventory => "inventory",
            ScriptCategory::EnvironmentInteraction => "environment_interaction",
            ScriptCategory::CharacterController => "character_controller",
            ScriptCategory::Camera => "camera",
            ScriptCategory::GameManagement => "game_management",
            ScriptCategory::EnemyAi => "enemy_ai",
            ScriptCategory::Ui => "ui",
        }
    }

    /// Folder name used under `Scripts/` in a package.
    pub fn folder(self) -> &'static str {
        match self {
            ScriptCategory::Movement => "Movement",
            ScriptCategory::Combat => "Combat",
            ScriptCategory::Inventory => "Inventory",
            ScriptCategory::EnvironmentInteraction => "Interaction",
            ScriptCategory::CharacterController => "Player",
            ScriptCategory::Camera => "Camera",
            ScriptCategory::GameManagement => "Management",
            ScriptCategory::EnemyAi => "Enemies",
            ScriptCategory::Ui => "UI",
        }
    }
}

impl fmt::Display for ScriptCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRequirement {
    pub script_id: String,
    pub class_name: String,
    pub category: ScriptCategory,
    /// GameSpec field path that triggered the rule.
    pub trigger_path: String,
    pub rationale: String,
    #[serde(default = "default_true")]
    pub selected: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptPlan {
    pub spec_digest: String,
    pub requirements: Vec<ScriptRequirement>,
    /// `from` depends on `to`.
    pub edges: Vec<Edge>,
    pub generation_order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionChange {
    pub plan: ScriptPlan,
    /// Scripts toggled as a consequence of the requested one.
    pub cascaded: Vec<String>,
}

impl ScriptPlan {
    /// Builds a plan from parts, checking edge endpoints, class uniqueness and
    /// acyclicity, and computing the generation order.
    pub fn from_parts(
        spec_digest: impl Into<String>,
        requirements: Vec<ScriptRequirement>,
        edges: Vec<Edge>,
    ) -> Result<Self, AnalyzeError> {
        let mut ids = HashSet::new();
        let mut classes = HashSet::new();
        for r in &requirements {
            if !classes.insert(r.class_name.as_str()) {
                return Err(AnalyzeError::DuplicateClass(r.class_name.clone()));
            }
            if !ids.insert(r.script_id.as_str()) {
                return Err(AnalyzeError::DuplicateClass(r.script_id.clone()));
            }
        }
        for e in &edges {
            if !ids.contains(e.from.as_str()) || !ids.contains(e.to.as_str()) {
                return Err(AnalyzeError::DanglingEdge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                });
            }
        }
        let mut plan = ScriptPlan {
            spec_digest: spec_digest.into(),
            requirements,
            edges,
            generation_order: Vec::new(),
        };
        plan.generation_order = toposort(&plan)?;
        Ok(plan)
    }

    pub fn requirement(&self, script_id: &str) -> Option<&ScriptRequirement> {
        self.requirements.iter().find(|r| r.script_id == script_id)
    }

    pub fn by_class(&self, class_name: &str) -> Option<&ScriptRequirement> {
        self.requirements.iter().find(|r| r.class_name == class_name)
    }

    /// Direct dependencies of `script_id`, in requirement order.
    pub fn dependencies(&self, script_id: &str) -> Vec<&ScriptRequirement> {
        let targets: HashSet<&str> = self
            .edges
            .iter()
            .filter(|e| e.from == script_id)
            .map(|e| e.to.as_str())
            .collect();
        self.requirements
            .iter()
            .filter(|r| targets.contains(r.script_id.as_str()))
            .collect()
    }

    /// Direct dependents of `script_id`, in requirement order.
    pub fn dependents(&self, script_id: &str) -> Vec<&ScriptRequirement> {
        let sources: HashSet<&str> = self
            .edges
            .iter()
            .filter(|e| e.to == script_id)
            .map(|e| e.from.as_str())
            .collect();
        self.requirements
            .iter()
            .filter(|r| sources.contains(r.script_id.as_str()))
            .collect()
    }

    pub fn selected(&self) -> impl Iterator<Item = &ScriptRequirement> {
        self.requirements.iter().filter(|r| r.selected)
    }

    pub fn digest(&self) -> String {
        crate::digest::json_digest(self)
    }

    /// Longest dependency chain below each script (0 for leaves).
    pub fn depths(&self) -> HashMap<String, usize> {
        let mut depth: HashMap<String, usize> = HashMap::new();
        let order = toposort_all(self).unwrap_or_default();
        for id in order {
            let d = self
                .edges
                .iter()
                .filter(|e| e.from == id)
                .map(|e| depth.get(&e.to).copied().unwrap_or(0) + 1)
                .max()
                .unwrap_or(0);
            depth.insert(id, d);
        }
        depth
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Trigger {
    #[serde(default)]
    always: bool,
    #[serde(default)]
    paths: Vec<String>,
    #[serde(default)]
    keyword: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerItem {
    max: usize,
    class_suffix: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDef {
    class_name: String,
    category: ScriptCategory,
    trigger: Trigger,
    #[serde(default)]
    depends_on: Vec<String>,
    #[serde(default)]
    depends_on_first_of: Vec<String>,
    #[serde(default)]
    per_item: Option<PerItem>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    max_requirements: usize,
    rule: Vec<RuleDef>,
}

#[derive(Debug, Clone)]
struct Rule {
    def: RuleDef,
    keyword: Option<Regex>,
}

/// The data-driven mapping from spec content to scripts.
#[derive(Debug, Clone)]
pub struct RuleTable {
    rules: Vec<Rule>,
    max_requirements: usize,
}

impl RuleTable {
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN_RULES).expect("built-in rule table is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, AnalyzeError> {
        let file: RuleFile = toml::from_str(text).map_err(|e| AnalyzeError::Rules(e.to_string()))?;
        if file.max_requirements == 0 {
            return Err(AnalyzeError::Rules("max_requirements must be positive".into()));
        }
        let mut seen: Vec<&str> = Vec::new();
        let mut rules = Vec::new();
        for def in &file.rule {
            if !is_pascal_identifier(&def.class_name) {
                return Err(AnalyzeError::Rules(format!(
                    "`{}` is not a PascalCase identifier",
                    def.class_name
                )));
            }
            if seen.contains(&def.class_name.as_str()) {
                return Err(AnalyzeError::Rules(format!("duplicate rule `{}`", def.class_name)));
            }
            for dep in def.depends_on.iter().chain(&def.depends_on_first_of) {
                if !seen.contains(&dep.as_str()) {
                    return Err(AnalyzeError::Rules(format!(
                        "`{}` depends on `{dep}`, which is not defined by an earlier rule",
                        def.class_name
                    )));
                }
            }
            if def.trigger.paths.is_empty() {
                return Err(AnalyzeError::Rules(format!("`{}` has no trigger paths", def.class_name)));
            }
            for path in &def.trigger.paths {
                if !GameSpec::path_exists(path) {
                    return Err(AnalyzeError::Rules(format!("unknown field path `{path}`")));
                }
            }
            if let Some(per) = &def.per_item {
                if per.max == 0 || def.trigger.paths.len() != 1 {
                    return Err(AnalyzeError::Rules(format!(
                        "`{}`: per_item needs max > 0 and a single trigger path",
                        def.class_name
                    )));
                }
            }
            seen.push(&def.class_name);
        }
        for def in file.rule {
            let keyword = def
                .trigger
                .keyword
                .as_deref()
                .map(Regex::new)
                .transpose()
                .map_err(|e| AnalyzeError::Rules(e.to_string()))?;
            rules.push(Rule { def, keyword });
        }
        Ok(Self {
            rules,
            max_requirements: file.max_requirements,
        })
    }

    pub fn max_requirements(&self) -> usize {
        self.max_requirements
    }
}

impl Default for RuleTable {
    fn default() -> Self {
        Self::builtin()
    }
}

pub fn is_pascal_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_alphanumeric())
}

/// `EnemyAI` -> `enemy_ai`, `UIManager` -> `ui_manager`.
pub fn snake_case(class_name: &str) -> String {
    let chars: Vec<char> = class_name.chars().collect();
    let mut out = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_ascii_uppercase() && i > 0 {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase());
            if prev.is_ascii_lowercase() || prev.is_ascii_digit() || (prev.is_ascii_uppercase() && next_lower) {
                out.push('_');
            }
        }
        out.push(c.to_ascii_lowercase());
    }
    out
}

/// PascalCase identifier built from free text; `None` if nothing usable remains.
pub fn pascal_case(text: &str) -> Option<String> {
    let mut out = String::new();
    for word in text.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()) {
        let mut chars = word.chars();
        if let Some(first) = chars.next() {
            out.push(first.to_ascii_uppercase());
            out.extend(chars.map(|c| c.to_ascii_lowercase()));
        }
    }
    let start = out.find(|c: char| c.is_ascii_alphabetic())?;
    Some(out[start..].to_string())
}

fn expand_path(path: &str) -> Vec<&'static str> {
    if let Some(p) = FIELD_PATHS.iter().find(|p| **p == path) {
        return vec![p];
    }
    let prefix = format!("{path}.");
    FIELD_PATHS.iter().copied().filter(|p| p.starts_with(&prefix)).collect()
}

fn quote_values(values: &[String]) -> String {
    const SHOWN: usize = 3;
    let mut parts: Vec<String> = values.iter().take(SHOWN).map(|v| format!("\"{v}\"")).collect();
    if values.len() > SHOWN {
        parts.push(format!("and {} more", values.len() - SHOWN));
    }
    parts.join(", ")
}

struct Candidate {
    class_name: String,
    category: ScriptCategory,
    trigger_path: String,
    rationale: String,
    rule_index: usize,
    always: bool,
    /// Archetype index within a per-item rule (0 for the base class).
    item: usize,
    merged: Vec<String>,
}

/// Where a rule fired: the cited path and the values found there.
fn fire(rule: &Rule, spec: &GameSpec) -> Option<(String, Vec<String>)> {
    let trig = &rule.def.trigger;
    for path in &trig.paths {
        for sub in expand_path(path) {
            let values = spec.field_values(sub).unwrap_or_default();
            let hits: Vec<String> = match &rule.keyword {
                Some(re) => values.into_iter().filter(|v| re.is_match(v)).collect(),
                None => values,
            };
            if !hits.is_empty() {
                return Some((sub.to_string(), hits));
            }
        }
    }
    if trig.always {
        let path = expand_path(&trig.paths[0])[0].to_string();
        return Some((path, Vec::new()));
    }
    None
}

/// Applies the built-in rule table.
pub fn analyze(spec: &GameSpec) -> ScriptPlan {
    analyze_with(spec, &RuleTable::builtin())
}

pub fn analyze_with(spec: &GameSpec, table: &RuleTable) -> ScriptPlan {
    let mut candidates: Vec<Candidate> = Vec::new();
    for (rule_index, rule) in table.rules.iter().enumerate() {
        let Some((path, values)) = fire(rule, spec) else {
            continue;
        };
        let def = &rule.def;
        let always = def.trigger.always;
        match &def.per_item {
            Some(per) if !values.is_empty() => {
                let mut taken: Vec<String> = Vec::new();
                let mut base_merged = Vec::new();
                for value in &values {
                    let class_name = if taken.is_empty() {
                        def.class_name.clone()
                    } else {
                        match pascal_case(value) {
                            Some(p) => format!("{p}{}", per.class_suffix),
                            None => {
                                base_merged.push(value.clone());
                                continue;
                            }
                        }
                    };
                    if taken.len() >= per.max
                        || taken.contains(&class_name)
                        || candidates.iter().any(|c| c.class_name == class_name)
                    {
                        base_merged.push(value.clone());
                        continue;
                    }
                    let item = taken.len();
                    taken.push(class_name.clone());
                    candidates.push(Candidate {
                        class_name,
                        category: def.category,
                        trigger_path: path.clone(),
                        rationale: format!("{path}: archetype \"{value}\""),
                        rule_index,
                        always,
                        item,
                        merged: Vec::new(),
                    });
                }
                if let Some(base) = candidates
                    .iter_mut()
                    .find(|c| c.rule_index == rule_index && c.item == 0)
                {
                    base.merged = base_merged;
                }
            }
            _ => {
                let rationale = if values.is_empty() {
                    format!("{path}: always required for a {} project", spec.genre.label())
                } else {
                    format!("{path}: {}", quote_values(&values))
                };
                candidates.push(Candidate {
                    class_name: def.class_name.clone(),
                    category: def.category,
                    trigger_path: path,
                    rationale,
                    rule_index,
                    always,
                    item: 0,
                    merged: Vec::new(),
                });
            }
        }
    }

    enforce_cap(&mut candidates, table);

    let requirements: Vec<ScriptRequirement> = candidates
        .iter()
        .map(|c| {
            let mut rationale = c.rationale.clone();
            if !c.merged.is_empty() {
                rationale.push_str(&format!("; also covers {}", quote_values(&c.merged)));
            }
            ScriptRequirement {
                script_id: snake_case(&c.class_name),
                class_name: c.class_name.clone(),
                category: c.category,
                trigger_path: c.trigger_path.clone(),
                rationale,
                selected: true,
            }
        })
        .collect();
    let edges = build_edges(&candidates, table);
    ScriptPlan::from_parts(spec.digest(), requirements, edges)
        .expect("rule tables only reference earlier rules, so plans are acyclic")
}

fn build_edges(candidates: &[Candidate], table: &RuleTable) -> Vec<Edge> {
    let id_of = |class: &str| {
        candidates
            .iter()
            .find(|c| c.class_name == class)
            .map(|c| snake_case(&c.class_name))
    };
    let mut edges = Vec::new();
    for c in candidates {
        let def = &table.rules[c.rule_index].def;
        let from = snake_case(&c.class_name);
        let mut targets: Vec<String> = def.depends_on.iter().filter_map(|d| id_of(d)).collect();
        if let Some(first) = def.depends_on_first_of.iter().find_map(|d| id_of(d)) {
            targets.push(first);
        }
        for to in targets {
            let edge = Edge { from: from.clone(), to };
            if !edges.contains(&edge) {
                edges.push(edge);
            }
        }
    }
    edges
}

/// Keeps the plan within `max_requirements`: extra archetypes fold into their
/// base class first, then the last optional scripts nobody depends on go.
fn enforce_cap(candidates: &mut Vec<Candidate>, table: &RuleTable) {
    let max = table.max_requirements;
    while candidates.len() > max {
        if let Some(pos) = candidates.iter().rposition(|c| c.item > 0) {
            let removed = candidates.remove(pos);
            let value = removed
                .rationale
                .split('"')
                .nth(1)
                .unwrap_or(&removed.class_name)
                .to_string();
            if let Some(base) = candidates
                .iter_mut()
                .find(|c| c.rule_index == removed.rule_index && c.item == 0)
            {
                base.merged.insert(0, value);
            }
            continue;
        }
        let needed: HashSet<&str> = candidates
            .iter()
            .flat_map(|c| {
                let def = &table.rules[c.rule_index].def;
                def.depends_on.iter().chain(&def.depends_on_first_of).map(String::as_str)
            })
            .collect();
        match candidates
            .iter()
            .rposition(|c| !c.always && !needed.contains(c.class_name.as_str()))
        {
            Some(pos) => {
                let dropped = candidates.remove(pos);
                tracing::info!(class = %dropped.class_name, "dropping script to respect the plan cap");
            }
            None => break,
        }
    }
}

/// Topological order of the selected requirements, dependencies first, ties
/// broken by class name.
pub fn toposort(plan: &ScriptPlan) -> Result<Vec<String>, AnalyzeError> {
    let selected: HashSet<&str> = plan.selected().map(|r| r.script_id.as_str()).collect();
    kahn(plan, &selected)
}

fn toposort_all(plan: &ScriptPlan) -> Result<Vec<String>, AnalyzeError> {
    let all: HashSet<&str> = plan.requirements.iter().map(|r| r.script_id.as_str()).collect();
    kahn(plan, &all)
}

fn kahn(plan: &ScriptPlan, nodes: &HashSet<&str>) -> Result<Vec<String>, AnalyzeError> {
    let class_of: HashMap<&str, &str> = plan
        .requirements
        .iter()
        .map(|r| (r.script_id.as_str(), r.class_name.as_str()))
        .collect();
    let mut pending: HashMap<&str, usize> = nodes.iter().map(|n| (*n, 0)).collect();
    let mut dependents: HashMap<&str, Vec<&str>> = HashMap::new();
    for e in &plan.edges {
        if nodes.contains(e.from.as_str()) && nodes.contains(e.to.as_str()) {
            *pending.get_mut(e.from.as_str()).expect("node present") += 1;
            dependents.entry(e.to.as_str()).or_default().push(e.from.as_str());
        }
    }
    let key = |id: &str| (class_of.get(id).copied().unwrap_or(id).to_string(), id.to_string());
    let mut ready: BTreeSet<(String, String)> = pending
        .iter()
        .filter(|(_, n)| **n == 0)
        .map(|(id, _)| key(id))
        .collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(next) = ready.pop_first() {
        let id = next.1;
        for dep in dependents.get(id.as_str()).into_iter().flatten() {
            let n = pending.get_mut(dep).expect("node present");
            *n -= 1;
            if *n == 0 {
                ready.insert(key(dep));
            }
        }
        order.push(id);
    }
    if order.len() < nodes.len() {
        let done: HashSet<&str> = order.iter().map(String::as_str).collect();
        let remaining: BTreeSet<&str> = nodes.iter().copied().filter(|n| !done.contains(n)).collect();
        return Err(AnalyzeError::CycleDetected(find_cycle(plan, &remaining)));
    }
    Ok(order)
}

/// Walks dependency edges inside a set with no sources until a node repeats.
fn find_cycle(plan: &ScriptPlan, remaining: &BTreeSet<&str>) -> Vec<String> {
    let Some(start) = remaining.iter().next() else {
        return Vec::new();
    };
    let mut path: Vec<&str> = vec![start];
    let mut seen: HashMap<&str, usize> = HashMap::from([(*start, 0)]);
    loop {
        let current = *path.last().expect("non-empty");
        let next = plan
            .edges
            .iter()
            .filter(|e| e.from == current && remaining.contains(e.to.as_str()))
            .map(|e| e.to.as_str())
            .min();
        let Some(next) = next else {
            return path.iter().map(|s| s.to_string()).collect();
        };
        if let Some(&at) = seen.get(next) {
            let mut cycle: Vec<String> = path[at..].iter().map(|s| s.to_string()).collect();
            cycle.push(next.to_string());
            return cycle;
        }
        seen.insert(next, path.len());
        path.push(next);
    }
}

fn closure<'a>(plan: &'a ScriptPlan, start: &str, forward: bool) -> Vec<&'a str> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &plan.edges {
        let (a, b) = if forward { (&e.from, &e.to) } else { (&e.to, &e.from) };
        adjacency.entry(a.as_str()).or_default().push(b.as_str());
    }
    let mut seen: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    if let Some(r) = plan.requirement(start) {
        queue.push_back(r.script_id.as_str());
        seen.insert(r.script_id.as_str());
    }
    while let Some(n) = queue.pop_front() {
        for next in adjacency.get(n).into_iter().flatten() {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen.remove(start);
    plan.requirements
        .iter()
        .map(|r| r.script_id.as_str())
        .filter(|id| seen.contains(id))
        .collect()
}

/// Toggles one script. Deselecting also deselects everything that depends on
/// it; selecting also selects everything it depends on, so the selected set
/// stays closed under dependencies.
pub fn set_selection(plan: &ScriptPlan, script_id: &str, selected: bool) -> Result<SelectionChange, AnalyzeError> {
    let target = plan
        .requirement(script_id)
        .ok_or_else(|| AnalyzeError::UnknownScript(script_id.to_string()))?;
    let mut next = plan.clone();
    if target.selected == selected {
        return Ok(SelectionChange {
            plan: next,
            cascaded: Vec::new(),
        });
    }
    let related = closure(plan, script_id, selected);
    let cascaded: Vec<String> = related
        .into_iter()
        .filter(|id| plan.requirement(id).is_some_and(|r| r.selected != selected))
        .map(str::to_string)
        .collect();
    for r in &mut next.requirements {
        if r.script_id == script_id || cascaded.contains(&r.script_id) {
            r.selected = selected;
        }
    }
    next.generation_order = toposort(&next)?;
    Ok(SelectionChange { plan: next, cascaded })
}

/// True when every selected script's dependencies are selected too.
pub fn is_dependency_closed(plan: &ScriptPlan) -> bool {
    plan.edges.iter().all(|e| {
        let from = plan.requirement(&e.from).is_some_and(|r| r.selected);
        let to = plan.requirement(&e.to).is_some_and(|r| r.selected);
        !from || to
    })
}

/// Checks that `order` lists exactly the selected scripts and respects every
/// edge between them.
pub fn respects_edges(plan: &ScriptPlan, order: &[String]) -> bool {
    let position: HashMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let selected: BTreeSet<&str> = plan.selected().map(|r| r.script_id.as_str()).collect();
    let listed: BTreeSet<&str> = position.keys().copied().collect();
    if selected != listed || position.len() != order.len() {
        return false;
    }
    plan.edges.iter().all(|e| match (position.get(e.from.as_str()), position.get(e.to.as_str())) {
        (Some(f), Some(t)) => t < f,
        _ => true,
    })
}
