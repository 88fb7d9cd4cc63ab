//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use common::{core_fixture, crash_recovery, probe_all_states, Harness};
use gddforge_core::analyze::{analyze, set_selection, ScriptPlan};
use gddforge_core::config::Resources;
use gddforge_core::eval::{aggregate, avg_column, ingest_file, render_report, ReportFormat};
use gddforge_core::generate::{generate_all, GeneratedScript, MockBackend};
use gddforge_core::ingest::load_file;
use gddforge_core::job::JobStore;
use gddforge_core::package::verify;
use gddforge_core::rubric::Criterion;
use gddforge_core::spec::{validate_spec, CharacterSet, GameSpec, Genre, LevelSpec, MechanicSet};
use gddforge_core::validate::{
    check_structure, compilation_score, reconstruct, tokenize, validate_script, Finding, Severity, ValidateOptions,
    FINDING_CODES,
};

const FIXTURE_GDDS: &[&str] = &["platformer", "action_rpg", "puzzle"];
const FUZZ_CASES: usize = 10_000;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sample<S: Strategy>(runner: &mut TestRunner, strategy: &S) -> S::Value {
    strategy.new_tree(runner).expect("strategy generates").current()
}

fn reference_table() -> Result<String, String> {
    let start = Instant::now();
    let records = ingest_file(&core_fixture("reference_scores.csv")).map_err(|e| e.to_string())?;
    let report = aggregate(&records).map_err(|e| e.to_string())?;
    let avg = avg_column(&render_report(&report, ReportFormat::TableText));
    let elapsed = start.elapsed();
    let expected = ["4.2", "3.5", "3.0", "4.7", "4.8"];
    ensure(avg == expected, || format!("Avg column {avg:?}"))?;
    let cells: &[(&str, [f64; 4])] = &[
        ("LLaMA 3 8B Inst.", [4.5, 4.2, 4.0, 4.2]),
        ("Gemma 2 Inst.", [3.8, 3.5, 3.5, 3.2]),
        ("Qwen 1.5 Chat", [2.0, 4.8, 2.5, 2.8]),
        ("LLaMA 4 Maverick", [4.8, 4.8, 4.5, 4.6]),
        ("Ours (Finetuned)", [5.0, 4.9, 4.5, 4.8]),
    ];
    for (model, want) in cells {
        let got: Vec<f64> = Criterion::ALL
            .iter()
            .map(|c| report.per_model[*model].criterion_means[c])
            .collect();
        ensure(got == want, || format!("{model}: cells {got:?}"))?;
    }
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("Avg {} from {} records in {elapsed:?}", expected.join(", "), records.len()))
}

fn pinned_digests() -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(core_fixture("package_digests.json")).unwrap_or_default();
    serde_json::from_str(&text).unwrap_or_default()
}

fn run_job(store: &JobStore, gdd: &Path, out: &Path) -> Result<(String, Duration), String> {
    let res = Resources::default();
    let start = Instant::now();
    let doc = load_file(gdd, None, None).map_err(|e| e.to_string())?;
    let id = store.create(&doc).map_err(|e| e.to_string())?.job_id;
    store.extract(&id, &res, None).map_err(|e| e.to_string())?;
    store.plan(&id, &res).map_err(|e| e.to_string())?;
    store
        .run_generation(&id, &MockBackend::new(), 2, &res)
        .map_err(|e| e.to_string())?;
    let manifest = store.package_at(&id, out, false).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let bad = verify(&manifest, out);
    ensure(bad.is_empty(), || format!("{}: package does not verify: {bad:?}", gdd.display()))?;
    Ok((manifest.package_digest, elapsed))
}

fn end_to_end() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pinned = pinned_digests();
    let mut slowest = Duration::ZERO;
    let mut first_run: BTreeMap<&str, String> = BTreeMap::new();
    for run in ["first", "second"] {
        let store = JobStore::open(&tmp.path().join(run)).map_err(|e| e.to_string())?;
        for name in FIXTURE_GDDS {
            let gdd = core_fixture(&format!("gdd/{name}.md"));
            let out = tmp.path().join(format!("{run}-{name}"));
            let (digest, elapsed) = run_job(&store, &gdd, &out)?;
            slowest = slowest.max(elapsed);
            ensure(elapsed < Duration::from_secs(10), || format!("{name} took {elapsed:?}"))?;
            if let Some(prev) = first_run.insert(name, digest.clone()) {
                ensure(prev == digest, || format!("{name}: runs differ ({prev} vs {digest})"))?;
            }
            let want = pinned.get(*name).map(String::as_str);
            ensure(want == Some(digest.as_str()), || {
                format!("{name}: digest {digest} differs from pinned {want:?} ({run} run)")
            })?;
        }
    }
    Ok(format!(
        "{} GDDs x 2 runs match pinned digests; slowest job {slowest:?}",
        FIXTURE_GDDS.len()
    ))
}

fn phrase() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9 ]{0,14}[A-Za-z0-9]"
}

fn unique_phrases(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(phrase(), 0..max).prop_map(|v| {
        let mut seen = BTreeSet::new();
        v.into_iter().filter(|p| seen.insert(p.to_lowercase())).collect()
    })
}

fn arb_spec() -> impl Strategy<Value = GameSpec> {
    let genre = prop_oneof![
        Just(Genre::Platformer),
        Just(Genre::ActionRpg),
        Just(Genre::Puzzle),
        phrase().prop_map(Genre::Other),
    ];
    let levels = prop::collection::vec((phrase(), "[a-z]{0,8}", "[ -~]{0,24}"), 0..5).prop_map(|v| {
        let mut seen = BTreeSet::new();
        v.into_iter()
            .filter(|(name, _, _)| seen.insert(name.to_lowercase()))
            .map(|(name, environment_theme, description)| LevelSpec {
                name,
                environment_theme,
                description,
            })
            .collect::<Vec<_>>()
    });
    let mechanics = (unique_phrases(5), unique_phrases(5), unique_phrases(4), unique_phrases(4)).prop_map(
        |(movement, combat, objectives, interactions)| MechanicSet {
            movement,
            combat,
            objectives,
            interactions,
        },
    );
    let characters = (prop::option::of(phrase()), unique_phrases(5), prop::option::of(phrase()))
        .prop_map(|(player, enemies, boss)| CharacterSet { player, enemies, boss });
    (
        phrase(),
        genre,
        "[ -~\n]{0,60}",
        mechanics,
        characters,
        levels,
        prop::collection::btree_map("[a-z.]{1,12}", phrase(), 0..3),
    )
        .prop_map(|(title, genre, overview, mechanics, characters, levels, provenance)| GameSpec {
            title,
            genre,
            overview,
            mechanics,
            characters,
            levels,
            provenance,
        })
}

fn is_acyclic(plan: &ScriptPlan) -> bool {
    let mut remaining: BTreeSet<&str> = plan.requirements.iter().map(|r| r.script_id.as_str()).collect();
    loop {
        let free: Vec<&str> = remaining
            .iter()
            .copied()
            .filter(|id| !plan.edges.iter().any(|e| e.from == *id && remaining.contains(e.to.as_str())))
            .collect();
        if free.is_empty() {
            return remaining.is_empty();
        }
        for id in free {
            remaining.remove(id);
        }
    }
}

fn order_ok(plan: &ScriptPlan) -> Result<(), String> {
    let selected: BTreeSet<&str> = plan
        .requirements
        .iter()
        .filter(|r| r.selected)
        .map(|r| r.script_id.as_str())
        .collect();
    let listed: BTreeSet<&str> = plan.generation_order.iter().map(String::as_str).collect();
    ensure(listed == selected && listed.len() == plan.generation_order.len(), || {
        format!("order {:?} is not the selected set {selected:?}", plan.generation_order)
    })?;
    let pos: HashMap<&str, usize> = plan
        .generation_order
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    for e in &plan.edges {
        let sel = |id: &str| selected.contains(id);
        if sel(&e.from) && !sel(&e.to) {
            return Err(format!("{} selected without dependency {}", e.from, e.to));
        }
        if let (Some(f), Some(t)) = (pos.get(e.from.as_str()), pos.get(e.to.as_str())) {
            ensure(t < f, || format!("{} ordered before its dependency {}", e.from, e.to))?;
        }
    }
    Ok(())
}

fn plan_properties() -> Result<String, String> {
    let mut runner = TestRunner::deterministic();
    let specs = arb_spec();
    let mut toggles = 0;
    let mut max_size = 0;
    for case in 0..200 {
        let spec = sample(&mut runner, &specs);
        let mut plan = analyze(&spec);
        max_size = max_size.max(plan.requirements.len());
        ensure(is_acyclic(&plan), || format!("case {case}: cyclic plan"))?;
        order_ok(&plan).map_err(|e| format!("case {case}: {e}"))?;
        if plan.requirements.is_empty() {
            continue;
        }
        for step in 0..20 {
            let idx = sample(&mut runner, &(0..plan.requirements.len()));
            let on = sample(&mut runner, &any::<bool>());
            let id = plan.requirements[idx].script_id.clone();
            plan = set_selection(&plan, &id, on)
                .map_err(|e| format!("case {case} toggle {step}: {e}"))?
                .plan;
            order_ok(&plan).map_err(|e| format!("case {case} toggle {step}: {e}"))?;
            toggles += 1;
        }
    }
    Ok(format!("200 specs, {toggles} toggles, plans up to {max_size} scripts"))
}

fn fuzz_corpus() -> Vec<String> {
    let mut runner = TestRunner::deterministic();
    let code_bytes: Vec<u8> = b"{}()[];,.:=<>+-*/\\\"'@$#`\n\r\t abcxyzPublicvoid0123_".to_vec();
    let raw = prop::collection::vec(any::<u8>(), 0..400);
    let codeish = prop::collection::vec(prop::sample::select(code_bytes), 0..400);
    let strategy = prop_oneof![raw, codeish];
    (0..FUZZ_CASES)
        .map(|_| String::from_utf8_lossy(&sample(&mut runner, &strategy)).into_owned())
        .collect()
}

fn corpus(kind: &str) -> Result<Vec<(String, String)>, String> {
    let dir = core_fixture(&format!("csharp/{kind}"));
    let mut out = Vec::new();
    for entry in std::fs::read_dir(&dir).map_err(|e| format!("{}: {e}", dir.display()))? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        out.push((path.file_name().unwrap().to_string_lossy().into_owned(), text));
    }
    out.sort();
    Ok(out)
}

fn validator_totality() -> Result<String, String> {
    let fuzz = fuzz_corpus();
    for (i, src) in fuzz.iter().enumerate() {
        let rebuilt = catch_unwind(|| reconstruct(src, &tokenize(src)))
            .map_err(|_| format!("tokenizer panicked on fuzz case {i}"))?;
        ensure(rebuilt.as_deref() == Some(src.as_str()), || format!("fuzz case {i} does not round-trip"))?;
        catch_unwind(|| check_structure(src)).map_err(|_| format!("structure check panicked on fuzz case {i}"))?;
    }
    let good = corpus("good")?;
    ensure(good.len() >= 10, || format!("only {} golden scripts", good.len()))?;
    for (name, src) in &good {
        let errors: Vec<String> = check_structure(src)
            .into_iter()
            .filter(Finding::is_error)
            .map(|f| f.code)
            .collect();
        ensure(errors.is_empty(), || format!("{name}: {errors:?}"))?;
    }
    let broken = corpus("broken")?;
    ensure(broken.len() >= 10, || format!("only {} broken scripts", broken.len()))?;
    for (name, src) in &broken {
        let expected = src
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("// expect: "))
            .ok_or_else(|| format!("{name}: no expectation line"))?
            .trim();
        let codes: Vec<String> = check_structure(src).into_iter().map(|f| f.code).collect();
        ensure(codes.iter().any(|c| c == expected), || format!("{name}: expected {expected}, got {codes:?}"))?;
    }
    Ok(format!(
        "{} fuzz inputs round-trip; {} golden clean; {} broken flagged",
        fuzz.len(),
        good.len(),
        broken.len()
    ))
}

fn proxy_bounds() -> Result<String, String> {
    let opts = ValidateOptions::default();
    let keywords: BTreeSet<String> = ["jump", "enemy", "score"].into_iter().map(String::from).collect();
    let classes: BTreeSet<String> = BTreeSet::from(["Fuzz".to_string()]);
    let error_codes: Vec<&str> = FINDING_CODES
        .iter()
        .filter(|(_, s)| *s == Severity::Error)
        .map(|(c, _)| *c)
        .collect();
    let mut injections = 0;
    for (i, src) in fuzz_corpus().iter().enumerate() {
        let script = GeneratedScript::new("fuzz", "Fuzz", src, "mock", "", 0, 1);
        let report = catch_unwind(AssertUnwindSafe(|| validate_script(&script, None, &keywords, &classes, &opts)))
            .map_err(|_| format!("validator panicked on fuzz case {i}"))?;
        for (c, v) in &report.proxy_scores {
            ensure(v.is_finite() && (0.0..=5.0).contains(v), || format!("case {i}: {c} = {v}"))?;
        }
        let base = compilation_score(&report.findings, &opts.weights);
        for code in &error_codes {
            let mut more = report.findings.clone();
            more.push(Finding::error(code, 1, "injected"));
            let after = compilation_score(&more, &opts.weights);
            ensure(after <= base, || format!("case {i}: injecting {code} raised {base} to {after}"))?;
            injections += 1;
        }
    }
    Ok(format!("{FUZZ_CASES} scripts in [0,5]; {injections} injected errors never raised compilation"))
}

fn reachable_dependents(plan: &ScriptPlan, root: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![root.to_string()];
    while let Some(id) = stack.pop() {
        for e in plan.edges.iter().filter(|e| e.to == id) {
            if seen.insert(e.from.clone()) {
                stack.push(e.from.clone());
            }
        }
    }
    seen
}

fn skip_closure() -> Result<String, String> {
    let res = Resources::default();
    let mut runs = 0;
    for name in FIXTURE_GDDS {
        let doc = load_file(&core_fixture(&format!("gdd/{name}.md")), None, None).map_err(|e| e.to_string())?;
        let sectioned = gddforge_core::ingest::segment_sections(&doc);
        let spec = gddforge_core::spec::extract_spec(
            &sectioned,
            &res.lexicon,
            gddforge_core::spec::ExtractMode::Heuristic,
        )
        .map_err(|e| e.to_string())?
        .spec;
        let plan = analyze(&spec);
        for req in &plan.requirements {
            let backend = MockBackend::new().failing(&[req.class_name.as_str()]);
            let report = generate_all(&spec, &plan, &backend, 2);
            let failed: BTreeSet<String> = report.failed.iter().map(|f| f.script_id.clone()).collect();
            let skipped: BTreeSet<String> = report.skipped.iter().map(|s| s.script_id.clone()).collect();
            let generated: BTreeSet<String> = report.generated.iter().map(|g| g.script_id.clone()).collect();
            let expected = reachable_dependents(&plan, &req.script_id);
            ensure(failed == BTreeSet::from([req.script_id.clone()]), || {
                format!("{name}/{}: failed set {failed:?}", req.script_id)
            })?;
            ensure(skipped == expected, || {
                format!("{name}/{}: skipped {skipped:?}, reachable {expected:?}", req.script_id)
            })?;
            let total = generated.len() + failed.len() + skipped.len();
            ensure(total == plan.generation_order.len(), || format!("{name}/{}: scripts lost", req.script_id))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} single-failure runs over {} fixture plans", FIXTURE_GDDS.len()))
}

fn schema_round_trip() -> Result<String, String> {
    let mut runner = TestRunner::deterministic();
    let specs = arb_spec();
    for case in 0..1000 {
        let spec = sample(&mut runner, &specs);
        let json = serde_json::to_string(&spec).map_err(|e| e.to_string())?;
        let back = validate_spec(&json).map_err(|e| format!("case {case}: {e}\n{json}"))?;
        ensure(back == spec, || format!("case {case}: value changed"))?;
        let again = serde_json::to_string(&back).map_err(|e| e.to_string())?;
        ensure(again == json, || format!("case {case}: serialization changed"))?;
    }
    Ok("1000 generated specs round-trip".to_string())
}

fn service_state_machine() -> Result<String, String> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let h = Harness::open(&tmp.path().join("probe"), None);
        let rejected = probe_all_states(&h).await?;
        crash_recovery(&tmp.path().join("crash")).await?;
        Ok(format!("{rejected} out-of-order calls rejected with 409; crashed job resumed"))
    })
}

fn main() {
    let checks: &[(&str, Check)] = &[
        ("reference_table_reproduction", reference_table),
        ("end_to_end_determinism", end_to_end),
        ("plan_properties", plan_properties),
        ("validator_totality_and_round_trip", validator_totality),
        ("proxy_bounds_and_monotonicity", proxy_bounds),
        ("skip_closure", skip_closure),
        ("schema_round_trip", schema_round_trip),
        ("service_state_machine", service_state_machine),
    ];
    let default_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name} ({secs:.2}s): {detail}");
            }
        }
    }
    std::panic::set_hook(default_hook);
    if failures > 0 {
        std::process::exit(1);
    }
}
