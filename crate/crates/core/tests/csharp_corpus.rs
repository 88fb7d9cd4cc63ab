use std::fs;
use std::path::PathBuf;

use gddforge_core::validate::{check_structure, reconstruct, summarize_class, tokenize, Finding};

fn corpus(kind: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/csharp").join(kind);
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cs"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

fn codes(findings: &[Finding]) -> Vec<&str> {
    findings.iter().map(|f| f.code.as_str()).collect()
}

#[test]
fn golden_scripts_have_no_errors() {
    let files = corpus("good");
    assert!(files.len() >= 10);
    for (name, source) in &files {
        let findings = check_structure(source);
        let errors: Vec<_> = findings.iter().filter(|f| f.is_error()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
        assert_eq!(reconstruct(source, &tokenize(source)).as_deref(), Some(source.as_str()), "{name}");
        assert!(!summarize_class(source).unwrap().is_empty(), "{name}");
    }
}

#[test]
fn broken_scripts_report_expected_code() {
    let files = corpus("broken");
    assert!(files.len() >= 10);
    for (name, source) in &files {
        let expected = source
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("// expect: "))
            .unwrap_or_else(|| panic!("{name} has no expectation line"))
            .trim();
        let findings = check_structure(source);
        assert!(codes(&findings).contains(&expected), "{name}: expected {expected}, got {:?}", codes(&findings));
        assert_eq!(reconstruct(source, &tokenize(source)).as_deref(), Some(source.as_str()), "{name}");
    }
}
