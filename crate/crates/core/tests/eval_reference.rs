use std::path::Path;
use std::time::{Duration, Instant};

use gddforge_core::eval::{aggregate, avg_column, ingest_file, render_report, ReportFormat};
use gddforge_core::rubric::Criterion;

const EXPECTED: &[(&str, [f64; 4], f64)] = &[
    ("LLaMA 3 8B Inst.", [4.5, 4.2, 4.0, 4.2], 4.2),
    ("Gemma 2 Inst.", [3.8, 3.5, 3.5, 3.2], 3.5),
    ("Qwen 1.5 Chat", [2.0, 4.8, 2.5, 2.8], 3.0),
    ("LLaMA 4 Maverick", [4.8, 4.8, 4.5, 4.6], 4.7),
    ("Ours (Finetuned)", [5.0, 4.9, 4.5, 4.8], 4.8),
];

#[test]
fn reproduces_reference_table() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference_scores.csv");
    let start = Instant::now();
    let records = ingest_file(&path).unwrap();
    let report = aggregate(&records).unwrap();
    let table = render_report(&report, ReportFormat::TableText);
    assert!(start.elapsed() < Duration::from_secs(1));

    assert_eq!(records.len(), 600);
    let order: Vec<&str> = EXPECTED.iter().map(|e| e.0).collect();
    assert_eq!(report.models, order);
    for (model, cells, avg) in EXPECTED {
        let scores = &report.per_model[*model];
        for (c, want) in Criterion::ALL.iter().zip(cells) {
            assert_eq!(scores.criterion_means[c], *want, "{model} {c}");
        }
        assert_eq!(scores.overall, *avg, "{model}");
        assert_eq!(scores.n_records, 120);
    }
    assert_eq!(avg_column(&table), ["4.2", "3.5", "3.0", "4.7", "4.8"]);
}

#[test]
fn csv_and_json_renderings_agree() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference_scores.csv");
    let report = aggregate(&ingest_file(&path).unwrap()).unwrap();
    let json = render_report(&report, ReportFormat::Json);
    let back: gddforge_core::eval::EvaluationReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
    let csv = render_report(&report, ReportFormat::Csv);
    assert_eq!(csv.lines().count(), 1 + EXPECTED.len());
    let radar = render_report(&report, ReportFormat::RadarCsv);
    assert!(radar.lines().any(|l| l == "Ours (Finetuned),5.0,4.9,4.5,4.8"), "{radar}");
}
