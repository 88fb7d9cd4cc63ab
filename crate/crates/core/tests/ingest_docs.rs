use std::path::{Path, PathBuf};

use gddforge_core::ingest::{load_file, segment_sections, Converter, DocFormat, IngestError};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn show_text_converter() -> Converter {
    Converter {
        command: "sh".into(),
        args: vec![fixture("converters/pdf_show_text.sh").display().to_string()],
    }
}

#[test]
fn pdf_goes_through_converter() {
    let conv = show_text_converter();
    let doc = load_file(&fixture("docs/hello.pdf"), None, Some(&conv)).unwrap();
    assert_eq!(doc.format, DocFormat::Pdf);
    assert_eq!(doc.text, "Hello GDD");
    assert_eq!(doc.char_count, 9);
    assert_eq!(doc.name.as_deref(), Some("hello"));
}

#[test]
fn pdf_without_converter_fails() {
    let err = load_file(&fixture("docs/hello.pdf"), None, None).unwrap_err();
    assert!(matches!(err, IngestError::ConverterUnavailable(DocFormat::Pdf)));
}

#[test]
fn failing_converter_is_reported() {
    let conv = Converter {
        command: "sh".into(),
        args: vec!["-c".into(), "echo broken >&2; exit 3".into(), "conv".into()],
    };
    let err = load_file(&fixture("docs/hello.pdf"), None, Some(&conv)).unwrap_err();
    match err {
        IngestError::ConverterFailed(msg) => assert!(msg.contains("broken"), "{msg}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn mixed_headings_tile_the_document() {
    let doc = load_file(&fixture("gdd/mixed_headings.md"), None, None).unwrap();
    let sectioned = segment_sections(&doc);
    let headings: Vec<&str> = sectioned.headings().collect();
    assert_eq!(
        headings,
        [
            "GAME TITLE: Rust Runners",
            "THE CONCEPT",
            "CORE GAMEPLAY MECHANICS",
            "Who You Play",
            "FOES",
            "Arenas",
            "Win Conditions",
        ]
    );
    let mut pos = 0;
    for s in &sectioned.sections {
        assert_eq!(s.char_span.0, pos, "gap before {}", s.heading);
        assert!(s.char_span.1 > s.char_span.0);
        pos = s.char_span.1;
    }
    assert_eq!(pos, doc.char_count);
}

#[test]
fn every_fixture_gdd_tiles() {
    for name in ["platformer.md", "action_rpg.md", "puzzle.md", "mixed_headings.md"] {
        let doc = load_file(&fixture(&format!("gdd/{name}")), None, None).unwrap();
        let sectioned = segment_sections(&doc);
        let chars: Vec<char> = doc.text.chars().collect();
        let rebuilt: String = sectioned
            .sections
            .iter()
            .map(|s| chars[s.char_span.0..s.char_span.1].iter().collect::<String>())
            .collect();
        assert_eq!(rebuilt, doc.text, "{name}");
    }
}
