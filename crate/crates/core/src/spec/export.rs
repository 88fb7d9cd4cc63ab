//! JSONL prompt/response pairs for fine-tuning corpora.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::GameSpec;
use crate::generate::GeneratedScript;

pub const FILE_DELIMITER_PREFIX: &str = "// ──── FILE: ";
const FILE_DELIMITER_SUFFIX: &str = " ────";

#[derive(Serialize)]
struct TrainingPair<'a> {
    prompt: &'a str,
    response: &'a str,
}

/// A GameSpec as a compact design-document style text.
pub fn render_spec_text(spec: &GameSpec) -> String {
    let mut out = format!("Title: {}\nGenre: {}\n", spec.title, spec.genre.label());
    if !spec.overview.is_empty() {
        out.push_str(&format!("\nOverview:\n{}\n", spec.overview));
    }
    let m = &spec.mechanics;
    let groups = [
        ("Movement", &m.movement),
        ("Combat", &m.combat),
        ("Objectives", &m.objectives),
        ("Interactions", &m.interactions),
    ];
    if !m.is_empty() {
        out.push_str("\nMechanics:\n");
        for (label, list) in groups.iter().filter(|(_, l)| !l.is_empty()) {
            out.push_str(&format!("- {label}: {}\n", list.join("; ")));
        }
    }
    let c = &spec.characters;
    if c.player.is_some() || !c.enemies.is_empty() || c.boss.is_some() {
        out.push_str("\nCharacters:\n");
        if let Some(p) = &c.player {
            out.push_str(&format!("- Player: {p}\n"));
        }
        if !c.enemies.is_empty() {
            out.push_str(&format!("- Enemies: {}\n", c.enemies.join("; ")));
        }
        if let Some(b) = &c.boss {
            out.push_str(&format!("- Boss: {b}\n"));
        }
    }
    if !spec.levels.is_empty() {
        out.push_str("\nLevels:\n");
        for l in &spec.levels {
            let mut line = format!("- {}", l.name);
            if !l.environment_theme.is_empty() {
                line.push_str(&format!(" ({})", l.environment_theme));
            }
            if !l.description.is_empty() {
                line.push_str(&format!(": {}", l.description));
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

pub fn file_delimiter(file_name: &str) -> String {
    format!("{FILE_DELIMITER_PREFIX}{file_name}{FILE_DELIMITER_SUFFIX}")
}

/// One JSON line (without the trailing newline) pairing the rendered spec
/// with every script source, each preceded by a file delimiter.
pub fn export_training_pair(spec: &GameSpec, scripts: &[GeneratedScript]) -> String {
    let prompt = render_spec_text(spec);
    let mut response = String::new();
    for (i, s) in scripts.iter().enumerate() {
        if i > 0 {
            response.push('\n');
        }
        response.push_str(&file_delimiter(&s.file_name));
        response.push('\n');
        response.push_str(s.source.trim_end());
        response.push('\n');
    }
    serde_json::to_string(&TrainingPair {
        prompt: &prompt,
        response: &response,
    })
    .expect("strings always serialize")
}

/// Appends one record to a JSONL corpus file, creating it if needed.
pub fn append_training_pair(path: &Path, spec: &GameSpec, scripts: &[GeneratedScript]) -> std::io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = export_training_pair(spec, scripts);
    line.push('\n');
    file.write_all(line.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Genre;
    use serde_json::Value;

    fn script(class: &str) -> GeneratedScript {
        GeneratedScript::new(
            &class.to_lowercase(),
            class,
            &format!("public class {class} {{ }}\n"),
            "mock",
            "d",
            0,
            1,
        )
    }

    fn spec() -> GameSpec {
        let mut spec = GameSpec::new("Hop", Genre::Platformer);
        spec.mechanics.movement = vec!["jump".into()];
        spec
    }

    #[test]
    fn single_record_has_prompt_and_response() {
        let line = export_training_pair(&spec(), &[script("A")]);
        assert!(!line.contains('\n'));
        let v: Value = serde_json::from_str(&line).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.keys().collect::<Vec<_>>(), ["prompt", "response"]);
        assert!(obj["prompt"].as_str().unwrap().contains("Movement: jump"));
    }

    #[test]
    fn one_delimiter_per_script() {
        let scripts = [script("A"), script("B"), script("C")];
        let v: Value = serde_json::from_str(&export_training_pair(&spec(), &scripts)).unwrap();
        let response = v["response"].as_str().unwrap();
        for s in &scripts {
            assert_eq!(response.matches(&file_delimiter(&s.file_name)).count(), 1);
        }
        assert_eq!(response.matches(FILE_DELIMITER_PREFIX).count(), 3);
    }

    #[test]
    fn appends_independent_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.jsonl");
        append_training_pair(&path, &spec(), &[script("A")]).unwrap();
        append_training_pair(&path, &spec(), &[script("B")]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        for l in lines {
            serde_json::from_str::<Value>(l).unwrap();
        }
    }
}
