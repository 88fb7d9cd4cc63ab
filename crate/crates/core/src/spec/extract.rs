//! Heuristic and model-assisted extraction of a [`GameSpec`].

use std::collections::{BTreeMap, HashSet};

use serde_json::Value;

use super::lexicon::{Category, Lexicon};
use super::{validate_value, GameSpec, Genre, LevelSpec, SpecError, GAMESPEC_SCHEMA};
use crate::generate::{ChatBackend, ChatMessage, ChatRequest};
use crate::ingest::{is_list_item, SectionedDocument, DEFAULT_SECTION_HEADING};

const MAX_PHRASE_WORDS: usize = 8;

/// Words that end a sentence-initial noun phrase.
const PHRASE_STOPS: &[&str] = &[
    "is", "are", "was", "were", "can", "could", "will", "would", "should", "must", "may",
    "lets", "let", "allows", "allow", "enables", "gives", "makes", "has", "have", "that",
    "which", "where", "when", "while", "so",
];

const EXTRACTION_TAG: &str = "GameSpec";

const EXTRACTION_SYSTEM: &str = "You convert game design documents into a structured game \
specification. Reply with a single JSON object that satisfies the provided JSON schema and \
nothing else.";

#[derive(Clone, Copy)]
pub enum ExtractMode<'a> {
    Heuristic,
    /// Ask the backend for schema-conforming JSON, with one repair round.
    LlmAssisted(&'a dyn ChatBackend),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub spec: GameSpec,
    /// Set when model-assisted extraction failed validation twice and the
    /// heuristic result was used instead.
    pub fallback_reason: Option<String>,
}

pub fn extract_spec(
    doc: &SectionedDocument,
    lexicon: &Lexicon,
    mode: ExtractMode<'_>,
) -> Result<Extraction, SpecError> {
    match mode {
        ExtractMode::Heuristic => Ok(Extraction {
            spec: heuristic(doc, lexicon),
            fallback_reason: None,
        }),
        ExtractMode::LlmAssisted(backend) => llm_assisted(doc, lexicon, backend),
    }
}

fn llm_assisted(
    doc: &SectionedDocument,
    lexicon: &Lexicon,
    backend: &dyn ChatBackend,
) -> Result<Extraction, SpecError> {
    let mut rendered = String::new();
    for section in &doc.sections {
        rendered.push_str(&format!("## {}\n{}\n\n", section.heading, section.body));
    }
    let mut messages = vec![
        ChatMessage::system(EXTRACTION_SYSTEM),
        ChatMessage::user(format!(
            "JSON schema:\n{GAMESPEC_SCHEMA}\n\nGame design document:\n{rendered}"
        )),
    ];

    let first = backend.complete(&ChatRequest::new(EXTRACTION_TAG, messages.clone()))?;
    let violation = match parse_model_json(&first.text) {
        Ok(spec) => return Ok(Extraction { spec, fallback_reason: None }),
        Err(e) => e,
    };

    messages.push(ChatMessage::assistant(first.text));
    messages.push(ChatMessage::user(format!(
        "That JSON failed validation: {violation}. Return the corrected JSON object only."
    )));
    let second = backend.complete(&ChatRequest::new(EXTRACTION_TAG, messages))?;
    match parse_model_json(&second.text) {
        Ok(spec) => Ok(Extraction { spec, fallback_reason: None }),
        Err(e) => {
            tracing::warn!(error = %e, "model extraction failed after repair, using heuristics");
            Ok(Extraction {
                spec: heuristic(doc, lexicon),
                fallback_reason: Some(e.to_string()),
            })
        }
    }
}

fn parse_model_json(text: &str) -> Result<GameSpec, SpecError> {
    let body = match crate::generate::first_fenced_block(text) {
        Some(block) => block.content,
        None => {
            let start = text.find('{');
            let end = text.rfind('}');
            match (start, end) {
                (Some(s), Some(e)) if s < e => text[s..=e].to_string(),
                _ => text.to_string(),
            }
        }
    };
    let value: Value = serde_json::from_str(&body).map_err(|e| SpecError::Parse(e.to_string()))?;
    validate_value(&value)
}

#[derive(Default)]
struct Builder {
    title: Option<String>,
    genre: Option<Genre>,
    overview: Option<String>,
    movement: Vec<String>,
    combat: Vec<String>,
    objectives: Vec<String>,
    interactions: Vec<String>,
    player: Option<String>,
    enemies: Vec<String>,
    boss: Option<String>,
    levels: Vec<LevelSpec>,
    provenance: BTreeMap<String, String>,
}

impl Builder {
    fn cite(&mut self, path: &str, heading: &str) {
        self.provenance
            .entry(path.to_string())
            .or_insert_with(|| heading.to_string());
    }

    fn set_title(&mut self, value: &str, heading: &str) {
        let value = clean_value(value);
        if self.title.is_none() && !value.is_empty() {
            self.title = Some(value);
            self.cite("title", heading);
        }
    }

    fn set_genre(&mut self, value: &str, heading: &str, lexicon: &Lexicon) {
        let value = clean_value(value);
        if self.genre.is_none() && !value.is_empty() {
            self.genre = Some(lexicon.normalize_genre(&value));
            self.cite("genre", heading);
        }
    }

    fn add_mechanic(&mut self, category: Category, phrase: String, heading: &str) {
        let (list, path) = match category {
            Category::Movement => (&mut self.movement, "mechanics.movement"),
            Category::Combat => (&mut self.combat, "mechanics.combat"),
            Category::Objectives => (&mut self.objectives, "mechanics.objectives"),
            _ => (&mut self.interactions, "mechanics.interactions"),
        };
        if push_distinct(list, phrase) {
            self.cite(path, heading);
        }
    }

    fn add_enemy(&mut self, name: String, heading: &str) {
        if push_distinct(&mut self.enemies, name) {
            self.cite("characters.enemies", heading);
        }
    }

    fn set_boss(&mut self, name: String, heading: &str) {
        if self.boss.is_none() && !name.is_empty() {
            self.boss = Some(name);
            self.cite("characters.boss", heading);
        }
    }

    fn set_player(&mut self, text: String, heading: &str) {
        if self.player.is_none() && !text.is_empty() {
            self.player = Some(text);
            self.cite("characters.player", heading);
        }
    }
}

/// Case-insensitive de-duplicating push. Returns whether the phrase was new.
fn push_distinct(list: &mut Vec<String>, phrase: String) -> bool {
    let folded = phrase.to_lowercase();
    if phrase.is_empty() || list.iter().any(|p| p.to_lowercase() == folded) {
        return false;
    }
    list.push(phrase);
    true
}

fn heuristic(doc: &SectionedDocument, lexicon: &Lexicon) -> GameSpec {
    let mut b = Builder::default();

    for section in &doc.sections {
        let heading = section.heading.as_str();

        // "Genre: Platformer" style headings and key/value lines.
        let (heading_key, heading_value) = match heading.split_once(':') {
            Some((k, v)) if !v.trim().is_empty() => (k.trim(), Some(v.trim())),
            _ => (heading, None),
        };
        for line in section.body.lines() {
            let line = strip_list_marker(line);
            if let Some((k, v)) = line.split_once(':') {
                let k = k.trim();
                if k.split_whitespace().count() <= 2 {
                    if lexicon.heading_matches(k, Category::Title) {
                        b.set_title(v, heading);
                    } else if lexicon.heading_matches(k, Category::Genre) {
                        b.set_genre(v, heading, lexicon);
                    }
                }
            }
        }

        let Some(category) = lexicon.classify_heading(heading_key) else {
            continue;
        };
        let body = strip_key_value_lines(&section.body, lexicon);

        match category {
            Category::Title => match heading_value {
                Some(v) => b.set_title(v, heading),
                None => {
                    if let Some(first) = body.lines().map(str::trim).find(|l| !l.is_empty()) {
                        b.set_title(first, heading);
                    }
                }
            },
            Category::Genre => match heading_value {
                Some(v) => b.set_genre(v, heading, lexicon),
                None => {
                    if let Some(first) = body.lines().map(str::trim).find(|l| !l.is_empty()) {
                        b.set_genre(first, heading, lexicon);
                    }
                }
            },
            Category::Overview => {
                if b.overview.is_none() {
                    if let Some(para) = first_paragraph(&body) {
                        b.overview = Some(para);
                        b.cite("overview", heading);
                    }
                }
            }
            Category::Movement | Category::Combat | Category::Objectives | Category::Interactions => {
                for item in items(&body) {
                    if let Some(phrase) = mechanic_phrase(&item) {
                        b.add_mechanic(category, phrase, heading);
                    }
                }
            }
            Category::Mechanics => {
                for item in items(&body) {
                    if let Some(phrase) = mechanic_phrase(&item) {
                        let routed = lexicon.classify_phrase(&phrase).unwrap_or(Category::Interactions);
                        b.add_mechanic(routed, phrase, heading);
                    }
                }
            }
            Category::Player => {
                let text = heading_value
                    .map(str::to_string)
                    .or_else(|| items(&body).into_iter().next())
                    .map(|t| clean_value(&t))
                    .unwrap_or_default();
                b.set_player(text, heading);
            }
            Category::Enemies | Category::Boss => {
                let also_enemies = category == Category::Enemies
                    || lexicon.heading_matches(heading_key, Category::Enemies);
                for item in items(&body) {
                    let (label, rest) = split_label(&item);
                    let names = || entity_names(rest.unwrap_or(&item));
                    let is_boss_item = label.is_some_and(|l| lexicon.heading_matches(l, Category::Boss))
                        || (label.is_none() && lexicon.heading_matches(&item, Category::Boss));
                    if is_boss_item || (category == Category::Boss && !also_enemies) {
                        if let Some(name) = names().into_iter().next() {
                            b.set_boss(name, heading);
                        }
                    } else {
                        for name in names() {
                            b.add_enemy(name, heading);
                        }
                    }
                }
            }
            Category::Characters => {
                for item in items(&body) {
                    let (Some(label), Some(rest)) = split_label(&item) else {
                        continue;
                    };
                    if lexicon.heading_matches(label, Category::Player) {
                        b.set_player(clean_value(rest), heading);
                    } else if lexicon.heading_matches(label, Category::Boss) {
                        if let Some(name) = entity_names(rest).into_iter().next() {
                            b.set_boss(name, heading);
                        }
                    } else if lexicon.heading_matches(label, Category::Enemies) {
                        for name in entity_names(rest) {
                            b.add_enemy(name, heading);
                        }
                    }
                }
            }
            Category::Levels => {
                if let Some(name) = heading_value {
                    let description = first_paragraph(&body).unwrap_or_default();
                    push_level(&mut b, lexicon, name, None, description, heading);
                }
                for line in level_lines(&body) {
                    if let Some((name, theme, description)) = parse_level_line(&line) {
                        push_level(&mut b, lexicon, &name, theme, description, heading);
                    }
                }
            }
        }
    }

    let title = b
        .title
        .clone()
        .or_else(|| {
            doc.sections
                .iter()
                .find(|s| {
                    s.level == 1
                        && s.heading != DEFAULT_SECTION_HEADING
                        && lexicon.classify_heading(&s.heading).is_none()
                })
                .map(|s| {
                    b.cite("title", &s.heading);
                    s.heading.clone()
                })
        })
        .or_else(|| doc.source_name.clone().filter(|n| !n.trim().is_empty()))
        .unwrap_or_else(|| "Untitled".to_string());

    GameSpec {
        title,
        genre: b
            .genre
            .clone()
            .unwrap_or_else(|| Genre::Other("unspecified".to_string())),
        overview: b.overview.clone().unwrap_or_default(),
        mechanics: super::MechanicSet {
            movement: b.movement,
            combat: b.combat,
            objectives: b.objectives,
            interactions: b.interactions,
        },
        characters: super::CharacterSet {
            player: b.player,
            enemies: b.enemies,
            boss: b.boss,
        },
        levels: b.levels,
        provenance: b.provenance,
    }
}

fn push_level(
    b: &mut Builder,
    lexicon: &Lexicon,
    name: &str,
    theme: Option<String>,
    description: String,
    heading: &str,
) {
    let name = clean_value(name);
    if name.is_empty() || b.levels.iter().any(|l| l.name.eq_ignore_ascii_case(&name)) {
        return;
    }
    let environment_theme = theme
        .or_else(|| lexicon.find_theme(&format!("{name} {description}")).map(str::to_string))
        .unwrap_or_default();
    b.levels.push(LevelSpec {
        name,
        environment_theme,
        description,
    });
    b.cite("levels", heading);
}

fn strip_list_marker(line: &str) -> &str {
    let t = line.trim();
    if !is_list_item(t) {
        return t;
    }
    let rest = t.trim_start_matches(|c: char| c.is_ascii_digit());
    let rest = rest
        .strip_prefix(". ")
        .or_else(|| rest.strip_prefix(") "))
        .or_else(|| rest.strip_prefix("- "))
        .or_else(|| rest.strip_prefix("* "))
        .or_else(|| rest.strip_prefix("+ "))
        .or_else(|| rest.strip_prefix("• "))
        .unwrap_or(rest);
    rest.trim()
}

fn strip_key_value_lines(body: &str, lexicon: &Lexicon) -> String {
    body.lines()
        .filter(|line| {
            let line = strip_list_marker(line);
            match line.split_once(':') {
                Some((k, _)) => {
                    let k = k.trim();
                    !(k.split_whitespace().count() <= 2
                        && (lexicon.heading_matches(k, Category::Title)
                            || lexicon.heading_matches(k, Category::Genre)))
                }
                None => true,
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// List items if the body has any, otherwise its sentences.
fn items(body: &str) -> Vec<String> {
    let bullets: Vec<String> = body
        .lines()
        .filter(|l| is_list_item(l))
        .map(|l| strip_list_marker(l).to_string())
        .filter(|l| !l.is_empty())
        .collect();
    if !bullets.is_empty() {
        return bullets;
    }
    sentences(body)
}

fn sentences(body: &str) -> Vec<String> {
    let joined = body.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut out = Vec::new();
    let mut current = String::new();
    let chars: Vec<char> = joined.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        current.push(c);
        let at_boundary = matches!(c, '.' | '!' | '?') && chars.get(i + 1).is_none_or(|n| *n == ' ');
        if at_boundary {
            let s = current.trim().to_string();
            if !s.is_empty() {
                out.push(s);
            }
            current.clear();
        }
    }
    let tail = current.trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}

fn first_paragraph(body: &str) -> Option<String> {
    body.split("\n\n")
        .map(|p| p.split_whitespace().collect::<Vec<_>>().join(" "))
        .find(|p| !p.is_empty())
}

/// `Label: rest` when the label is short.
fn split_label(item: &str) -> (Option<&str>, Option<&str>) {
    match item.split_once(':') {
        Some((label, rest)) if label.split_whitespace().count() <= 3 && !rest.trim().is_empty() => {
            (Some(label.trim()), Some(rest.trim()))
        }
        _ => (None, None),
    }
}

fn cut_at_separators(text: &str) -> &str {
    let seps = [":", " - ", " \u{2013} ", " \u{2014} ", "(", ";", ","];
    let end = seps
        .iter()
        .filter_map(|s| text.find(s))
        .min()
        .unwrap_or(text.len());
    &text[..end]
}

/// Leading noun phrase of a list item or sentence.
fn leading_phrase(item: &str) -> String {
    let head = cut_at_separators(item);
    let mut words = Vec::new();
    for (i, word) in head.split_whitespace().enumerate() {
        let bare = word
            .trim_matches(|c: char| !c.is_alphanumeric() && c != '-' && c != '\'')
            .to_lowercase();
        if i > 0 && PHRASE_STOPS.contains(&bare.as_str()) {
            break;
        }
        words.push(word);
    }
    while let Some(first) = words.first() {
        if ["the", "a", "an"].contains(&first.to_lowercase().as_str()) && words.len() > 1 {
            words.remove(0);
        } else {
            break;
        }
    }
    words.truncate(MAX_PHRASE_WORDS);
    clean_value(&words.join(" "))
}

fn mechanic_phrase(item: &str) -> Option<String> {
    let phrase = leading_phrase(item).to_lowercase();
    (!phrase.is_empty()).then_some(phrase)
}

/// Names from "Slime, Bat and Skeleton" or a single described entity.
fn entity_names(text: &str) -> Vec<String> {
    let head = text
        .split([':', '(', ';'])
        .next()
        .unwrap_or("")
        .split(" - ")
        .next()
        .unwrap_or("");
    let parts: Vec<&str> = head
        .split(',')
        .flat_map(|p| p.split(" and "))
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect();
    let mut seen = HashSet::new();
    parts
        .into_iter()
        .map(leading_phrase)
        .filter(|p| !p.is_empty() && seen.insert(p.to_lowercase()))
        .collect()
}

fn level_lines(body: &str) -> Vec<String> {
    let bullets: Vec<String> = body
        .lines()
        .filter(|l| is_list_item(l))
        .map(|l| strip_list_marker(l).to_string())
        .collect();
    if !bullets.is_empty() {
        return bullets;
    }
    body.lines()
        .map(str::trim)
        .filter(|l| split_label(l).0.is_some())
        .map(str::to_string)
        .collect()
}

/// `Name (theme): description` or `Name: description`.
fn parse_level_line(line: &str) -> Option<(String, Option<String>, String)> {
    let (head, description) = match line.split_once(':') {
        Some((h, d)) => (h.trim(), d.trim()),
        None => (cut_at_separators(line).trim(), ""),
    };
    let (name, theme) = match (head.find('('), head.rfind(')')) {
        (Some(open), Some(close)) if open < close => (
            head[..open].trim(),
            Some(head[open + 1..close].trim().to_string()).filter(|t| !t.is_empty()),
        ),
        _ => (head, None),
    };
    let name = clean_value(name);
    (!name.is_empty()).then(|| (name, theme, clean_value(description)))
}

fn clean_value(text: &str) -> String {
    text.trim()
        .trim_end_matches(['.', ',', ';', ':', '!'])
        .trim_matches(|c| c == '"' || c == '*' || c == '_' || c == '`')
        .trim()
        .to_string()
}
