use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;
use serde::Deserialize;

use super::{Genre, SpecError};

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Category {
    Title,
    Genre,
    Movement,
    Combat,
    Objectives,
    Interactions,
    Boss,
    Enemies,
    Player,
    Levels,
    Mechanics,
    Characters,
    Overview,
}

impl Category {
    fn parse(name: &str) -> Option<Category> {
        Some(match name {
            "title" => Category::Title,
            "genre" => Category::Genre,
            "movement" => Category::Movement,
            "combat" => Category::Combat,
            "objectives" => Category::Objectives,
            "interactions" => Category::Interactions,
            "boss" => Category::Boss,
            "enemies" => Category::Enemies,
            "player" => Category::Player,
            "levels" => Category::Levels,
            "mechanics" => Category::Mechanics,
            "characters" => Category::Characters,
            "overview" => Category::Overview,
            _ => return None,
        })
    }
}

#[derive(Debug, Deserialize)]
struct RawLexicon {
    order: Vec<String>,
    headings: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    phrase_hints: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    genres: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    themes: Vec<String>,
}

/// Keyword tables driving heuristic extraction. Loaded from TOML; the
/// built-in table is used unless an override file is configured.
#[derive(Debug, Clone)]
pub struct Lexicon {
    headings: Vec<(Category, Regex)>,
    hints: Vec<(Category, Vec<String>)>,
    genres: Vec<(Genre, Regex)>,
    themes: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::from_toml(DEFAULT_LEXICON).expect("built-in lexicon is valid")
    }
}

fn word_regex(words: &[String]) -> Result<Regex, SpecError> {
    let alternatives: Vec<String> = words
        .iter()
        .map(|w| regex::escape(&w.to_lowercase()).replace(r"\ ", r"[\s_-]+"))
        .collect();
    Regex::new(&format!(r"(?i)\b(?:{})\b", alternatives.join("|")))
        .map_err(|e| SpecError::Lexicon(e.to_string()))
}

impl Lexicon {
    pub fn from_toml(text: &str) -> Result<Lexicon, SpecError> {
        let raw: RawLexicon = toml::from_str(text).map_err(|e| SpecError::Lexicon(e.to_string()))?;
        let mut headings = Vec::new();
        for name in &raw.order {
            let category = Category::parse(name)
                .ok_or_else(|| SpecError::Lexicon(format!("unknown category `{name}`")))?;
            let words = raw
                .headings
                .get(name)
                .ok_or_else(|| SpecError::Lexicon(format!("no heading keywords for `{name}`")))?;
            headings.push((category, word_regex(words)?));
        }
        let mut hints = Vec::new();
        for (name, stems) in &raw.phrase_hints {
            let category = Category::parse(name)
                .ok_or_else(|| SpecError::Lexicon(format!("unknown hint category `{name}`")))?;
            hints.push((category, stems.iter().map(|s| s.to_lowercase()).collect()));
        }
        // Fixed precedence so table ordering in the file does not matter.
        hints.sort_by_key(|(c, _)| *c);
        let mut genres = Vec::new();
        for key in ["platformer", "action_rpg", "puzzle"] {
            if let Some(words) = raw.genres.get(key) {
                let genre = Genre::from_known(key).expect("known genre key");
                genres.push((genre, word_regex(words)?));
            }
        }
        if let Some(bad) = raw.genres.keys().find(|k| Genre::from_known(k).is_none()) {
            return Err(SpecError::Lexicon(format!("unknown genre key `{bad}`")));
        }
        Ok(Lexicon {
            headings,
            hints,
            genres,
            themes: raw.themes.iter().map(|t| t.to_lowercase()).collect(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Lexicon, SpecError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpecError::Lexicon(format!("{}: {e}", path.display())))?;
        Lexicon::from_toml(&text)
    }

    pub(crate) fn classify_heading(&self, heading: &str) -> Option<Category> {
        self.headings
            .iter()
            .find(|(_, re)| re.is_match(heading))
            .map(|(c, _)| *c)
    }

    pub(crate) fn heading_matches(&self, heading: &str, category: Category) -> bool {
        self.headings
            .iter()
            .any(|(c, re)| *c == category && re.is_match(heading))
    }

    /// Routes a phrase from a generic mechanics section by its words.
    pub(crate) fn classify_phrase(&self, phrase: &str) -> Option<Category> {
        let lower = phrase.to_lowercase();
        let words: Vec<&str> = lower
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .collect();
        self.hints
            .iter()
            .find(|(_, stems)| {
                words
                    .iter()
                    .any(|w| stems.iter().any(|s| w.starts_with(s.as_str())))
            })
            .map(|(c, _)| *c)
    }

    pub fn normalize_genre(&self, text: &str) -> Genre {
        let trimmed = text.trim().trim_end_matches('.');
        self.genres
            .iter()
            .find(|(_, re)| re.is_match(trimmed))
            .map(|(g, _)| g.clone())
            .unwrap_or_else(|| {
                if trimmed.is_empty() {
                    Genre::Other("unspecified".to_string())
                } else {
                    Genre::Other(trimmed.to_string())
                }
            })
    }

    pub(crate) fn find_theme(&self, text: &str) -> Option<&str> {
        let lower = text.to_lowercase();
        let words: Vec<&str> = lower
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .collect();
        words
            .iter()
            .find_map(|w| self.themes.iter().find(|t| t.as_str() == *w))
            .map(String::as_str)
    }
}
