//! The structured game specification extracted from a design document.

mod export;
mod extract;
mod lexicon;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub use export::{append_training_pair, export_training_pair, render_spec_text, FILE_DELIMITER_PREFIX};
pub use extract::{extract_spec, ExtractMode, Extraction};
pub use lexicon::Lexicon;

/// The published JSON schema for [`GameSpec`].
pub const GAMESPEC_SCHEMA: &str = include_str!("../../schema/gamespec.schema.json");

/// Every addressable field path, in canonical order.
pub const FIELD_PATHS: &[&str] = &[
    "title",
    "genre",
    "overview",
    "mechanics.movement",
    "mechanics.combat",
    "mechanics.objectives",
    "mechanics.interactions",
    "characters.player",
    "characters.enemies",
    "characters.boss",
    "levels",
];

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid JSON: {0}")]
    Parse(String),
    #[error("schema violation at `{path}`: {message}")]
    SchemaViolation { path: String, message: String },
    #[error(transparent)]
    Backend(#[from] crate::generate::BackendError),
    #[error("lexicon error: {0}")]
    Lexicon(String),
}

impl SpecError {
    fn violation(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError::SchemaViolation {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Genre {
    Platformer,
    ActionRpg,
    Puzzle,
    Other(String),
}

impl Genre {
    pub fn label(&self) -> &str {
        match self {
            Genre::Platformer => "platformer",
            Genre::ActionRpg => "action_rpg",
            Genre::Puzzle => "puzzle",
            Genre::Other(text) => text,
        }
    }

    fn from_known(s: &str) -> Option<Genre> {
        match s {
            "platformer" => Some(Genre::Platformer),
            "action_rpg" => Some(Genre::ActionRpg),
            "puzzle" => Some(Genre::Puzzle),
            _ => None,
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Genre::Other(text) => write!(f, "other({text})"),
            known => f.write_str(known.label()),
        }
    }
}

impl Serialize for Genre {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Genre::Other(text) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("other", text)?;
                map.end()
            }
            known => serializer.serialize_str(known.label()),
        }
    }
}

impl<'de> Deserialize<'de> for Genre {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        parse_genre(&value).map_err(|e| de::Error::custom(e.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanicSet {
    #[serde(default)]
    pub movement: Vec<String>,
    #[serde(default)]
    pub combat: Vec<String>,
    #[serde(default)]
    pub objectives: Vec<String>,
    #[serde(default)]
    pub interactions: Vec<String>,
}

impl MechanicSet {
    pub fn is_empty(&self) -> bool {
        self.movement.is_empty()
            && self.combat.is_empty()
            && self.objectives.is_empty()
            && self.interactions.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterSet {
    #[serde(default)]
    pub player: Option<String>,
    #[serde(default)]
    pub enemies: Vec<String>,
    #[serde(default)]
    pub boss: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub name: String,
    #[serde(default)]
    pub environment_theme: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSpec {
    pub title: String,
    pub genre: Genre,
    #[serde(default)]
    pub overview: String,
    #[serde(default)]
    pub mechanics: MechanicSet,
    #[serde(default)]
    pub characters: CharacterSet,
    #[serde(default)]
    pub levels: Vec<LevelSpec>,
    /// Field path to the heading of the section it came from.
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl GameSpec {
    pub fn new(title: impl Into<String>, genre: Genre) -> Self {
        Self {
            title: title.into(),
            genre,
            overview: String::new(),
            mechanics: MechanicSet::default(),
            characters: CharacterSet::default(),
            levels: Vec::new(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("GameSpec always serializes")
    }

    pub fn digest(&self) -> String {
        crate::digest::json_digest(self)
    }

    /// Text values stored at `path`. Unknown paths yield `None`; known but
    /// unpopulated paths yield an empty list.
    pub fn field_values(&self, path: &str) -> Option<Vec<String>> {
        let opt = |o: &Option<String>| o.iter().cloned().collect::<Vec<_>>();
        let values = match path {
            "title" => vec![self.title.clone()],
            "genre" => vec![self.genre.label().to_string()],
            "overview" if self.overview.is_empty() => vec![],
            "overview" => vec![self.overview.clone()],
            "mechanics" => {
                let m = &self.mechanics;
                m.movement
                    .iter()
                    .chain(&m.combat)
                    .chain(&m.objectives)
                    .chain(&m.interactions)
                    .cloned()
                    .collect()
            }
            "mechanics.movement" => self.mechanics.movement.clone(),
            "mechanics.combat" => self.mechanics.combat.clone(),
            "mechanics.objectives" => self.mechanics.objectives.clone(),
            "mechanics.interactions" => self.mechanics.interactions.clone(),
            "characters.player" => opt(&self.characters.player),
            "characters.enemies" => self.characters.enemies.clone(),
            "characters.boss" => opt(&self.characters.boss),
            "levels" => self
                .levels
                .iter()
                .flat_map(|l| [l.name.clone(), l.environment_theme.clone(), l.description.clone()])
                .filter(|s| !s.is_empty())
                .collect(),
            _ => return None,
        };
        Some(values)
    }

    pub fn path_exists(path: &str) -> bool {
        path == "mechanics" || FIELD_PATHS.contains(&path)
    }

    /// Checks the value-level invariants that the type system does not.
    pub fn check_invariants(&self) -> Result<(), SpecError> {
        let value = serde_json::to_value(self).expect("GameSpec always serializes");
        validate_value(&value).map(|_| ())
    }
}

/// Parses and validates a GameSpec document, reporting the first violation's
/// field path.
pub fn validate_spec(json: &str) -> Result<GameSpec, SpecError> {
    let value: Value = serde_json::from_str(json).map_err(|e| SpecError::Parse(e.to_string()))?;
    validate_value(&value)
}

pub fn validate_value(value: &Value) -> Result<GameSpec, SpecError> {
    let obj = value
        .as_object()
        .ok_or_else(|| SpecError::violation("", "expected an object"))?;
    reject_unknown(
        obj,
        "",
        &["title", "genre", "overview", "mechanics", "characters", "levels", "provenance"],
    )?;

    let title = match obj.get("title") {
        None | Some(Value::Null) => return Err(SpecError::violation("title", "required")),
        Some(v) => non_blank_string(v, "title")?,
    };
    let genre = match obj.get("genre") {
        None | Some(Value::Null) => return Err(SpecError::violation("genre", "required")),
        Some(v) => parse_genre(v)?,
    };
    let overview = match obj.get("overview") {
        None | Some(Value::Null) => String::new(),
        Some(v) => string(v, "overview")?.to_string(),
    };

    let mut mechanics = MechanicSet::default();
    if let Some(m) = present(obj.get("mechanics")) {
        let m = object(m, "mechanics")?;
        reject_unknown(m, "mechanics", &["movement", "combat", "objectives", "interactions"])?;
        mechanics.movement = phrase_list(m.get("movement"), "mechanics.movement")?;
        mechanics.combat = phrase_list(m.get("combat"), "mechanics.combat")?;
        mechanics.objectives = phrase_list(m.get("objectives"), "mechanics.objectives")?;
        mechanics.interactions = phrase_list(m.get("interactions"), "mechanics.interactions")?;
    }

    let mut characters = CharacterSet::default();
    if let Some(c) = present(obj.get("characters")) {
        let c = object(c, "characters")?;
        reject_unknown(c, "characters", &["player", "enemies", "boss"])?;
        characters.player = optional_text(c.get("player"), "characters.player")?;
        characters.boss = optional_text(c.get("boss"), "characters.boss")?;
        characters.enemies = phrase_list(c.get("enemies"), "characters.enemies")?;
        let mut seen = HashSet::new();
        for (i, enemy) in characters.enemies.iter().enumerate() {
            if !seen.insert(enemy.to_lowercase()) {
                return Err(SpecError::violation(
                    format!("characters.enemies[{i}]"),
                    format!("duplicate enemy `{enemy}`"),
                ));
            }
        }
    }

    let mut levels = Vec::new();
    if let Some(l) = present(obj.get("levels")) {
        let items = l
            .as_array()
            .ok_or_else(|| SpecError::violation("levels", "expected an array"))?;
        for (i, item) in items.iter().enumerate() {
            let path = format!("levels[{i}]");
            let lv = object(item, &path)?;
            reject_unknown(lv, &path, &["name", "environment_theme", "description"])?;
            let name = match lv.get("name") {
                None | Some(Value::Null) => {
                    return Err(SpecError::violation(format!("{path}.name"), "required"))
                }
                Some(v) => non_blank_string(v, &format!("{path}.name"))?,
            };
            let text_field = |key: &str| -> Result<String, SpecError> {
                match present(lv.get(key)) {
                    None => Ok(String::new()),
                    Some(v) => Ok(string(v, &format!("{path}.{key}"))?.to_string()),
                }
            };
            levels.push(LevelSpec {
                name,
                environment_theme: text_field("environment_theme")?,
                description: text_field("description")?,
            });
        }
    }

    let mut provenance = BTreeMap::new();
    if let Some(p) = present(obj.get("provenance")) {
        for (key, heading) in object(p, "provenance")? {
            let heading = string(heading, &format!("provenance.{key}"))?;
            provenance.insert(key.clone(), heading.to_string());
        }
    }

    Ok(GameSpec {
        title,
        genre,
        overview,
        mechanics,
        characters,
        levels,
        provenance,
    })
}

fn parse_genre(value: &Value) -> Result<Genre, SpecError> {
    match value {
        Value::String(s) => Genre::from_known(s).ok_or_else(|| {
            SpecError::violation(
                "genre",
                format!("`{s}` is not one of platformer, action_rpg, puzzle; use {{\"other\": ...}}"),
            )
        }),
        Value::Object(map) => {
            reject_unknown(map, "genre", &["other"])?;
            let text = map
                .get("other")
                .ok_or_else(|| SpecError::violation("genre.other", "required"))?;
            Ok(Genre::Other(non_blank_string(text, "genre.other")?))
        }
        _ => Err(SpecError::violation("genre", "expected a string or {\"other\": text}")),
    }
}

fn present(v: Option<&Value>) -> Option<&Value> {
    v.filter(|v| !v.is_null())
}

fn reject_unknown(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), SpecError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(key) => {
            let full = if path.is_empty() {
                key.clone()
            } else {
                format!("{path}.{key}")
            };
            Err(SpecError::violation(full, "unknown field"))
        }
        None => Ok(()),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, SpecError> {
    v.as_object()
        .ok_or_else(|| SpecError::violation(path, "expected an object"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str, SpecError> {
    v.as_str()
        .ok_or_else(|| SpecError::violation(path, "expected a string"))
}

fn non_blank_string(v: &Value, path: &str) -> Result<String, SpecError> {
    let s = string(v, path)?;
    if s.trim().is_empty() {
        return Err(SpecError::violation(path, "must not be empty"));
    }
    Ok(s.to_string())
}

fn optional_text(v: Option<&Value>, path: &str) -> Result<Option<String>, SpecError> {
    present(v).map(|v| non_blank_string(v, path)).transpose()
}

fn phrase_list(v: Option<&Value>, path: &str) -> Result<Vec<String>, SpecError> {
    let Some(v) = present(v) else {
        return Ok(Vec::new());
    };
    let items = v
        .as_array()
        .ok_or_else(|| SpecError::violation(path, "expected an array of strings"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let item_path = format!("{path}[{i}]");
            let s = string(item, &item_path)?;
            if s.is_empty() || s.trim() != s {
                return Err(SpecError::violation(item_path, "entries must be non-empty trimmed phrases"));
            }
            Ok(s.to_string())
        })
        .collect()
}
