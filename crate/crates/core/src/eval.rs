//! Rubric score ingestion, aggregation and report rendering.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rubric::Criterion;

pub const SCORES_HEADER: [&str; 5] = ["model", "game_type", "evaluator", "criterion", "score"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameType {
    Platformer,
    ActionRpg,
    Puzzle,
}

impl GameType {
    pub const ALL: [GameType; 3] = [GameType::Platformer, GameType::ActionRpg, GameType::Puzzle];

    pub fn as_str(self) -> &'static str {
        match self {
            GameType::Platformer => "platformer",
            GameType::ActionRpg => "action_rpg",
            GameType::Puzzle => "puzzle",
        }
    }
}

impl fmt::Display for GameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        match norm.as_str() {
            "platformer" => Ok(GameType::Platformer),
            "action_rpg" => Ok(GameType::ActionRpg),
            "puzzle" | "puzzle_game" => Ok(GameType::Puzzle),
            _ => Err(format!("unknown game type `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub model: String,
    pub game_type: GameType,
    pub evaluator: String,
    pub criterion: Criterion,
    pub score: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: score {score} is outside 0-5")]
    Range { line: u64, score: i64 },
    #[error("line {line}: duplicate record {key}")]
    DuplicateRecord { line: u64, key: String },
    #[error("model `{model}` has no {criterion} scores")]
    IncompleteGrid { model: String, criterion: Criterion },
    #[error("no score records")]
    Empty,
    #[error("{0}")]
    Io(String),
}

impl EvalError {
    pub fn code(&self) -> &'static str {
        match self {
            EvalError::Parse { .. } => "ParseError",
            EvalError::Range { .. } => "RangeError",
            EvalError::DuplicateRecord { .. } => "DuplicateRecord",
            EvalError::IncompleteGrid { .. } => "IncompleteGrid",
            EvalError::Empty => "Empty",
            EvalError::Io(_) => "IoError",
        }
    }
}

#[derive(Deserialize)]
struct JsonRow {
    model: String,
    game_type: String,
    evaluator: String,
    criterion: String,
    score: i64,
}

fn build_record(
    line: u64,
    model: &str,
    game_type: &str,
    evaluator: &str,
    criterion: &str,
    score: i64,
) -> Result<ScoreRecord, EvalError> {
    let parse_err = |message: String| EvalError::Parse { line, message };
    let model = model.trim();
    let evaluator = evaluator.trim();
    if model.is_empty() {
        return Err(parse_err("empty model".into()));
    }
    if evaluator.is_empty() {
        return Err(parse_err("empty evaluator".into()));
    }
    let game_type = game_type.parse().map_err(parse_err)?;
    let criterion = criterion.parse().map_err(parse_err)?;
    if !(0..=5).contains(&score) {
        return Err(EvalError::Range { line, score });
    }
    Ok(ScoreRecord {
        model: model.to_string(),
        game_type,
        evaluator: evaluator.to_string(),
        criterion,
        score: score as u8,
    })
}

fn ingest_csv(text: &str) -> Result<Vec<(u64, ScoreRecord)>, EvalError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| EvalError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != SCORES_HEADER {
        return Err(EvalError::Parse {
            line: 1,
            message: format!("header must be `{}`", SCORES_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| EvalError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let score_text = row[4].trim();
        let score: i64 = score_text.parse().map_err(|_| EvalError::Parse {
            line,
            message: format!("score `{score_text}` is not an integer"),
        })?;
        out.push((line, build_record(line, &row[0], &row[1], &row[2], &row[3], score)?));
    }
    Ok(out)
}

fn ingest_jsonl(text: &str) -> Result<Vec<(u64, ScoreRecord)>, EvalError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(raw).map_err(|e| EvalError::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push((
            line,
            build_record(line, &row.model, &row.game_type, &row.evaluator, &row.criterion, row.score)?,
        ));
    }
    Ok(out)
}

/// Parses CSV (with the exact `SCORES_HEADER`) or JSON lines, detected by
/// the first non-blank character. Line numbers in errors count the header
/// as line 1.
pub fn ingest_scores(text: &str) -> Result<Vec<ScoreRecord>, EvalError> {
    let rows = if text.trim_start().starts_with('{') {
        ingest_jsonl(text)?
    } else {
        ingest_csv(text)?
    };
    let mut seen: HashMap<(String, GameType, String, Criterion), u64> = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let key = (r.model.clone(), r.game_type, r.evaluator.clone(), r.criterion);
        if seen.insert(key, line).is_some() {
            return Err(EvalError::DuplicateRecord {
                line,
                key: format!("({}, {}, {}, {})", r.model, r.game_type, r.evaluator, r.criterion),
            });
        }
        out.push(r);
    }
    Ok(out)
}

pub fn ingest_file(path: &Path) -> Result<Vec<ScoreRecord>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
    ingest_scores(&text)
}

/// `sum / count` in tenths, rounded half up.
pub fn mean_tenths(sum: u64, count: u64) -> u64 {
    (20 * sum + count) / (2 * count)
}

/// Mean of four values given in tenths, rounded half up to tenths.
pub fn overall_tenths(tenths: [u64; 4]) -> u64 {
    (tenths.iter().sum::<u64>() + 2) / 4
}

/// Rounds half up to one decimal. Intended for values that are already
/// close to a decimal grid; aggregation itself uses integer arithmetic.
pub fn round1(x: f64) -> f64 {
    (x * 10.0 + 0.5 + 1e-9).floor() / 10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScores {
    pub criterion_means: BTreeMap<Criterion, f64>,
    pub overall: f64,
    pub n_records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Display order: first appearance in the input.
    pub models: Vec<String>,
    pub per_model: BTreeMap<String, ModelScores>,
    pub n_records: usize,
    /// Automated validator scores, keyed by a label such as a model or run
    /// name. Never merged into the human columns.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub proxy_columns: BTreeMap<String, BTreeMap<Criterion, f64>>,
}

impl EvaluationReport {
    pub fn attach_proxies(&mut self, label: &str, scores: &BTreeMap<Criterion, f64>) {
        self.proxy_columns.insert(label.to_string(), scores.clone());
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn aggregate(records: &[ScoreRecord]) -> Result<EvaluationReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut models: Vec<String> = Vec::new();
    let mut sums: HashMap<(&str, Criterion), (u64, u64)> = HashMap::new();
    for r in records {
        if !models.iter().any(|m| m == &r.model) {
            models.push(r.model.clone());
        }
        let e = sums.entry((r.model.as_str(), r.criterion)).or_default();
        e.0 += u64::from(r.score);
        e.1 += 1;
    }
    let mut per_model = BTreeMap::new();
    for model in &models {
        let mut tenths = [0u64; 4];
        let mut criterion_means = BTreeMap::new();
        let mut n = 0;
        for (i, c) in Criterion::ALL.into_iter().enumerate() {
            let (sum, count) = *sums.get(&(model.as_str(), c)).ok_or_else(|| EvalError::IncompleteGrid {
                model: model.clone(),
                criterion: c,
            })?;
            tenths[i] = mean_tenths(sum, count);
            criterion_means.insert(c, tenths[i] as f64 / 10.0);
            n += count as usize;
        }
        per_model.insert(
            model.clone(),
            ModelScores {
                criterion_means,
                overall: overall_tenths(tenths) as f64 / 10.0,
                n_records: n,
            },
        );
    }
    Ok(EvaluationReport {
        models,
        per_model,
        n_records: records.len(),
        proxy_columns: BTreeMap::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    TableText,
    Json,
    Csv,
    RadarCsv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "table_text" | "table" | "text" => Ok(ReportFormat::TableText),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "radar_csv" | "radar" => Ok(ReportFormat::RadarCsv),
            _ => Err(format!("unknown report format `{s}`")),
        }
    }
}

fn text_table(rows: &[(String, Vec<String>)]) -> String {
    let mut header = vec!["Model".to_string()];
    header.extend(Criterion::ALL.iter().map(|c| c.short_label().to_string()));
    header.push("Avg".to_string());
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for (model, cells) in rows {
        widths[0] = widths[0].max(model.chars().count());
        for (i, c) in cells.iter().enumerate() {
            widths[i + 1] = widths[i + 1].max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[0])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.iter().map(String::as_str).collect());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(rule.iter().map(String::as_str).collect()));
    for (model, cells) in rows {
        let mut all = vec![model.as_str()];
        all.extend(cells.iter().map(String::as_str));
        out.push_str(&line(all));
    }
    out
}

fn proxy_overall(scores: &BTreeMap<Criterion, f64>) -> f64 {
    let vals: Vec<f64> = Criterion::ALL.iter().filter_map(|c| scores.get(c)).copied().collect();
    if vals.is_empty() {
        0.0
    } else {
        round1(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

fn fmt1(x: f64) -> String {
    format!("{x:.1}")
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}

pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report always serializes");
            s.push('\n');
            s
        }
        ReportFormat::TableText => {
            let rows: Vec<(String, Vec<String>)> = report
                .models
                .iter()
                .filter_map(|m| report.per_model.get(m).map(|s| (m, s)))
                .map(|(m, s)| {
                    let mut cells: Vec<String> = Criterion::ALL
                        .iter()
                        .map(|c| fmt1(s.criterion_means.get(c).copied().unwrap_or(0.0)))
                        .collect();
                    cells.push(fmt1(s.overall));
                    (m.clone(), cells)
                })
                .collect();
            let mut out = text_table(&rows);
            if !report.proxy_columns.is_empty() {
                out.push_str("\nAutomated proxy scores (validator heuristics, not human ratings)\n");
                let rows: Vec<(String, Vec<String>)> = report
                    .proxy_columns
                    .iter()
                    .map(|(label, scores)| {
                        let mut cells: Vec<String> = Criterion::ALL
                            .iter()
                            .map(|c| scores.get(c).map_or("-".to_string(), |v| fmt1(*v)))
                            .collect();
                        cells.push(fmt1(proxy_overall(scores)));
                        (label.clone(), cells)
                    })
                    .collect();
                out.push_str(&text_table(&rows));
            }
            out
        }
        ReportFormat::Csv => {
            let mut rows = vec![["model", "source", "compilation", "adherence", "best_practices", "modularity", "overall"]
                .map(String::from)
                .to_vec()];
            for m in &report.models {
                let s = &report.per_model[m];
                let mut row = vec![m.clone(), "human".to_string()];
                row.extend(Criterion::ALL.iter().map(|c| fmt1(s.criterion_means[c])));
                row.push(fmt1(s.overall));
                rows.push(row);
            }
            for (label, scores) in &report.proxy_columns {
                let mut row = vec![label.clone(), "proxy".to_string()];
                row.extend(
                    Criterion::ALL
                        .iter()
                        .map(|c| scores.get(c).map_or(String::new(), |v| format!("{v:.2}"))),
                );
                row.push(fmt1(proxy_overall(scores)));
                rows.push(row);
            }
            csv_string(rows)
        }
        ReportFormat::RadarCsv => {
            let mut header = vec!["model".to_string()];
            header.extend(Criterion::ALL.iter().map(|c| c.as_str().to_string()));
            let mut rows = vec![header];
            for m in &report.models {
                let s = &report.per_model[m];
                let mut row = vec![m.clone()];
                row.extend(Criterion::ALL.iter().map(|c| fmt1(s.criterion_means[c])));
                rows.push(row);
            }
            csv_string(rows)
        }
    }
}

/// Pulls the Avg column out of a rendered text table, in row order.
pub fn avg_column(table: &str) -> Vec<String> {
    table
        .lines()
        .skip(2)
        .take_while(|l| !l.trim().is_empty())
        .filter_map(|l| l.split_whitespace().last().map(str::to_string))
        .collect()
}
