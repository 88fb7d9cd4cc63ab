//! Document loading and section segmentation.
//!
//! Text and markdown are decoded in-process. PDF and DOCX go through an
//! external converter command that prints extracted UTF-8 text to stdout.

use std::fmt;
use std::path::Path;
use std::process::Command;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::sha256_hex;

pub const DEFAULT_SECTION_HEADING: &str = "DOCUMENT";

const MAX_PLAIN_HEADING_CHARS: usize = 60;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unsupported document format: {0}")]
    UnsupportedFormat(String),
    #[error("no converter configured for {0} documents")]
    ConverterUnavailable(DocFormat),
    #[error("converter failed: {0}")]
    ConverterFailed(String),
    #[error("document contains no text")]
    EmptyDocument,
    #[error("document is not valid UTF-8 (first bad byte at offset {offset})")]
    EncodingError { offset: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocFormat {
    Txt,
    Md,
    Pdf,
    Docx,
}

impl DocFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            DocFormat::Txt => "txt",
            DocFormat::Md => "md",
            DocFormat::Pdf => "pdf",
            DocFormat::Docx => "docx",
        }
    }

    pub fn needs_converter(self) -> bool {
        matches!(self, DocFormat::Pdf | DocFormat::Docx)
    }

    /// Infers the format from a file extension. Unknown extensions are an
    /// error rather than a guess.
    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| IngestError::UnsupportedFormat(path.display().to_string()))?;
        ext.parse()
    }

    pub fn from_mime(mime: &str) -> Result<Self, IngestError> {
        let essence = mime.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
        match essence.as_str() {
            "text/plain" => Ok(DocFormat::Txt),
            "text/markdown" | "text/x-markdown" => Ok(DocFormat::Md),
            "application/pdf" => Ok(DocFormat::Pdf),
            "application/vnd.openxmlformats-officedocument.wordprocessingml.document" => {
                Ok(DocFormat::Docx)
            }
            _ => Err(IngestError::UnsupportedFormat(mime.to_string())),
        }
    }
}

impl FromStr for DocFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().trim_start_matches('.').to_ascii_lowercase().as_str() {
            "txt" | "text" => Ok(DocFormat::Txt),
            "md" | "markdown" => Ok(DocFormat::Md),
            "pdf" => Ok(DocFormat::Pdf),
            "docx" => Ok(DocFormat::Docx),
            other => Err(IngestError::UnsupportedFormat(other.to_string())),
        }
    }
}

impl fmt::Display for DocFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    File,
    Upload,
}

/// External document-to-text command. The input path is appended as the
/// final argument; stdout is taken as the extracted text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Converter {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
}

impl Converter {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            args: Vec::new(),
        }
    }

    pub fn run(&self, path: &Path) -> Result<Vec<u8>, IngestError> {
        let output = Command::new(&self.command)
            .args(&self.args)
            .arg(path)
            .output()
            .map_err(|e| IngestError::ConverterFailed(format!("{}: {e}", self.command)))?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(IngestError::ConverterFailed(format!(
                "{} exited with {}: {}",
                self.command,
                output.status,
                stderr.trim()
            )));
        }
        Ok(output.stdout)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    /// File name stem, used as a last-resort title.
    pub name: Option<String>,
    pub origin: Origin,
    pub format: DocFormat,
    pub raw_bytes_digest: String,
    pub text: String,
    pub char_count: usize,
}

/// Raw input handed to [`load_document`].
#[derive(Debug, Clone)]
pub struct DocumentInput<'a> {
    pub bytes: &'a [u8],
    pub name: Option<String>,
    pub origin: Origin,
}

impl<'a> DocumentInput<'a> {
    pub fn upload(bytes: &'a [u8], name: Option<String>) -> Self {
        Self {
            bytes,
            name,
            origin: Origin::Upload,
        }
    }
}

pub fn load_document(
    input: DocumentInput<'_>,
    format: DocFormat,
    converter: Option<&Converter>,
) -> Result<SourceDocument, IngestError> {
    if input.bytes.is_empty() {
        return Err(IngestError::EmptyDocument);
    }
    let raw = if format.needs_converter() {
        let converter = converter.ok_or(IngestError::ConverterUnavailable(format))?;
        let staged = tempfile::Builder::new()
            .prefix("gddforge-")
            .suffix(&format!(".{format}"))
            .tempfile()?;
        std::fs::write(staged.path(), input.bytes)?;
        converter.run(staged.path())?
    } else {
        input.bytes.to_vec()
    };

    let decoded = decode_utf8(&raw)?;
    let text = normalize_newlines(decoded);
    if text.trim().is_empty() {
        return Err(IngestError::EmptyDocument);
    }
    let digest = sha256_hex(text.as_bytes());
    Ok(SourceDocument {
        doc_id: format!("doc-{}", &digest[..16]),
        name: input.name.as_deref().map(file_stem),
        origin: input.origin,
        format,
        raw_bytes_digest: digest,
        char_count: text.chars().count(),
        text,
    })
}

/// Reads `path` and loads it, inferring the format from the extension unless
/// one is declared.
pub fn load_file(
    path: &Path,
    declared: Option<DocFormat>,
    converter: Option<&Converter>,
) -> Result<SourceDocument, IngestError> {
    let format = match declared {
        Some(f) => f,
        None => DocFormat::from_path(path)?,
    };
    let bytes = std::fs::read(path)?;
    let input = DocumentInput {
        bytes: &bytes,
        name: path.file_name().and_then(|n| n.to_str()).map(str::to_string),
        origin: Origin::File,
    };
    load_document(input, format, converter)
}

fn file_stem(name: &str) -> String {
    Path::new(name)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(name)
        .to_string()
}

fn decode_utf8(bytes: &[u8]) -> Result<&str, IngestError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    std::str::from_utf8(bytes).map_err(|e| IngestError::EncodingError {
        offset: e.valid_up_to(),
    })
}

/// CRLF and lone CR become LF.
pub fn normalize_newlines(text: &str) -> String {
    if !text.contains('\r') {
        return text.to_string();
    }
    text.replace("\r\n", "\n").replace('\r', "\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub level: u8,
    pub body: String,
    /// Character offsets `[start, end)` into the source text, heading line included.
    pub char_span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionedDocument {
    pub doc_id: String,
    pub source_name: Option<String>,
    pub sections: Vec<Section>,
}

impl SectionedDocument {
    pub fn headings(&self) -> impl Iterator<Item = &str> {
        self.sections.iter().map(|s| s.heading.as_str())
    }
}

struct Line<'a> {
    text: &'a str,
    char_start: usize,
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    let mut char_pos = 0;
    for raw in text.split_inclusive('\n') {
        lines.push(Line {
            text: raw.strip_suffix('\n').unwrap_or(raw),
            char_start: char_pos,
        });
        char_pos += raw.chars().count();
    }
    lines
}

pub fn segment_sections(doc: &SourceDocument) -> SectionedDocument {
    let lines = split_lines(&doc.text);
    let total_chars = doc.char_count;

    // (line index, heading, level)
    let mut marks: Vec<(usize, String, u8)> = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if let Some((heading, level)) = markdown_heading(line.text) {
            marks.push((i, heading, level));
            continue;
        }
        let blank_above = i == 0 || lines[i - 1].text.trim().is_empty();
        let body_below = lines[i + 1..].iter().any(|l| !l.text.trim().is_empty());
        if blank_above && body_below {
            if let Some(level) = plain_heading_level(line.text) {
                marks.push((i, line.text.trim().to_string(), level));
            }
        }
    }

    let mut sections = Vec::new();
    let first_mark_line = marks.first().map(|m| m.0).unwrap_or(lines.len());
    let preamble: String = lines[..first_mark_line]
        .iter()
        .map(|l| l.text)
        .collect::<Vec<_>>()
        .join("\n");
    if marks.is_empty() || !preamble.trim().is_empty() {
        let end = lines
            .get(first_mark_line)
            .map(|l| l.char_start)
            .unwrap_or(total_chars);
        sections.push(Section {
            heading: DEFAULT_SECTION_HEADING.to_string(),
            level: 1,
            body: preamble.trim().to_string(),
            char_span: (0, end),
        });
    }

    for (k, (line_idx, heading, level)) in marks.iter().enumerate() {
        let next_line = marks.get(k + 1).map(|m| m.0).unwrap_or(lines.len());
        // A whitespace-only preamble is folded into the first section so spans tile.
        let start = if sections.is_empty() {
            0
        } else {
            lines[*line_idx].char_start
        };
        let end = lines
            .get(next_line)
            .map(|l| l.char_start)
            .unwrap_or(total_chars);
        let body = lines[line_idx + 1..next_line]
            .iter()
            .map(|l| l.text)
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(Section {
            heading: heading.clone(),
            level: *level,
            body: body.trim().to_string(),
            char_span: (start, end),
        });
    }

    SectionedDocument {
        doc_id: doc.doc_id.clone(),
        source_name: doc.name.clone(),
        sections,
    }
}

fn markdown_heading(line: &str) -> Option<(String, u8)> {
    let trimmed = line.trim_start();
    if line.len() - trimmed.len() > 3 {
        return None;
    }
    let hashes = trimmed.chars().take_while(|&c| c == '#').count();
    if hashes == 0 || hashes > 6 {
        return None;
    }
    let rest = &trimmed[hashes..];
    if !rest.is_empty() && !rest.starts_with(' ') && !rest.starts_with('\t') {
        return None;
    }
    let heading = rest.trim().trim_end_matches('#').trim();
    if heading.is_empty() {
        return None;
    }
    Some((heading.to_string(), hashes as u8))
}

const MINOR_WORDS: &[&str] = &[
    "a", "an", "and", "as", "at", "by", "for", "from", "in", "into", "of", "on", "or", "the",
    "to", "vs", "with",
];

/// Plain-text heading rule: short, no sentence punctuation at the end, not a
/// list item, and either ALL CAPS (level 1) or Title Case (level 2).
fn plain_heading_level(line: &str) -> Option<u8> {
    let t = line.trim();
    if t.is_empty() || t.chars().count() > MAX_PLAIN_HEADING_CHARS {
        return None;
    }
    if t.ends_with(['.', '!', '?', ',', ';']) {
        return None;
    }
    if is_list_item(t) {
        return None;
    }
    let letters: Vec<char> = t.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() < 2 {
        return None;
    }
    if letters.iter().all(|c| !c.is_lowercase()) {
        return Some(1);
    }
    let words: Vec<&str> = t
        .split(|c: char| c.is_whitespace() || c == '-' || c == '/')
        .filter(|w| !w.is_empty())
        .collect();
    let mut title_case = true;
    for (i, word) in words.iter().enumerate() {
        let core = word.trim_matches(|c: char| !c.is_alphanumeric());
        let Some(first) = core.chars().next() else {
            continue;
        };
        if !first.is_alphabetic() {
            continue;
        }
        if i > 0 && MINOR_WORDS.contains(&core.to_lowercase().as_str()) {
            continue;
        }
        if !first.is_uppercase() {
            title_case = false;
            break;
        }
    }
    title_case.then_some(2)
}

pub(crate) fn is_list_item(line: &str) -> bool {
    let t = line.trim_start();
    if t.starts_with("- ") || t.starts_with("* ") || t.starts_with("• ") || t.starts_with("+ ") {
        return true;
    }
    let digits = t.chars().take_while(|c| c.is_ascii_digit()).count();
    digits > 0 && (t[digits..].starts_with(". ") || t[digits..].starts_with(") "))
}
