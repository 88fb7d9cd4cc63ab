use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::token::{tokenize, CSharpToken, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub line: usize,
    pub message: String,
}

impl Finding {
    pub fn new(severity: Severity, code: &str, line: usize, message: impl Into<String>) -> Self {
        Self {
            severity,
            code: code.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn error(code: &str, line: usize, message: impl Into<String>) -> Self {
        Self::new(Severity::Error, code, line, message)
    }

    pub fn warning(code: &str, line: usize, message: impl Into<String>) -> Self {
        Self::new(Severity::Warning, code, line, message)
    }

    pub fn info(code: &str, line: usize, message: impl Into<String>) -> Self {
        Self::new(Severity::Info, code, line, message)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

pub const TYPE_KEYWORDS: &[&str] = &["class", "struct", "interface", "enum", "record"];

/// Tokens with comments dropped.
pub(crate) fn significant(tokens: &[CSharpToken]) -> Vec<&CSharpToken> {
    tokens.iter().filter(|t| t.kind != TokenKind::Comment).collect()
}

/// Names following `class`, `struct`, `record` or `interface`, in order.
pub fn declared_type_names(source: &str) -> Vec<(String, usize)> {
    let tokens = tokenize(source);
    let sig = significant(&tokens);
    let mut out = Vec::new();
    for (i, t) in sig.iter().enumerate() {
        if t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&t.text.as_str()) {
            // `record class Foo` names the type after the second keyword.
            if t.text == "record" && sig.get(i + 1).is_some_and(|n| n.is_keyword("class") || n.is_keyword("struct")) {
                continue;
            }
            if let Some(name) = sig.get(i + 1).filter(|n| n.kind == TokenKind::Identifier) {
                out.push((name.text.clone(), name.line));
            }
        }
    }
    out
}

/// Class-like type names declared in the source, in order.
pub fn declared_class_names(source: &str) -> Vec<String> {
    declared_type_names(source).into_iter().map(|(n, _)| n).collect()
}

fn bracket_code(open: &str) -> &'static str {
    match open {
        "{" => "UnbalancedBraces",
        "(" => "UnbalancedParens",
        _ => "UnbalancedBrackets",
    }
}

fn balance_findings(sig: &[&CSharpToken]) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut reported = BTreeSet::new();
    let mut stack: Vec<&CSharpToken> = Vec::new();
    let mut report = |code: &'static str, line: usize, message: String, findings: &mut Vec<Finding>| {
        if reported.insert(code) {
            findings.push(Finding::error(code, line, message));
        }
    };
    for t in sig {
        if t.kind != TokenKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "{" | "(" | "[" => stack.push(t),
            close @ ("}" | ")" | "]") => {
                let open = match close {
                    "}" => "{",
                    ")" => "(",
                    _ => "[",
                };
                match stack.last() {
                    Some(top) if top.text == open => {
                        stack.pop();
                    }
                    Some(_) => match stack.iter().rposition(|s| s.text == open) {
                        Some(pos) => {
                            // Everything opened after the match was left open.
                            for dropped in stack.drain(pos..).skip(1) {
                                report(
                                    bracket_code(&dropped.text),
                                    dropped.line,
                                    format!("`{}` opened on line {} is never closed", dropped.text, dropped.line),
                                    &mut findings,
                                );
                            }
                        }
                        None => report(bracket_code(open), t.line, format!("unmatched `{close}`"), &mut findings),
                    },
                    None => {
                        report(bracket_code(open), t.line, format!("unmatched `{close}`"), &mut findings);
                    }
                }
            }
            _ => {}
        }
    }
    for open in stack {
        report(
            bracket_code(&open.text),
            open.line,
            format!("`{}` opened on line {} is never closed", open.text, open.line),
            &mut findings,
        );
    }
    findings
}

/// Index just past the block whose `{` is at `open`.
fn skip_block(sig: &[&CSharpToken], open: usize) -> usize {
    let mut depth = 0usize;
    for (i, t) in sig.iter().enumerate().skip(open) {
        if t.is_punct("{") {
            depth += 1;
        } else if t.is_punct("}") {
            depth = depth.saturating_sub(1);
            if depth == 0 {
                return i + 1;
            }
        }
    }
    sig.len()
}

/// Flags top-level items that are neither directives nor declarations.
fn outside_type_findings(sig: &[&CSharpToken]) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut i = 0;
    while i < sig.len() {
        let t = sig[i];
        if t.kind == TokenKind::Attribute || t.is_punct(";") {
            i += 1;
            continue;
        }
        if t.is_punct("}") {
            // Closes a namespace block.
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i;
        while end < sig.len() && !sig[end].is_punct(";") && !sig[end].is_punct("{") {
            if sig[end].is_punct("}") {
                break;
            }
            end += 1;
        }
        let item = &sig[start..end];
        let has = |k: &str| item.iter().any(|t| t.is_keyword(k));
        let is_type = item.iter().any(|t| t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&t.text.as_str()));
        let terminator_brace = sig.get(end).is_some_and(|t| t.is_punct("{"));
        let allowed_statement = matches!(item.first(), Some(f) if f.is_keyword("using") || f.text == "global" || f.is_keyword("extern"))
            || has("delegate");
        if has("namespace") {
            i = end + 1;
            continue;
        }
        if is_type {
            i = if terminator_brace { skip_block(sig, end) } else { end + 1 };
            continue;
        }
        if !(allowed_statement && !terminator_brace) {
            findings.push(Finding::error(
                "StatementOutsideType",
                t.line,
                format!("`{}` appears outside any type declaration", t.text),
            ));
            return findings;
        }
        i = if terminator_brace { skip_block(sig, end) } else { end + 1 };
    }
    findings
}

/// Structural problems that would keep the file from compiling. Never fails;
/// findings are data.
pub fn check_structure(source: &str) -> Vec<Finding> {
    let tokens = tokenize(source);
    check_tokens(source, &tokens)
}

pub(crate) fn check_tokens(source: &str, tokens: &[CSharpToken]) -> Vec<Finding> {
    let mut findings = Vec::new();

    for (n, line) in source.lines().enumerate() {
        if line.trim_start().starts_with("```") {
            findings.push(Finding::error(
                "MarkdownFenceArtifact",
                n + 1,
                "markdown code fence left in the source",
            ));
            break;
        }
    }

    for t in tokens.iter().filter(|t| !t.complete) {
        let (code, what) = match t.kind {
            TokenKind::Comment => ("UnterminatedComment", "block comment"),
            TokenKind::CharLit => ("UnterminatedString", "character literal"),
            _ => ("UnterminatedString", "string literal"),
        };
        if !findings.iter().any(|f: &Finding| f.code == code) {
            findings.push(Finding::error(code, t.line, format!("unterminated {what}")));
        }
    }

    let sig = significant(tokens);
    let balance = balance_findings(&sig);
    let braces_ok = !balance.iter().any(|f| f.code == "UnbalancedBraces");
    findings.extend(balance);

    let types = declared_type_names(source);
    let has_enum = sig
        .windows(2)
        .any(|w| w[0].is_keyword("enum") && w[1].kind == TokenKind::Identifier);
    if types.is_empty() && !has_enum {
        findings.push(Finding::error("NoClassDeclaration", 1, "no class declaration found"));
    }
    let partial_names: BTreeSet<&str> = sig
        .windows(3)
        .filter(|w| w[0].is_keyword("partial"))
        .filter_map(|w| [w[1], w[2]].into_iter().find(|t| t.kind == TokenKind::Identifier))
        .map(|t| t.text.as_str())
        .collect();
    let mut seen = BTreeSet::new();
    for (name, line) in &types {
        if !seen.insert(name.as_str()) && !partial_names.contains(name.as_str()) {
            findings.push(Finding::error(
                "DuplicateClassName",
                *line,
                format!("class `{name}` is declared more than once"),
            ));
        }
    }

    if braces_ok {
        findings.extend(outside_type_findings(&sig));
    }

    if let Some(last) = tokens.last() {
        let depth_open = !braces_ok && sig.iter().filter(|t| t.is_punct("{")).count() > sig.iter().filter(|t| t.is_punct("}")).count();
        let last_sig = sig.last();
        let ends_cleanly = last_sig.is_some_and(|t| t.is_punct("}") || t.is_punct(";"));
        if !last.complete || (depth_open && !ends_cleanly) {
            findings.push(Finding::error(
                "TruncatedSource",
                last.line,
                "source appears to be cut off",
            ));
        }
    }

    findings.sort_by_key(|f| (f.line, f.code.clone()));
    findings
}
