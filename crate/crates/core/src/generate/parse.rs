use thiserror::Error;

use crate::validate::declared_class_names;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResponseError {
    #[error("response contains no code")]
    NoCodeFound,
    #[error("response code block is empty")]
    EmptyCodeBlock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FencedBlock {
    pub lang: Option<String>,
    pub content: String,
    /// False when the response ended before the closing fence.
    pub closed: bool,
}

/// All ``` fenced blocks in order of appearance.
pub fn fenced_blocks(text: &str) -> Vec<FencedBlock> {
    let mut blocks = Vec::new();
    let mut current: Option<(Option<String>, Vec<&str>)> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        let is_fence = trimmed.starts_with("```") && line.len() - trimmed.len() <= 3;
        match current.take() {
            None if is_fence => {
                let lang = trimmed.trim_start_matches('`').trim();
                current = Some(((!lang.is_empty()).then(|| lang.to_string()), Vec::new()));
            }
            None => {}
            Some((lang, lines)) if is_fence && trimmed.trim_start_matches('`').trim().is_empty() => {
                blocks.push(FencedBlock {
                    lang,
                    content: lines.join("\n"),
                    closed: true,
                });
            }
            Some((lang, mut lines)) => {
                lines.push(line);
                current = Some((lang, lines));
            }
        }
    }
    if let Some((lang, lines)) = current {
        blocks.push(FencedBlock {
            lang,
            content: lines.join("\n"),
            closed: false,
        });
    }
    blocks
}

pub fn first_fenced_block(text: &str) -> Option<FencedBlock> {
    fenced_blocks(text).into_iter().next()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCode {
    pub source: String,
    /// Class the file is named after; differs from the requested class on a
    /// name mismatch.
    pub class_name: String,
    pub warnings: Vec<String>,
}

/// Pulls the C# source out of a model response and checks that the
/// expected class is declared.
pub fn parse_response(raw: &str, expected_class: &str) -> Result<ParsedCode, ResponseError> {
    let mut warnings = Vec::new();
    let blocks = fenced_blocks(raw);
    let source = match blocks.first() {
        Some(block) => {
            if block.content.trim().is_empty() {
                return Err(ResponseError::EmptyCodeBlock);
            }
            if blocks.len() > 1 {
                tracing::info!(discarded = blocks.len() - 1, "discarding extra code blocks");
                warnings.push(format!(
                    "DiscardedBlocks: {} additional code block(s) ignored",
                    blocks.len() - 1
                ));
            }
            if !block.closed {
                warnings.push("UnclosedFence: response ended inside a code block".to_string());
            }
            block.content.clone()
        }
        None => {
            let t = raw.trim();
            if t.starts_with("using ") || t.starts_with("public class") {
                t.to_string()
            } else {
                return Err(ResponseError::NoCodeFound);
            }
        }
    };

    let declared = declared_class_names(&source);
    let class_name = if declared.iter().any(|c| c == expected_class) || declared.is_empty() {
        expected_class.to_string()
    } else {
        let actual = declared[0].clone();
        warnings.push(format!(
            "NameMismatch: expected class `{expected_class}`, response declares `{actual}`"
        ));
        actual
    };
    Ok(ParsedCode {
        source,
        class_name,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_block_with_language() {
        let parsed = parse_response("```csharp\npublic class Foo {}\n```", "Foo").unwrap();
        assert_eq!(parsed.source, "public class Foo {}");
        assert_eq!(parsed.class_name, "Foo");
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn prose_only_is_no_code() {
        assert_eq!(
            parse_response("I cannot help with that.", "Foo"),
            Err(ResponseError::NoCodeFound)
        );
    }

    #[test]
    fn first_of_two_blocks_is_used() {
        let raw = "Here:\n```cs\npublic class A { }\n```\nAnd a test:\n```\npublic class ATest { }\n```\n";
        let parsed = parse_response(raw, "A").unwrap();
        assert_eq!(parsed.source, "public class A { }");
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].starts_with("DiscardedBlocks"));
    }

    #[test]
    fn bare_code_is_accepted() {
        let parsed = parse_response("using UnityEngine;\npublic class B : MonoBehaviour {}\n", "B").unwrap();
        assert!(parsed.source.starts_with("using UnityEngine;"));
    }

    #[test]
    fn empty_block() {
        assert_eq!(parse_response("```csharp\n\n```", "X"), Err(ResponseError::EmptyCodeBlock));
    }

    #[test]
    fn name_mismatch_renames_and_warns() {
        let parsed = parse_response("```\npublic class Hero { }\n```", "PlayerController").unwrap();
        assert_eq!(parsed.class_name, "Hero");
        assert!(parsed.warnings[0].starts_with("NameMismatch"));
    }

    #[test]
    fn unclosed_fence_keeps_content() {
        let parsed = parse_response("```csharp\npublic class C {\n", "C").unwrap();
        assert_eq!(parsed.source, "public class C {");
        assert!(parsed.warnings.iter().any(|w| w.starts_with("UnclosedFence")));
    }
}
