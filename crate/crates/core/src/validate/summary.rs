use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::structure::{check_tokens, significant, TYPE_KEYWORDS};
use super::token::{tokenize, CSharpToken, TokenKind};

pub const UNITY_MESSAGES: &[&str] = &[
    "Awake",
    "Start",
    "Update",
    "FixedUpdate",
    "LateUpdate",
    "OnEnable",
    "OnDisable",
    "OnDestroy",
    "OnCollisionEnter",
    "OnTriggerEnter",
];

const MODIFIERS: &[&str] = &[
    "public", "private", "protected", "internal", "static", "virtual", "override", "abstract", "sealed",
    "async", "new", "extern", "unsafe", "readonly", "partial", "const", "volatile",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SummaryError {
    #[error("source structure is too broken to summarize: {0}")]
    StructureTooBroken(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSig {
    pub name: String,
    pub parameter_count: usize,
    pub return_type: String,
    pub parameters: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exposure {
    Public,
    SerializeFieldAttribute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSig {
    pub name: String,
    pub type_text: String,
    pub exposure: Exposure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCounts {
    pub total: usize,
    pub per_method: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class_name: String,
    pub base_types: Vec<String>,
    pub public_methods: Vec<MethodSig>,
    pub serialized_fields: Vec<FieldSig>,
    pub unity_messages: Vec<String>,
    pub line_counts: LineCounts,
    /// All methods and constructors, public or not.
    pub method_count: usize,
}

impl ClassSummary {
    pub fn is_monobehaviour(&self) -> bool {
        self.base_types.iter().any(|b| b == "MonoBehaviour")
    }

    /// Declaration plus public members, one per line.
    pub fn public_surface(&self) -> String {
        let mut lines = vec![if self.base_types.is_empty() {
            format!("public class {}", self.class_name)
        } else {
            format!("public class {} : {}", self.class_name, self.base_types.join(", "))
        }];
        for m in &self.public_methods {
            lines.push(format!("  public {} {}({})", m.return_type, m.name, m.parameters));
        }
        for f in self.serialized_fields.iter().filter(|f| f.exposure == Exposure::Public) {
            lines.push(format!("  public {} {}", f.type_text, f.name));
        }
        lines.join("\n")
    }
}

/// Method details kept for rule checks; not part of the public summary.
#[derive(Debug, Clone)]
pub(crate) struct MethodScan {
    pub name: String,
    pub start_line: usize,
    pub end_line: usize,
    /// Indices into the significant-token list covering the body.
    pub body: Range<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct ClassScan {
    pub summary: ClassSummary,
    pub methods: Vec<MethodScan>,
}

pub(crate) struct SourceScan<'a> {
    pub sig: Vec<&'a CSharpToken>,
    pub classes: Vec<ClassScan>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Namespace,
    Type(usize),
    Member,
}

fn matching(sig: &[&CSharpToken], open: usize, o: &str, c: &str) -> usize {
    let mut depth = 0usize;
    for (i, t) in sig.iter().enumerate().skip(open) {
        if t.is_punct(o) {
            depth += 1;
        } else if t.is_punct(c) {
            depth -= 1;
            if depth == 0 {
                return i;
            }
        }
    }
    sig.len().saturating_sub(1)
}

fn join_tokens(tokens: &[&CSharpToken]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            let prev = tokens[i - 1];
            let tight = t.offset == prev.end()
                || matches!(t.text.as_str(), "," | ">" | "]" | ")" | "." | "?" | "[" | "<")
                || matches!(prev.text.as_str(), "<" | "." | "(" | "[");
            if !tight {
                out.push(' ');
            }
        }
        out.push_str(&t.text);
    }
    out
}

/// Splits `tokens` on top-level commas (ignoring those nested in <>, (), []).
fn split_top_commas<'t>(tokens: &'t [&'t CSharpToken]) -> Vec<&'t [&'t CSharpToken]> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.kind == TokenKind::Punct {
            match t.text.as_str() {
                "<" | "(" | "[" | "{" => depth += 1,
                ">" | ")" | "]" | "}" => depth -= 1,
                "," if depth == 0 => {
                    parts.push(&tokens[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
    }
    parts.push(&tokens[start..]);
    parts
}

fn type_header(header: &[&CSharpToken], classes: &mut Vec<ClassScan>, total: usize) -> Option<usize> {
    let kw = header
        .iter()
        .position(|t| t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&t.text.as_str()))?;
    let mut name_at = kw + 1;
    if header[kw].text == "record" && header.get(name_at).is_some_and(|t| t.is_keyword("class") || t.is_keyword("struct")) {
        name_at += 1;
    }
    let name = header.get(name_at).filter(|t| t.kind == TokenKind::Identifier)?;
    let mut base_types = Vec::new();
    if let Some(colon) = header.iter().skip(name_at).position(|t| t.is_punct(":")).map(|p| p + name_at) {
        let end = header
            .iter()
            .skip(colon)
            .position(|t| t.is_keyword("where"))
            .map_or(header.len(), |p| p + colon);
        for part in split_top_commas(&header[colon + 1..end]) {
            if !part.is_empty() {
                base_types.push(join_tokens(part));
            }
        }
    }
    classes.push(ClassScan {
        summary: ClassSummary {
            class_name: name.text.clone(),
            base_types,
            public_methods: Vec::new(),
            serialized_fields: Vec::new(),
            unity_messages: Vec::new(),
            line_counts: LineCounts {
                total,
                per_method: BTreeMap::new(),
            },
            method_count: 0,
        },
        methods: Vec::new(),
    });
    Some(classes.len() - 1)
}

struct MemberParts<'t> {
    attributes: Vec<&'t CSharpToken>,
    modifiers: Vec<&'t str>,
    rest: &'t [&'t CSharpToken],
}

fn member_parts<'t>(header: &'t [&'t CSharpToken]) -> MemberParts<'t> {
    let mut i = 0;
    let mut attributes = Vec::new();
    let mut modifiers = Vec::new();
    while i < header.len() {
        let t = header[i];
        if t.kind == TokenKind::Attribute {
            attributes.push(t);
        } else if t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.text.as_str()) {
            modifiers.push(t.text.as_str());
        } else {
            break;
        }
        i += 1;
    }
    MemberParts {
        attributes,
        modifiers,
        rest: &header[i..],
    }
}

/// A parameter list opens before any initializer.
fn declares_method(header: &[&CSharpToken]) -> bool {
    let rest = member_parts(header).rest;
    let paren = rest.iter().position(|t| t.is_punct("("));
    let assign = rest.iter().position(|t| t.is_punct("="));
    match (paren, assign) {
        (Some(p), Some(a)) => p < a,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Records a method whose header spans `header` (up to and excluding the
/// body or `;`).
fn add_method(class: &mut ClassScan, header: &[&CSharpToken], body: Range<usize>, end_line: usize) {
    let parts = member_parts(header);
    let Some(open) = parts.rest.iter().position(|t| t.is_punct("(")) else {
        return;
    };
    if open == 0 {
        return;
    }
    let name_tok = parts.rest[open - 1];
    if name_tok.kind != TokenKind::Identifier {
        return;
    }
    let close = matching(parts.rest, open, "(", ")");
    let params = &parts.rest[open + 1..close.max(open + 1)];
    let param_parts: Vec<_> = split_top_commas(params).into_iter().filter(|p| !p.is_empty()).collect();
    let return_type = join_tokens(&parts.rest[..open - 1]);
    let is_ctor = return_type.is_empty();
    let is_public = parts.modifiers.contains(&"public");
    let name = name_tok.text.clone();
    let start_line = header.first().map_or(name_tok.line, |t| {
        if t.kind == TokenKind::Attribute {
            name_tok.line
        } else {
            t.line
        }
    });
    let summary = &mut class.summary;
    summary.method_count += 1;
    let mut key = name.clone();
    let mut n = 2;
    while summary.line_counts.per_method.contains_key(&key) {
        key = format!("{name}#{n}");
        n += 1;
    }
    summary
        .line_counts
        .per_method
        .insert(key, end_line.saturating_sub(start_line) + 1);
    if is_public && !is_ctor {
        summary.public_methods.push(MethodSig {
            name: name.clone(),
            parameter_count: param_parts.len(),
            return_type,
            parameters: join_tokens(params),
        });
    }
    if UNITY_MESSAGES.contains(&name.as_str()) && !summary.unity_messages.contains(&name) {
        summary.unity_messages.push(name.clone());
    }
    class.methods.push(MethodScan {
        name,
        start_line,
        end_line,
        body,
    });
}

fn add_fields(class: &mut ClassScan, header: &[&CSharpToken]) {
    let parts = member_parts(header);
    if parts.modifiers.iter().any(|m| matches!(*m, "static" | "const" | "readonly"))
        || parts.rest.iter().any(|t| t.is_keyword("event") || t.is_keyword("delegate") || t.is_keyword("using"))
    {
        return;
    }
    let serialize_attr = parts.attributes.iter().any(|a| a.text.contains("SerializeField"));
    let exposure = if parts.modifiers.contains(&"public") {
        Exposure::Public
    } else if serialize_attr {
        Exposure::SerializeFieldAttribute
    } else {
        return;
    };
    // Declarators end at `=` (initializer) or `,`.
    let declarators = split_top_commas(parts.rest);
    let Some(first) = declarators.first() else {
        return;
    };
    let first_end = first.iter().position(|t| t.is_punct("=")).unwrap_or(first.len());
    if first_end < 2 {
        return;
    }
    let type_text = join_tokens(&first[..first_end - 1]);
    for (i, d) in declarators.iter().enumerate() {
        let end = d.iter().position(|t| t.is_punct("=")).unwrap_or(d.len());
        let name_tok = if i == 0 { end.checked_sub(1).map(|e| d[e]) } else { d.first().copied() };
        if let Some(n) = name_tok.filter(|t| t.kind == TokenKind::Identifier) {
            class.summary.serialized_fields.push(FieldSig {
                name: n.text.clone(),
                type_text: type_text.clone(),
                exposure,
            });
        }
    }
}

pub(crate) fn scan_tokens<'a>(source: &str, tokens: &'a [CSharpToken]) -> SourceScan<'a> {
    let sig = significant(tokens);
    let total = source.lines().count();
    let mut classes: Vec<ClassScan> = Vec::new();
    let mut stack: Vec<(Ctx, usize)> = Vec::new();
    let mut header_start = 0usize;
    let mut i = 0usize;
    let ctx = |stack: &[(Ctx, usize)]| stack.last().map_or(Ctx::Namespace, |(c, _)| *c);
    while i < sig.len() {
        let t = sig[i];
        let current = ctx(&stack);
        if t.is_punct("{") {
            let header = &sig[header_start..i];
            let next_ctx = match current {
                Ctx::Member => Ctx::Member,
                Ctx::Namespace | Ctx::Type(_) => {
                    if header.iter().any(|t| t.is_keyword("namespace")) {
                        Ctx::Namespace
                    } else if let Some(idx) = type_header(header, &mut classes, total) {
                        Ctx::Type(idx)
                    } else if let Ctx::Type(idx) = current {
                        if declares_method(header) {
                            let close = matching(&sig, i, "{", "}");
                            let end_line = sig[close].line;
                            add_method(&mut classes[idx], header, i + 1..close, end_line);
                        }
                        Ctx::Member
                    } else {
                        Ctx::Member
                    }
                }
            };
            stack.push((next_ctx, i));
            header_start = i + 1;
        } else if t.is_punct("}") {
            stack.pop();
            header_start = i + 1;
        } else if t.is_punct(";") {
            if let Ctx::Type(idx) = current {
                let header = &sig[header_start..i];
                if declares_method(header) {
                    let line = t.line;
                    add_method(&mut classes[idx], header, i..i, line);
                } else if !header.is_empty() {
                    add_fields(&mut classes[idx], header);
                }
            }
            header_start = i + 1;
        }
        i += 1;
    }
    SourceScan { sig, classes }
}

/// Per-class summaries extracted by scanning the token stream.
pub fn summarize_class(source: &str) -> Result<Vec<ClassSummary>, SummaryError> {
    let tokens = tokenize(source);
    if let Some(f) = check_tokens(source, &tokens)
        .into_iter()
        .find(|f| f.code == "UnbalancedBraces")
    {
        return Err(SummaryError::StructureTooBroken(f.message));
    }
    Ok(scan_tokens(source, &tokens)
        .classes
        .into_iter()
        .filter(|c| !c.summary.class_name.is_empty())
        .map(|c| c.summary)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monobehaviour_with_update() {
        let s = summarize_class("public class A : MonoBehaviour { void Update(){} }").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].base_types, ["MonoBehaviour"]);
        assert_eq!(s[0].unity_messages, ["Update"]);
        assert!(s[0].public_methods.is_empty());
    }

    #[test]
    fn counts_public_methods_and_serialized_fields() {
        let src = r#"
using UnityEngine;

public class Door : MonoBehaviour, IInteractable
{
    [SerializeField] private float openSpeed = 2f;
    [SerializeField]
    private Transform hinge;
    private bool isOpen;
    public static int Count;
    public string label = "door", altLabel;

    public void Open() { isOpen = true; }
    public void Close() { isOpen = false; }
    public bool Toggle(int times, float delay = 0.5f) => isOpen = !isOpen;
    private void Awake() { }
    public int Health { get; private set; }
}
"#;
        let s = &summarize_class(src).unwrap()[0];
        assert_eq!(s.base_types, ["MonoBehaviour", "IInteractable"]);
        let names: Vec<_> = s.public_methods.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["Open", "Close", "Toggle"]);
        assert_eq!(s.public_methods[2].parameter_count, 2);
        assert_eq!(s.public_methods[2].return_type, "bool");
        let fields: Vec<_> = s
            .serialized_fields
            .iter()
            .map(|f| (f.name.as_str(), f.type_text.as_str(), f.exposure))
            .collect();
        assert_eq!(
            fields,
            [
                ("openSpeed", "float", Exposure::SerializeFieldAttribute),
                ("hinge", "Transform", Exposure::SerializeFieldAttribute),
                ("label", "string", Exposure::Public),
                ("altLabel", "string", Exposure::Public),
            ]
        );
        assert_eq!(s.unity_messages, ["Awake"]);
        assert_eq!(s.method_count, 4);
    }

    #[test]
    fn generic_types_and_line_counts() {
        let src = "public class Pool<T> : MonoBehaviour where T : Component\n{\n    public List<T> Items(Dictionary<string, int> map, int n)\n    {\n        return null;\n    }\n}\n";
        let s = &summarize_class(src).unwrap()[0];
        assert_eq!(s.class_name, "Pool");
        assert_eq!(s.base_types, ["MonoBehaviour"]);
        assert_eq!(s.public_methods[0].return_type, "List<T>");
        assert_eq!(s.public_methods[0].parameter_count, 2);
        assert_eq!(s.line_counts.per_method["Items"], 4);
        assert_eq!(s.line_counts.total, 7);
    }

    #[test]
    fn broken_braces_cannot_be_summarized() {
        assert!(matches!(
            summarize_class("public class A {"),
            Err(SummaryError::StructureTooBroken(_))
        ));
    }

    #[test]
    fn public_surface_lists_members() {
        let s = &summarize_class("public class C : MonoBehaviour { public float dmg; public void Hit(float amount) {} }").unwrap()[0];
        assert_eq!(
            s.public_surface(),
            "public class C : MonoBehaviour\n  public void Hit(float amount)\n  public float dmg"
        );
    }
}
