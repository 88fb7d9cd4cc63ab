use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    StringLit,
    CharLit,
    Number,
    /// Line and block comments, and preprocessor directives.
    Comment,
    Punct,
    Attribute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CSharpToken {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// Byte offset into the source.
    pub offset: usize,
    /// False for literals and comments cut off by the end of a line or file.
    pub complete: bool,
}

impl CSharpToken {
    pub fn is_punct(&self, c: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == c
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == k
    }

    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "as", "base", "bool", "break", "byte", "case", "catch", "char", "checked", "class", "const",
    "continue", "decimal", "default", "delegate", "do", "double", "else", "enum", "event", "explicit",
    "extern", "false", "finally", "fixed", "float", "for", "foreach", "goto", "if", "implicit", "in", "int",
    "interface", "internal", "is", "lock", "long", "namespace", "new", "null", "object", "operator", "out",
    "override", "params", "private", "protected", "public", "readonly", "ref", "return", "sbyte", "sealed",
    "short", "sizeof", "stackalloc", "static", "string", "struct", "switch", "this", "throw", "true", "try",
    "typeof", "uint", "ulong", "unchecked", "unsafe", "ushort", "using", "virtual", "void", "volatile",
    "while", "var", "async", "await", "record", "partial", "get", "set", "init", "where", "yield", "nameof",
];

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    tokens: Vec<CSharpToken>,
}

impl<'a> Lexer<'a> {
    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn char_at(&self, pos: usize) -> Option<char> {
        self.src.get(pos..).and_then(|s| s.chars().next())
    }

    fn push(&mut self, kind: TokenKind, start: usize, complete: bool) {
        let text = &self.src[start..self.pos];
        self.tokens.push(CSharpToken {
            kind,
            text: text.to_string(),
            line: self.line,
            offset: start,
            complete,
        });
        self.line += text.matches('\n').count();
    }

    fn at_line_start(&self) -> bool {
        self.src[..self.pos]
            .rsplit('\n')
            .next()
            .is_none_or(|before| before.chars().all(|c| c == ' ' || c == '\t'))
    }

    fn skip_to_eol(&mut self) {
        while let Some(b) = self.peek(0) {
            if b == b'\n' {
                break;
            }
            self.pos += 1;
        }
        // Keep `\r` out of the token so CRLF sources round-trip cleanly.
        while self.pos > 0 && self.bytes[self.pos - 1] == b'\r' {
            self.pos -= 1;
        }
    }

    fn advance_char(&mut self) {
        let len = self.char_at(self.pos).map_or(1, char::len_utf8);
        self.pos += len;
    }

    /// Regular or verbatim string body after the opening quote. Returns
    /// whether the closing quote was found.
    fn string_body(&mut self, verbatim: bool, interpolated: bool) -> bool {
        let mut holes = 0usize;
        while let Some(b) = self.peek(0) {
            if interpolated && holes > 0 {
                match b {
                    b'{' => holes += 1,
                    b'}' => holes -= 1,
                    b'"' => {
                        self.pos += 1;
                        if !self.string_body(false, false) {
                            return false;
                        }
                        continue;
                    }
                    b'\n' if !verbatim => return false,
                    _ => {}
                }
                self.advance_char();
                continue;
            }
            match b {
                b'\\' if !verbatim => {
                    self.pos += 1;
                    if self.peek(0).is_some_and(|b| b != b'\n') {
                        self.advance_char();
                    }
                }
                b'"' if verbatim && self.peek(1) == Some(b'"') => self.pos += 2,
                b'"' => {
                    self.pos += 1;
                    return true;
                }
                b'{' if interpolated && self.peek(1) == Some(b'{') => self.pos += 2,
                b'{' if interpolated => {
                    holes = 1;
                    self.pos += 1;
                }
                b'\n' if !verbatim => return false,
                _ => self.advance_char(),
            }
        }
        false
    }

    fn raw_string(&mut self, quotes: usize) -> bool {
        self.pos += quotes;
        while self.pos < self.bytes.len() {
            let run = self.bytes[self.pos..].iter().take_while(|b| **b == b'"').count();
            if run >= quotes {
                self.pos += run;
                return true;
            }
            if run > 0 {
                self.pos += run;
            } else {
                self.advance_char();
            }
        }
        false
    }

    /// Lexes a string literal starting at the current position, if one starts
    /// here (including `$`, `@` and raw prefixes).
    fn try_string(&mut self) -> bool {
        let start = self.pos;
        let mut i = self.pos;
        let mut dollars = 0;
        let mut verbatim = false;
        while i < self.bytes.len() && (self.bytes[i] == b'$' || self.bytes[i] == b'@') {
            if self.bytes[i] == b'$' {
                dollars += 1;
            } else {
                if verbatim {
                    return false;
                }
                verbatim = true;
            }
            i += 1;
        }
        if self.bytes.get(i) != Some(&b'"') {
            return false;
        }
        let quotes = self.bytes[i..].iter().take_while(|b| **b == b'"').count();
        self.pos = i;
        let complete = if quotes >= 3 && !verbatim {
            self.raw_string(quotes)
        } else {
            self.pos += 1;
            self.string_body(verbatim, dollars > 0)
        };
        self.push(TokenKind::StringLit, start, complete);
        true
    }

    fn char_literal(&mut self) {
        let start = self.pos;
        self.pos += 1;
        let mut complete = false;
        while let Some(b) = self.peek(0) {
            match b {
                b'\\' => {
                    self.pos += 1;
                    if self.peek(0).is_some_and(|b| b != b'\n') {
                        self.advance_char();
                    }
                }
                b'\'' => {
                    self.pos += 1;
                    complete = true;
                    break;
                }
                b'\n' => break,
                _ => self.advance_char(),
            }
        }
        self.push(TokenKind::CharLit, start, complete);
    }

    fn attribute_allowed(&self) -> bool {
        let prev = self.tokens.iter().rev().find(|t| t.kind != TokenKind::Comment);
        match prev {
            None => true,
            Some(t) if t.kind == TokenKind::Attribute => true,
            Some(t) => t.kind == TokenKind::Punct && matches!(t.text.as_str(), ";" | "{" | "}"),
        }
    }

    /// End offset of a bracketed attribute starting at the current `[`.
    fn attribute_end(&self) -> Option<usize> {
        let mut depth = 0usize;
        let mut i = self.pos;
        let mut in_str = false;
        while i < self.bytes.len() {
            let b = self.bytes[i];
            if in_str {
                match b {
                    b'\\' => i += 1,
                    b'"' => in_str = false,
                    b'\n' => return None,
                    _ => {}
                }
            } else {
                match b {
                    b'"' => in_str = true,
                    b'[' => depth += 1,
                    b']' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(i + 1);
                        }
                    }
                    b';' | b'{' | b'}' => return None,
                    _ => {}
                }
            }
            i += 1;
        }
        None
    }

    fn run(mut self) -> Vec<CSharpToken> {
        while let Some(b) = self.peek(0) {
            let start = self.pos;
            match b {
                b' ' | b'\t' | b'\r' | b'\x0b' | b'\x0c' => self.pos += 1,
                b'\n' => {
                    self.pos += 1;
                    self.line += 1;
                }
                b'/' if self.peek(1) == Some(b'/') => {
                    self.skip_to_eol();
                    self.push(TokenKind::Comment, start, true);
                }
                b'/' if self.peek(1) == Some(b'*') => {
                    let complete = match self.src[start + 2..].find("*/") {
                        Some(end) => {
                            self.pos = start + 2 + end + 2;
                            true
                        }
                        None => {
                            self.pos = self.bytes.len();
                            false
                        }
                    };
                    self.push(TokenKind::Comment, start, complete);
                }
                b'#' if self.at_line_start() => {
                    self.skip_to_eol();
                    self.push(TokenKind::Comment, start, true);
                }
                b'"' | b'$' | b'@' if self.try_string() => {}
                b'\'' => self.char_literal(),
                b'[' if self.attribute_allowed() => match self.attribute_end() {
                    Some(end) => {
                        self.pos = end;
                        self.push(TokenKind::Attribute, start, true);
                    }
                    None => {
                        self.pos += 1;
                        self.push(TokenKind::Punct, start, true);
                    }
                },
                b'0'..=b'9' => self.number(),
                b'.' if self.peek(1).is_some_and(|b| b.is_ascii_digit()) => self.number(),
                _ => {
                    let c = self.char_at(self.pos).unwrap_or('\u{fffd}');
                    let verbatim_ident = c == '@' && self.char_at(self.pos + 1).is_some_and(is_ident_start);
                    if is_ident_start(c) || verbatim_ident {
                        self.advance_char();
                        while let Some(c) = self.char_at(self.pos) {
                            if !is_ident_continue(c) {
                                break;
                            }
                            self.advance_char();
                        }
                        let word = &self.src[start..self.pos];
                        let kind = if KEYWORDS.contains(&word) {
                            TokenKind::Keyword
                        } else {
                            TokenKind::Identifier
                        };
                        self.push(kind, start, true);
                    } else if self.src.is_char_boundary(self.pos) && self.char_at(self.pos).is_some() {
                        self.advance_char();
                        self.push(TokenKind::Punct, start, true);
                    } else {
                        self.pos += 1;
                    }
                }
            }
        }
        self.tokens
    }

    fn number(&mut self) {
        let start = self.pos;
        while let Some(b) = self.peek(0) {
            let continues = b.is_ascii_alphanumeric()
                || b == b'_'
                || (b == b'.' && self.peek(1).is_some_and(|n| n.is_ascii_digit()));
            if !continues {
                break;
            }
            self.pos += 1;
        }
        self.push(TokenKind::Number, start, true);
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// Splits C#-shaped text into tokens. Total: any input, however broken,
/// produces a token list whose texts plus the skipped whitespace rebuild it.
pub fn tokenize(source: &str) -> Vec<CSharpToken> {
    Lexer {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
        line: 1,
        tokens: Vec::new(),
    }
    .run()
}

/// Rebuilds the source from tokens, filling the gaps from `source`. Used to
/// check that only whitespace was skipped.
pub fn reconstruct(source: &str, tokens: &[CSharpToken]) -> Option<String> {
    let mut out = String::with_capacity(source.len());
    let mut at = 0;
    for t in tokens {
        let gap = source.get(at..t.offset)?;
        if !gap.chars().all(char::is_whitespace) {
            return None;
        }
        out.push_str(gap);
        out.push_str(&t.text);
        at = t.end();
    }
    let tail = source.get(at..)?;
    if !tail.chars().all(char::is_whitespace) {
        return None;
    }
    out.push_str(tail);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn comment_then_declaration() {
        use TokenKind::*;
        assert_eq!(
            kinds("// hi\nint x;"),
            vec![
                (Comment, "// hi".into()),
                (Keyword, "int".into()),
                (Identifier, "x".into()),
                (Punct, ";".into()),
            ]
        );
        assert_eq!(tokenize("// hi\nint x;")[1].line, 2);
    }

    #[test]
    fn escaped_quote_stays_in_one_literal() {
        let toks = tokenize(r#"string s = "a\"b";"#);
        let strings: Vec<_> = toks.iter().filter(|t| t.kind == TokenKind::StringLit).collect();
        assert_eq!(strings.len(), 1);
        assert_eq!(strings[0].text, r#""a\"b""#);
        assert!(strings[0].complete);
    }

    #[test]
    fn verbatim_interpolated_and_raw_strings() {
        let src = r#"var a = @"c:\dir ""q"""; var b = $"hp {hp:0} {(ok ? "y" : "n")}"; var c = """raw "x" """;"#;
        let strings: Vec<String> = tokenize(src)
            .into_iter()
            .filter(|t| t.kind == TokenKind::StringLit)
            .map(|t| t.text)
            .collect();
        assert_eq!(
            strings,
            [r#"@"c:\dir ""q""""#, r#"$"hp {hp:0} {(ok ? "y" : "n")}""#, r#""""raw "x" """"#]
        );
    }

    #[test]
    fn attributes_and_indexers() {
        let toks = tokenize("[SerializeField] private float speed;\nvoid F() { a[0] = 1; }");
        assert_eq!(toks[0].kind, TokenKind::Attribute);
        assert_eq!(toks[0].text, "[SerializeField]");
        assert!(toks.iter().any(|t| t.is_punct("[")));
    }

    #[test]
    fn char_literals_and_directives() {
        let toks = tokenize("#if UNITY_EDITOR\nchar c = '\\'';\n#endif");
        assert_eq!(toks[0].kind, TokenKind::Comment);
        assert!(toks.iter().any(|t| t.kind == TokenKind::CharLit && t.text == "'\\''"));
    }

    #[test]
    fn unterminated_literals_are_flagged() {
        let toks = tokenize("var s = \"abc\nint x;");
        assert!(!toks.iter().find(|t| t.kind == TokenKind::StringLit).unwrap().complete);
        let toks = tokenize("/* never closed");
        assert!(!toks[0].complete);
    }

    #[test]
    fn unknown_bytes_become_punct() {
        let toks = tokenize("a ¤ b");
        assert_eq!(toks[1].kind, TokenKind::Punct);
        assert_eq!(toks[1].text, "¤");
    }

    proptest! {
        #[test]
        fn tokenize_is_total_and_round_trips(src in "\\PC{0,200}") {
            let toks = tokenize(&src);
            prop_assert_eq!(reconstruct(&src, &toks), Some(src.clone()));
        }

        #[test]
        fn csharp_like_text_round_trips(src in "[a-z{}()\\[\\];\"'@$/*#\\\\ \n=.0-9]{0,200}") {
            let toks = tokenize(&src);
            prop_assert_eq!(reconstruct(&src, &toks), Some(src.clone()));
        }
    }
}
