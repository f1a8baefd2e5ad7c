//! Tokenizer for `.nspec` and `.nscen` files.
//!
//! Accepts arbitrary bytes. Invalid UTF-8, stray characters and unterminated
//! strings are reported as `LexError` diagnostics and lexing continues.

use std::fmt;
use std::sync::Arc;

use crate::diag::{Code, Diagnostic, Span};

macro_rules! keywords {
    ($($variant:ident => $text:literal,)*) => {
        /// Reserved words. Where the grammar expects a name, keywords are
        /// accepted as plain identifiers as well.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Keyword {
            $($variant,)*
        }

        impl Keyword {
            pub fn as_str(self) -> &'static str {
                match self {
                    $(Keyword::$variant => $text,)*
                }
            }

            pub fn from_word(word: &str) -> Option<Keyword> {
                match word {
                    $($text => Some(Keyword::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

keywords! {
    Class => "class",
    Characteristic => "characteristic",
    Zone => "zone",
    Source => "source",
    Fact => "fact",
    Maneuver => "maneuver",
    Mission => "mission",
    Rule => "rule",
    Conflict => "conflict",
    Analysis => "analysis",
    Assumption => "assumption",
    Scenario => "scenario",
    InZone => "in_zone",
    Applies => "applies",
    MissionIs => "mission_is",
    Entity => "entity",
    Ego => "ego",
    In => "in",
    Assert => "assert",
    Expect => "expect",
    Maneuvers => "maneuvers",
    Neighbors => "neighbors",
    Grid => "grid",
    Kind => "kind",
    Citation => "citation",
    Excerpt => "excerpt",
    Sources => "sources",
    Desc => "desc",
    Lateral => "lateral",
    Longitudinal => "longitudinal",
    Assumes => "assumes",
    Allow => "allow",
    Characteristics => "characteristics",
    Params => "params",
    Unit => "unit",
    Range => "range",
    Statement => "statement",
    Attached => "attached",
    Premise => "premise",
    Definition => "definition",
    Subsumption => "subsumption",
    Result => "result",
    From => "from",
    Refs => "refs",
}

impl Keyword {
    /// Keywords that open a top-level declaration.
    pub fn starts_declaration(self) -> bool {
        matches!(
            self,
            Keyword::Class
                | Keyword::Characteristic
                | Keyword::Zone
                | Keyword::Source
                | Keyword::Fact
                | Keyword::Maneuver
                | Keyword::Mission
                | Keyword::Rule
                | Keyword::Conflict
                | Keyword::Analysis
                | Keyword::Assumption
                | Keyword::Scenario
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident(String),
    /// `?name`
    Var(String),
    Str(String),
    /// Unsigned decimal literal, kept as written.
    Number(String),
    Colon,
    Semi,
    Comma,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Eq,
    Minus,
    Slash,
    /// `->`
    Arrow,
    /// `=>`
    FatArrow,
    Newline,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "keyword `{}`", k.as_str()),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Var(s) => write!(f, "variable `?{s}`"),
            TokenKind::Str(_) => f.write_str("string literal"),
            TokenKind::Number(n) => write!(f, "number `{n}`"),
            TokenKind::Colon => f.write_str("`:`"),
            TokenKind::Semi => f.write_str("`;`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Caret => f.write_str("`^`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::LBracket => f.write_str("`[`"),
            TokenKind::RBracket => f.write_str("`]`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::Eq => f.write_str("`=`"),
            TokenKind::Minus => f.write_str("`-`"),
            TokenKind::Slash => f.write_str("`/`"),
            TokenKind::Arrow => f.write_str("`->`"),
            TokenKind::FatArrow => f.write_str("`=>`"),
            TokenKind::Newline => f.write_str("end of line"),
            TokenKind::Eof => f.write_str("end of file"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Char(char),
    Invalid(u8),
}

struct Cursor {
    units: Vec<Unit>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Cursor {
    fn peek(&self) -> Option<Unit> {
        self.units.get(self.pos).copied()
    }

    fn peek_char(&self) -> Option<char> {
        match self.peek() {
            Some(Unit::Char(c)) => Some(c),
            _ => None,
        }
    }

    fn peek_char_at(&self, offset: usize) -> Option<char> {
        match self.units.get(self.pos + offset) {
            Some(Unit::Char(c)) => Some(*c),
            _ => None,
        }
    }

    fn bump(&mut self) -> Option<Unit> {
        let u = self.peek()?;
        self.pos += 1;
        if u == Unit::Char('\n') {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(u)
    }

    fn loc(&self) -> (u32, u32) {
        (self.line, self.col)
    }
}

fn decode(input: &[u8]) -> Vec<Unit> {
    let mut units = Vec::with_capacity(input.len());
    for chunk in input.utf8_chunks() {
        units.extend(chunk.valid().chars().map(Unit::Char));
        units.extend(chunk.invalid().iter().map(|&b| Unit::Invalid(b)));
    }
    units
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// Splits `input` into tokens. The token list always ends with `Eof`.
pub fn tokenize(file: &str, input: &[u8]) -> (Vec<Token>, Vec<Diagnostic>) {
    let file: Arc<str> = Arc::from(file);
    let mut cur = Cursor {
        units: decode(input),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    let span_from = |file: &Arc<str>, start: (u32, u32), cur: &Cursor| {
        // end column is inclusive of the last consumed character
        let end = (cur.line, cur.col.saturating_sub(1).max(1));
        let end = if end < start { start } else { end };
        Span::new(file.clone(), start, end)
    };

    while let Some(unit) = cur.peek() {
        let start = cur.loc();
        let c = match unit {
            Unit::Invalid(b) => {
                cur.bump();
                diags.push(Diagnostic::error(
                    Code::LexError,
                    Span::new(file.clone(), start, start),
                    format!("invalid UTF-8 byte 0x{b:02X}"),
                ));
                continue;
            }
            Unit::Char(c) => c,
        };
        let kind = match c {
            '\n' => {
                cur.bump();
                // newline tokens carry the position of the line break itself
                tokens.push(Token {
                    kind: TokenKind::Newline,
                    span: Span::new(file.clone(), start, start),
                });
                continue;
            }
            c if c.is_whitespace() => {
                cur.bump();
                continue;
            }
            '#' => {
                while let Some(u) = cur.peek() {
                    if u == Unit::Char('\n') {
                        break;
                    }
                    cur.bump();
                }
                continue;
            }
            '"' => {
                cur.bump();
                match lex_string(&mut cur, &file, &mut diags) {
                    Some(s) => TokenKind::Str(s),
                    None => {
                        diags.push(Diagnostic::error(
                            Code::LexError,
                            span_from(&file, start, &cur),
                            "unterminated string literal",
                        ));
                        continue;
                    }
                }
            }
            '?' => {
                cur.bump();
                match cur.peek_char() {
                    Some(c) if is_ident_start(c) => TokenKind::Var(lex_word(&mut cur)),
                    _ => {
                        diags.push(Diagnostic::error(
                            Code::LexError,
                            span_from(&file, start, &cur),
                            "expected a variable name after `?`",
                        ));
                        continue;
                    }
                }
            }
            c if is_ident_start(c) => {
                let word = lex_word(&mut cur);
                match Keyword::from_word(&word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word),
                }
            }
            c if c.is_ascii_digit() => {
                let mut n = String::new();
                while let Some(c) = cur.peek_char().filter(char::is_ascii_digit) {
                    n.push(c);
                    cur.bump();
                }
                if cur.peek_char() == Some('.')
                    && cur.peek_char_at(1).is_some_and(|c| c.is_ascii_digit())
                {
                    n.push('.');
                    cur.bump();
                    while let Some(c) = cur.peek_char().filter(char::is_ascii_digit) {
                        n.push(c);
                        cur.bump();
                    }
                }
                TokenKind::Number(n)
            }
            _ => {
                cur.bump();
                match c {
                    ':' => TokenKind::Colon,
                    ';' => TokenKind::Semi,
                    ',' => TokenKind::Comma,
                    '^' => TokenKind::Caret,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '/' => TokenKind::Slash,
                    '=' if cur.peek_char() == Some('>') => {
                        cur.bump();
                        TokenKind::FatArrow
                    }
                    '=' => TokenKind::Eq,
                    '-' if cur.peek_char() == Some('>') => {
                        cur.bump();
                        TokenKind::Arrow
                    }
                    '-' => TokenKind::Minus,
                    other => {
                        diags.push(Diagnostic::error(
                            Code::LexError,
                            Span::new(file.clone(), start, start),
                            format!("unexpected character {other:?}"),
                        ));
                        continue;
                    }
                }
            }
        };
        tokens.push(Token {
            kind,
            span: span_from(&file, start, &cur),
        });
    }

    let end = cur.loc();
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span::new(file.clone(), end, end),
    });
    (tokens, diags)
}

fn lex_word(cur: &mut Cursor) -> String {
    let mut word = String::new();
    while let Some(c) = cur.peek_char().filter(|&c| is_ident_continue(c)) {
        word.push(c);
        cur.bump();
    }
    word
}

/// Lexes the body of a string after the opening quote. Returns `None` when the
/// string is not closed before the end of the line.
fn lex_string(cur: &mut Cursor, file: &Arc<str>, diags: &mut Vec<Diagnostic>) -> Option<String> {
    let mut s = String::new();
    loop {
        let loc = cur.loc();
        match cur.peek()? {
            Unit::Char('\n') => return None,
            Unit::Char('"') => {
                cur.bump();
                return Some(s);
            }
            Unit::Char('\\') => {
                cur.bump();
                match cur.peek() {
                    Some(Unit::Char(e @ ('"' | '\\'))) => s.push(e),
                    Some(Unit::Char('n')) => s.push('\n'),
                    Some(Unit::Char('t')) => s.push('\t'),
                    Some(Unit::Char('\n')) | None => return None,
                    Some(other) => {
                        let shown = match other {
                            Unit::Char(c) => format!("{c:?}"),
                            Unit::Invalid(b) => format!("byte 0x{b:02X}"),
                        };
                        diags.push(Diagnostic::error(
                            Code::LexError,
                            Span::new(file.clone(), loc, cur.loc()),
                            format!("unknown escape sequence \\{shown}"),
                        ));
                    }
                }
                cur.bump();
            }
            Unit::Char(c) => {
                s.push(c);
                cur.bump();
            }
            Unit::Invalid(b) => {
                cur.bump();
                diags.push(Diagnostic::error(
                    Code::LexError,
                    Span::new(file.clone(), loc, loc),
                    format!("invalid UTF-8 byte 0x{b:02X} in string literal"),
                ));
            }
        }
    }
}
