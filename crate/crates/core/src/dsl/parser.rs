//! Recursive-descent parser over the token stream.
//!
//! Statements end at a newline or `;`. A statement continues onto the next
//! line when that line starts with something that cannot open a new
//! declaration: an option keyword (`sources`, `desc`, ...), `,`, `^`, `=>`,
//! or any token the grammar requires at that point. On a syntax error the
//! parser skips to the next line that opens a declaration, so one pass
//! reports every broken declaration.

use num_rational::Ratio;

use super::ast::*;
use super::lexer::{Keyword, Token, TokenKind};
use crate::diag::{Code, Diagnostic, Span};
use crate::model::{FactKind, LateralManeuver, LayerTag, LongitudinalManeuver, SourceKind};

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
}

/// Parses a specification file. Returns every declaration that parsed cleanly
/// together with diagnostics for the ones that did not.
pub fn parse_spec(tokens: &[Token]) -> (Vec<RawDecl>, Vec<Diagnostic>) {
    let mut p = Parser::new(tokens);
    let decls = p.declarations();
    (decls, p.diags)
}

/// Parses a scenario file, which holds exactly one `scenario` block.
pub fn parse_scenario(tokens: &[Token]) -> (Option<ScenarioDecl>, Vec<Diagnostic>) {
    let mut p = Parser::new(tokens);
    let decls = p.declarations();
    let mut diags = p.diags;
    let mut scenarios = Vec::new();
    for d in decls {
        match d.kind {
            DeclKind::Scenario(s) => scenarios.push(s),
            other => diags.push(Diagnostic::error(
                Code::ParseError,
                d.span,
                format!(
                    "scenario files may only contain a scenario block, found `{}`",
                    other.keyword()
                ),
            )),
        }
    }
    if scenarios.len() > 1 {
        diags.push(Diagnostic::error(
            Code::ParseError,
            scenarios[1].name.span.clone(),
            "a scenario file holds exactly one scenario block",
        ));
        return (None, diags);
    }
    if scenarios.is_empty() && diags.is_empty() {
        let span = tokens.last().map(|t| t.span.clone()).unwrap_or_else(Span::synthetic);
        diags.push(Diagnostic::error(
            Code::ParseError,
            span,
            "expected a scenario block",
        ));
    }
    (scenarios.pop(), diags)
}

impl<'t> Parser<'t> {
    fn new(toks: &'t [Token]) -> Self {
        assert!(
            matches!(toks.last(), Some(Token { kind: TokenKind::Eof, .. })),
            "token stream must end with Eof"
        );
        Parser {
            toks,
            pos: 0,
            diags: Vec::new(),
        }
    }

    fn peek(&self) -> &'t Token {
        &self.toks[self.pos]
    }

    fn peek_kind(&self) -> &'t TokenKind {
        &self.peek().kind
    }

    /// Index of the next non-newline token.
    fn sig_index(&self) -> usize {
        let mut i = self.pos;
        while self.toks[i].kind == TokenKind::Newline {
            i += 1;
        }
        i
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.toks[self.pos];
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    fn skip_newlines(&mut self) {
        self.pos = self.sig_index();
    }

    /// If the next significant token satisfies `pred`, moves to it and returns true.
    fn continues_with(&mut self, pred: impl Fn(&TokenKind) -> bool) -> bool {
        let i = self.sig_index();
        if pred(&self.toks[i].kind) {
            self.pos = i;
            true
        } else {
            false
        }
    }

    fn error_here(&self, expected: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::error(
            Code::ParseError,
            t.span.clone(),
            format!("expected {expected}, found {}", t.kind),
        )
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        self.skip_newlines();
        if *self.peek_kind() == kind {
            Ok(self.bump())
        } else {
            Err(self.error_here(&kind.to_string()))
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<&'t Token> {
        self.expect(TokenKind::Keyword(kw))
    }

    /// Any identifier; keywords are accepted as names in name position.
    fn name(&mut self, what: &str) -> PResult<Ident> {
        self.skip_newlines();
        let t = self.peek();
        let name = match &t.kind {
            TokenKind::Ident(s) => s.clone(),
            TokenKind::Keyword(k) => k.as_str().to_owned(),
            _ => return Err(self.error_here(what)),
        };
        self.bump();
        Ok(Ident::new(name, t.span.clone()))
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        self.skip_newlines();
        match &self.peek().kind {
            TokenKind::Str(s) => {
                self.bump();
                Ok(s.clone())
            }
            _ => Err(self.error_here(what)),
        }
    }

    /// `= STRING`
    fn eq_string(&mut self, what: &str) -> PResult<String> {
        self.expect(TokenKind::Eq)?;
        self.string(what)
    }

    /// Parses a word-valued option (`kind = statute`).
    fn word<T>(&mut self, what: &str, from: impl Fn(&str) -> Option<T>) -> PResult<T> {
        let ident = self.name(what)?;
        from(&ident.name).ok_or_else(|| {
            Diagnostic::error(
                Code::ParseError,
                ident.span,
                format!("expected {what}, found `{}`", ident.name),
            )
        })
    }

    /// `open name {, name} [,] close`, newlines allowed inside. Empty lists are accepted.
    fn name_list(&mut self, open: TokenKind, close: TokenKind, what: &str) -> PResult<Vec<Ident>> {
        self.expect(open)?;
        let mut out = Vec::new();
        loop {
            self.skip_newlines();
            if *self.peek_kind() == close {
                self.bump();
                return Ok(out);
            }
            out.push(self.name(what)?);
            self.skip_newlines();
            match self.peek_kind() {
                TokenKind::Comma => {
                    self.bump();
                }
                k if *k == close => {}
                _ => return Err(self.error_here(&format!("`,` or {close}"))),
            }
        }
    }

    /// `= [a, b]`
    fn eq_bracket_list(&mut self, what: &str) -> PResult<Vec<Ident>> {
        self.expect(TokenKind::Eq)?;
        self.name_list(TokenKind::LBracket, TokenKind::RBracket, what)
    }

    fn at_statement_end(&self) -> bool {
        matches!(
            self.peek_kind(),
            TokenKind::Newline | TokenKind::Semi | TokenKind::Eof | TokenKind::RBrace
        )
    }

    fn end_statement(&mut self) -> PResult<()> {
        match self.peek_kind() {
            TokenKind::Newline | TokenKind::Semi => {
                self.bump();
                Ok(())
            }
            TokenKind::Eof | TokenKind::RBrace => Ok(()),
            _ => Err(self.error_here("end of statement")),
        }
    }

    fn duplicate_option(span: &Span, opt: &str) -> Diagnostic {
        Diagnostic::error(
            Code::ParseError,
            span.clone(),
            format!("option `{opt}` given more than once"),
        )
    }

    fn missing_option(span: &Span, decl: &str, opt: &str) -> Diagnostic {
        Diagnostic::error(
            Code::ParseError,
            span.clone(),
            format!("{decl} declaration requires `{opt}`"),
        )
    }

    /// Skips to the start of the next line that opens a declaration.
    fn recover(&mut self) {
        loop {
            let t = self.peek();
            if t.kind == TokenKind::Eof {
                return;
            }
            let line_start = self.pos == 0
                || matches!(
                    self.toks[self.pos - 1].kind,
                    TokenKind::Newline | TokenKind::Semi
                );
            if line_start && self.opens_declaration() {
                return;
            }
            self.bump();
        }
    }

    fn opens_declaration(&self) -> bool {
        match self.peek_kind() {
            TokenKind::Keyword(k) if k.starts_declaration() => matches!(
                self.toks.get(self.pos + 1).map(|t| &t.kind),
                Some(TokenKind::Ident(_) | TokenKind::Keyword(_))
            ),
            _ => false,
        }
    }

    fn declarations(&mut self) -> Vec<RawDecl> {
        let mut decls = Vec::new();
        loop {
            while matches!(self.peek_kind(), TokenKind::Newline | TokenKind::Semi) {
                self.bump();
            }
            if *self.peek_kind() == TokenKind::Eof {
                return decls;
            }
            let start = self.peek().span.clone();
            match self.declaration() {
                Ok(kind) => {
                    let span = start.to(&self.prev_span());
                    decls.push(RawDecl { kind, span });
                    if let Err(d) = self.end_statement() {
                        self.diags.push(d);
                        self.recover();
                    }
                }
                Err(d) => {
                    self.diags.push(d);
                    // always make progress
                    if self.pos < self.toks.len() - 1 && self.peek().span == start {
                        self.bump();
                    }
                    self.recover();
                }
            }
        }
    }

    fn declaration(&mut self) -> PResult<DeclKind> {
        let kw = match self.peek_kind() {
            TokenKind::Keyword(k) if k.starts_declaration() => *k,
            _ => return Err(self.error_here("a declaration")),
        };
        self.bump();
        Ok(match kw {
            Keyword::Class => DeclKind::Class(self.class()?),
            Keyword::Characteristic => DeclKind::Characteristic(self.characteristic()?),
            Keyword::Zone => DeclKind::Zone(self.zone()?),
            Keyword::Source => DeclKind::Source(self.source()?),
            Keyword::Fact => DeclKind::Fact(self.fact()?),
            Keyword::Maneuver => DeclKind::Maneuver(self.maneuver()?),
            Keyword::Mission => DeclKind::Mission(self.mission()?),
            Keyword::Rule => DeclKind::Rule(self.rule()?),
            Keyword::Conflict => DeclKind::Conflict(self.conflict()?),
            Keyword::Assumption => DeclKind::Assumption(self.assumption()?),
            Keyword::Analysis => DeclKind::Analysis(self.analysis()?),
            Keyword::Scenario => DeclKind::Scenario(self.scenario()?),
            _ => unreachable!("checked by starts_declaration"),
        })
    }

    fn class(&mut self) -> PResult<ClassDecl> {
        let name = self.name("class name")?;
        let mut parent = None;
        if self.continues_with(|k| *k == TokenKind::Colon) {
            self.bump();
            let p = self.name("layer or parent class")?;
            parent = Some(match LayerTag::from_word(&p.name) {
                Some(layer) => ClassParent::Layer(layer),
                None => ClassParent::Class(p),
            });
        }
        let mut characteristics = None;
        while self.continues_with(|k| *k == TokenKind::Keyword(Keyword::Characteristics)) {
            let t = self.bump();
            if characteristics.is_some() {
                return Err(Self::duplicate_option(&t.span, "characteristics"));
            }
            characteristics = Some(self.eq_bracket_list("characteristic name")?);
        }
        Ok(ClassDecl {
            name,
            parent,
            characteristics: characteristics.unwrap_or_default(),
        })
    }

    fn characteristic(&mut self) -> PResult<CharacteristicDecl> {
        let name = self.name("characteristic name")?;
        let mut parent = None;
        if self.continues_with(|k| *k == TokenKind::Colon) {
            self.bump();
            parent = Some(self.name("parent characteristic")?);
        }
        let mut params = Vec::new();
        if self.continues_with(|k| *k == TokenKind::Keyword(Keyword::Params)) {
            self.bump();
            self.expect(TokenKind::LParen)?;
            loop {
                self.skip_newlines();
                if *self.peek_kind() == TokenKind::RParen {
                    self.bump();
                    break;
                }
                params.push(self.param()?);
                self.skip_newlines();
                match self.peek_kind() {
                    TokenKind::Comma => {
                        self.bump();
                    }
                    TokenKind::RParen => {}
                    _ => return Err(self.error_here("`,` or `)`")),
                }
            }
        }
        Ok(CharacteristicDecl {
            name,
            parent,
            params,
        })
    }

    fn param(&mut self) -> PResult<ParamDecl> {
        let name = self.name("parameter name")?;
        self.expect_kw(Keyword::Unit)?;
        let unit = self.eq_string("unit string")?;
        let mut range = None;
        if self.continues_with(|k| *k == TokenKind::Keyword(Keyword::Range)) {
            self.bump();
            self.expect(TokenKind::Eq)?;
            self.expect(TokenKind::LBracket)?;
            let lo = self.number()?;
            self.expect(TokenKind::Comma)?;
            let hi = self.number()?;
            self.expect(TokenKind::RBracket)?;
            range = Some((lo, hi));
        }
        Ok(ParamDecl { name, unit, range })
    }

    /// `[-] digits[.digits] [/ digits]`
    fn number(&mut self) -> PResult<Rational> {
        self.skip_newlines();
        let start = self.peek().span.clone();
        let negative = *self.peek_kind() == TokenKind::Minus;
        if negative {
            self.bump();
        }
        let mut value = self.unsigned_decimal()?;
        if *self.peek_kind() == TokenKind::Slash {
            self.bump();
            let den = self.unsigned_decimal()?;
            if den == Ratio::from_integer(0) {
                return Err(Diagnostic::error(
                    Code::ParseError,
                    start.to(&self.prev_span()),
                    "division by zero in number literal",
                ));
            }
            let numer = value.numer().checked_mul(*den.denom());
            let denom = value.denom().checked_mul(*den.numer());
            value = match (numer, denom) {
                (Some(n), Some(d)) => Ratio::new(n, d),
                _ => return Err(Self::number_overflow(&start)),
            };
        }
        Ok(if negative { -value } else { value })
    }

    fn number_overflow(span: &Span) -> Diagnostic {
        Diagnostic::error(Code::ParseError, span.clone(), "number literal out of range")
    }

    fn unsigned_decimal(&mut self) -> PResult<Rational> {
        let t = self.peek();
        let TokenKind::Number(text) = &t.kind else {
            return Err(self.error_here("a number"));
        };
        self.bump();
        let overflow = || Self::number_overflow(&t.span);
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        let mut num: i64 = 0;
        let mut den: i64 = 1;
        for c in int.chars().chain(frac.chars()) {
            let d = i64::from(c.to_digit(10).expect("lexer only emits digits"));
            num = num
                .checked_mul(10)
                .and_then(|n| n.checked_add(d))
                .ok_or_else(overflow)?;
        }
        for _ in frac.chars() {
            den = den.checked_mul(10).ok_or_else(overflow)?;
        }
        Ok(Ratio::new(num, den))
    }

    fn zone(&mut self) -> PResult<ZoneDecl> {
        let name = self.name("zone name")?;
        let mut grid = None;
        let mut neighbors = None;
        loop {
            if self.continues_with(|k| *k == TokenKind::Keyword(Keyword::Grid)) {
                let t = self.bump();
                if grid.is_some() {
                    return Err(Self::duplicate_option(&t.span, "grid"));
                }
                self.expect(TokenKind::Eq)?;
                grid = Some(self.name("grid name")?);
            } else if self.continues_with(|k| *k == TokenKind::Keyword(Keyword::Neighbors)) {
                let t = self.bump();
                if neighbors.is_some() {
                    return Err(Self::duplicate_option(&t.span, "neighbors"));
                }
                self.expect(TokenKind::LParen)?;
                let mut list = Vec::new();
                loop {
                    self.skip_newlines();
                    if *self.peek_kind() == TokenKind::RParen {
                        self.bump();
                        break;
                    }
                    let dir = self.name("direction")?;
                    self.expect(TokenKind::Arrow)?;
                    let target = self.name("zone name")?;
                    list.push((dir, target));
                    self.skip_newlines();
                    match self.peek_kind() {
                        TokenKind::Comma => {
                            self.bump();
                        }
                        TokenKind::RParen => {}
                        _ => return Err(self.error_here("`,` or `)`")),
                    }
                }
                neighbors = Some(list);
            } else {
                break;
            }
        }
        Ok(ZoneDecl {
            name,
            grid,
            neighbors: neighbors.unwrap_or_default(),
        })
    }

    fn source(&mut self) -> PResult<SourceDecl> {
        let name = self.name("source name")?;
        let (mut kind, mut citation, mut excerpt) = (None, None, None);
        let is_opt = |k: &TokenKind| {
            matches!(
                k,
                TokenKind::Keyword(Keyword::Kind | Keyword::Citation | Keyword::Excerpt)
            )
        };
        while self.continues_with(is_opt) {
            let t = self.bump();
            let TokenKind::Keyword(kw) = t.kind else {
                unreachable!()
            };
            match kw {
                Keyword::Kind => {
                    if kind.is_some() {
                        return Err(Self::duplicate_option(&t.span, "kind"));
                    }
                    self.expect(TokenKind::Eq)?;
                    kind = Some(self.word("a source kind", SourceKind::from_word)?);
                }
                Keyword::Citation => {
                    if citation.is_some() {
                        return Err(Self::duplicate_option(&t.span, "citation"));
                    }
                    citation = Some(self.eq_string("citation string")?);
                }
                _ => {
                    if excerpt.is_some() {
                        return Err(Self::duplicate_option(&t.span, "excerpt"));
                    }
                    excerpt = Some(self.eq_string("excerpt string")?);
                }
            }
        }
        Ok(SourceDecl {
            kind: kind.ok_or_else(|| Self::missing_option(&name.span, "source", "kind"))?,
            citation: citation
                .ok_or_else(|| Self::missing_option(&name.span, "source", "citation"))?,
            excerpt,
            name,
        })
    }

    fn fact(&mut self) -> PResult<FactDecl> {
        let name = self.name("fact name")?;
        let (mut kind, mut sources, mut desc, mut allow) = (None, None, None, None);
        let is_opt = |k: &TokenKind| {
            matches!(
                k,
                TokenKind::Keyword(Keyword::Kind | Keyword::Sources | Keyword::Desc | Keyword::Allow)
            )
        };
        while self.continues_with(is_opt) {
            let t = self.bump();
            let TokenKind::Keyword(kw) = t.kind else {
                unreachable!()
            };
            let dup = |set: bool, opt: &str| {
                if set {
                    Err(Self::duplicate_option(&t.span, opt))
                } else {
                    Ok(())
                }
            };
            match kw {
                Keyword::Kind => {
                    dup(kind.is_some(), "kind")?;
                    self.expect(TokenKind::Eq)?;
                    kind = Some(self.word("a fact kind", FactKind::from_word)?);
                }
                Keyword::Sources => {
                    dup(sources.is_some(), "sources")?;
                    sources = Some(self.eq_bracket_list("source name")?);
                }
                Keyword::Desc => {
                    dup(desc.is_some(), "desc")?;
                    desc = Some(self.eq_string("description string")?);
                }
                _ => {
                    dup(allow.is_some(), "allow")?;
                    allow = Some(self.eq_bracket_list("lint code")?);
                }
            }
        }
        Ok(FactDecl {
            kind: kind.ok_or_else(|| Self::missing_option(&name.span, "fact", "kind"))?,
            sources: sources.unwrap_or_default(),
            desc,
            allow: allow.unwrap_or_default(),
            name,
        })
    }

    fn maneuver(&mut self) -> PResult<ManeuverDecl> {
        let name = self.name("maneuver name")?;
        let (mut lateral, mut longitudinal) = (None, None);
        let is_opt = |k: &TokenKind| {
            matches!(
                k,
                TokenKind::Keyword(Keyword::Lateral | Keyword::Longitudinal)
            )
        };
        while self.continues_with(is_opt) {
            let t = self.bump();
            self.expect(TokenKind::Eq)?;
            if t.kind == TokenKind::Keyword(Keyword::Lateral) {
                if lateral.is_some() {
                    return Err(Self::duplicate_option(&t.span, "lateral"));
                }
                lateral = Some(self.word("a lateral maneuver", LateralManeuver::from_word)?);
            } else {
                if longitudinal.is_some() {
                    return Err(Self::duplicate_option(&t.span, "longitudinal"));
                }
                longitudinal = Some(
                    self.word("a longitudinal maneuver", LongitudinalManeuver::from_word)?,
                );
            }
        }
        Ok(ManeuverDecl {
            lateral: lateral
                .ok_or_else(|| Self::missing_option(&name.span, "maneuver", "lateral"))?,
            longitudinal: longitudinal
                .ok_or_else(|| Self::missing_option(&name.span, "maneuver", "longitudinal"))?,
            name,
        })
    }

    fn mission(&mut self) -> PResult<MissionDecl> {
        let name = self.name("mission name")?;
        let mut desc = None;
        while self.continues_with(|k| *k == TokenKind::Keyword(Keyword::Desc)) {
            let t = self.bump();
            if desc.is_some() {
                return Err(Self::duplicate_option(&t.span, "desc"));
            }
            desc = Some(self.eq_string("description string")?);
        }
        Ok(MissionDecl { name, desc })
    }

    fn rule(&mut self) -> PResult<RuleDecl> {
        let name = self.name("rule name")?;
        let (mut sources, mut assumes) = (None, None);
        let is_opt = |k: &TokenKind| {
            matches!(
                k,
                TokenKind::Keyword(Keyword::Sources | Keyword::Assumes)
            )
        };
        while self.continues_with(is_opt) {
            let t = self.bump();
            if t.kind == TokenKind::Keyword(Keyword::Sources) {
                if sources.is_some() {
                    return Err(Self::duplicate_option(&t.span, "sources"));
                }
                sources = Some(self.eq_bracket_list("source name")?);
            } else {
                if assumes.is_some() {
                    return Err(Self::duplicate_option(&t.span, "assumes"));
                }
                assumes = Some(self.eq_bracket_list("assumption name")?);
            }
        }
        self.expect(TokenKind::Colon)?;
        let mut body = vec![self.atom()?];
        while self.continues_with(|k| matches!(k, TokenKind::Comma | TokenKind::Caret)) {
            self.bump();
            body.push(self.atom()?);
        }
        self.expect(TokenKind::FatArrow)?;
        let head = self.head()?;
        Ok(RuleDecl {
            name,
            sources: sources.unwrap_or_default(),
            assumes: assumes.unwrap_or_default(),
            body,
            head,
        })
    }

    fn term(&mut self) -> PResult<Term> {
        self.skip_newlines();
        let t = self.peek();
        if let TokenKind::Var(v) = &t.kind {
            self.bump();
            return Ok(Term::Var(Ident::new(v.clone(), t.span.clone())));
        }
        Ok(Term::Const(self.name("a variable or constant")?))
    }

    fn paren_name(&mut self, what: &str) -> PResult<Ident> {
        self.expect(TokenKind::LParen)?;
        let n = self.name(what)?;
        self.expect(TokenKind::RParen)?;
        Ok(n)
    }

    fn atom(&mut self) -> PResult<Atom> {
        self.skip_newlines();
        match self.peek_kind() {
            TokenKind::Keyword(Keyword::InZone) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let entity = self.term()?;
                self.expect(TokenKind::Comma)?;
                let zone = self.term()?;
                self.expect(TokenKind::RParen)?;
                Ok(Atom::InZone { entity, zone })
            }
            TokenKind::Keyword(Keyword::Applies) => {
                self.bump();
                Ok(Atom::Applies(self.paren_name("fact name")?))
            }
            TokenKind::Keyword(Keyword::MissionIs) => {
                self.bump();
                Ok(Atom::MissionIs(self.paren_name("mission name")?))
            }
            TokenKind::Ident(_) | TokenKind::Keyword(_) => {
                let class = self.name("class name")?;
                self.expect(TokenKind::LParen)?;
                let term = self.term()?;
                self.expect(TokenKind::RParen)?;
                Ok(Atom::Class { class, term })
            }
            _ => Err(self.error_here("a body atom")),
        }
    }

    fn head(&mut self) -> PResult<Head> {
        self.skip_newlines();
        match self.peek_kind() {
            TokenKind::Keyword(Keyword::Applies) => {
                self.bump();
                Ok(Head::Applies(self.paren_name("fact name")?))
            }
            TokenKind::Keyword(Keyword::Maneuver) => {
                self.bump();
                Ok(Head::Maneuver(self.paren_name("maneuver name")?))
            }
            _ => Err(self.error_here("`applies(...)` or `maneuver(...)`")),
        }
    }

    fn conflict(&mut self) -> PResult<ConflictDecl> {
        let name = self.name("conflict group name")?;
        self.expect(TokenKind::Eq)?;
        let members = self.name_list(TokenKind::LBrace, TokenKind::RBrace, "maneuver name")?;
        Ok(ConflictDecl { name, members })
    }

    fn assumption(&mut self) -> PResult<AssumptionDecl> {
        let name = self.name("assumption name")?;
        let (mut statement, mut attached) = (None, None);
        let is_opt = |k: &TokenKind| {
            matches!(
                k,
                TokenKind::Keyword(Keyword::Statement | Keyword::Attached)
            )
        };
        while self.continues_with(is_opt) {
            let t = self.bump();
            if t.kind == TokenKind::Keyword(Keyword::Statement) {
                if statement.is_some() {
                    return Err(Self::duplicate_option(&t.span, "statement"));
                }
                statement = Some(self.eq_string("statement string")?);
            } else {
                if attached.is_some() {
                    return Err(Self::duplicate_option(&t.span, "attached"));
                }
                attached = Some(self.eq_bracket_list("fact or rule name")?);
            }
        }
        Ok(AssumptionDecl {
            statement: statement
                .ok_or_else(|| Self::missing_option(&name.span, "assumption", "statement"))?,
            attached: attached.unwrap_or_default(),
            name,
        })
    }

    /// Parses `{ item* }` where each item is parsed by `item` and ends at a
    /// newline, `;` or the closing brace.
    fn block(&mut self, mut item: impl FnMut(&mut Self) -> PResult<()>) -> PResult<()> {
        self.expect(TokenKind::LBrace)?;
        loop {
            while matches!(self.peek_kind(), TokenKind::Newline | TokenKind::Semi) {
                self.bump();
            }
            if *self.peek_kind() == TokenKind::RBrace {
                self.bump();
                return Ok(());
            }
            if *self.peek_kind() == TokenKind::Eof {
                return Err(self.error_here("`}`"));
            }
            item(self)?;
            if !self.at_statement_end() {
                return Err(self.error_here("end of statement"));
            }
        }
    }

    fn analysis(&mut self) -> PResult<AnalysisDecl> {
        let name = self.name("analysis name")?;
        let mut premise = None;
        let mut result = None;
        let mut assumptions = None;
        let mut definitions = Vec::new();
        let mut subsumptions = Vec::new();
        self.block(|p| {
            let t = p.peek();
            match t.kind {
                TokenKind::Keyword(Keyword::Premise) => {
                    p.bump();
                    if premise.is_some() {
                        return Err(Self::duplicate_option(&t.span, "premise"));
                    }
                    premise = Some(p.eq_string("premise text")?);
                }
                TokenKind::Keyword(Keyword::Result) => {
                    p.bump();
                    if result.is_some() {
                        return Err(Self::duplicate_option(&t.span, "result"));
                    }
                    result = Some(p.eq_string("result text")?);
                }
                TokenKind::Keyword(Keyword::Assumes) => {
                    p.bump();
                    if assumptions.is_some() {
                        return Err(Self::duplicate_option(&t.span, "assumes"));
                    }
                    assumptions = Some(p.eq_bracket_list("assumption name")?);
                }
                TokenKind::Keyword(Keyword::Definition) => {
                    p.bump();
                    let text = p.string("definition text")?;
                    p.expect_kw(Keyword::From)?;
                    definitions.push((text, p.name("source name")?));
                }
                TokenKind::Keyword(Keyword::Subsumption) => {
                    p.bump();
                    let text = p.string("subsumption text")?;
                    let mut refs = Vec::new();
                    if p.continues_with(|k| *k == TokenKind::Keyword(Keyword::Refs)) {
                        p.bump();
                        refs =
                            p.name_list(TokenKind::LBracket, TokenKind::RBracket, "fact or rule")?;
                    }
                    subsumptions.push((text, refs));
                }
                _ => {
                    return Err(p.error_here(
                        "`premise`, `definition`, `subsumption`, `result` or `assumes`",
                    ))
                }
            }
            Ok(())
        })?;
        Ok(AnalysisDecl {
            premise: premise
                .ok_or_else(|| Self::missing_option(&name.span, "analysis", "premise"))?,
            result: result.ok_or_else(|| Self::missing_option(&name.span, "analysis", "result"))?,
            definitions,
            subsumptions,
            assumptions: assumptions.unwrap_or_default(),
            name,
        })
    }

    fn scenario(&mut self) -> PResult<ScenarioDecl> {
        let name = self.name("scenario name")?;
        let mut ego = Vec::new();
        let mut placements = Vec::new();
        let mut asserts = Vec::new();
        let mut expect: Option<Vec<Ident>> = None;
        self.block(|p| {
            let t = p.peek();
            match t.kind {
                TokenKind::Keyword(Keyword::Ego) => {
                    p.bump();
                    let class = p.name("ego class")?;
                    p.expect_kw(Keyword::Mission)?;
                    let mission = p.name("mission name")?;
                    p.expect_kw(Keyword::In)?;
                    let zone = p.name("zone name")?;
                    ego.push(EgoDecl {
                        class,
                        mission,
                        zone,
                        span: t.span.to(&p.prev_span()),
                    });
                }
                TokenKind::Keyword(Keyword::Entity) => {
                    p.bump();
                    let entity = p.name("entity name")?;
                    p.expect(TokenKind::Colon)?;
                    let class = p.name("class name")?;
                    p.expect_kw(Keyword::In)?;
                    let zone = p.name("zone name")?;
                    placements.push(Placement {
                        entity,
                        class,
                        zone,
                    });
                }
                TokenKind::Keyword(Keyword::Assert) => {
                    p.bump();
                    p.expect_kw(Keyword::Applies)?;
                    asserts.push(p.paren_name("fact name")?);
                }
                TokenKind::Keyword(Keyword::Expect) => {
                    p.bump();
                    if expect.is_some() {
                        return Err(Self::duplicate_option(&t.span, "expect"));
                    }
                    p.expect_kw(Keyword::Maneuvers)?;
                    p.expect(TokenKind::Eq)?;
                    expect =
                        Some(p.name_list(TokenKind::LBrace, TokenKind::RBrace, "maneuver name")?);
                }
                _ => return Err(p.error_here("`ego`, `entity`, `assert` or `expect`")),
            }
            Ok(())
        })?;
        Ok(ScenarioDecl {
            name,
            ego,
            placements,
            asserts,
            expect,
        })
    }
}
