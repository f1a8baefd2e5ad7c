//! The `.nspec` / `.nscen` language: tokenizer, parser and canonical formatter.
//!
//! ```text
//! class Sign293 : L2_TrafficInfrastructure
//! fact Sign293_captured kind = capturing sources = [VwV_StVO_26]
//! rule Rule1 sources = [VwV_StVO_26]:
//!     Sign293(?e), in_zone(?e, EgoFront2Straight)
//!     => applies(Sign293_captured)
//! ```

pub mod ast;
pub mod format;
pub mod lexer;
pub mod parser;

pub use ast::{DeclKind, RawDecl, ScenarioDecl};
pub use format::format_canonical;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_scenario, parse_spec};

use crate::diag::Diagnostic;

/// Declarations from one file plus every lexer and parser diagnostic.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub decls: T,
    pub diagnostics: Vec<Diagnostic>,
}

/// Tokenizes and parses a specification file in one go.
pub fn parse_spec_source(file: &str, input: &[u8]) -> Parsed<Vec<RawDecl>> {
    let (tokens, mut diagnostics) = tokenize(file, input);
    let (decls, parse_diags) = parse_spec(&tokens);
    diagnostics.extend(parse_diags);
    Parsed { decls, diagnostics }
}

/// Tokenizes and parses a scenario file in one go.
pub fn parse_scenario_source(file: &str, input: &[u8]) -> Parsed<Option<ScenarioDecl>> {
    let (tokens, mut diagnostics) = tokenize(file, input);
    let (decl, parse_diags) = parse_scenario(&tokens);
    diagnostics.extend(parse_diags);
    Parsed {
        decls: decl,
        diagnostics,
    }
}
