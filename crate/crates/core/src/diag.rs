//! Source spans and diagnostics shared by every stage of the pipeline.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

/// A region of an input file. Lines and columns are 1-based; columns count
/// characters, with every invalid UTF-8 byte counting as one column.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Span {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(file: Arc<str>, start: (u32, u32), end: (u32, u32)) -> Self {
        Span {
            file,
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    /// A span for items that do not come from a file, e.g. models built in code.
    pub fn synthetic() -> Self {
        Span::new(Arc::from("<generated>"), (1, 1), (1, 1))
    }

    /// Smallest span covering both `self` and `other`. Both must be in the same file.
    pub fn to(&self, other: &Span) -> Span {
        Span {
            file: self.file.clone(),
            start_line: self.start_line,
            start_col: self.start_col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }

    fn key(&self) -> (&str, u32, u32, u32, u32) {
        (
            &self.file,
            self.start_line,
            self.start_col,
            self.end_line,
            self.end_col,
        )
    }
}

impl PartialOrd for Span {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Span {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Machine-readable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    LexError,
    ParseError,
    UnknownIdentifier,
    DuplicateIdentifier,
    CyclicTaxonomy,
    MissingLayer,
    InvalidRange,
    EmptyCitation,
    DuplicateManeuverCombination,
    InvalidConflictGroup,
    NonCapturingAssertion,
    MissingSourceLink,
    UnderivableFact,
    UnreferencedSource,
    UnusedManeuver,
    SharedIdentifier,
    DanglingReference,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::LexError => "LexError",
            Code::ParseError => "ParseError",
            Code::UnknownIdentifier => "UnknownIdentifier",
            Code::DuplicateIdentifier => "DuplicateIdentifier",
            Code::CyclicTaxonomy => "CyclicTaxonomy",
            Code::MissingLayer => "MissingLayer",
            Code::InvalidRange => "InvalidRange",
            Code::EmptyCitation => "EmptyCitation",
            Code::DuplicateManeuverCombination => "DuplicateManeuverCombination",
            Code::InvalidConflictGroup => "InvalidConflictGroup",
            Code::NonCapturingAssertion => "NonCapturingAssertion",
            Code::MissingSourceLink => "MissingSourceLink",
            Code::UnderivableFact => "UnderivableFact",
            Code::UnreferencedSource => "UnreferencedSource",
            Code::UnusedManeuver => "UnusedManeuver",
            Code::SharedIdentifier => "SharedIdentifier",
            Code::DanglingReference => "DanglingReference",
        }
    }

    pub fn from_name(name: &str) -> Option<Code> {
        const ALL: [Code; 17] = [
            Code::LexError,
            Code::ParseError,
            Code::UnknownIdentifier,
            Code::DuplicateIdentifier,
            Code::CyclicTaxonomy,
            Code::MissingLayer,
            Code::InvalidRange,
            Code::EmptyCitation,
            Code::DuplicateManeuverCombination,
            Code::InvalidConflictGroup,
            Code::NonCapturingAssertion,
            Code::MissingSourceLink,
            Code::UnderivableFact,
            Code::UnreferencedSource,
            Code::UnusedManeuver,
            Code::SharedIdentifier,
            Code::DanglingReference,
        ];
        ALL.into_iter().find(|c| c.as_str() == name)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: Span,
    /// Secondary locations, e.g. every site of a duplicated identifier.
    pub related: Vec<Span>,
}

impl Diagnostic {
    pub fn error(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
            related: Vec::new(),
        }
    }

    pub fn warning(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, span, message)
        }
    }

    pub fn with_related(mut self, related: Vec<Span>) -> Self {
        self.related = related;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}[{}]: {}",
            self.span, self.severity, self.code, self.message
        )?;
        for r in &self.related {
            write!(f, "\n  also at {r}")?;
        }
        Ok(())
    }
}

/// Sorts diagnostics by location, then severity, code and message.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        a.span
            .cmp(&b.span)
            .then(a.severity.cmp(&b.severity))
            .then(a.code.cmp(&b.code))
            .then(a.message.cmp(&b.message))
    });
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
