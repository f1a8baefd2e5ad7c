//! Raw declarations as written in source, before identifier resolution.
//!
//! Equality on every type here is structural: spans are carried along for
//! diagnostics but never compared.

use std::fmt;

use num_rational::Ratio;

use crate::diag::Span;
use crate::model::{FactKind, LateralManeuver, LayerTag, LongitudinalManeuver, SourceKind};

/// A name together with where it was written.
#[derive(Debug, Clone)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Ident {}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassParent {
    Layer(LayerTag),
    Class(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: Ident,
    pub parent: Option<ClassParent>,
    pub characteristics: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: Ident,
    pub unit: String,
    pub range: Option<(Rational, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicDecl {
    pub name: Ident,
    pub parent: Option<Ident>,
    pub params: Vec<ParamDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneDecl {
    pub name: Ident,
    pub grid: Option<Ident>,
    /// `(direction, neighbor zone)`
    pub neighbors: Vec<(Ident, Ident)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDecl {
    pub name: Ident,
    pub kind: SourceKind,
    pub citation: String,
    pub excerpt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactDecl {
    pub name: Ident,
    pub kind: FactKind,
    pub sources: Vec<Ident>,
    pub desc: Option<String>,
    /// Lint codes suppressed for this fact.
    pub allow: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManeuverDecl {
    pub name: Ident,
    pub lateral: LateralManeuver,
    pub longitudinal: LongitudinalManeuver,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissionDecl {
    pub name: Ident,
    pub desc: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(Ident),
    Const(Ident),
}

impl Term {
    pub fn ident(&self) -> &Ident {
        match self {
            Term::Var(i) | Term::Const(i) => i,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// `Class(term)`
    Class { class: Ident, term: Term },
    /// `in_zone(entity, zone)`
    InZone { entity: Term, zone: Term },
    /// `applies(Fact)`
    Applies(Ident),
    /// `mission_is(Mission)`
    MissionIs(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    Applies(Ident),
    Maneuver(Ident),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDecl {
    pub name: Ident,
    pub sources: Vec<Ident>,
    pub assumes: Vec<Ident>,
    pub body: Vec<Atom>,
    pub head: Head,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictDecl {
    pub name: Ident,
    pub members: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionDecl {
    pub name: Ident,
    pub statement: String,
    pub attached: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisDecl {
    pub name: Ident,
    pub premise: String,
    /// `(text, knowledge source)`
    pub definitions: Vec<(String, Ident)>,
    /// `(text, referenced facts and rules)`
    pub subsumptions: Vec<(String, Vec<Ident>)>,
    pub result: String,
    pub assumptions: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub entity: Ident,
    pub class: Ident,
    pub zone: Ident,
}

/// `ego Class mission Mission in Zone`. The ego entity is always named `ego`.
#[derive(Debug, Clone)]
pub struct EgoDecl {
    pub class: Ident,
    pub mission: Ident,
    pub zone: Ident,
    pub span: Span,
}

impl PartialEq for EgoDecl {
    fn eq(&self, other: &Self) -> bool {
        (&self.class, &self.mission, &self.zone) == (&other.class, &other.mission, &other.zone)
    }
}

impl Eq for EgoDecl {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioDecl {
    pub name: Ident,
    pub ego: Vec<EgoDecl>,
    pub placements: Vec<Placement>,
    pub asserts: Vec<Ident>,
    pub expect: Option<Vec<Ident>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeclKind {
    Class(ClassDecl),
    Characteristic(CharacteristicDecl),
    Zone(ZoneDecl),
    Source(SourceDecl),
    Fact(FactDecl),
    Maneuver(ManeuverDecl),
    Mission(MissionDecl),
    Rule(RuleDecl),
    Conflict(ConflictDecl),
    Assumption(AssumptionDecl),
    Analysis(AnalysisDecl),
    Scenario(ScenarioDecl),
}

impl DeclKind {
    pub fn name(&self) -> &Ident {
        match self {
            DeclKind::Class(d) => &d.name,
            DeclKind::Characteristic(d) => &d.name,
            DeclKind::Zone(d) => &d.name,
            DeclKind::Source(d) => &d.name,
            DeclKind::Fact(d) => &d.name,
            DeclKind::Maneuver(d) => &d.name,
            DeclKind::Mission(d) => &d.name,
            DeclKind::Rule(d) => &d.name,
            DeclKind::Conflict(d) => &d.name,
            DeclKind::Assumption(d) => &d.name,
            DeclKind::Analysis(d) => &d.name,
            DeclKind::Scenario(d) => &d.name,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            DeclKind::Class(_) => "class",
            DeclKind::Characteristic(_) => "characteristic",
            DeclKind::Zone(_) => "zone",
            DeclKind::Source(_) => "source",
            DeclKind::Fact(_) => "fact",
            DeclKind::Maneuver(_) => "maneuver",
            DeclKind::Mission(_) => "mission",
            DeclKind::Rule(_) => "rule",
            DeclKind::Conflict(_) => "conflict",
            DeclKind::Assumption(_) => "assumption",
            DeclKind::Analysis(_) => "analysis",
            DeclKind::Scenario(_) => "scenario",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RawDecl {
    pub kind: DeclKind,
    pub span: Span,
}

impl PartialEq for RawDecl {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for RawDecl {}
