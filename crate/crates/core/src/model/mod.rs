//! The identifier-resolved, immutable model of a behavior specification.
//!
//! A [`SpecModel`] is produced by [`resolve`] from raw declarations. Every
//! cross-reference inside it is known to resolve, so downstream stages index
//! the keyed collections directly.

mod ids;
mod resolve;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Span;
use crate::dsl::ast::Rational;

pub use ids::*;
pub use resolve::resolve;
pub use validate::validate_model;

/// Layers of the five-layer model of the operational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayerTag {
    L1RoadLevel,
    L2TrafficInfrastructure,
    L3TemporaryManipulation,
    L4MovableObject,
    L5Environment,
}

impl LayerTag {
    pub const ALL: [LayerTag; 5] = [
        LayerTag::L1RoadLevel,
        LayerTag::L2TrafficInfrastructure,
        LayerTag::L3TemporaryManipulation,
        LayerTag::L4MovableObject,
        LayerTag::L5Environment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LayerTag::L1RoadLevel => "L1_RoadLevel",
            LayerTag::L2TrafficInfrastructure => "L2_TrafficInfrastructure",
            LayerTag::L3TemporaryManipulation => "L3_TemporaryManipulation",
            LayerTag::L4MovableObject => "L4_MovableObject",
            LayerTag::L5Environment => "L5_Environment",
        }
    }

    pub fn from_word(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

macro_rules! word_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant,)*
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)*
                }
            }

            pub fn from_word(s: &str) -> Option<Self> {
                match s {
                    $($text => Some($name::$variant),)*
                    _ => None,
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

word_enum! {
    SourceKind {
        Statute => "statute",
        AdministrativeGuideline => "administrative_guideline",
        CourtCase => "court_case",
        EthicsGuideline => "ethics_guideline",
        ExpertAssumption => "expert_assumption",
        Other => "other",
    }
}

word_enum! {
    /// Capturing facts come from scene entities, inferred facts from other
    /// facts, maneuver facts state what the ego shall do.
    FactKind {
        Capturing => "capturing",
        Inferred => "inferred",
        ManeuverFact => "maneuver_fact",
    }
}

word_enum! {
    LateralManeuver {
        KeepLane => "keep_lane",
        ChangeLane => "change_lane",
        Pass => "pass",
    }
}

word_enum! {
    LongitudinalManeuver {
        Start => "start",
        Stop => "stop",
        FollowDesiredSpeed => "follow_desired_speed",
        FollowTargetVehicle => "follow_target_vehicle",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneEntityClass {
    pub id: ClassId,
    /// Inherited from the root ancestor.
    pub layer: LayerTag,
    pub parent: Option<ClassId>,
    pub characteristics: Vec<CharacteristicId>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterDecl {
    pub id: String,
    pub unit: String,
    pub range: Option<(Rational, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Characteristic {
    pub id: CharacteristicId,
    pub parent: Option<CharacteristicId>,
    pub parameters: Vec<ParameterDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    pub id: ZoneId,
    pub grid: GridId,
    pub neighbors: Vec<(String, ZoneId)>,
    pub span: Span,
}

/// The ego-relative coordinate frame zones belong to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneGrid {
    pub id: GridId,
    pub zones: BTreeSet<ZoneId>,
}

/// Zones declared without an explicit grid belong to this one.
pub const DEFAULT_GRID: &str = "EgoGrid";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KnowledgeSource {
    pub id: SourceId,
    pub kind: SourceKind,
    pub citation: String,
    pub excerpt: Option<String>,
    #[serde(skip)]
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub id: FactId,
    pub kind: FactKind,
    pub sources: Vec<SourceId>,
    pub description: String,
    pub allow: BTreeSet<crate::diag::Code>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManeuverOption {
    pub id: ManeuverId,
    pub lateral: LateralManeuver,
    pub longitudinal: LongitudinalManeuver,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mission {
    pub id: MissionId,
    pub description: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    /// An entity constant (in entity position) or a zone constant (in zone position).
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyAtom {
    Class { class: ClassId, term: Term },
    InZone { entity: Term, zone: Term },
    Applies(FactId),
    MissionIs(MissionId),
}

impl fmt::Display for BodyAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyAtom::Class { class, term } => write!(f, "{class}({term})"),
            BodyAtom::InZone { entity, zone } => write!(f, "in_zone({entity}, {zone})"),
            BodyAtom::Applies(fact) => write!(f, "applies({fact})"),
            BodyAtom::MissionIs(m) => write!(f, "mission_is({m})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleHead {
    Fact(FactId),
    Maneuver(ManeuverId),
}

impl fmt::Display for RuleHead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleHead::Fact(fact) => write!(f, "applies({fact})"),
            RuleHead::Maneuver(m) => write!(f, "maneuver({m})"),
        }
    }
}

/// A positive Horn clause with its knowledge-source links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub sources: Vec<SourceId>,
    pub assumptions: Vec<AssumptionId>,
    pub body: Vec<BodyAtom>,
    pub head: RuleHead,
    pub span: Span,
}

impl Rule {
    /// Variables in order of first occurrence in the body.
    pub fn variables(&self) -> Vec<&str> {
        let terms = self.body.iter().flat_map(|atom| match atom {
            BodyAtom::Class { term, .. } => vec![term],
            BodyAtom::InZone { entity, zone } => vec![entity, zone],
            BodyAtom::Applies(_) | BodyAtom::MissionIs(_) => vec![],
        });
        let mut vars: Vec<&str> = Vec::new();
        for term in terms {
            if let Term::Var(v) = term {
                if !vars.contains(&v.as_str()) {
                    vars.push(v);
                }
            }
        }
        vars
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGroup {
    pub id: ConflictId,
    pub members: BTreeSet<ManeuverId>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assumption {
    pub id: AssumptionId,
    pub statement: String,
    /// Facts and rules this assumption is attached to, either declared on the
    /// assumption or through a rule's `assumes` list.
    pub attached_to: BTreeSet<String>,
    pub span: Span,
}

/// A structured legal analysis: premise, definitions, subsumptions, result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisRecord {
    pub id: AnalysisId,
    pub premise: String,
    pub definitions: Vec<(String, SourceId)>,
    /// Text plus the facts and rules it refers to.
    pub subsumptions: Vec<(String, Vec<String>)>,
    pub result: String,
    pub assumptions: Vec<AssumptionId>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityPlacement {
    pub entity: EntityId,
    pub class: ClassId,
    pub zone: ZoneId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ego {
    pub entity: EntityId,
    pub class: ClassId,
    pub mission: MissionId,
    pub zone: ZoneId,
}

/// Name of the ego entity in every scenario.
pub const EGO_ENTITY: &str = "ego";

/// The start scene of a functional scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub id: ScenarioId,
    pub ego: Option<Ego>,
    /// Non-ego placements; identical duplicates are collapsed.
    pub placements: Vec<EntityPlacement>,
    pub asserted_facts: BTreeSet<FactId>,
    pub expected_maneuvers: Option<BTreeSet<ManeuverId>>,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecModel {
    pub classes: BTreeMap<ClassId, SceneEntityClass>,
    pub characteristics: BTreeMap<CharacteristicId, Characteristic>,
    pub zones: BTreeMap<ZoneId, Zone>,
    pub grids: BTreeMap<GridId, ZoneGrid>,
    pub sources: BTreeMap<SourceId, KnowledgeSource>,
    pub facts: BTreeMap<FactId, Fact>,
    pub maneuvers: BTreeMap<ManeuverId, ManeuverOption>,
    pub missions: BTreeMap<MissionId, Mission>,
    pub rules: BTreeMap<RuleId, Rule>,
    pub conflict_groups: BTreeMap<ConflictId, ConflictGroup>,
    pub assumptions: BTreeMap<AssumptionId, Assumption>,
    pub analyses: BTreeMap<AnalysisId, AnalysisRecord>,
    pub scenarios: BTreeMap<ScenarioId, Scenario>,
    /// Reflexive-transitive ancestors of every class, computed once at resolve time.
    pub(crate) ancestors: BTreeMap<ClassId, BTreeSet<ClassId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown {kind} `{name}`")]
    UnknownIdentifier { kind: &'static str, name: String },
}

impl SpecModel {
    /// True iff `sup` is reachable from `sub` by zero or more parent links.
    pub fn is_subclass(&self, sub: &str, sup: &str) -> Result<bool, ModelError> {
        let unknown = |name: &str| ModelError::UnknownIdentifier {
            kind: "class",
            name: name.to_owned(),
        };
        let ancestors = self.ancestors.get(sub).ok_or_else(|| unknown(sub))?;
        if !self.classes.contains_key(sup) {
            return Err(unknown(sup));
        }
        Ok(ancestors.contains(sup))
    }

    /// Reflexive-transitive ancestors of `class`, or `None` for unknown classes.
    pub fn ancestors(&self, class: &str) -> Option<&BTreeSet<ClassId>> {
        self.ancestors.get(class)
    }

    pub fn scenario(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.get(id)
    }
}
