use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{
    ClassId, EntityId, FactId, ManeuverId, MissionId, ModelError, Scenario, ScenarioId,
    SpecModel, ZoneId,
};

/// A ground atom of working memory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundAssertion {
    /// An entity of a class placed in a zone.
    EntityIn {
        entity: EntityId,
        class: ClassId,
        zone: ZoneId,
    },
    FactApplies(FactId),
    ManeuverApplies(ManeuverId),
    MissionIs(MissionId),
}

impl GroundAssertion {
    pub fn entity_in(
        entity: impl Into<EntityId>,
        class: impl Into<ClassId>,
        zone: impl Into<ZoneId>,
    ) -> Self {
        GroundAssertion::EntityIn {
            entity: entity.into(),
            class: class.into(),
            zone: zone.into(),
        }
    }

    pub fn fact(id: impl Into<FactId>) -> Self {
        GroundAssertion::FactApplies(id.into())
    }

    pub fn maneuver(id: impl Into<ManeuverId>) -> Self {
        GroundAssertion::ManeuverApplies(id.into())
    }

    pub fn mission(id: impl Into<MissionId>) -> Self {
        GroundAssertion::MissionIs(id.into())
    }

    /// The identifier a graph or document uses for this assertion, e.g.
    /// `fact:Sign293_captured` or `entity:s293`.
    pub fn key(&self) -> String {
        match self {
            GroundAssertion::EntityIn { entity, .. } => format!("entity:{entity}"),
            GroundAssertion::FactApplies(f) => format!("fact:{f}"),
            GroundAssertion::ManeuverApplies(m) => format!("maneuver:{m}"),
            GroundAssertion::MissionIs(m) => format!("mission:{m}"),
        }
    }
}

impl fmt::Display for GroundAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundAssertion::EntityIn {
                entity,
                class,
                zone,
            } => write!(f, "{entity} : {class} in {zone}"),
            GroundAssertion::FactApplies(id) => write!(f, "applies({id})"),
            GroundAssertion::ManeuverApplies(id) => write!(f, "maneuver({id})"),
            GroundAssertion::MissionIs(id) => write!(f, "mission_is({id})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MemoryError {
    #[error("working memory already holds mission `{existing}`, cannot add `{added}`")]
    SecondMission {
        existing: MissionId,
        added: MissionId,
    },
    #[error("entity `{0}` is already placed")]
    EntityPlacedTwice(EntityId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
}

/// The ground assertions of one scenario's start scene.
///
/// Set semantics: inserting an assertion twice is a no-op. Each entity has at
/// most one placement and there is at most one mission.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkingMemory {
    pub scenario_id: ScenarioId,
    pub ego: Option<EntityId>,
    assertions: BTreeSet<GroundAssertion>,
    placements: BTreeMap<EntityId, (ClassId, ZoneId)>,
}

impl WorkingMemory {
    pub fn new(scenario_id: impl Into<ScenarioId>) -> Self {
        WorkingMemory {
            scenario_id: scenario_id.into(),
            ..Default::default()
        }
    }

    pub fn from_assertions(
        scenario_id: impl Into<ScenarioId>,
        assertions: impl IntoIterator<Item = GroundAssertion>,
    ) -> Result<Self, MemoryError> {
        let mut wm = WorkingMemory::new(scenario_id);
        for a in assertions {
            wm.insert(a)?;
        }
        Ok(wm)
    }

    /// Adds an assertion. Returns `false` if it was already present.
    pub fn insert(&mut self, a: GroundAssertion) -> Result<bool, MemoryError> {
        if self.assertions.contains(&a) {
            return Ok(false);
        }
        match &a {
            GroundAssertion::MissionIs(m) => {
                if let Some(existing) = self.mission() {
                    return Err(MemoryError::SecondMission {
                        existing: existing.clone(),
                        added: m.clone(),
                    });
                }
            }
            GroundAssertion::EntityIn {
                entity,
                class,
                zone,
            } => {
                if self.placements.contains_key(entity) {
                    return Err(MemoryError::EntityPlacedTwice(entity.clone()));
                }
                self.placements
                    .insert(entity.clone(), (class.clone(), zone.clone()));
            }
            _ => {}
        }
        self.assertions.insert(a);
        Ok(true)
    }

    pub fn assertions(&self) -> &BTreeSet<GroundAssertion> {
        &self.assertions
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn contains(&self, a: &GroundAssertion) -> bool {
        self.assertions.contains(a)
    }

    pub fn mission(&self) -> Option<&MissionId> {
        self.assertions.iter().find_map(|a| match a {
            GroundAssertion::MissionIs(m) => Some(m),
            _ => None,
        })
    }

    /// Class and zone of every placed entity.
    pub fn placements(&self) -> &BTreeMap<EntityId, (ClassId, ZoneId)> {
        &self.placements
    }
}

/// Grounds a resolved scenario: one placement per entity (the ego included),
/// the ego's mission and every asserted fact.
pub fn instantiate_scenario(
    model: &SpecModel,
    scenario: &Scenario,
) -> Result<WorkingMemory, InstantiateError> {
    fn known<T: Ord + std::borrow::Borrow<str>, V>(
        map: &BTreeMap<T, V>,
        kind: &'static str,
        name: &str,
    ) -> Result<(), ModelError> {
        if map.contains_key(name) {
            Ok(())
        } else {
            Err(ModelError::UnknownIdentifier {
                kind,
                name: name.to_owned(),
            })
        }
    }

    let mut assertions = Vec::new();
    if let Some(ego) = &scenario.ego {
        known(&model.classes, "class", ego.class.as_str())?;
        known(&model.zones, "zone", ego.zone.as_str())?;
        known(&model.missions, "mission", ego.mission.as_str())?;
        assertions.push(GroundAssertion::EntityIn {
            entity: ego.entity.clone(),
            class: ego.class.clone(),
            zone: ego.zone.clone(),
        });
        assertions.push(GroundAssertion::MissionIs(ego.mission.clone()));
    }
    for p in &scenario.placements {
        known(&model.classes, "class", p.class.as_str())?;
        known(&model.zones, "zone", p.zone.as_str())?;
        assertions.push(GroundAssertion::EntityIn {
            entity: p.entity.clone(),
            class: p.class.clone(),
            zone: p.zone.clone(),
        });
    }
    for f in &scenario.asserted_facts {
        known(&model.facts, "fact", f.as_str())?;
        assertions.push(GroundAssertion::FactApplies(f.clone()));
    }
    let mut wm = WorkingMemory::from_assertions(scenario.id.clone(), assertions)?;
    wm.ego = scenario.ego.as_ref().map(|e| e.entity.clone());
    Ok(wm)
}
