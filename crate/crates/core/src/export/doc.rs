use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ExportError;
use crate::consistency::ConsistencyReport;
use crate::model::{SourceKind, SpecModel};
use crate::reasoner::{Binding, GroundAssertion, InferenceResult};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DocAssertion {
    EntityIn {
        entity: String,
        class: String,
        zone: String,
    },
    Fact {
        id: String,
    },
    Maneuver {
        id: String,
    },
    Mission {
        id: String,
    },
}

impl From<&GroundAssertion> for DocAssertion {
    fn from(a: &GroundAssertion) -> Self {
        match a {
            GroundAssertion::EntityIn {
                entity,
                class,
                zone,
            } => DocAssertion::EntityIn {
                entity: entity.to_string(),
                class: class.to_string(),
                zone: zone.to_string(),
            },
            GroundAssertion::FactApplies(f) => DocAssertion::Fact { id: f.to_string() },
            GroundAssertion::ManeuverApplies(m) => DocAssertion::Maneuver { id: m.to_string() },
            GroundAssertion::MissionIs(m) => DocAssertion::Mission { id: m.to_string() },
        }
    }
}

impl From<&DocAssertion> for GroundAssertion {
    fn from(a: &DocAssertion) -> Self {
        match a {
            DocAssertion::EntityIn {
                entity,
                class,
                zone,
            } => GroundAssertion::entity_in(entity.as_str(), class.as_str(), zone.as_str()),
            DocAssertion::Fact { id } => GroundAssertion::fact(id.as_str()),
            DocAssertion::Maneuver { id } => GroundAssertion::maneuver(id.as_str()),
            DocAssertion::Mission { id } => GroundAssertion::mission(id.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocDerived {
    #[serde(flatten)]
    pub assertion: DocAssertion,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocStep {
    pub iteration: usize,
    pub conclusion: DocAssertion,
    pub rule: String,
    pub binding: Binding,
    pub premises: Vec<DocAssertion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocSource {
    pub id: String,
    pub kind: SourceKind,
    pub citation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excerpt: Option<String>,
    /// `rule:<id>` and `fact:<id>` entries that cite this source.
    pub linked_from: Vec<String>,
}

/// The structured result document of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub scenario: Option<String>,
    pub base: Vec<DocAssertion>,
    /// Non-base assertions ordered by (iteration, assertion).
    pub derived: Vec<DocDerived>,
    pub steps: Vec<DocStep>,
    pub findings: Vec<Value>,
    pub sources: Vec<DocSource>,
}

impl ResultDoc {
    pub fn empty() -> Self {
        ResultDoc {
            scenario: None,
            base: Vec::new(),
            derived: Vec::new(),
            steps: Vec::new(),
            findings: Vec::new(),
            sources: Vec::new(),
        }
    }

    pub fn build(
        model: &SpecModel,
        result: &InferenceResult,
        report: Option<&ConsistencyReport>,
    ) -> Self {
        let mut links: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for r in &result.fired_rules {
            for s in model.rules.get(r).map(|r| r.sources.as_slice()).unwrap_or_default() {
                links.entry(s.as_str()).or_default().insert(format!("rule:{r}"));
            }
        }
        for f in result.facts() {
            for s in model.facts.get(&f).map(|f| f.sources.as_slice()).unwrap_or_default() {
                links.entry(s.as_str()).or_default().insert(format!("fact:{f}"));
            }
        }
        let sources = links
            .into_iter()
            .filter_map(|(id, linked)| {
                let s = model.sources.get(id)?;
                Some(DocSource {
                    id: id.to_owned(),
                    kind: s.kind,
                    citation: s.citation.clone(),
                    excerpt: s.excerpt.clone(),
                    linked_from: linked.into_iter().collect(),
                })
            })
            .collect();
        let findings = report
            .map(|rep| {
                rep.findings
                    .iter()
                    .map(|f| {
                        let mut v = serde_json::to_value(f).expect("findings serialize");
                        if let Value::Object(m) = &mut v {
                            m.insert("severity".into(), Value::from(f.severity().to_string()));
                        }
                        v
                    })
                    .collect()
            })
            .unwrap_or_default();
        ResultDoc {
            scenario: Some(result.scenario_id.to_string()),
            base: result.base.iter().map(DocAssertion::from).collect(),
            derived: result
                .conclusions()
                .into_iter()
                .map(|a| DocDerived {
                    assertion: a.into(),
                    iteration: result.first_iteration[a],
                })
                .collect(),
            steps: result
                .steps
                .iter()
                .map(|s| DocStep {
                    iteration: s.iteration,
                    conclusion: (&s.conclusion).into(),
                    rule: s.rule.to_string(),
                    binding: s.binding.clone(),
                    premises: s.premises.iter().map(DocAssertion::from).collect(),
                })
                .collect(),
            findings,
            sources,
        }
    }

    /// Base and derived assertions together, i.e. the fixpoint.
    pub fn fixpoint(&self) -> BTreeSet<GroundAssertion> {
        self.base
            .iter()
            .chain(self.derived.iter().map(|d| &d.assertion))
            .map(GroundAssertion::from)
            .collect()
    }

    /// Pretty JSON with every object's keys sorted.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("document serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }
}

/// Renders the result document; `None` gives the empty document.
pub fn emit_result_doc(
    model: &SpecModel,
    result: Option<&InferenceResult>,
    report: Option<&ConsistencyReport>,
) -> String {
    match result {
        Some(r) => ResultDoc::build(model, r, report).to_json(),
        None => ResultDoc::empty().to_json(),
    }
}

pub fn parse_result_doc(text: &str) -> Result<ResultDoc, ExportError> {
    serde_json::from_str(text).map_err(|e| ExportError::BadDocument(e.to_string()))
}
