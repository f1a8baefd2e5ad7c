use std::fmt::Write;

use super::ExportError;
use crate::model::{FactKind, SpecModel};
use crate::reasoner::{GroundAssertion, InferenceResult};

/// Text sequence diagram of a scenario's derivations.
///
/// Lifelines are the placed entities, ego first. A capturing fact derived
/// from a non-ego entity is a message from that entity to the ego; capturing
/// facts that involve only the ego are not drawn. Inferred facts, maneuver
/// facts and maneuvers are ego self-messages. Messages follow (iteration,
/// assertion) order. The entities of a capturing fact are collected over all
/// of its steps; the first by name sends the message and, when there are
/// several, a `note` line names all of them.
pub fn emit_sequence(model: &SpecModel, result: &InferenceResult) -> Result<String, ExportError> {
    let ego = result
        .ego
        .as_ref()
        .ok_or_else(|| ExportError::NoEgo(result.scenario_id.to_string()))?;
    let mut s = String::new();
    writeln!(s, "participant {ego}").unwrap();
    for a in &result.base {
        if let GroundAssertion::EntityIn { entity, .. } = a {
            if entity != ego {
                writeln!(s, "participant {entity}").unwrap();
            }
        }
    }
    for a in result.conclusions() {
        match a {
            GroundAssertion::FactApplies(f) => {
                let capturing = model
                    .facts
                    .get(f)
                    .is_some_and(|d| d.kind == FactKind::Capturing);
                if !capturing {
                    writeln!(s, "{ego} -> {ego} : {f}").unwrap();
                    continue;
                }
                let mut involved: Vec<&str> = result
                    .steps_for(a)
                    .flat_map(|step| step.premises.iter())
                    .filter_map(|p| match p {
                        GroundAssertion::EntityIn { entity, .. } if entity != ego => {
                            Some(entity.as_str())
                        }
                        _ => None,
                    })
                    .collect();
                involved.sort();
                involved.dedup();
                if let Some(first) = involved.first() {
                    writeln!(s, "{first} -> {ego} : {f}").unwrap();
                    if involved.len() > 1 {
                        writeln!(s, "note over {} : {f} involves several entities", involved.join(", "))
                            .unwrap();
                    }
                }
            }
            GroundAssertion::ManeuverApplies(m) => writeln!(s, "{ego} -> {ego} : {m}").unwrap(),
            GroundAssertion::EntityIn { .. } | GroundAssertion::MissionIs(_) => {}
        }
    }
    Ok(s)
}
