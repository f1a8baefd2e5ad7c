//! Exchange artifacts: the Causal Behavior Graph as Graphviz text, a text
//! sequence diagram and a JSON result document. Every emitter is
//! deterministic: equal inputs give identical bytes.

mod cbg;
mod doc;
mod sequence;

use thiserror::Error;

pub use cbg::{build_cbg, emit_dot, CausalBehaviorGraph, CbgOptions, Edge, Node, NodeKind};
pub use doc::{
    emit_result_doc, parse_result_doc, DocAssertion, DocDerived, DocSource, DocStep, ResultDoc,
};
pub use sequence::emit_sequence;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("scenario `{0}` has no ego vehicle")]
    NoEgo(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("malformed result document: {0}")]
    BadDocument(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::check_scenario;
    use crate::dsl::parse_spec_source;
    use crate::model::{resolve, SpecModel};
    use crate::reasoner::{instantiate_scenario, InferenceResult, Reasoner};

    const SPEC: &str = r#"
class Car : L4_MovableObject
class Sign : L2_TrafficInfrastructure
zone Z
zone Front
source S kind = statute citation = "§ 1"
fact Pos kind = capturing
fact Seen kind = capturing sources = [S]
fact Both kind = inferred
maneuver Stop lateral = keep_lane longitudinal = stop
mission Drive
rule P: Car(?c), in_zone(?c, Z) => applies(Pos)
rule See sources = [S]: Sign(?s), in_zone(?s, Front) => applies(Seen)
rule Join: applies(Pos), applies(Seen) => applies(Both)
rule Halt: applies(Both) => maneuver(Stop)
scenario A {
    ego Car mission Drive in Z
    entity b : Sign in Front
    entity a : Sign in Front
}
scenario Bare {
    ego Car mission Drive in Front
}
"#;

    fn run(name: &str) -> (SpecModel, InferenceResult) {
        let p = parse_spec_source("t.nspec", SPEC.as_bytes());
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        let m = resolve(&p.decls).unwrap();
        let wm = instantiate_scenario(&m, &m.scenarios[name]).unwrap();
        let r = Reasoner::new(&m).infer(&wm);
        (m, r)
    }

    #[test]
    fn graph_is_valid_with_one_sink() {
        let (m, r) = run("A");
        let g = build_cbg(&r, CbgOptions::default());
        g.validate(&m).unwrap();
        assert!(g.edges_sound(&[&r]));
        assert_eq!(g.sinks(), ["maneuver:Stop"]);
        assert!(g.nodes.contains_key("entity:A/a"));
        let bare = build_cbg(&r, CbgOptions { include_entities: false });
        assert!(bare.nodes.values().all(|n| n.kind != NodeKind::Entity));
    }

    #[test]
    fn rederivation_does_not_close_a_cycle() {
        let src = "class Car : L4_MovableObject\nzone Z\nfact P kind = capturing\n\
                   fact Q kind = inferred\nmission Drive\n\
                   rule A: Car(?c) => applies(P)\nrule B: applies(P) => applies(Q)\n\
                   rule C: applies(Q) => applies(P)\n\
                   scenario S {\n    ego Car mission Drive in Z\n}\n";
        let p = parse_spec_source("t.nspec", src.as_bytes());
        let m = resolve(&p.decls).unwrap();
        let r = Reasoner::new(&m).infer(&instantiate_scenario(&m, &m.scenarios["S"]).unwrap());
        assert!(r.steps.iter().any(|s| s.rule == "C"));
        let g = build_cbg(&r, CbgOptions::default());
        assert!(g.is_acyclic());
        assert!(g.edges.iter().all(|e| e.rule != "C"));
        assert_eq!(g.sinks(), ["fact:Q"]);
    }

    #[test]
    fn dot_for_single_node() {
        let mut g = CausalBehaviorGraph::default();
        g.nodes.insert(
            "fact:X".into(),
            Node {
                id: "fact:X".into(),
                label: "X".into(),
                kind: NodeKind::Fact,
            },
        );
        let dot = emit_dot(&g);
        assert_eq!(dot.matches("shape=").count(), 1);
        assert!(dot.contains("\"fact:X\" [label=\"X\", shape=ellipse];"));
    }

    #[test]
    fn sequence_draws_entities_and_notes() {
        let (m, r) = run("A");
        let seq = emit_sequence(&m, &r).unwrap();
        assert_eq!(
            seq,
            "participant ego\nparticipant a\nparticipant b\n\
             a -> ego : Seen\nnote over a, b : Seen involves several entities\n\
             ego -> ego : Both\nego -> ego : Stop\n"
        );
    }

    #[test]
    fn ego_only_scenario_has_one_lifeline() {
        let (m, r) = run("Bare");
        assert_eq!(emit_sequence(&m, &r).unwrap(), "participant ego\n");
    }

    #[test]
    fn result_doc_round_trips() {
        let (m, r) = run("A");
        let rep = check_scenario(&m, &r, &m.scenarios["A"]);
        let text = emit_result_doc(&m, Some(&r), Some(&rep));
        let back = parse_result_doc(&text).unwrap();
        assert_eq!(back.fixpoint(), r.derived);
        assert_eq!(back.derived.len(), 4);
        assert_eq!(back.sources.len(), 1);
        assert_eq!(back.sources[0].linked_from, ["fact:Seen", "rule:See"]);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["base", "derived", "findings", "scenario", "sources", "steps"]);
    }

    #[test]
    fn empty_doc() {
        let text = emit_result_doc(&SpecModel::default(), None, None);
        let back = parse_result_doc(&text).unwrap();
        assert_eq!(back, ResultDoc::empty());
        assert!(text.contains("\"scenario\": null"));
    }
}
