use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::ExportError;
use crate::model::{RuleId, SpecModel};
use crate::reasoner::{GroundAssertion, InferenceResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Fact,
    Maneuver,
    Entity,
    Mission,
}

impl NodeKind {
    fn shape(self) -> &'static str {
        match self {
            NodeKind::Fact => "ellipse",
            NodeKind::Maneuver => "box",
            NodeKind::Entity => "plaintext",
            NodeKind::Mission => "hexagon",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Node {
    pub id: String,
    pub label: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub rule: RuleId,
}

/// Causal Behavior Graph: facts, maneuvers and scene entities linked by the
/// rules that derived one from another.
///
/// Fact, maneuver and mission nodes are keyed by their identifier, so graphs of
/// different scenarios share them when merged. Entity nodes are keyed
/// `entity:<scenario>/<entity>` and stay apart.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CausalBehaviorGraph {
    pub nodes: BTreeMap<String, Node>,
    pub edges: BTreeSet<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CbgOptions {
    pub include_entities: bool,
}

impl Default for CbgOptions {
    fn default() -> Self {
        CbgOptions {
            include_entities: true,
        }
    }
}

fn node_for(result: &InferenceResult, a: &GroundAssertion) -> Node {
    match a {
        GroundAssertion::EntityIn { entity, class, .. } => Node {
            id: format!("entity:{}/{entity}", result.scenario_id),
            label: format!("{entity}: {class}"),
            kind: NodeKind::Entity,
        },
        GroundAssertion::FactApplies(f) => Node {
            id: a.key(),
            label: f.to_string(),
            kind: NodeKind::Fact,
        },
        GroundAssertion::ManeuverApplies(m) => Node {
            id: a.key(),
            label: m.to_string(),
            kind: NodeKind::Maneuver,
        },
        GroundAssertion::MissionIs(m) => Node {
            id: a.key(),
            label: format!("mission {m}"),
            kind: NodeKind::Mission,
        },
    }
}

/// One node per assertion of the fixpoint and one edge per (premise,
/// conclusion) pair of every step that first establishes its conclusion,
/// labeled with the rule. Later re-derivations of an assertion that already
/// holds are left out: their premises can depend on that assertion, and the
/// retained steps strictly increase in iteration, so the graph is acyclic.
pub fn build_cbg(result: &InferenceResult, options: CbgOptions) -> CausalBehaviorGraph {
    let keep = |a: &GroundAssertion| {
        options.include_entities || !matches!(a, GroundAssertion::EntityIn { .. })
    };
    let mut g = CausalBehaviorGraph::default();
    for a in result.derived.iter().filter(|a| keep(a)) {
        let n = node_for(result, a);
        g.nodes.insert(n.id.clone(), n);
    }
    let first = result
        .steps
        .iter()
        .filter(|s| result.first_iteration.get(&s.conclusion) == Some(&s.iteration));
    for s in first {
        let to = node_for(result, &s.conclusion).id;
        for p in s.premises.iter().filter(|p| keep(p)) {
            g.edges.insert(Edge {
                from: node_for(result, p).id,
                to: to.clone(),
                rule: s.rule.clone(),
            });
        }
    }
    assert!(g.is_acyclic(), "derivation steps produced a cyclic graph");
    g
}

impl CausalBehaviorGraph {
    /// Set union of nodes and edges.
    pub fn merge(&mut self, other: &CausalBehaviorGraph) {
        for (k, n) in &other.nodes {
            self.nodes.entry(k.clone()).or_insert_with(|| n.clone());
        }
        self.edges.extend(other.edges.iter().cloned());
    }

    pub fn out_degree(&self, id: &str) -> usize {
        self.edges.iter().filter(|e| e.from == id).count()
    }

    pub fn in_degree(&self, id: &str) -> usize {
        self.edges.iter().filter(|e| e.to == id).count()
    }

    /// Nodes with incoming but no outgoing edges.
    pub fn sinks(&self) -> Vec<&str> {
        self.nodes
            .keys()
            .filter(|id| self.in_degree(id) > 0 && self.out_degree(id) == 0)
            .map(String::as_str)
            .collect()
    }

    /// Kahn's algorithm over the distinct (from, to) pairs.
    pub fn is_acyclic(&self) -> bool {
        let pairs: BTreeSet<(&str, &str)> = self
            .edges
            .iter()
            .map(|e| (e.from.as_str(), e.to.as_str()))
            .collect();
        let mut indeg: BTreeMap<&str, usize> = BTreeMap::new();
        for (f, t) in &pairs {
            indeg.entry(f).or_default();
            *indeg.entry(t).or_default() += 1;
        }
        let mut ready: Vec<&str> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut seen = 0;
        while let Some(n) = ready.pop() {
            seen += 1;
            for (_, t) in pairs.range((n, "")..).take_while(|(f, _)| *f == n) {
                let d = indeg.get_mut(t).expect("edge target counted");
                *d -= 1;
                if *d == 0 {
                    ready.push(t);
                }
            }
        }
        seen == indeg.len()
    }

    /// Acyclicity, rule labels that exist in the model, edges between known
    /// nodes, and maneuvers with out-degree 0.
    pub fn validate(&self, model: &SpecModel) -> Result<(), ExportError> {
        let fail = |msg: String| Err(ExportError::InvalidGraph(msg));
        if !self.is_acyclic() {
            return fail("graph has a cycle".into());
        }
        for e in &self.edges {
            if !model.rules.contains_key(&e.rule) {
                return fail(format!("edge label `{}` is not a rule", e.rule));
            }
            if !self.nodes.contains_key(&e.from) || !self.nodes.contains_key(&e.to) {
                return fail(format!("edge {} -> {} has a missing endpoint", e.from, e.to));
            }
        }
        for n in self.nodes.values() {
            if n.kind == NodeKind::Maneuver && self.out_degree(&n.id) > 0 {
                return fail(format!("maneuver node {} has outgoing edges", n.id));
            }
        }
        Ok(())
    }

    /// Every edge is backed by a derivation step of one of `results` with the
    /// same premise, conclusion and rule.
    pub fn edges_sound(&self, results: &[&InferenceResult]) -> bool {
        let mut backed = BTreeSet::new();
        for r in results {
            for s in &r.steps {
                let to = node_for(r, &s.conclusion).id;
                for p in &s.premises {
                    backed.insert((node_for(r, p).id, to.clone(), s.rule.clone()));
                }
            }
        }
        self.edges
            .iter()
            .all(|e| backed.contains(&(e.from.clone(), e.to.clone(), e.rule.clone())))
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz text. Nodes and edges are emitted in sorted order, so equal
/// graphs give identical bytes.
pub fn emit_dot(graph: &CausalBehaviorGraph) -> String {
    let mut s = String::from("digraph cbg {\n    rankdir=LR;\n");
    for n in graph.nodes.values() {
        writeln!(
            s,
            "    {} [label={}, shape={}];",
            quote(&n.id),
            quote(&n.label),
            n.kind.shape()
        )
        .unwrap();
    }
    for e in &graph.edges {
        writeln!(
            s,
            "    {} -> {} [label={}];",
            quote(&e.from),
            quote(&e.to),
            quote(e.rule.as_str())
        )
        .unwrap();
    }
    s.push_str("}\n");
    s
}
