//! Derivation trees and knowledge-source traceability.
//!
//! A tree explains one assertion: internal nodes are rule applications,
//! leaves are base assertions of the scenario. When a premise is expanded
//! inside a step of iteration `k`, only steps of iteration below `k` are
//! used, so trees are finite and no deeper than the result's iteration count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use thiserror::Error;

use crate::model::{AnalysisId, AssumptionId, FactId, ManeuverId, RuleId, SourceId, SpecModel};
use crate::reasoner::{Binding, DerivationStep, GroundAssertion, InferenceResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("`{0}` was not derived in this scenario")]
    TargetNotDerived(GroundAssertion),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DerivationTree {
    Leaf(GroundAssertion),
    Node {
        root: GroundAssertion,
        rule: RuleId,
        binding: Binding,
        children: Vec<DerivationTree>,
    },
}

impl DerivationTree {
    pub fn root(&self) -> &GroundAssertion {
        match self {
            DerivationTree::Leaf(a) => a,
            DerivationTree::Node { root, .. } => root,
        }
    }

    /// 0 for a leaf.
    pub fn depth(&self) -> usize {
        match self {
            DerivationTree::Leaf(_) => 0,
            DerivationTree::Node { children, .. } => {
                1 + children.iter().map(Self::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn leaves(&self) -> Vec<&GroundAssertion> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let DerivationTree::Leaf(a) = t {
                out.push(a);
            }
        });
        out
    }

    pub fn rules(&self) -> BTreeSet<&RuleId> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let DerivationTree::Node { rule, .. } = t {
                out.insert(rule);
            }
        });
        out
    }

    /// Facts at any node or leaf.
    pub fn facts(&self) -> BTreeSet<&FactId> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let GroundAssertion::FactApplies(f) = t.root() {
                out.insert(f);
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a DerivationTree)) {
        f(self);
        if let DerivationTree::Node { children, .. } = self {
            for c in children {
                c.walk(f);
            }
        }
    }

    /// Indented text, one assertion per line, rule applications marked `<=`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s, 0);
        s
    }

    fn render_into(&self, s: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        match self {
            DerivationTree::Leaf(a) => {
                writeln!(s, "{pad}{a}").unwrap();
            }
            DerivationTree::Node {
                root,
                rule,
                binding,
                children,
            } => {
                write!(s, "{pad}{root} <= {rule}").unwrap();
                if !binding.is_empty() {
                    let b: Vec<String> = binding.iter().map(|(k, v)| format!("?{k}={v}")).collect();
                    write!(s, " {{{}}}", b.join(", ")).unwrap();
                }
                s.push('\n');
                for c in children {
                    c.render_into(s, depth + 1);
                }
            }
        }
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

struct Enumerator<'r> {
    result: &'r InferenceResult,
    steps: BTreeMap<&'r GroundAssertion, Vec<&'r DerivationStep>>,
    max: usize,
    memo: BTreeMap<(&'r GroundAssertion, usize), Vec<DerivationTree>>,
}

impl<'r> Enumerator<'r> {
    /// Trees for `a` using only steps of iteration `<= bound`.
    fn trees(&mut self, a: &'r GroundAssertion, bound: usize) -> Vec<DerivationTree> {
        if self.result.base.contains(a) {
            return vec![DerivationTree::Leaf(a.clone())];
        }
        if let Some(t) = self.memo.get(&(a, bound)) {
            return t.clone();
        }
        let mut out = Vec::new();
        let steps: Vec<&DerivationStep> = self
            .steps
            .get(a)
            .map(|v| v.iter().copied().filter(|s| s.iteration <= bound).collect())
            .unwrap_or_default();
        for step in steps {
            if out.len() >= self.max {
                break;
            }
            assert!(step.iteration > 0, "derivation step at iteration 0");
            let options: Vec<Vec<DerivationTree>> = step
                .premises
                .iter()
                .map(|p| self.trees(p, step.iteration - 1))
                .collect();
            product(&options, self.max - out.len(), &mut |children| {
                out.push(DerivationTree::Node {
                    root: a.clone(),
                    rule: step.rule.clone(),
                    binding: step.binding.clone(),
                    children,
                });
            });
        }
        self.memo.insert((a, bound), out.clone());
        out
    }
}

/// Calls `emit` with up to `limit` combinations, first option varying slowest.
fn product(
    options: &[Vec<DerivationTree>],
    limit: usize,
    emit: &mut dyn FnMut(Vec<DerivationTree>),
) {
    if options.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0; options.len()];
    for _ in 0..limit {
        emit(idx.iter().zip(options).map(|(&i, o)| o[i].clone()).collect());
        let mut k = options.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Up to `max_trees` distinct derivation trees for `target`, ordered by
/// (rule, binding) of the top step, then recursively by the children.
pub fn derivation_trees(
    result: &InferenceResult,
    target: &GroundAssertion,
    max_trees: usize,
) -> Result<Vec<DerivationTree>, TraceError> {
    if !result.derived.contains(target) {
        return Err(TraceError::TargetNotDerived(target.clone()));
    }
    let mut steps: BTreeMap<&GroundAssertion, Vec<&DerivationStep>> = BTreeMap::new();
    for s in &result.steps {
        steps.entry(&s.conclusion).or_default().push(s);
    }
    for v in steps.values_mut() {
        v.sort_by(|a, b| (&a.rule, &a.binding).cmp(&(&b.rule, &b.binding)));
    }
    let mut e = Enumerator {
        result,
        steps,
        max: max_trees,
        memo: BTreeMap::new(),
    };
    if max_trees == 0 {
        return Ok(Vec::new());
    }
    Ok(e.trees(target, usize::MAX))
}

/// Why a maneuver holds, and which knowledge backs it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceReport {
    pub target: ManeuverId,
    pub trees: Vec<DerivationTree>,
    /// Sources linked from the rules and facts in `trees`.
    pub sources: BTreeSet<SourceId>,
    /// Assumptions of those rules plus assumptions attached to those rules or facts.
    pub assumptions: BTreeSet<AssumptionId>,
    /// Analyses whose subsumptions refer to those rules or facts.
    pub analyses: BTreeSet<AnalysisId>,
    pub unsourced_rules: BTreeSet<RuleId>,
    pub unsourced_facts: BTreeSet<FactId>,
}

impl TraceReport {
    /// False if any rule or fact in the trees lacks a source link.
    pub fn fully_sourced(&self) -> bool {
        self.unsourced_rules.is_empty() && self.unsourced_facts.is_empty()
    }
}

pub fn trace_report(
    model: &SpecModel,
    result: &InferenceResult,
    maneuver: &ManeuverId,
    max_trees: usize,
) -> Result<TraceReport, TraceError> {
    let target = GroundAssertion::ManeuverApplies(maneuver.clone());
    let trees = derivation_trees(result, &target, max_trees)?;
    let rules: BTreeSet<&RuleId> = trees.iter().flat_map(DerivationTree::rules).collect();
    let facts: BTreeSet<&FactId> = trees.iter().flat_map(DerivationTree::facts).collect();
    let names: BTreeSet<&str> = rules
        .iter()
        .map(|r| r.as_str())
        .chain(facts.iter().map(|f| f.as_str()))
        .collect();

    let mut report = TraceReport {
        target: maneuver.clone(),
        trees: Vec::new(),
        sources: BTreeSet::new(),
        assumptions: BTreeSet::new(),
        analyses: BTreeSet::new(),
        unsourced_rules: BTreeSet::new(),
        unsourced_facts: BTreeSet::new(),
    };
    for id in &rules {
        let Some(rule) = model.rules.get(*id) else { continue };
        report.sources.extend(rule.sources.iter().cloned());
        report.assumptions.extend(rule.assumptions.iter().cloned());
        if rule.sources.is_empty() {
            report.unsourced_rules.insert((*id).clone());
        }
    }
    for id in &facts {
        let Some(fact) = model.facts.get(*id) else { continue };
        report.sources.extend(fact.sources.iter().cloned());
        if fact.sources.is_empty() {
            report.unsourced_facts.insert((*id).clone());
        }
    }
    for a in model.assumptions.values() {
        if a.attached_to.iter().any(|t| names.contains(t.as_str())) {
            report.assumptions.insert(a.id.clone());
        }
    }
    for a in model.analyses.values() {
        let refs = a.subsumptions.iter().flat_map(|(_, r)| r);
        if refs.into_iter().any(|r| names.contains(r.as_str())) {
            report.analyses.insert(a.id.clone());
        }
    }
    report.trees = trees;
    Ok(report)
}
