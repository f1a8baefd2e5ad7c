//! Grounding and forward chaining.
//!
//! Base assertions sit at iteration 0. A rule application whose latest
//! premise first appeared at iteration `k` is recorded at iteration `k + 1`,
//! so every premise of a [`DerivationStep`] is strictly older than the step.
//! [`Reasoner::infer_naive`] re-matches every rule against a snapshot of the
//! whole memory each pass; [`Reasoner::infer`] only joins matches that use at
//! least one assertion from the previous iteration. Both record the same
//! steps.

mod matching;
mod memory;

use std::collections::{BTreeMap, BTreeSet};
use std::thread;

pub use memory::{instantiate_scenario, GroundAssertion, InstantiateError, MemoryError, WorkingMemory};

use crate::model::{
    EntityId, FactId, ManeuverId, Rule, RuleHead, RuleId, ScenarioId, SpecModel,
};
use matching::{Index, Window};

/// Variable name to entity or zone identifier.
pub type Binding = BTreeMap<String, String>;

/// One way a rule body holds: the binding and the assertions it used, in
/// body order without repeats.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Match {
    pub binding: Binding,
    pub premises: Vec<GroundAssertion>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DerivationStep {
    pub iteration: usize,
    pub conclusion: GroundAssertion,
    pub rule: RuleId,
    pub binding: Binding,
    pub premises: Vec<GroundAssertion>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceResult {
    pub scenario_id: ScenarioId,
    pub ego: Option<EntityId>,
    pub base: BTreeSet<GroundAssertion>,
    /// The fixpoint, base assertions included.
    pub derived: BTreeSet<GroundAssertion>,
    /// Sorted by iteration, then conclusion, rule and binding. There is one
    /// step per distinct (conclusion, rule, binding); base assertions have none.
    pub steps: Vec<DerivationStep>,
    pub fired_rules: BTreeSet<RuleId>,
    /// Highest step iteration, 0 when no rule fired.
    pub iterations: usize,
    /// Iteration at which each assertion of `derived` first appeared.
    pub first_iteration: BTreeMap<GroundAssertion, usize>,
}

impl InferenceResult {
    pub fn applicable_maneuvers(&self) -> BTreeSet<ManeuverId> {
        self.derived
            .iter()
            .filter_map(|a| match a {
                GroundAssertion::ManeuverApplies(m) => Some(m.clone()),
                _ => None,
            })
            .collect()
    }

    /// Facts that hold, asserted or derived.
    pub fn facts(&self) -> BTreeSet<FactId> {
        self.derived
            .iter()
            .filter_map(|a| match a {
                GroundAssertion::FactApplies(f) => Some(f.clone()),
                _ => None,
            })
            .collect()
    }

    /// Derived assertions that are not base assertions, ordered by
    /// (iteration, assertion).
    pub fn conclusions(&self) -> Vec<&GroundAssertion> {
        let mut v: Vec<&GroundAssertion> = self.derived.difference(&self.base).collect();
        v.sort_by_key(|a| (self.first_iteration[*a], *a));
        v
    }

    pub fn steps_for<'a>(
        &'a self,
        conclusion: &'a GroundAssertion,
    ) -> impl Iterator<Item = &'a DerivationStep> + 'a {
        self.steps.iter().filter(move |s| &s.conclusion == conclusion)
    }
}

/// Free-function form of [`InferenceResult::applicable_maneuvers`].
pub fn applicable_maneuvers(result: &InferenceResult) -> BTreeSet<ManeuverId> {
    result.applicable_maneuvers()
}

pub fn head_assertion(head: &RuleHead) -> GroundAssertion {
    match head {
        RuleHead::Fact(f) => GroundAssertion::FactApplies(f.clone()),
        RuleHead::Maneuver(m) => GroundAssertion::ManeuverApplies(m.clone()),
    }
}

/// Forward-chaining engine over one resolved model.
#[derive(Debug, Clone, Copy)]
pub struct Reasoner<'m> {
    model: &'m SpecModel,
    subclass_matching: bool,
}

struct Collector {
    base: BTreeSet<GroundAssertion>,
    seen: BTreeSet<(GroundAssertion, RuleId, Binding)>,
    steps: Vec<DerivationStep>,
}

impl Collector {
    fn new(base: &BTreeSet<GroundAssertion>) -> Self {
        Collector {
            base: base.clone(),
            seen: BTreeSet::new(),
            steps: Vec::new(),
        }
    }

    fn record(&mut self, rule: &Rule, binding: &Binding, premises: &[GroundAssertion], iteration: usize) {
        let conclusion = head_assertion(&rule.head);
        if self.base.contains(&conclusion) {
            return;
        }
        if self
            .seen
            .insert((conclusion.clone(), rule.id.clone(), binding.clone()))
        {
            self.steps.push(DerivationStep {
                iteration,
                conclusion,
                rule: rule.id.clone(),
                binding: binding.clone(),
                premises: premises.to_vec(),
            });
        }
    }

    fn finish(
        mut self,
        wm: &WorkingMemory,
        first_iteration: BTreeMap<GroundAssertion, usize>,
    ) -> InferenceResult {
        self.steps.sort();
        let fired_rules = self.steps.iter().map(|s| s.rule.clone()).collect();
        let iterations = self.steps.iter().map(|s| s.iteration).max().unwrap_or(0);
        InferenceResult {
            scenario_id: wm.scenario_id.clone(),
            ego: wm.ego.clone(),
            base: self.base,
            derived: first_iteration.keys().cloned().collect(),
            steps: self.steps,
            fired_rules,
            iterations,
            first_iteration,
        }
    }
}

impl<'m> Reasoner<'m> {
    /// A reasoner with subclass matching on class atoms.
    pub fn new(model: &'m SpecModel) -> Self {
        Reasoner {
            model,
            subclass_matching: true,
        }
    }

    /// With `false`, a class atom only matches entities of exactly that class.
    pub fn with_subclass_matching(mut self, enabled: bool) -> Self {
        self.subclass_matching = enabled;
        self
    }

    pub fn model(&self) -> &'m SpecModel {
        self.model
    }

    fn all_rules(&self) -> Vec<&'m Rule> {
        self.model.rules.values().collect()
    }

    /// Least fixpoint by repeated full passes.
    pub fn infer_naive(&self, wm: &WorkingMemory) -> InferenceResult {
        self.infer_naive_with(wm, &self.all_rules())
    }

    pub fn infer_naive_with(&self, wm: &WorkingMemory, rules: &[&Rule]) -> InferenceResult {
        let mut first: BTreeMap<GroundAssertion, usize> =
            wm.assertions().iter().map(|a| (a.clone(), 0)).collect();
        let mut collector = Collector::new(wm.assertions());
        for pass in 1.. {
            let snapshot: BTreeSet<GroundAssertion> = first.keys().cloned().collect();
            let mut added = Vec::new();
            for rule in rules {
                for m in self.match_rule(&snapshot, rule) {
                    collector.record(rule, &m.binding, &m.premises, pass);
                    let head = head_assertion(&rule.head);
                    if !snapshot.contains(&head) {
                        added.push(head);
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            for a in added {
                first.entry(a).or_insert(pass);
            }
        }
        collector.finish(wm, first)
    }

    /// Least fixpoint by semi-naive evaluation. Same result as
    /// [`Reasoner::infer_naive`].
    pub fn infer(&self, wm: &WorkingMemory) -> InferenceResult {
        self.infer_with(wm, &self.all_rules())
    }

    pub fn infer_with(&self, wm: &WorkingMemory, rules: &[&Rule]) -> InferenceResult {
        let mut index = Index {
            placements: wm.placements(),
            iteration: wm.assertions().iter().map(|a| (a.clone(), 0)).collect(),
        };
        let mut collector = Collector::new(wm.assertions());
        let mut delta: usize = 0;
        loop {
            let mut added = BTreeSet::new();
            for rule in rules {
                let n = rule.body.len();
                for i in 0..n {
                    let windows: Vec<Window> = (0..n)
                        .map(|j| match j.cmp(&i) {
                            std::cmp::Ordering::Less => match delta.checked_sub(1) {
                                Some(hi) => Window { lo: 0, hi: Some(hi) },
                                None => Window { lo: 1, hi: Some(0) },
                            },
                            std::cmp::Ordering::Equal => Window {
                                lo: delta,
                                hi: Some(delta),
                            },
                            std::cmp::Ordering::Greater => Window {
                                lo: 0,
                                hi: Some(delta),
                            },
                        })
                        .collect();
                    index.join(self, &rule.body, &windows, &mut |binding, premises| {
                        collector.record(rule, binding, premises, delta + 1);
                        let head = head_assertion(&rule.head);
                        if !index.iteration.contains_key(&head) {
                            added.insert(head);
                        }
                    });
                }
            }
            if added.is_empty() {
                break;
            }
            delta += 1;
            for a in added {
                index.iteration.insert(a, delta);
            }
        }
        collector.finish(wm, index.iteration)
    }

    /// Evaluates several memories on scoped threads. Results come back in
    /// input order.
    pub fn infer_all(&self, memories: &[WorkingMemory]) -> Vec<InferenceResult> {
        thread::scope(|s| {
            let handles: Vec<_> = memories
                .iter()
                .map(|wm| s.spawn(move || self.infer(wm)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("inference thread panicked"))
                .collect()
        })
    }

    /// Re-applies the step's rule to exactly its recorded premises. Returns
    /// the conclusion if the recorded binding is among the matches.
    pub fn replay_step(&self, step: &DerivationStep) -> Option<GroundAssertion> {
        let rule = self.model.rules.get(&step.rule)?;
        let premises: BTreeSet<GroundAssertion> = step.premises.iter().cloned().collect();
        self.match_rule(&premises, rule)
            .iter()
            .any(|m| m.binding == step.binding)
            .then(|| head_assertion(&rule.head))
    }
}
