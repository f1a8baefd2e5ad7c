use std::collections::{BTreeMap, BTreeSet};

use super::{Binding, GroundAssertion, Match, Reasoner};
use crate::model::{BodyAtom, ClassId, EntityId, Rule, Term, ZoneId};

/// Inclusive range of first-derivation iterations an atom may match.
#[derive(Clone, Copy)]
pub(super) struct Window {
    pub lo: usize,
    pub hi: Option<usize>,
}

impl Window {
    fn contains(self, i: usize) -> bool {
        i >= self.lo && self.hi.map_or(true, |hi| i <= hi)
    }

    fn is_empty(self) -> bool {
        self.hi.is_some_and(|hi| hi < self.lo)
    }
}

fn unify(term: &Term, value: &str, binding: &mut Binding) -> bool {
    match term {
        Term::Const(c) => c == value,
        Term::Var(v) => match binding.get(v) {
            Some(bound) => bound == value,
            None => {
                binding.insert(v.clone(), value.to_owned());
                true
            }
        },
    }
}

fn dedup_push(premises: &mut Vec<GroundAssertion>, a: GroundAssertion) -> bool {
    if premises.contains(&a) {
        false
    } else {
        premises.push(a);
        true
    }
}

impl Reasoner<'_> {
    pub(super) fn class_matches(&self, actual: &ClassId, wanted: &ClassId) -> bool {
        actual == wanted
            || (self.subclass_matching
                && self
                    .model
                    .ancestors(actual.as_str())
                    .is_some_and(|a| a.contains(wanted)))
    }

    /// Every binding under which all body atoms of `rule` hold in `assertions`,
    /// with the assertions each match used. Scans the whole set per atom;
    /// this is the reference matcher.
    pub fn match_rule(&self, assertions: &BTreeSet<GroundAssertion>, rule: &Rule) -> Vec<Match> {
        let mut out = BTreeSet::new();
        self.scan(assertions, &rule.body, &mut Binding::new(), &mut Vec::new(), &mut out);
        out.into_iter()
            .map(|(binding, premises)| Match { binding, premises })
            .collect()
    }

    fn scan(
        &self,
        assertions: &BTreeSet<GroundAssertion>,
        body: &[BodyAtom],
        binding: &mut Binding,
        premises: &mut Vec<GroundAssertion>,
        out: &mut BTreeSet<(Binding, Vec<GroundAssertion>)>,
    ) {
        let Some((atom, rest)) = body.split_first() else {
            out.insert((binding.clone(), premises.clone()));
            return;
        };
        for a in assertions {
            let kind_fits = matches!(
                (atom, a),
                (BodyAtom::Class { .. } | BodyAtom::InZone { .. }, GroundAssertion::EntityIn { .. })
                    | (BodyAtom::Applies(_), GroundAssertion::FactApplies(_))
                    | (BodyAtom::MissionIs(_), GroundAssertion::MissionIs(_))
            );
            if !kind_fits {
                continue;
            }
            let mut b = binding.clone();
            let ok = match (atom, a) {
                (BodyAtom::Class { class, term }, GroundAssertion::EntityIn { entity, class: c, .. }) => {
                    self.class_matches(c, class) && unify(term, entity.as_str(), &mut b)
                }
                (
                    BodyAtom::InZone { entity, zone },
                    GroundAssertion::EntityIn {
                        entity: e, zone: z, ..
                    },
                ) => {
                    unify(entity, e.as_str(), &mut b)
                        && unify(zone, z.as_str(), &mut b)
                }
                (BodyAtom::Applies(f), GroundAssertion::FactApplies(g)) => f == g,
                (BodyAtom::MissionIs(m), GroundAssertion::MissionIs(n)) => m == n,
                _ => false,
            };
            if ok {
                let pushed = dedup_push(premises, a.clone());
                self.scan(assertions, rest, &mut b, premises, out);
                if pushed {
                    premises.pop();
                }
            }
        }
    }
}

/// Indexed view of working memory used by semi-naive evaluation. Entity
/// placements are base assertions and always sit at iteration 0.
pub(super) struct Index<'m> {
    pub placements: &'m BTreeMap<EntityId, (ClassId, ZoneId)>,
    pub iteration: BTreeMap<GroundAssertion, usize>,
}

impl Index<'_> {
    /// Matches `body` with atom `j` restricted to `windows[j]`, calling `emit`
    /// for every complete match.
    pub fn join(
        &self,
        reasoner: &Reasoner<'_>,
        body: &[BodyAtom],
        windows: &[Window],
        emit: &mut dyn FnMut(&Binding, &[GroundAssertion]),
    ) {
        if windows.iter().any(|w| w.is_empty()) {
            return;
        }
        self.step(reasoner, body, windows, &mut Binding::new(), &mut Vec::new(), emit);
    }

    fn step(
        &self,
        reasoner: &Reasoner<'_>,
        body: &[BodyAtom],
        windows: &[Window],
        binding: &mut Binding,
        premises: &mut Vec<GroundAssertion>,
        emit: &mut dyn FnMut(&Binding, &[GroundAssertion]),
    ) {
        let (Some((atom, rest)), Some((window, wrest))) = (body.split_first(), windows.split_first())
        else {
            emit(binding, premises);
            return;
        };
        let mut descend = |a: GroundAssertion, b: &mut Binding, premises: &mut Vec<GroundAssertion>| {
            let pushed = dedup_push(premises, a);
            self.step(reasoner, rest, wrest, b, premises, emit);
            if pushed {
                premises.pop();
            }
        };
        match atom {
            BodyAtom::Applies(_) | BodyAtom::MissionIs(_) => {
                let a = match atom {
                    BodyAtom::Applies(f) => GroundAssertion::FactApplies(f.clone()),
                    BodyAtom::MissionIs(m) => GroundAssertion::MissionIs(m.clone()),
                    _ => unreachable!(),
                };
                if self.iteration.get(&a).is_some_and(|&i| window.contains(i)) {
                    descend(a, binding, premises);
                }
            }
            BodyAtom::Class { term, .. } | BodyAtom::InZone { entity: term, .. } => {
                if !window.contains(0) {
                    return;
                }
                let fixed = match term {
                    Term::Const(c) => Some(c.as_str()),
                    Term::Var(v) => binding.get(v).map(String::as_str),
                };
                let candidates: Vec<(&EntityId, &(ClassId, ZoneId))> = match fixed {
                    Some(e) => self.placements.get_key_value(e).into_iter().collect(),
                    None => self.placements.iter().collect(),
                };
                for (entity, (class, zone)) in candidates {
                    let mut b = binding.clone();
                    let ok = match atom {
                        BodyAtom::Class { class: wanted, term } => {
                            reasoner.class_matches(class, wanted)
                                && unify(term, entity.as_str(), &mut b)
                        }
                        BodyAtom::InZone { entity: et, zone: zt } => {
                            unify(et, entity.as_str(), &mut b)
                                && unify(zt, zone.as_str(), &mut b)
                        }
                        _ => unreachable!(),
                    };
                    if ok {
                        let a = GroundAssertion::EntityIn {
                            entity: entity.clone(),
                            class: class.clone(),
                            zone: zone.clone(),
                        };
                        descend(a, &mut b, premises);
                    }
                }
            }
        }
    }
}
