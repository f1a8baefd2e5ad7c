use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{sort_diagnostics, Code, Diagnostic, Span};
use crate::dsl::ast::{self, ClassParent, DeclKind, Ident, RawDecl};

use super::*;

/// Resolves raw declarations into a [`SpecModel`].
///
/// Declarations may come from several files in any order. On failure every
/// resolution error is returned, sorted by span.
pub fn resolve(decls: &[RawDecl]) -> Result<SpecModel, Vec<Diagnostic>> {
    let mut r = Resolver::default();
    r.collect(decls);
    r.check_taxonomies();
    r.build(decls);
    if r.diags.is_empty() {
        r.model.ancestors = ancestor_sets(&r.model.classes);
        Ok(r.model)
    } else {
        sort_diagnostics(&mut r.diags);
        Err(r.diags)
    }
}

pub(crate) fn ancestor_sets(
    classes: &BTreeMap<ClassId, SceneEntityClass>,
) -> BTreeMap<ClassId, BTreeSet<ClassId>> {
    classes
        .keys()
        .map(|id| {
            let mut set = BTreeSet::new();
            let mut cur = Some(id);
            while let Some(c) = cur {
                if !set.insert(c.clone()) {
                    break;
                }
                cur = classes.get(c).and_then(|c| c.parent.as_ref());
            }
            (id.clone(), set)
        })
        .collect()
}

/// First declaration of each name per namespace.
#[derive(Default)]
struct Names<'a> {
    classes: BTreeMap<&'a str, &'a ast::ClassDecl>,
    characteristics: BTreeMap<&'a str, &'a ast::CharacteristicDecl>,
    zones: BTreeMap<&'a str, &'a ast::ZoneDecl>,
    sources: BTreeSet<&'a str>,
    facts: BTreeMap<&'a str, FactKind>,
    maneuvers: BTreeSet<&'a str>,
    missions: BTreeSet<&'a str>,
    rules: BTreeSet<&'a str>,
    assumptions: BTreeSet<&'a str>,
}

#[derive(Default)]
struct Resolver<'a> {
    names: Names<'a>,
    model: SpecModel,
    diags: Vec<Diagnostic>,
    /// Classes whose parent chain is broken; their layer is unknown.
    broken_classes: BTreeSet<&'a str>,
}

fn zone_grid(z: &ast::ZoneDecl) -> &str {
    z.grid.as_ref().map_or(DEFAULT_GRID, |g| g.as_str())
}

impl<'a> Resolver<'a> {
    fn unknown(&mut self, kind: &str, id: &Ident) {
        self.diags.push(Diagnostic::error(
            Code::UnknownIdentifier,
            id.span.clone(),
            format!("unknown {kind} `{id}`"),
        ));
    }

    fn check(&mut self, exists: bool, kind: &str, id: &Ident) {
        if !exists {
            self.unknown(kind, id);
        }
    }

    /// Registers every name and reports duplicates with all their sites.
    fn collect(&mut self, decls: &'a [RawDecl]) {
        let mut sites: BTreeMap<(&'static str, &str), Vec<Span>> = BTreeMap::new();
        for d in decls {
            let name = d.kind.name();
            sites
                .entry((d.kind.keyword(), name.as_str()))
                .or_default()
                .push(name.span.clone());
            let n = &mut self.names;
            let key = name.as_str();
            match &d.kind {
                DeclKind::Class(c) => {
                    n.classes.entry(key).or_insert(c);
                }
                DeclKind::Characteristic(c) => {
                    n.characteristics.entry(key).or_insert(c);
                }
                DeclKind::Zone(z) => {
                    n.zones.entry(key).or_insert(z);
                }
                DeclKind::Source(_) => {
                    n.sources.insert(key);
                }
                DeclKind::Fact(f) => {
                    n.facts.entry(key).or_insert(f.kind);
                }
                DeclKind::Maneuver(_) => {
                    n.maneuvers.insert(key);
                }
                DeclKind::Mission(_) => {
                    n.missions.insert(key);
                }
                DeclKind::Rule(_) => {
                    n.rules.insert(key);
                }
                DeclKind::Assumption(_) => {
                    n.assumptions.insert(key);
                }
                DeclKind::Conflict(_) | DeclKind::Analysis(_) | DeclKind::Scenario(_) => {}
            }
        }
        for ((kind, name), mut spans) in sites {
            if spans.len() > 1 {
                spans.sort();
                let first = spans.remove(0);
                self.diags.push(
                    Diagnostic::error(
                        Code::DuplicateIdentifier,
                        first,
                        format!("{kind} `{name}` is declared {} times", spans.len() + 1),
                    )
                    .with_related(spans),
                );
            }
        }
    }

    /// Reports unknown parents, cycles and missing root layers.
    fn check_taxonomies(&mut self) {
        let class_parents: BTreeMap<&str, Option<&Ident>> = self
            .names
            .classes
            .iter()
            .map(|(k, c)| {
                let parent = match &c.parent {
                    Some(ClassParent::Class(p)) => Some(p),
                    _ => None,
                };
                (*k, parent)
            })
            .collect();
        let char_parents: BTreeMap<&str, Option<&Ident>> = self
            .names
            .characteristics
            .iter()
            .map(|(k, c)| (*k, c.parent.as_ref()))
            .collect();
        let broken = self.walk_parents("class", &class_parents);
        self.walk_parents("characteristic", &char_parents);

        for (name, c) in &self.names.classes {
            if c.parent.is_none() {
                self.diags.push(Diagnostic::error(
                    Code::MissingLayer,
                    c.name.span.clone(),
                    format!(
                        "root class `{name}` needs a layer, one of {}",
                        LayerTag::ALL.map(LayerTag::as_str).join(", ")
                    ),
                ));
            }
        }
        self.broken_classes = broken;
    }

    /// Follows parent links from every node. Returns the nodes whose chain
    /// hits a cycle or an unknown parent.
    fn walk_parents(
        &mut self,
        kind: &str,
        parents: &BTreeMap<&'a str, Option<&'a Ident>>,
    ) -> BTreeSet<&'a str> {
        let mut broken = BTreeSet::new();
        let mut reported: BTreeSet<Vec<&str>> = BTreeSet::new();
        for &start in parents.keys() {
            let mut path: Vec<&str> = vec![start];
            let mut cur = start;
            loop {
                let Some(parent) = parents[cur] else { break };
                let p = parent.as_str();
                if !parents.contains_key(p) {
                    if cur == start {
                        self.unknown(&format!("parent {kind}"), parent);
                    }
                    broken.insert(start);
                    break;
                }
                if let Some(i) = path.iter().position(|n| *n == p) {
                    broken.insert(start);
                    let mut cycle = path[i..].to_vec();
                    let min = (0..cycle.len()).min_by_key(|&j| cycle[j]).unwrap_or(0);
                    cycle.rotate_left(min);
                    if reported.insert(cycle.clone()) {
                        let mut shown = cycle.clone();
                        shown.push(cycle[0]);
                        let span = self.taxonomy_span(kind, cycle[0]);
                        self.diags.push(Diagnostic::error(
                            Code::CyclicTaxonomy,
                            span,
                            format!("{kind} hierarchy has a cycle: {}", shown.join(" -> ")),
                        ));
                    }
                    break;
                }
                path.push(p);
                cur = p;
            }
        }
        broken
    }

    fn taxonomy_span(&self, kind: &str, name: &str) -> Span {
        if kind == "class" {
            self.names.classes[name].name.span.clone()
        } else {
            self.names.characteristics[name].name.span.clone()
        }
    }

    fn layer_of(&self, class: &str) -> Option<LayerTag> {
        if self.broken_classes.contains(class) {
            return None;
        }
        let mut cur = class;
        loop {
            match &self.names.classes.get(cur)?.parent {
                Some(ClassParent::Layer(l)) => return Some(*l),
                Some(ClassParent::Class(p)) => cur = p.as_str(),
                None => return None,
            }
        }
    }

    fn has_fact(&self, id: &Ident) -> bool {
        self.names.facts.contains_key(id.as_str())
    }

    fn build(&mut self, decls: &'a [RawDecl]) {
        let mut combos: BTreeMap<(LateralManeuver, LongitudinalManeuver), &Ident> =
            BTreeMap::new();
        let mut attached: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for d in decls {
            match &d.kind {
                DeclKind::Class(c) => self.class(c),
                DeclKind::Characteristic(c) => self.characteristic(c),
                DeclKind::Zone(z) => self.zone(z),
                DeclKind::Source(s) => self.source(s),
                DeclKind::Fact(f) => self.fact(f),
                DeclKind::Maneuver(m) => {
                    if let Some(prev) = combos.insert((m.lateral, m.longitudinal), &m.name) {
                        if prev.as_str() != m.name.as_str() {
                            self.diags.push(
                                Diagnostic::error(
                                    Code::DuplicateManeuverCombination,
                                    m.name.span.clone(),
                                    format!(
                                        "maneuver `{}` repeats ({}, {}) already used by `{prev}`",
                                        m.name, m.lateral, m.longitudinal
                                    ),
                                )
                                .with_related(vec![prev.span.clone()]),
                            );
                        }
                    }
                    self.model
                        .maneuvers
                        .entry(ManeuverId::new(m.name.as_str()))
                        .or_insert_with(|| ManeuverOption {
                            id: ManeuverId::new(m.name.as_str()),
                            lateral: m.lateral,
                            longitudinal: m.longitudinal,
                            span: m.name.span.clone(),
                        });
                }
                DeclKind::Mission(m) => {
                    self.model
                        .missions
                        .entry(MissionId::new(m.name.as_str()))
                        .or_insert_with(|| Mission {
                            id: MissionId::new(m.name.as_str()),
                            description: m.desc.clone().unwrap_or_default(),
                            span: m.name.span.clone(),
                        });
                }
                DeclKind::Rule(r) => {
                    for a in &r.assumes {
                        attached
                            .entry(a.as_str())
                            .or_default()
                            .insert(r.name.name.clone());
                    }
                    self.rule(r);
                }
                DeclKind::Conflict(c) => self.conflict(c),
                DeclKind::Assumption(a) => {
                    for t in &a.attached {
                        let ok = self.has_fact(t) || self.names.rules.contains(t.as_str());
                        self.check(ok, "fact or rule", t);
                        attached
                            .entry(a.name.as_str())
                            .or_default()
                            .insert(t.name.clone());
                    }
                    self.model
                        .assumptions
                        .entry(AssumptionId::new(a.name.as_str()))
                        .or_insert_with(|| Assumption {
                            id: AssumptionId::new(a.name.as_str()),
                            statement: a.statement.clone(),
                            attached_to: BTreeSet::new(),
                            span: a.name.span.clone(),
                        });
                }
                DeclKind::Analysis(a) => self.analysis(a),
                DeclKind::Scenario(s) => self.scenario(s, &d.span),
            }
        }
        for (id, set) in attached {
            if let Some(a) = self.model.assumptions.get_mut(id) {
                a.attached_to.extend(set);
            }
        }
    }

    fn class(&mut self, c: &ast::ClassDecl) {
        for ch in &c.characteristics {
            let ok = self.names.characteristics.contains_key(ch.as_str());
            self.check(ok, "characteristic", ch);
        }
        let Some(layer) = self.layer_of(c.name.as_str()) else {
            return;
        };
        let parent = match &c.parent {
            Some(ClassParent::Class(p)) => Some(ClassId::new(p.as_str())),
            _ => None,
        };
        self.model
            .classes
            .entry(ClassId::new(c.name.as_str()))
            .or_insert_with(|| SceneEntityClass {
                id: ClassId::new(c.name.as_str()),
                layer,
                parent,
                characteristics: c
                    .characteristics
                    .iter()
                    .map(|i| CharacteristicId::new(i.as_str()))
                    .collect(),
                span: c.name.span.clone(),
            });
    }

    fn characteristic(&mut self, c: &ast::CharacteristicDecl) {
        for p in &c.params {
            if let Some((lo, hi)) = &p.range {
                if lo > hi {
                    self.diags.push(Diagnostic::error(
                        Code::InvalidRange,
                        p.name.span.clone(),
                        format!("range of parameter `{}` is empty: {lo} > {hi}", p.name),
                    ));
                }
            }
        }
        self.model
            .characteristics
            .entry(CharacteristicId::new(c.name.as_str()))
            .or_insert_with(|| Characteristic {
                id: CharacteristicId::new(c.name.as_str()),
                parent: c.parent.as_ref().map(|p| CharacteristicId::new(p.as_str())),
                parameters: c
                    .params
                    .iter()
                    .map(|p| ParameterDecl {
                        id: p.name.name.clone(),
                        unit: p.unit.clone(),
                        range: p.range,
                    })
                    .collect(),
                span: c.name.span.clone(),
            });
    }

    fn zone(&mut self, z: &ast::ZoneDecl) {
        let grid = zone_grid(z);
        for (_, n) in &z.neighbors {
            match self.names.zones.get(n.as_str()) {
                None => self.unknown("zone", n),
                Some(other) if zone_grid(other) != grid => {
                    let msg = format!("neighbor `{n}` is not in grid `{grid}`");
                    self.diags
                        .push(Diagnostic::error(Code::UnknownIdentifier, n.span.clone(), msg));
                }
                Some(_) => {}
            }
        }
        let id = ZoneId::new(z.name.as_str());
        if self.model.zones.contains_key(&id) {
            return;
        }
        self.model
            .grids
            .entry(GridId::new(grid))
            .or_insert_with(|| ZoneGrid {
                id: GridId::new(grid),
                zones: BTreeSet::new(),
            })
            .zones
            .insert(id.clone());
        self.model.zones.insert(
            id.clone(),
            Zone {
                id,
                grid: GridId::new(grid),
                neighbors: z
                    .neighbors
                    .iter()
                    .map(|(d, n)| (d.name.clone(), ZoneId::new(n.as_str())))
                    .collect(),
                span: z.name.span.clone(),
            },
        );
    }

    fn source(&mut self, s: &ast::SourceDecl) {
        if s.citation.trim().is_empty() {
            self.diags.push(Diagnostic::error(
                Code::EmptyCitation,
                s.name.span.clone(),
                format!("source `{}` has an empty citation", s.name),
            ));
        }
        self.model
            .sources
            .entry(SourceId::new(s.name.as_str()))
            .or_insert_with(|| KnowledgeSource {
                id: SourceId::new(s.name.as_str()),
                kind: s.kind,
                citation: s.citation.clone(),
                excerpt: s.excerpt.clone(),
                span: s.name.span.clone(),
            });
    }

    fn sources(&mut self, ids: &[Ident]) -> Vec<SourceId> {
        for s in ids {
            let ok = self.names.sources.contains(s.as_str());
            self.check(ok, "source", s);
        }
        ids.iter().map(|s| SourceId::new(s.as_str())).collect()
    }

    fn fact(&mut self, f: &ast::FactDecl) {
        let sources = self.sources(&f.sources);
        let mut allow = BTreeSet::new();
        for a in &f.allow {
            match Code::from_name(a.as_str()) {
                Some(code) => {
                    allow.insert(code);
                }
                None => self.unknown("diagnostic code", a),
            }
        }
        self.model
            .facts
            .entry(FactId::new(f.name.as_str()))
            .or_insert_with(|| Fact {
                id: FactId::new(f.name.as_str()),
                kind: f.kind,
                sources,
                description: f.desc.clone().unwrap_or_default(),
                allow,
                span: f.name.span.clone(),
            });
    }

    fn term(&mut self, t: &ast::Term, zone_position: bool) -> Term {
        match t {
            ast::Term::Var(v) => Term::Var(v.name.clone()),
            ast::Term::Const(c) => {
                if zone_position {
                    let ok = self.names.zones.contains_key(c.as_str());
                    self.check(ok, "zone", c);
                }
                Term::Const(c.name.clone())
            }
        }
    }

    fn rule(&mut self, r: &ast::RuleDecl) {
        let sources = self.sources(&r.sources);
        for a in &r.assumes {
            let ok = self.names.assumptions.contains(a.as_str());
            self.check(ok, "assumption", a);
        }
        let mut body = Vec::with_capacity(r.body.len());
        for atom in &r.body {
            body.push(match atom {
                ast::Atom::Class { class, term } => {
                    let ok = self.names.classes.contains_key(class.as_str());
                    self.check(ok, "class", class);
                    BodyAtom::Class {
                        class: ClassId::new(class.as_str()),
                        term: self.term(term, false),
                    }
                }
                ast::Atom::InZone { entity, zone } => BodyAtom::InZone {
                    entity: self.term(entity, false),
                    zone: self.term(zone, true),
                },
                ast::Atom::Applies(f) => {
                    let ok = self.has_fact(f);
                    self.check(ok, "fact", f);
                    BodyAtom::Applies(FactId::new(f.as_str()))
                }
                ast::Atom::MissionIs(m) => {
                    let ok = self.names.missions.contains(m.as_str());
                    self.check(ok, "mission", m);
                    BodyAtom::MissionIs(MissionId::new(m.as_str()))
                }
            });
        }
        let head = match &r.head {
            ast::Head::Applies(f) => {
                let ok = self.has_fact(f);
                self.check(ok, "fact", f);
                RuleHead::Fact(FactId::new(f.as_str()))
            }
            ast::Head::Maneuver(m) => {
                let ok = self.names.maneuvers.contains(m.as_str());
                self.check(ok, "maneuver", m);
                RuleHead::Maneuver(ManeuverId::new(m.as_str()))
            }
        };
        self.model
            .rules
            .entry(RuleId::new(r.name.as_str()))
            .or_insert_with(|| Rule {
                id: RuleId::new(r.name.as_str()),
                sources,
                assumptions: r
                    .assumes
                    .iter()
                    .map(|a| AssumptionId::new(a.as_str()))
                    .collect(),
                body,
                head,
                span: r.name.span.clone(),
            });
    }

    fn conflict(&mut self, c: &ast::ConflictDecl) {
        let mut members = BTreeSet::new();
        for m in &c.members {
            let ok = self.names.maneuvers.contains(m.as_str());
            self.check(ok, "maneuver", m);
            if !members.insert(ManeuverId::new(m.as_str())) {
                self.diags.push(Diagnostic::error(
                    Code::InvalidConflictGroup,
                    m.span.clone(),
                    format!("conflict group `{}` lists `{m}` twice", c.name),
                ));
            }
        }
        if members.len() < 2 {
            self.diags.push(Diagnostic::error(
                Code::InvalidConflictGroup,
                c.name.span.clone(),
                format!("conflict group `{}` needs at least two maneuvers", c.name),
            ));
        }
        self.model
            .conflict_groups
            .entry(ConflictId::new(c.name.as_str()))
            .or_insert_with(|| ConflictGroup {
                id: ConflictId::new(c.name.as_str()),
                members,
                span: c.name.span.clone(),
            });
    }

    fn analysis(&mut self, a: &ast::AnalysisDecl) {
        for (_, s) in &a.definitions {
            let ok = self.names.sources.contains(s.as_str());
            self.check(ok, "source", s);
        }
        for (_, refs) in &a.subsumptions {
            for r in refs {
                let ok = self.has_fact(r) || self.names.rules.contains(r.as_str());
                self.check(ok, "fact or rule", r);
            }
        }
        for s in &a.assumptions {
            let ok = self.names.assumptions.contains(s.as_str());
            self.check(ok, "assumption", s);
        }
        self.model
            .analyses
            .entry(AnalysisId::new(a.name.as_str()))
            .or_insert_with(|| AnalysisRecord {
                id: AnalysisId::new(a.name.as_str()),
                premise: a.premise.clone(),
                definitions: a
                    .definitions
                    .iter()
                    .map(|(t, s)| (t.clone(), SourceId::new(s.as_str())))
                    .collect(),
                subsumptions: a
                    .subsumptions
                    .iter()
                    .map(|(t, refs)| (t.clone(), refs.iter().map(|r| r.name.clone()).collect()))
                    .collect(),
                result: a.result.clone(),
                assumptions: a
                    .assumptions
                    .iter()
                    .map(|s| AssumptionId::new(s.as_str()))
                    .collect(),
                span: a.name.span.clone(),
            });
    }

    fn scenario(&mut self, s: &ast::ScenarioDecl, span: &Span) {
        if s.ego.len() > 1 {
            self.diags.push(
                Diagnostic::error(
                    Code::DuplicateIdentifier,
                    s.ego[1].span.clone(),
                    format!("scenario `{}` declares the ego more than once", s.name),
                )
                .with_related(vec![s.ego[0].span.clone()]),
            );
        }
        let ego = s.ego.first().map(|e| {
            let ok = self.names.classes.contains_key(e.class.as_str());
            self.check(ok, "class", &e.class);
            let ok = self.names.missions.contains(e.mission.as_str());
            self.check(ok, "mission", &e.mission);
            let ok = self.names.zones.contains_key(e.zone.as_str());
            self.check(ok, "zone", &e.zone);
            Ego {
                entity: EntityId::new(EGO_ENTITY),
                class: ClassId::new(e.class.as_str()),
                mission: MissionId::new(e.mission.as_str()),
                zone: ZoneId::new(e.zone.as_str()),
            }
        });

        let mut placements: Vec<EntityPlacement> = Vec::new();
        let mut first_site: BTreeMap<&str, &Ident> = BTreeMap::new();
        for p in &s.placements {
            let ok = self.names.classes.contains_key(p.class.as_str());
            self.check(ok, "class", &p.class);
            let ok = self.names.zones.contains_key(p.zone.as_str());
            self.check(ok, "zone", &p.zone);
            let placement = EntityPlacement {
                entity: EntityId::new(p.entity.as_str()),
                class: ClassId::new(p.class.as_str()),
                zone: ZoneId::new(p.zone.as_str()),
            };
            if p.entity.as_str() == EGO_ENTITY {
                self.diags.push(Diagnostic::error(
                    Code::DuplicateIdentifier,
                    p.entity.span.clone(),
                    format!("`{EGO_ENTITY}` is reserved for the ego line"),
                ));
                continue;
            }
            match placements.iter().find(|q| q.entity == placement.entity) {
                Some(q) if *q == placement => {}
                Some(_) => {
                    let first = first_site[p.entity.as_str()];
                    self.diags.push(
                        Diagnostic::error(
                            Code::DuplicateIdentifier,
                            p.entity.span.clone(),
                            format!("entity `{}` is placed twice with different class or zone", p.entity),
                        )
                        .with_related(vec![first.span.clone()]),
                    );
                }
                None => {
                    first_site.insert(p.entity.as_str(), &p.entity);
                    placements.push(placement);
                }
            }
        }

        let mut asserted = BTreeSet::new();
        for f in &s.asserts {
            match self.names.facts.get(f.as_str()) {
                None => self.unknown("fact", f),
                Some(FactKind::Capturing) => {}
                Some(kind) => {
                    let msg = format!("only capturing facts can be asserted, `{f}` is {kind}");
                    self.diags
                        .push(Diagnostic::error(Code::NonCapturingAssertion, f.span.clone(), msg));
                }
            }
            asserted.insert(FactId::new(f.as_str()));
        }
        let expected = s.expect.as_ref().map(|ms| {
            ms.iter()
                .map(|m| {
                    let ok = self.names.maneuvers.contains(m.as_str());
                    self.check(ok, "maneuver", m);
                    ManeuverId::new(m.as_str())
                })
                .collect()
        });
        self.model
            .scenarios
            .entry(ScenarioId::new(s.name.as_str()))
            .or_insert_with(|| Scenario {
                id: ScenarioId::new(s.name.as_str()),
                ego,
                placements,
                asserted_facts: asserted,
                expected_maneuvers: expected,
                span: span.clone(),
            });
    }
}
