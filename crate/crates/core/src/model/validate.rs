use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{sort_diagnostics, Code, Diagnostic, Span};

use super::*;

/// Static checks on a resolved model. Warnings flag likely authoring mistakes;
/// in strict-traceability mode a fact without knowledge sources is an error.
/// The result is sorted by span.
pub fn validate_model(model: &SpecModel, strict_traceability: bool) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    dangling(model, &mut diags);
    cycles(model, &mut diags);

    let derivable: BTreeSet<&FactId> = model
        .rules
        .values()
        .filter_map(|r| match &r.head {
            RuleHead::Fact(f) => Some(f),
            RuleHead::Maneuver(_) => None,
        })
        .collect();
    for f in model.facts.values() {
        if strict_traceability && f.sources.is_empty() {
            diags.push(Diagnostic::error(
                Code::MissingSourceLink,
                f.span.clone(),
                format!("fact `{}` is not linked to any knowledge source", f.id),
            ));
        }
        if f.kind == FactKind::Inferred
            && !derivable.contains(&f.id)
            && !f.allow.contains(&Code::UnderivableFact)
        {
            diags.push(Diagnostic::warning(
                Code::UnderivableFact,
                f.span.clone(),
                format!("inferred fact `{}` is not the head of any rule", f.id),
            ));
        }
    }

    let referenced: BTreeSet<&SourceId> = model
        .facts
        .values()
        .flat_map(|f| &f.sources)
        .chain(model.rules.values().flat_map(|r| &r.sources))
        .chain(
            model
                .analyses
                .values()
                .flat_map(|a| a.definitions.iter().map(|(_, s)| s)),
        )
        .collect();
    for s in model.sources.values() {
        if !referenced.contains(&s.id) {
            diags.push(Diagnostic::warning(
                Code::UnreferencedSource,
                s.span.clone(),
                format!("knowledge source `{}` is never referenced", s.id),
            ));
        }
    }

    let used: BTreeSet<&ManeuverId> = model
        .rules
        .values()
        .filter_map(|r| match &r.head {
            RuleHead::Maneuver(m) => Some(m),
            RuleHead::Fact(_) => None,
        })
        .collect();
    for m in model.maneuvers.values() {
        if !used.contains(&m.id) {
            diags.push(Diagnostic::warning(
                Code::UnusedManeuver,
                m.span.clone(),
                format!("maneuver `{}` is not the head of any rule", m.id),
            ));
        }
    }

    shared_names(model, &mut diags);
    sort_diagnostics(&mut diags);
    diags
}

/// Names used in more than one of the class, fact, maneuver, mission and
/// zone namespaces. Legal, but easy to misread.
fn shared_names(model: &SpecModel, diags: &mut Vec<Diagnostic>) {
    let mut sites: BTreeMap<&str, Vec<(&'static str, &Span)>> = BTreeMap::new();
    for c in model.classes.values() {
        sites.entry(c.id.as_str()).or_default().push(("class", &c.span));
    }
    for f in model.facts.values() {
        if !f.allow.contains(&Code::SharedIdentifier) {
            sites.entry(f.id.as_str()).or_default().push(("fact", &f.span));
        }
    }
    for m in model.maneuvers.values() {
        sites.entry(m.id.as_str()).or_default().push(("maneuver", &m.span));
    }
    for m in model.missions.values() {
        sites.entry(m.id.as_str()).or_default().push(("mission", &m.span));
    }
    for z in model.zones.values() {
        sites.entry(z.id.as_str()).or_default().push(("zone", &z.span));
    }
    for (name, mut uses) in sites {
        if uses.len() < 2 {
            continue;
        }
        uses.sort_by(|a, b| a.1.cmp(b.1));
        let kinds: Vec<&str> = uses.iter().map(|u| u.0).collect();
        diags.push(
            Diagnostic::warning(
                Code::SharedIdentifier,
                uses[0].1.clone(),
                format!("`{name}` names a {}", kinds.join(" and a ")),
            )
            .with_related(uses[1..].iter().map(|u| u.1.clone()).collect()),
        );
    }
}

fn dangling(model: &SpecModel, diags: &mut Vec<Diagnostic>) {
    let mut missing = |ok: bool, span: &Span, what: &str, name: &str| {
        if !ok {
            diags.push(Diagnostic::error(
                Code::DanglingReference,
                span.clone(),
                format!("reference to undeclared {what} `{name}`"),
            ));
        }
    };
    let is_fact_or_rule =
        |n: &str| model.facts.contains_key(n) || model.rules.contains_key(n);

    for c in model.classes.values() {
        if let Some(p) = &c.parent {
            missing(model.classes.contains_key(p), &c.span, "class", p.as_str());
        }
        for ch in &c.characteristics {
            missing(model.characteristics.contains_key(ch), &c.span, "characteristic", ch.as_str());
        }
    }
    for c in model.characteristics.values() {
        if let Some(p) = &c.parent {
            missing(model.characteristics.contains_key(p), &c.span, "characteristic", p.as_str());
        }
    }
    for z in model.zones.values() {
        for (_, n) in &z.neighbors {
            let ok = model.zones.get(n).is_some_and(|nz| nz.grid == z.grid);
            missing(ok, &z.span, "zone", n.as_str());
        }
    }
    for f in model.facts.values() {
        for s in &f.sources {
            missing(model.sources.contains_key(s), &f.span, "source", s.as_str());
        }
    }
    for r in model.rules.values() {
        for s in &r.sources {
            missing(model.sources.contains_key(s), &r.span, "source", s.as_str());
        }
        for a in &r.assumptions {
            missing(model.assumptions.contains_key(a), &r.span, "assumption", a.as_str());
        }
        for atom in &r.body {
            match atom {
                BodyAtom::Class { class, .. } => {
                    missing(model.classes.contains_key(class), &r.span, "class", class.as_str())
                }
                BodyAtom::InZone { zone: Term::Const(z), .. } => {
                    missing(model.zones.contains_key(z.as_str()), &r.span, "zone", z)
                }
                BodyAtom::InZone { .. } => {}
                BodyAtom::Applies(f) => {
                    missing(model.facts.contains_key(f), &r.span, "fact", f.as_str())
                }
                BodyAtom::MissionIs(m) => {
                    missing(model.missions.contains_key(m), &r.span, "mission", m.as_str())
                }
            }
        }
        match &r.head {
            RuleHead::Fact(f) => missing(model.facts.contains_key(f), &r.span, "fact", f.as_str()),
            RuleHead::Maneuver(m) => {
                missing(model.maneuvers.contains_key(m), &r.span, "maneuver", m.as_str())
            }
        }
    }
    for g in model.conflict_groups.values() {
        for m in &g.members {
            missing(model.maneuvers.contains_key(m), &g.span, "maneuver", m.as_str());
        }
    }
    for a in model.assumptions.values() {
        for t in &a.attached_to {
            missing(is_fact_or_rule(t), &a.span, "fact or rule", t);
        }
    }
    for a in model.analyses.values() {
        for (_, s) in &a.definitions {
            missing(model.sources.contains_key(s), &a.span, "source", s.as_str());
        }
        for r in a.subsumptions.iter().flat_map(|(_, refs)| refs) {
            missing(is_fact_or_rule(r), &a.span, "fact or rule", r);
        }
        for s in &a.assumptions {
            missing(model.assumptions.contains_key(s), &a.span, "assumption", s.as_str());
        }
    }
    for s in model.scenarios.values() {
        if let Some(e) = &s.ego {
            missing(model.classes.contains_key(&e.class), &s.span, "class", e.class.as_str());
            missing(model.missions.contains_key(&e.mission), &s.span, "mission", e.mission.as_str());
            missing(model.zones.contains_key(&e.zone), &s.span, "zone", e.zone.as_str());
        }
        for p in &s.placements {
            missing(model.classes.contains_key(&p.class), &s.span, "class", p.class.as_str());
            missing(model.zones.contains_key(&p.zone), &s.span, "zone", p.zone.as_str());
        }
        for f in &s.asserted_facts {
            missing(model.facts.contains_key(f), &s.span, "fact", f.as_str());
        }
        for m in s.expected_maneuvers.iter().flatten() {
            missing(model.maneuvers.contains_key(m), &s.span, "maneuver", m.as_str());
        }
    }
}

fn cycles(model: &SpecModel, diags: &mut Vec<Diagnostic>) {
    for c in model.classes.values() {
        let mut seen = BTreeSet::new();
        let mut cur = Some(&c.id);
        while let Some(id) = cur {
            if !seen.insert(id) {
                diags.push(Diagnostic::error(
                    Code::CyclicTaxonomy,
                    c.span.clone(),
                    format!("class `{}` is its own ancestor", c.id),
                ));
                break;
            }
            cur = model.classes.get(id).and_then(|c| c.parent.as_ref());
        }
    }
    for c in model.characteristics.values() {
        let mut seen = BTreeSet::new();
        let mut cur = Some(&c.id);
        while let Some(id) = cur {
            if !seen.insert(id) {
                diags.push(Diagnostic::error(
                    Code::CyclicTaxonomy,
                    c.span.clone(),
                    format!("characteristic `{}` is its own ancestor", c.id),
                ));
                break;
            }
            cur = model.characteristics.get(id).and_then(|c| c.parent.as_ref());
        }
    }
}
