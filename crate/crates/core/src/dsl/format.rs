//! Canonical pretty-printer. Parsing its output yields declarations
//! structurally equal to the input.

use std::fmt::Write;

use super::ast::*;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn list(items: &[Ident]) -> String {
    items
        .iter()
        .map(|i| i.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

fn number(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{}", v.name),
        Term::Const(c) => c.name.clone(),
    }
}

fn atom(a: &Atom) -> String {
    match a {
        Atom::Class { class, term: t } => format!("{}({})", class.name, term(t)),
        Atom::InZone { entity, zone } => format!("in_zone({}, {})", term(entity), term(zone)),
        Atom::Applies(f) => format!("applies({})", f.name),
        Atom::MissionIs(m) => format!("mission_is({})", m.name),
    }
}

fn is_block(kind: &DeclKind) -> bool {
    matches!(
        kind,
        DeclKind::Rule(_) | DeclKind::Analysis(_) | DeclKind::Scenario(_)
    )
}

/// Formats one declaration without a trailing newline.
pub fn format_decl(kind: &DeclKind) -> String {
    let mut s = String::new();
    match kind {
        DeclKind::Class(c) => {
            write!(s, "class {}", c.name).unwrap();
            match &c.parent {
                Some(ClassParent::Layer(l)) => write!(s, " : {}", l.as_str()).unwrap(),
                Some(ClassParent::Class(p)) => write!(s, " : {p}").unwrap(),
                None => {}
            }
            if !c.characteristics.is_empty() {
                write!(s, " characteristics = [{}]", list(&c.characteristics)).unwrap();
            }
        }
        DeclKind::Characteristic(c) => {
            write!(s, "characteristic {}", c.name).unwrap();
            if let Some(p) = &c.parent {
                write!(s, " : {p}").unwrap();
            }
            if !c.params.is_empty() {
                let params: Vec<String> = c
                    .params
                    .iter()
                    .map(|p| {
                        let mut out = format!("{} unit = {}", p.name, quote(&p.unit));
                        if let Some((lo, hi)) = &p.range {
                            write!(out, " range = [{}, {}]", number(lo), number(hi)).unwrap();
                        }
                        out
                    })
                    .collect();
                write!(s, " params ({})", params.join(", ")).unwrap();
            }
        }
        DeclKind::Zone(z) => {
            write!(s, "zone {}", z.name).unwrap();
            if let Some(g) = &z.grid {
                write!(s, " grid = {g}").unwrap();
            }
            if !z.neighbors.is_empty() {
                let n: Vec<String> = z
                    .neighbors
                    .iter()
                    .map(|(d, t)| format!("{d} -> {t}"))
                    .collect();
                write!(s, " neighbors ({})", n.join(", ")).unwrap();
            }
        }
        DeclKind::Source(src) => {
            write!(
                s,
                "source {} kind = {} citation = {}",
                src.name,
                src.kind.as_str(),
                quote(&src.citation)
            )
            .unwrap();
            if let Some(e) = &src.excerpt {
                write!(s, "\n    excerpt = {}", quote(e)).unwrap();
            }
        }
        DeclKind::Fact(f) => {
            write!(s, "fact {} kind = {}", f.name, f.kind.as_str()).unwrap();
            if !f.sources.is_empty() {
                write!(s, " sources = [{}]", list(&f.sources)).unwrap();
            }
            if !f.allow.is_empty() {
                write!(s, " allow = [{}]", list(&f.allow)).unwrap();
            }
            if let Some(d) = &f.desc {
                write!(s, "\n    desc = {}", quote(d)).unwrap();
            }
        }
        DeclKind::Maneuver(m) => {
            write!(
                s,
                "maneuver {} lateral = {} longitudinal = {}",
                m.name,
                m.lateral.as_str(),
                m.longitudinal.as_str()
            )
            .unwrap();
        }
        DeclKind::Mission(m) => {
            write!(s, "mission {}", m.name).unwrap();
            if let Some(d) = &m.desc {
                write!(s, " desc = {}", quote(d)).unwrap();
            }
        }
        DeclKind::Rule(r) => {
            write!(s, "rule {}", r.name).unwrap();
            if !r.sources.is_empty() {
                write!(s, " sources = [{}]", list(&r.sources)).unwrap();
            }
            if !r.assumes.is_empty() {
                write!(s, " assumes = [{}]", list(&r.assumes)).unwrap();
            }
            s.push(':');
            let body: Vec<String> = r.body.iter().map(atom).collect();
            write!(s, "\n    {}", body.join(",\n    ")).unwrap();
            match &r.head {
                Head::Applies(f) => write!(s, "\n    => applies({f})").unwrap(),
                Head::Maneuver(m) => write!(s, "\n    => maneuver({m})").unwrap(),
            }
        }
        DeclKind::Conflict(c) => {
            write!(s, "conflict {} = {{{}}}", c.name, list(&c.members)).unwrap();
        }
        DeclKind::Assumption(a) => {
            write!(s, "assumption {}", a.name).unwrap();
            if !a.attached.is_empty() {
                write!(s, " attached = [{}]", list(&a.attached)).unwrap();
            }
            write!(s, "\n    statement = {}", quote(&a.statement)).unwrap();
        }
        DeclKind::Analysis(a) => {
            writeln!(s, "analysis {} {{", a.name).unwrap();
            writeln!(s, "    premise = {}", quote(&a.premise)).unwrap();
            for (text, src) in &a.definitions {
                writeln!(s, "    definition {} from {src}", quote(text)).unwrap();
            }
            for (text, refs) in &a.subsumptions {
                write!(s, "    subsumption {}", quote(text)).unwrap();
                if !refs.is_empty() {
                    write!(s, " refs [{}]", list(refs)).unwrap();
                }
                s.push('\n');
            }
            writeln!(s, "    result = {}", quote(&a.result)).unwrap();
            if !a.assumptions.is_empty() {
                writeln!(s, "    assumes = [{}]", list(&a.assumptions)).unwrap();
            }
            s.push('}');
        }
        DeclKind::Scenario(sc) => {
            writeln!(s, "scenario {} {{", sc.name).unwrap();
            for e in &sc.ego {
                writeln!(s, "    ego {} mission {} in {}", e.class, e.mission, e.zone).unwrap();
            }
            for p in &sc.placements {
                writeln!(s, "    entity {} : {} in {}", p.entity, p.class, p.zone).unwrap();
            }
            for f in &sc.asserts {
                writeln!(s, "    assert applies({f})").unwrap();
            }
            if let Some(expect) = &sc.expect {
                writeln!(s, "    expect maneuvers = {{{}}}", list(expect)).unwrap();
            }
            s.push('}');
        }
    }
    s
}

/// Deterministic canonical rendering of a declaration list. Declarations keep
/// their order; a blank line separates groups of different kinds and
/// surrounds every multi-line block.
pub fn format_canonical(decls: &[RawDecl]) -> String {
    let mut out = String::new();
    let mut prev: Option<&DeclKind> = None;
    for d in decls {
        if let Some(p) = prev {
            let separate = std::mem::discriminant(p) != std::mem::discriminant(&d.kind)
                || is_block(p)
                || is_block(&d.kind);
            out.push('\n');
            if separate {
                out.push('\n');
            }
        }
        out.push_str(&format_decl(&d.kind));
        prev = Some(&d.kind);
    }
    if !out.is_empty() {
        out.push('\n');
    }
    out
}
