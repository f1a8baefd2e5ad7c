//! Random specifications and scenarios as DSL text, plus a reference
//! evaluator that works on the generator's own representation.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use normspec::reasoner::GroundAssertion;
use rand::seq::SliceRandom;
use rand::Rng;

const LAYERS: [&str; 5] = [
    "L1_RoadLevel",
    "L2_TrafficInfrastructure",
    "L3_TemporaryManipulation",
    "L4_MovableObject",
    "L5_Environment",
];
const FACT_KINDS: [&str; 3] = ["capturing", "inferred", "maneuver_fact"];
const LONGITUDINAL: [&str; 3] = ["stop", "start", "follow_desired_speed"];
const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub entities: usize,
    pub rules: usize,
    pub zones: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            entities: 30,
            rules: 20,
            zones: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(&'static str),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    Class(usize, Term),
    InZone(Term, Term),
    Applies(usize),
    MissionIs(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    Fact(usize),
    Maneuver(usize),
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub body: Vec<Atom>,
    pub head: Head,
}

#[derive(Debug, Clone)]
pub enum Parent {
    Layer(&'static str),
    Class(usize),
}

#[derive(Debug, Clone)]
pub struct Spec {
    pub classes: Vec<Parent>,
    pub zones: usize,
    pub facts: Vec<&'static str>,
    pub maneuvers: usize,
    pub missions: usize,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    /// (class, mission, zone)
    pub ego: Option<(usize, usize, usize)>,
    /// (entity, class, zone)
    pub entities: Vec<(String, usize, usize)>,
    pub asserts: BTreeSet<usize>,
}

fn class(i: usize) -> String {
    format!("C{i}")
}
fn zone(i: usize) -> String {
    format!("Z{i}")
}
fn fact(i: usize) -> String {
    format!("F{i}")
}
fn maneuver(i: usize) -> String {
    format!("M{i}")
}
fn mission(i: usize) -> String {
    format!("Go{i}")
}

fn term_text(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("?{v}"),
        Term::Const(c) => c.clone(),
    }
}

pub fn random_spec(rng: &mut impl Rng, limits: Limits) -> Spec {
    let n_classes = rng.gen_range(1..=6);
    let classes = (0..n_classes)
        .map(|i| {
            if i == 0 || rng.gen_bool(0.4) {
                Parent::Layer(*LAYERS.choose(rng).unwrap())
            } else {
                Parent::Class(rng.gen_range(0..i))
            }
        })
        .collect();
    let zones = rng.gen_range(1..=limits.zones.max(1));
    let facts: Vec<&'static str> = (0..rng.gen_range(1..=8))
        .map(|_| *FACT_KINDS.choose(rng).unwrap())
        .collect();
    let maneuvers = rng.gen_range(1..=3);
    let missions = rng.gen_range(1..=2);
    let mut spec = Spec {
        classes,
        zones,
        facts,
        maneuvers,
        missions,
        rules: Vec::new(),
    };
    let n_rules = rng.gen_range(0..=limits.rules);
    for _ in 0..n_rules {
        let rule = random_rule(rng, &spec, limits);
        spec.rules.push(rule);
    }
    spec
}

fn random_rule(rng: &mut impl Rng, spec: &Spec, limits: Limits) -> Rule {
    let n = rng.gen_range(1..=4);
    let mut body = Vec::with_capacity(n);
    let entity_term = |rng: &mut dyn rand::RngCore| {
        if rng.gen_bool(0.1) {
            let k = rng.gen_range(0..limits.entities.max(1) + 1);
            Term::Const(if k == 0 { "ego".into() } else { format!("e{}", k - 1) })
        } else {
            Term::Var(VARS[rng.gen_range(0..VARS.len())])
        }
    };
    for _ in 0..n {
        let atom = match rng.gen_range(0..10) {
            0..=3 => Atom::Class(rng.gen_range(0..spec.classes.len()), entity_term(rng)),
            4..=6 => {
                let z = if rng.gen_bool(0.6) {
                    Term::Const(zone(rng.gen_range(0..spec.zones)))
                } else {
                    Term::Var(VARS[rng.gen_range(0..VARS.len())])
                };
                Atom::InZone(entity_term(rng), z)
            }
            7..=8 => Atom::Applies(rng.gen_range(0..spec.facts.len())),
            _ => Atom::MissionIs(rng.gen_range(0..spec.missions)),
        };
        body.push(atom);
    }
    let head = if rng.gen_bool(0.8) {
        Head::Fact(rng.gen_range(0..spec.facts.len()))
    } else {
        Head::Maneuver(rng.gen_range(0..spec.maneuvers))
    };
    Rule { body, head }
}

pub fn random_scene(rng: &mut impl Rng, spec: &Spec, name: &str, limits: Limits) -> Scene {
    let ego = rng.gen_bool(0.8).then(|| {
        (
            rng.gen_range(0..spec.classes.len()),
            rng.gen_range(0..spec.missions),
            rng.gen_range(0..spec.zones),
        )
    });
    let entities = (0..rng.gen_range(0..=limits.entities))
        .map(|i| {
            (
                format!("e{i}"),
                rng.gen_range(0..spec.classes.len()),
                rng.gen_range(0..spec.zones),
            )
        })
        .collect();
    let asserts = spec
        .facts
        .iter()
        .enumerate()
        .filter(|(_, k)| **k == "capturing")
        .filter(|_| rng.gen_bool(0.3))
        .map(|(i, _)| i)
        .collect();
    Scene {
        name: name.into(),
        ego,
        entities,
        asserts,
    }
}

/// A scene whose base assertions are a subset of `scene`'s.
pub fn sub_scene(rng: &mut impl Rng, scene: &Scene, name: &str) -> Scene {
    Scene {
        name: name.into(),
        ego: scene.ego.filter(|_| rng.gen_bool(0.8)),
        entities: scene
            .entities
            .iter()
            .filter(|_| rng.gen_bool(0.6))
            .cloned()
            .collect(),
        asserts: scene
            .asserts
            .iter()
            .filter(|_| rng.gen_bool(0.6))
            .copied()
            .collect(),
    }
}

impl Spec {
    /// One string per declaration.
    pub fn decls(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, p) in self.classes.iter().enumerate() {
            out.push(match p {
                Parent::Layer(l) => format!("class {} : {l}", class(i)),
                Parent::Class(c) => format!("class {} : {}", class(i), class(*c)),
            });
        }
        for i in 0..self.zones {
            out.push(format!("zone {}", zone(i)));
        }
        for (i, k) in self.facts.iter().enumerate() {
            let allow = if *k == "inferred" { " allow = [UnderivableFact]" } else { "" };
            out.push(format!("fact {} kind = {k}{allow}", fact(i)));
        }
        for i in 0..self.maneuvers {
            out.push(format!(
                "maneuver {} lateral = keep_lane longitudinal = {}",
                maneuver(i),
                LONGITUDINAL[i]
            ));
        }
        for i in 0..self.missions {
            out.push(format!("mission {}", mission(i)));
        }
        for (i, r) in self.rules.iter().enumerate() {
            let body: Vec<String> = r
                .body
                .iter()
                .map(|a| match a {
                    Atom::Class(c, t) => format!("{}({})", class(*c), term_text(t)),
                    Atom::InZone(e, z) => format!("in_zone({}, {})", term_text(e), term_text(z)),
                    Atom::Applies(f) => format!("applies({})", fact(*f)),
                    Atom::MissionIs(m) => format!("mission_is({})", mission(*m)),
                })
                .collect();
            let head = match r.head {
                Head::Fact(f) => format!("applies({})", fact(f)),
                Head::Maneuver(m) => format!("maneuver({})", maneuver(m)),
            };
            out.push(format!("rule R{i}: {} => {head}", body.join(", ")));
        }
        out
    }

    pub fn text(&self, scenes: &[&Scene]) -> String {
        let mut d = self.decls();
        d.extend(scenes.iter().map(|s| s.text()));
        d.join("\n") + "\n"
    }

    fn ancestors(&self, c: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([c]);
        let mut cur = c;
        while let Parent::Class(p) = self.classes[cur] {
            out.insert(p);
            cur = p;
        }
        out
    }
}

impl Scene {
    pub fn text(&self) -> String {
        let mut s = format!("scenario {} {{\n", self.name);
        if let Some((c, m, z)) = self.ego {
            s += &format!("    ego {} mission {} in {}\n", class(c), mission(m), zone(z));
        }
        for (e, c, z) in &self.entities {
            s += &format!("    entity {e} : {} in {}\n", class(*c), zone(*z));
        }
        for f in &self.asserts {
            s += &format!("    assert applies({})\n", fact(*f));
        }
        s + "}"
    }

    fn placements(&self) -> Vec<(String, usize, usize)> {
        let mut p = self.entities.clone();
        if let Some((c, _, z)) = self.ego {
            p.push(("ego".into(), c, z));
        }
        p
    }

    pub fn base(&self) -> BTreeSet<GroundAssertion> {
        let mut out: BTreeSet<GroundAssertion> = self
            .placements()
            .iter()
            .map(|(e, c, z)| GroundAssertion::entity_in(e.as_str(), class(*c).as_str(), zone(*z).as_str()))
            .collect();
        if let Some((_, m, _)) = self.ego {
            out.insert(GroundAssertion::mission(mission(m).as_str()));
        }
        out.extend(self.asserts.iter().map(|f| GroundAssertion::fact(fact(*f).as_str())));
        out
    }
}

type Env = BTreeMap<&'static str, String>;

fn unify(t: &Term, value: &str, env: &mut Env) -> bool {
    match t {
        Term::Const(c) => c == value,
        Term::Var(v) => match env.get(v) {
            Some(b) => b == value,
            None => {
                env.insert(v, value.to_owned());
                true
            }
        },
    }
}

struct Eval<'a> {
    spec: &'a Spec,
    placements: Vec<(String, usize, usize)>,
    facts: BTreeSet<usize>,
    mission: Option<usize>,
    subclass: bool,
}

impl Eval<'_> {
    fn class_ok(&self, actual: usize, wanted: usize) -> bool {
        actual == wanted || (self.subclass && self.spec.ancestors(actual).contains(&wanted))
    }

    fn holds(&self, body: &[Atom], env: &Env) -> bool {
        let Some((first, rest)) = body.split_first() else {
            return true;
        };
        match first {
            Atom::Applies(f) => self.facts.contains(f) && self.holds(rest, env),
            Atom::MissionIs(m) => self.mission == Some(*m) && self.holds(rest, env),
            Atom::Class(c, t) => self.placements.iter().any(|(e, ec, _)| {
                let mut env = env.clone();
                self.class_ok(*ec, *c) && unify(t, e, &mut env) && self.holds(rest, &env)
            }),
            Atom::InZone(te, tz) => self.placements.iter().any(|(e, _, z)| {
                let mut env = env.clone();
                unify(te, e, &mut env) && unify(tz, &zone(*z), &mut env) && self.holds(rest, &env)
            }),
        }
    }
}

/// Least fixpoint computed directly on the generated rules: a rule head is
/// added once some assignment of its variables satisfies the body.
pub fn reference_fixpoint(spec: &Spec, scene: &Scene, subclass: bool) -> BTreeSet<GroundAssertion> {
    let mut ev = Eval {
        spec,
        placements: scene.placements(),
        facts: scene.asserts.clone(),
        mission: scene.ego.map(|(_, m, _)| m),
        subclass,
    };
    let mut maneuvers = BTreeSet::new();
    loop {
        let mut changed = false;
        for r in &spec.rules {
            let fresh = match r.head {
                Head::Fact(f) => !ev.facts.contains(&f),
                Head::Maneuver(m) => !maneuvers.contains(&m),
            };
            if fresh && ev.holds(&r.body, &Env::new()) {
                match r.head {
                    Head::Fact(f) => ev.facts.insert(f),
                    Head::Maneuver(m) => maneuvers.insert(m),
                };
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = scene.base();
    out.extend(ev.facts.iter().map(|f| GroundAssertion::fact(fact(*f).as_str())));
    out.extend(maneuvers.iter().map(|m| GroundAssertion::maneuver(maneuver(*m).as_str())));
    out
}

fn random_text(rng: &mut impl Rng) -> String {
    const PIECES: [&str; 12] = [
        "plain", "§ 26", "\\\"quoted\\\"", "back\\\\slash", "tab\\t", "new\\nline", "ü", "Straße",
        "a, b", "{x}", "=>", "# not a comment",
    ];
    (0..rng.gen_range(1..=4))
        .map(|_| *PIECES.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_rational(rng: &mut impl Rng) -> String {
    let n: i64 = rng.gen_range(-50..=50);
    if rng.gen_bool(0.5) {
        n.to_string()
    } else {
        format!("{n}/{}", rng.gen_range(1..=9))
    }
}

/// Every declaration form with noisy strings and numbers, for round-trip
/// checks. The text need not resolve.
pub fn rich_spec_text(rng: &mut impl Rng) -> String {
    let spec = random_spec(rng, Limits::default());
    let mut d = spec.decls();
    let scene = random_scene(rng, &spec, "S0", Limits { entities: 5, ..Limits::default() });
    d.push(scene.text());
    d.push("characteristic Geo".into());
    let params: Vec<String> = (0..rng.gen_range(1..=3))
        .map(|i| {
            let (a, b) = (random_rational(rng), random_rational(rng));
            format!("p{i} unit = \"{}\" range = [{a}, {b}]", random_text(rng))
        })
        .collect();
    d.push(format!("characteristic Lin : Geo params ({})", params.join(", ")));
    d.push(format!(
        "zone Extra grid = G2 neighbors (front -> Z0, left -> Extra)"
    ));
    for i in 0..rng.gen_range(1..=3) {
        let excerpt = if rng.gen_bool(0.5) {
            format!(" excerpt = \"{}\"", random_text(rng))
        } else {
            String::new()
        };
        d.push(format!(
            "source S{i} kind = court_case citation = \"{}\"{excerpt}",
            random_text(rng)
        ));
    }
    d.push(format!(
        "fact Described kind = capturing sources = [S0] desc = \"{}\"",
        random_text(rng)
    ));
    d.push(format!("mission Described desc = \"{}\"", random_text(rng)));
    d.push("conflict G = {M0, M1}".into());
    d.push(format!(
        "assumption A0 attached = [Described]\n    statement = \"{}\"",
        random_text(rng)
    ));
    d.push(format!(
        "analysis An {{\n    premise = \"{}\"\n    definition \"{}\" from S0\n    subsumption \"{}\" refs [Described, R0]\n    subsumption \"{}\"\n    result = \"{}\"\n    assumes = [A0]\n}}",
        random_text(rng),
        random_text(rng),
        random_text(rng),
        random_text(rng),
        random_text(rng)
    ));
    d.shuffle(rng);
    d.join("\n") + "\n"
}
