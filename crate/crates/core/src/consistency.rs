//! Checks run on inference results.
//!
//! Positive Horn rules cannot contradict each other, so "consistency" here
//! means the outcome of a scenario is usable: no two maneuvers of a declared
//! conflict group hold together, a vehicle with a mission gets at least one
//! maneuver, and a scenario's expected maneuver set is met exactly.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::diag::Severity;
use crate::model::{ConflictId, FactId, ManeuverId, MissionId, RuleId, Scenario, ScenarioId, SpecModel};
use crate::reasoner::{InferenceResult, InstantiateError, Reasoner, instantiate_scenario};

/// Findings sort by kind, then by the identifiers they carry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind")]
pub enum Finding {
    ConflictingManeuvers {
        group: ConflictId,
        maneuvers: BTreeSet<ManeuverId>,
    },
    NoManeuverInferred {
        mission: MissionId,
    },
    ExpectationMismatch {
        expected: BTreeSet<ManeuverId>,
        derived: BTreeSet<ManeuverId>,
    },
    RuleNeverFired {
        rule: RuleId,
    },
    FactNeverDerived {
        fact: FactId,
    },
}

impl Finding {
    pub fn severity(&self) -> Severity {
        match self {
            Finding::ConflictingManeuvers { .. }
            | Finding::NoManeuverInferred { .. }
            | Finding::ExpectationMismatch { .. } => Severity::Error,
            Finding::RuleNeverFired { .. } | Finding::FactNeverDerived { .. } => Severity::Warning,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Finding::ConflictingManeuvers { .. } => "ConflictingManeuvers",
            Finding::NoManeuverInferred { .. } => "NoManeuverInferred",
            Finding::ExpectationMismatch { .. } => "ExpectationMismatch",
            Finding::RuleNeverFired { .. } => "RuleNeverFired",
            Finding::FactNeverDerived { .. } => "FactNeverDerived",
        }
    }
}

fn set<T: fmt::Display>(items: &BTreeSet<T>) -> String {
    let v: Vec<String> = items.iter().map(T::to_string).collect();
    format!("{{{}}}", v.join(", "))
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]: ", self.severity(), self.kind())?;
        match self {
            Finding::ConflictingManeuvers { group, maneuvers } => {
                write!(f, "maneuvers {} of conflict group `{group}` hold together", set(maneuvers))
            }
            Finding::NoManeuverInferred { mission } => {
                write!(f, "mission `{mission}` is set but no maneuver was inferred")
            }
            Finding::ExpectationMismatch { expected, derived } => {
                write!(f, "expected maneuvers {}, derived {}", set(expected), set(derived))
            }
            Finding::RuleNeverFired { rule } => write!(f, "rule `{rule}` never fired"),
            Finding::FactNeverDerived { fact } => write!(f, "fact `{fact}` never holds"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

impl Verdict {
    fn of(findings: &[Finding]) -> Verdict {
        if findings.iter().any(|f| f.severity() == Severity::Error) {
            Verdict::Inconsistent
        } else {
            Verdict::Consistent
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub scenario_id: ScenarioId,
    /// Sorted.
    pub findings: Vec<Finding>,
    pub verdict: Verdict,
}

impl ConsistencyReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity() == Severity::Error)
    }
}

/// Checks one scenario's inference result.
pub fn check_scenario(
    model: &SpecModel,
    result: &InferenceResult,
    scenario: &Scenario,
) -> ConsistencyReport {
    let maneuvers = result.applicable_maneuvers();
    let mut findings = Vec::new();
    for g in model.conflict_groups.values() {
        let hit: BTreeSet<ManeuverId> = g.members.intersection(&maneuvers).cloned().collect();
        if hit.len() >= 2 {
            findings.push(Finding::ConflictingManeuvers {
                group: g.id.clone(),
                maneuvers: hit,
            });
        }
    }
    if let Some(ego) = &scenario.ego {
        if maneuvers.is_empty() {
            findings.push(Finding::NoManeuverInferred {
                mission: ego.mission.clone(),
            });
        }
    }
    if let Some(expected) = &scenario.expected_maneuvers {
        if *expected != maneuvers {
            findings.push(Finding::ExpectationMismatch {
                expected: expected.clone(),
                derived: maneuvers.clone(),
            });
        }
    }
    findings.extend(never_fired(model, [result]));
    findings.sort();
    ConsistencyReport {
        scenario_id: scenario.id.clone(),
        verdict: Verdict::of(&findings),
        findings,
    }
}

/// Rules that fired in none of the results and facts that held in none.
/// Facts that allow `UnderivableFact` are skipped.
fn never_fired<'a>(
    model: &SpecModel,
    results: impl IntoIterator<Item = &'a InferenceResult>,
) -> Vec<Finding> {
    let mut fired: BTreeSet<&RuleId> = BTreeSet::new();
    let mut facts: BTreeSet<FactId> = BTreeSet::new();
    for r in results {
        fired.extend(&r.fired_rules);
        facts.extend(r.facts());
    }
    let rules = model
        .rules
        .keys()
        .filter(|r| !fired.contains(r))
        .map(|r| Finding::RuleNeverFired { rule: r.clone() });
    let unused = model
        .facts
        .values()
        .filter(|f| {
            !facts.contains(&f.id) && !f.allow.contains(&crate::diag::Code::UnderivableFact)
        })
        .map(|f| Finding::FactNeverDerived { fact: f.id.clone() });
    rules.chain(unused).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    /// In the order the scenarios were given.
    pub reports: Vec<ConsistencyReport>,
    /// Rules never fired and facts never derived across all scenarios.
    pub findings: Vec<Finding>,
    pub verdict: Verdict,
}

/// Aggregates per-scenario checks over already computed results.
pub fn check_results(model: &SpecModel, runs: &[(&Scenario, &InferenceResult)]) -> SuiteReport {
    let reports: Vec<ConsistencyReport> = runs
        .iter()
        .map(|(s, r)| check_scenario(model, r, s))
        .collect();
    let findings = if runs.is_empty() {
        Vec::new()
    } else {
        let mut f = never_fired(model, runs.iter().map(|(_, r)| *r));
        f.sort();
        f
    };
    let verdict = if reports.iter().all(|r| r.verdict == Verdict::Consistent) {
        Verdict::of(&findings)
    } else {
        Verdict::Inconsistent
    };
    SuiteReport {
        reports,
        findings,
        verdict,
    }
}

/// Infers every scenario in parallel and checks the results.
pub fn check_suite(
    reasoner: &Reasoner<'_>,
    scenarios: &[&Scenario],
) -> Result<(SuiteReport, Vec<InferenceResult>), InstantiateError> {
    let model = reasoner.model();
    let memories = scenarios
        .iter()
        .map(|s| instantiate_scenario(model, s))
        .collect::<Result<Vec<_>, _>>()?;
    let results = reasoner.infer_all(&memories);
    let runs: Vec<(&Scenario, &InferenceResult)> =
        scenarios.iter().copied().zip(results.iter()).collect();
    Ok((check_results(model, &runs), results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_spec_source;
    use crate::model::resolve;

    fn model(src: &str) -> SpecModel {
        let p = parse_spec_source("t.nspec", src.as_bytes());
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        resolve(&p.decls).unwrap()
    }

    const BASE: &str = r#"
class Car : L4_MovableObject
zone Z
fact F kind = capturing
maneuver Stop lateral = keep_lane longitudinal = stop
maneuver Go lateral = keep_lane longitudinal = follow_desired_speed
mission Drive
rule A: Car(?c) => applies(F)
rule B: applies(F) => maneuver(Stop)
rule C: applies(F) => maneuver(Go)
"#;

    fn run(src: &str, scenario: &str) -> ConsistencyReport {
        let m = model(&format!("{src}\n{scenario}"));
        let s = m.scenarios.values().next().unwrap();
        let wm = instantiate_scenario(&m, s).unwrap();
        let r = Reasoner::new(&m).infer(&wm);
        check_scenario(&m, &r, s)
    }

    #[test]
    fn conflict_group_catches_both_heads() {
        let rep = run(
            &format!("{BASE}\nconflict StopVsGo = {{Stop, Go}}"),
            "scenario S { entity c : Car in Z }",
        );
        assert_eq!(rep.verdict, Verdict::Inconsistent);
        assert_eq!(
            rep.findings,
            vec![Finding::ConflictingManeuvers {
                group: "StopVsGo".into(),
                maneuvers: ["Go".into(), "Stop".into()].into(),
            }]
        );
    }

    #[test]
    fn no_mission_no_silence_finding() {
        let rep = run(BASE, "scenario S { }");
        assert!(rep
            .findings
            .iter()
            .all(|f| !matches!(f, Finding::NoManeuverInferred { .. })));
        assert_eq!(rep.verdict, Verdict::Consistent);
    }

    #[test]
    fn mission_without_maneuver_is_an_error() {
        let src = BASE.replace("rule A: Car(?c)", "rule A: Car(nobody)");
        let rep = run(&src, "scenario S { ego Car mission Drive in Z }");
        assert!(rep.findings.contains(&Finding::NoManeuverInferred {
            mission: "Drive".into()
        }));
        assert_eq!(rep.verdict, Verdict::Inconsistent);
    }

    #[test]
    fn expectation_is_exact_set_equality() {
        let rep = run(BASE, "scenario S { entity c : Car in Z\n expect maneuvers = {Stop} }");
        assert_eq!(
            rep.errors().collect::<Vec<_>>(),
            vec![&Finding::ExpectationMismatch {
                expected: ["Stop".into()].into(),
                derived: ["Go".into(), "Stop".into()].into(),
            }]
        );
        let ok = run(BASE, "scenario S { entity c : Car in Z\n expect maneuvers = {Go, Stop} }");
        assert_eq!(ok.verdict, Verdict::Consistent);
    }

    #[test]
    fn empty_suite_is_consistent() {
        let m = model(BASE);
        let rep = check_results(&m, &[]);
        assert!(rep.reports.is_empty() && rep.findings.is_empty());
        assert_eq!(rep.verdict, Verdict::Consistent);
    }

    #[test]
    fn warnings_alone_keep_the_verdict() {
        let rep = run(BASE, "scenario S { }");
        assert!(rep.findings.iter().all(|f| f.severity() == Severity::Warning));
        assert!(!rep.findings.is_empty());
        assert_eq!(rep.verdict, Verdict::Consistent);
    }
}
