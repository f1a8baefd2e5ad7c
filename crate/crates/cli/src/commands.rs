use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use normspec::consistency::{check_scenario, check_suite, Verdict};
use normspec::dsl::format_canonical;
use normspec::export::{build_cbg, emit_dot, CausalBehaviorGraph, emit_result_doc, emit_sequence, CbgOptions};
use normspec::model::{ManeuverId, Scenario};
use normspec::reasoner::{instantiate_scenario, InferenceResult, Reasoner};
use normspec::trace::{trace_report, TraceError};

use crate::load::{self, Workspace};
use crate::{Failure, Format, Options};

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_warnings(ws: &Workspace) {
    for w in &ws.warnings {
        eprintln!("{w}");
    }
}

fn reasoner<'m>(ws: &'m Workspace, opts: &Options) -> Reasoner<'m> {
    Reasoner::new(&ws.model).with_subclass_matching(opts.subclass_matching)
}

fn scenarios(ws: &Workspace) -> Vec<&Scenario> {
    ws.scenarios.iter().map(|id| &ws.model.scenarios[id]).collect()
}

/// Infers all scenarios in parallel; results keep the argument order.
fn infer_scenarios<'w>(
    ws: &'w Workspace,
    opts: &Options,
) -> Result<Vec<(&'w Scenario, InferenceResult)>, Failure> {
    let scens = scenarios(ws);
    let memories = scens
        .iter()
        .map(|s| {
            instantiate_scenario(&ws.model, s)
                .map_err(|e| Failure::Message(format!("scenario `{}`: {e}", s.id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let results = reasoner(ws, opts).infer_all(&memories);
    Ok(scens.into_iter().zip(results).collect())
}

pub fn check(files: &[PathBuf], opts: &Options) -> Result<(), Failure> {
    let ws = load::load(files, opts.strict)?;
    print_warnings(&ws);
    let (suite, _) = check_suite(&reasoner(&ws, opts), &scenarios(&ws))
        .map_err(|e| Failure::Message(e.to_string()))?;
    let mut s = String::new();
    for r in &suite.reports {
        writeln!(s, "scenario {}: {}", r.scenario_id, r.verdict).unwrap();
        for f in r.errors() {
            writeln!(s, "  {f}").unwrap();
        }
    }
    for f in &suite.findings {
        writeln!(s, "{f}").unwrap();
    }
    writeln!(s, "verdict: {}", suite.verdict).unwrap();
    print!("{s}");
    match suite.verdict {
        Verdict::Consistent => Ok(()),
        Verdict::Inconsistent => Err(Failure::Failed),
    }
}

fn infer_text(runs: &[(&Scenario, InferenceResult)]) -> String {
    let mut s = String::new();
    for (scen, r) in runs {
        writeln!(s, "scenario {} ({} iterations)", scen.id, r.iterations).unwrap();
        for a in r.conclusions() {
            writeln!(s, "  {} {a}", r.first_iteration[a]).unwrap();
        }
        let m: Vec<String> = r
            .applicable_maneuvers()
            .iter()
            .map(ToString::to_string)
            .collect();
        writeln!(s, "  maneuvers: {{{}}}", m.join(", ")).unwrap();
    }
    s
}

fn render(
    ws: &Workspace,
    opts: &Options,
    runs: &[(&Scenario, InferenceResult)],
    format: Format,
) -> Result<String, Failure> {
    match format {
        Format::Text => Ok(infer_text(runs)),
        Format::Doc => {
            if runs.is_empty() {
                return Ok(emit_result_doc(&ws.model, None, None));
            }
            Ok(runs
                .iter()
                .map(|(scen, r)| {
                    let report = check_scenario(&ws.model, r, scen);
                    emit_result_doc(&ws.model, Some(r), Some(&report))
                })
                .collect())
        }
        Format::Dot => {
            let options = CbgOptions {
                include_entities: !opts.no_entities,
            };
            let mut graph = CausalBehaviorGraph::default();
            for (_, r) in runs {
                graph.merge(&build_cbg(r, options));
            }
            graph
                .validate(&ws.model)
                .map_err(|e| Failure::Message(e.to_string()))?;
            Ok(emit_dot(&graph))
        }
        Format::Seq => {
            let parts = runs
                .iter()
                .map(|(_, r)| emit_sequence(&ws.model, r))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::Message(e.to_string()))?;
            Ok(parts.join("\n"))
        }
    }
}

pub fn infer(
    files: &[PathBuf],
    opts: &Options,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let ws = load::load(files, opts.strict)?;
    print_warnings(&ws);
    let runs = infer_scenarios(&ws, opts)?;
    write_output(&render(&ws, opts, &runs, format)?, out)
}

pub fn export(
    files: &[PathBuf],
    opts: &Options,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    infer(files, opts, format, out)
}

pub fn trace(
    files: &[PathBuf],
    opts: &Options,
    maneuver: &str,
    max_trees: usize,
) -> Result<(), Failure> {
    let ws = load::load(files, opts.strict)?;
    print_warnings(&ws);
    if !ws.model.maneuvers.contains_key(maneuver) {
        return Err(Failure::Message(format!("unknown maneuver `{maneuver}`")));
    }
    if ws.scenarios.is_empty() {
        return Err(Failure::usage("trace needs at least one scenario"));
    }
    let target = ManeuverId::from(maneuver);
    let mut s = String::new();
    let mut failed = false;
    for (scen, r) in infer_scenarios(&ws, opts)? {
        let report = match trace_report(&ws.model, &r, &target, max_trees) {
            Ok(rep) => rep,
            Err(TraceError::TargetNotDerived(a)) => {
                eprintln!("error: scenario {}: {a} is not derived", scen.id);
                failed = true;
                continue;
            }
        };
        writeln!(s, "scenario {}: maneuver({maneuver})", scen.id).unwrap();
        for (i, t) in report.trees.iter().enumerate() {
            writeln!(s, "tree {}", i + 1).unwrap();
            for line in t.render().lines() {
                writeln!(s, "  {line}").unwrap();
            }
        }
        writeln!(s, "sources").unwrap();
        for id in &report.sources {
            let src = &ws.model.sources[id];
            writeln!(s, "  {id} [{}] {}", src.kind, src.citation).unwrap();
        }
        writeln!(s, "assumptions").unwrap();
        for id in &report.assumptions {
            writeln!(s, "  {id}: {}", ws.model.assumptions[id].statement).unwrap();
        }
        writeln!(s, "analyses").unwrap();
        for id in &report.analyses {
            writeln!(s, "  {id}").unwrap();
        }
        for r in &report.unsourced_rules {
            writeln!(s, "warning: rule {r} has no knowledge source").unwrap();
        }
        for f in &report.unsourced_facts {
            writeln!(s, "warning: fact {f} has no knowledge source").unwrap();
        }
    }
    print!("{s}");
    if failed {
        Err(Failure::Failed)
    } else {
        Ok(())
    }
}

pub fn fmt(file: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let inputs = load::parse_inputs(&[file.to_path_buf()])?;
    write_output(&format_canonical(&inputs.decls), out)
}
