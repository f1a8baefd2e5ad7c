use std::fs;
use std::path::{Path, PathBuf};

use normspec::diag::{has_errors, sort_diagnostics, Diagnostic};
use normspec::dsl::{parse_scenario_source, parse_spec_source, DeclKind, RawDecl};
use normspec::model::{resolve, validate_model, ScenarioId, SpecModel};

use crate::Failure;

pub fn is_scenario_file(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "nscen")
}

pub fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Declarations of every input file. Scenario files contribute one scenario
/// declaration each; spec files may declare scenarios inline.
pub struct Inputs {
    pub decls: Vec<RawDecl>,
    /// Scenario ids in the order they appear across the inputs.
    pub scenario_order: Vec<ScenarioId>,
}

pub fn parse_inputs(paths: &[PathBuf]) -> Result<Inputs, Failure> {
    let mut decls = Vec::new();
    let mut diags: Vec<Diagnostic> = Vec::new();
    let mut scenario_order = Vec::new();
    for path in paths {
        let bytes = read(path)?;
        let name = path.display().to_string();
        if is_scenario_file(path) {
            let parsed = parse_scenario_source(&name, &bytes);
            diags.extend(parsed.diagnostics);
            if let Some(s) = parsed.decls {
                let span = s.name.span.clone();
                decls.push(RawDecl {
                    kind: DeclKind::Scenario(s),
                    span,
                });
            }
        } else {
            let parsed = parse_spec_source(&name, &bytes);
            diags.extend(parsed.diagnostics);
            decls.extend(parsed.decls);
        }
    }
    if has_errors(&diags) {
        sort_diagnostics(&mut diags);
        return Err(Failure::Parse(diags));
    }
    for d in &decls {
        if let DeclKind::Scenario(s) = &d.kind {
            let id = ScenarioId::from(s.name.name.as_str());
            if !scenario_order.contains(&id) {
                scenario_order.push(id);
            }
        }
    }
    Ok(Inputs {
        decls,
        scenario_order,
    })
}

/// A resolved model, its validation warnings and the scenarios to run.
pub struct Workspace {
    pub model: SpecModel,
    pub warnings: Vec<Diagnostic>,
    pub scenarios: Vec<ScenarioId>,
}

pub fn load(paths: &[PathBuf], strict: bool) -> Result<Workspace, Failure> {
    if !paths.iter().any(|p| !is_scenario_file(p)) {
        return Err(Failure::usage("at least one specification file is required"));
    }
    let inputs = parse_inputs(paths)?;
    let model = resolve(&inputs.decls).map_err(Failure::Semantic)?;
    let diags = validate_model(&model, strict);
    if has_errors(&diags) {
        return Err(Failure::Semantic(diags));
    }
    Ok(Workspace {
        model,
        warnings: diags,
        scenarios: inputs.scenario_order,
    })
}
