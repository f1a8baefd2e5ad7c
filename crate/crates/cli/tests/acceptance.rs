//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.
//!
//! The parser fuzz run lasts `NORMSPEC_FUZZ_SECS` seconds (default 600).

#[path = "../../core/tests/common/gen.rs"]
mod gen;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use normspec::dsl::{
    format_canonical, parse_scenario_source, parse_spec_source, tokenize, DeclKind, RawDecl,
};
use normspec::export::{build_cbg, CbgOptions};
use normspec::model::{resolve, validate_model, SpecModel};
use normspec::reasoner::{instantiate_scenario, InferenceResult, Reasoner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RANDOM_INSTANCES: usize = 1000;
const MONOTONE_PAIRS: usize = 500;
const ROUND_TRIP_SPECS: usize = 500;
const SCENARIO_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const HANG_LIMIT: Duration = Duration::from_secs(10);

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn normspec(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_normspec"));
    for a in args {
        if a.ends_with(".nspec") || a.ends_with(".nscen") {
            cmd.arg(corpus(a));
        } else {
            cmd.arg(a);
        }
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn load(files: &[&str]) -> SpecModel {
    let mut decls: Vec<RawDecl> = Vec::new();
    for f in files {
        let bytes = fs::read(corpus(f)).unwrap();
        if f.ends_with(".nscen") {
            let s = parse_scenario_source(f, &bytes).decls.expect("scenario parses");
            let span = s.name.span.clone();
            decls.push(RawDecl {
                kind: DeclKind::Scenario(s),
                span,
            });
        } else {
            let p = parse_spec_source(f, &bytes);
            assert!(p.diagnostics.is_empty(), "{f}: {:?}", p.diagnostics);
            decls.extend(p.decls);
        }
    }
    resolve(&decls).expect("corpus resolves")
}

fn infer(m: &SpecModel, scenario: &str) -> InferenceResult {
    Reasoner::new(m).infer(&instantiate_scenario(m, &m.scenarios[scenario]).unwrap())
}

fn names<T: ToString>(items: impl IntoIterator<Item = T>) -> Vec<String> {
    items.into_iter().map(|x| x.to_string()).collect()
}

/// Time of parse, resolve and inference of one scenario.
fn timed_run(spec: &str, scen: &str, id: &str) -> (InferenceResult, Duration) {
    let start = Instant::now();
    let m = load(&[spec, scen]);
    let r = infer(&m, id);
    (r, start.elapsed())
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Results collected from the random runs, reused by later criteria.
#[derive(Default)]
struct Runs {
    models: Vec<SpecModel>,
    results: Vec<Vec<InferenceResult>>,
}

fn criterion_1() -> Outcome {
    let (r, t) = timed_run("corpus_v1.nspec", "A.nscen", "A");
    let maneuvers = names(r.applicable_maneuvers());
    let facts = names(r.facts());
    let chain = [
        "EgoPositionNearPedestrianCrossing",
        "PedestrianCrossingIntention",
        "PedestrianNearPedestrianCrossing",
        "Sign293_captured",
        "Sign350_captured",
        "ValidPedestrianCrossing",
    ];
    let cli = stdout(&normspec(&["infer", "corpus_v1.nspec", "A.nscen"]));
    let pass = maneuvers == ["KeepLane_Stop"]
        && facts == chain
        && t < SCENARIO_BUDGET
        && cli.contains("maneuvers: {KeepLane_Stop}");
    outcome(
        pass,
        format!("maneuvers {maneuvers:?}, {} facts, {:.1} ms", facts.len(), t.as_secs_f64() * 1e3),
    )
}

fn criterion_2() -> Outcome {
    let (r, t) = timed_run("corpus_v1.nspec", "B.nscen", "B");
    let maneuvers = names(r.applicable_maneuvers());
    let o = normspec(&["check", "corpus_v1.nspec", "B.nscen"]);
    let text = stdout(&o);
    let pass = maneuvers == ["KeepLane_FollowDesiredSpeed"]
        && o.status.code() == Some(1)
        && text.contains("ExpectationMismatch")
        && text.contains("expected maneuvers {KeepLane_Stop}")
        && t < SCENARIO_BUDGET;
    outcome(
        pass,
        format!(
            "maneuvers {maneuvers:?}, check exit {:?}, {:.1} ms",
            o.status.code(),
            t.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let m = load(&["corpus_v2.nspec", "A.nscen", "B.nscen"]);
    let a = names(infer(&m, "A").applicable_maneuvers());
    let b = names(infer(&m, "B").applicable_maneuvers());
    let t = start.elapsed();
    let o = normspec(&["check", "corpus_v2.nspec", "A.nscen", "B.nscen"]);
    let pass = a == ["KeepLane_Stop"]
        && b == ["KeepLane_Stop"]
        && o.status.code() == Some(0)
        && t < SCENARIO_BUDGET * 2;
    outcome(
        pass,
        format!(
            "A {a:?}, B {b:?}, check exit {:?}, {:.1} ms for both",
            o.status.code(),
            t.as_secs_f64() * 1e3
        ),
    )
}

fn build(text: &str) -> Option<SpecModel> {
    let p = parse_spec_source("gen.nspec", text.as_bytes());
    if !p.diagnostics.is_empty() {
        return None;
    }
    resolve(&p.decls).ok()
}

fn criterion_4(runs: &mut Runs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let limits = gen::Limits::default();
    let start = Instant::now();
    let (mut mismatches, mut invalid, mut assertions) = (0, 0, 0);
    for _ in 0..RANDOM_INSTANCES {
        let spec = gen::random_spec(&mut rng, limits);
        let scene = gen::random_scene(&mut rng, &spec, "S", limits);
        let Some(m) = build(&spec.text(&[&scene])) else {
            invalid += 1;
            continue;
        };
        let reasoner = Reasoner::new(&m);
        let wm = instantiate_scenario(&m, &m.scenarios["S"]).unwrap();
        let semi = reasoner.infer(&wm);
        let naive = reasoner.infer_naive(&wm);
        let reference = gen::reference_fixpoint(&spec, &scene, true);
        if semi != naive || semi.derived != reference {
            mismatches += 1;
        }
        assertions += semi.derived.len();
        runs.results.push(vec![semi]);
        runs.models.push(m);
    }
    let t = start.elapsed();
    outcome(
        mismatches == 0 && invalid == 0 && t < ORACLE_BUDGET,
        format!(
            "{RANDOM_INSTANCES} instances, {mismatches} mismatches, {invalid} unbuildable, \
             {assertions} assertions, {:.1} s",
            t.as_secs_f64()
        ),
    )
}

fn criterion_5(runs: &mut Runs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let limits = gen::Limits::default();
    let (mut violations, mut invalid) = (0, 0);
    for _ in 0..MONOTONE_PAIRS {
        let spec = gen::random_spec(&mut rng, limits);
        let big = gen::random_scene(&mut rng, &spec, "Big", limits);
        let small = gen::sub_scene(&mut rng, &big, "Small");
        let Some(m) = build(&spec.text(&[&big, &small])) else {
            invalid += 1;
            continue;
        };
        let r_big = infer(&m, "Big");
        let r_small = infer(&m, "Small");
        if !r_small.base.is_subset(&r_big.base) || !r_small.derived.is_subset(&r_big.derived) {
            violations += 1;
        }
        runs.results.push(vec![r_big, r_small]);
        runs.models.push(m);
    }
    outcome(
        violations == 0 && invalid == 0,
        format!("{MONOTONE_PAIRS} pairs, {violations} violations, {invalid} unbuildable"),
    )
}

fn corpus_runs() -> Runs {
    let mut runs = Runs::default();
    for spec in ["corpus_v1.nspec", "corpus_v2.nspec"] {
        let m = load(&[spec, "A.nscen", "B.nscen", "C.nscen"]);
        runs.results
            .push(["A", "B", "C"].iter().map(|s| infer(&m, s)).collect());
        runs.models.push(m);
    }
    runs
}

fn criterion_6(random: &Runs, corpus: &Runs) -> Outcome {
    let (mut steps, mut failures) = (0, 0);
    for runs in [corpus, random] {
        for (m, results) in runs.models.iter().zip(&runs.results) {
            let reasoner = Reasoner::new(m);
            for r in results {
                for s in &r.steps {
                    steps += 1;
                    if reasoner.replay_step(s).as_ref() != Some(&s.conclusion) {
                        failures += 1;
                    }
                }
            }
        }
    }
    outcome(
        failures == 0 && steps > 0,
        format!("{steps} steps replayed, {failures} failures"),
    )
}

fn criterion_7(random: &Runs, corpus_runs: &Runs) -> Outcome {
    let (mut graphs, mut bad) = (0, 0);
    for runs in [corpus_runs, random] {
        for (m, results) in runs.models.iter().zip(&runs.results) {
            for r in results {
                for include_entities in [true, false] {
                    graphs += 1;
                    let g = build_cbg(r, CbgOptions { include_entities });
                    if !g.is_acyclic() || !g.edges_sound(&[r]) || g.validate(m).is_err() {
                        bad += 1;
                    }
                }
            }
        }
    }
    let golden = fs::read(corpus("golden/A_v1.dot")).unwrap();
    let dot = normspec(&["export", "--format", "dot", "corpus_v1.nspec", "A.nscen"]);
    let golden_ok = dot.status.success() && dot.stdout == golden;
    outcome(
        bad == 0 && golden_ok,
        format!("{graphs} graphs, {bad} invalid, golden dot match: {golden_ok}"),
    )
}

fn mutate(rng: &mut ChaCha8Rng, seed: &[u8]) -> Vec<u8> {
    const TOKENS: [&[u8]; 14] = [
        b"rule", b"=>", b"(", b")", b"{", b"}", b"\"", b"\\", b"?", b"/", b"0", b"\n", b"#",
        b"scenario",
    ];
    let mut v = seed.to_vec();
    for _ in 0..rng.gen_range(1..=8) {
        let at = if v.is_empty() { 0 } else { rng.gen_range(0..=v.len()) };
        match rng.gen_range(0..6) {
            0 if at < v.len() => v[at] = rng.gen(),
            1 => {
                let t = TOKENS.choose(rng).unwrap();
                v.splice(at..at, t.iter().copied());
            }
            2 if at < v.len() => {
                let end = (at + rng.gen_range(1..32)).min(v.len());
                v.drain(at..end);
            }
            3 if at < v.len() => {
                let end = (at + rng.gen_range(1..64)).min(v.len());
                let chunk: Vec<u8> = v[at..end].to_vec();
                let to = rng.gen_range(0..=v.len());
                v.splice(to..to, chunk);
            }
            4 => v.truncate(at),
            _ => {
                let junk: Vec<u8> = (0..rng.gen_range(1..16)).map(|_| rng.gen()).collect();
                v.splice(at..at, junk);
            }
        }
    }
    v
}

/// Runs the full front end on one input. Any panic is a failure.
fn exercise(bytes: &[u8]) {
    let _ = tokenize("fuzz.nspec", bytes);
    let _ = parse_scenario_source("fuzz.nscen", bytes);
    let p = parse_spec_source("fuzz.nspec", bytes);
    if p.diagnostics.is_empty() {
        let text = format_canonical(&p.decls);
        let again = parse_spec_source("fuzz2.nspec", text.as_bytes());
        assert!(again.diagnostics.is_empty(), "formatted output does not parse");
        assert_eq!(again.decls, p.decls, "round trip differs");
        if let Ok(m) = resolve(&p.decls) {
            let _ = validate_model(&m, true);
            let reasoner = Reasoner::new(&m);
            for s in m.scenarios.values() {
                if let Ok(wm) = instantiate_scenario(&m, s) {
                    let _ = reasoner.infer(&wm);
                }
            }
        }
    }
}

struct FuzzReport {
    inputs: u64,
    panics: Vec<Vec<u8>>,
    hung: bool,
}

fn fuzz(duration: Duration, seeds: Vec<Vec<u8>>) -> FuzzReport {
    let progress = Arc::new(AtomicU64::new(0));
    let done = Arc::new(AtomicBool::new(false));
    let panics = Arc::new(Mutex::new(Vec::new()));
    let worker = {
        let (progress, done, panics) = (progress.clone(), done.clone(), panics.clone());
        thread::spawn(move || {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let start = Instant::now();
            while start.elapsed() < duration {
                let input = match rng.gen_range(0..10) {
                    0 => (0..rng.gen_range(0..512)).map(|_| rng.gen()).collect(),
                    1 => gen::rich_spec_text(&mut rng).into_bytes(),
                    2 => {
                        let text = gen::rich_spec_text(&mut rng).into_bytes();
                        mutate(&mut rng, &text)
                    }
                    _ => {
                        let seed = seeds.choose(&mut rng).unwrap().clone();
                        mutate(&mut rng, &seed)
                    }
                };
                if panic::catch_unwind(AssertUnwindSafe(|| exercise(&input))).is_err() {
                    panics.lock().unwrap().push(input);
                }
                progress.fetch_add(1, Ordering::Relaxed);
            }
            done.store(true, Ordering::Release);
        })
    };
    let mut last = (0, Instant::now());
    let mut hung = false;
    while !done.load(Ordering::Acquire) {
        thread::sleep(Duration::from_millis(200));
        let now = progress.load(Ordering::Relaxed);
        if now != last.0 {
            last = (now, Instant::now());
        } else if last.1.elapsed() > HANG_LIMIT {
            hung = true;
            break;
        }
    }
    if !hung {
        worker.join().expect("fuzz worker exits");
    }
    let panics = panics.lock().unwrap().clone();
    FuzzReport {
        inputs: progress.load(Ordering::Relaxed),
        panics,
        hung,
    }
}

fn corpus_sources() -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for dir in [corpus(""), corpus("fixtures")] {
        let mut entries: Vec<PathBuf> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "nspec" || e == "nscen"))
            .collect();
        entries.sort();
        for p in entries {
            out.push((p.display().to_string(), fs::read(&p).unwrap()));
        }
    }
    out
}

fn round_trips(name: &str, bytes: &[u8]) -> bool {
    if name.ends_with(".nscen") {
        let a = parse_scenario_source(name, bytes);
        let Some(s) = a.decls.filter(|_| a.diagnostics.is_empty()) else {
            return false;
        };
        let decl = RawDecl {
            span: s.name.span.clone(),
            kind: DeclKind::Scenario(s),
        };
        let text = format_canonical(std::slice::from_ref(&decl));
        let b = parse_scenario_source("again.nscen", text.as_bytes());
        b.diagnostics.is_empty() && b.decls.map(DeclKind::Scenario) == Some(decl.kind)
    } else {
        let a = parse_spec_source(name, bytes);
        let text = format_canonical(&a.decls);
        let b = parse_spec_source("again.nspec", text.as_bytes());
        a.diagnostics.is_empty() && b.diagnostics.is_empty() && a.decls == b.decls
    }
}

fn criterion_8() -> Outcome {
    let secs: u64 = std::env::var("NORMSPEC_FUZZ_SECS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(600);
    let sources = corpus_sources();
    let well_formed: Vec<&(String, Vec<u8>)> =
        sources.iter().filter(|(n, _)| !n.contains("malformed")).collect();
    let corpus_ok = well_formed.iter().filter(|(n, b)| round_trips(n, b)).count();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let generated_ok = (0..ROUND_TRIP_SPECS)
        .filter(|_| round_trips("gen.nspec", gen::rich_spec_text(&mut rng).as_bytes()))
        .count();

    let default_hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let report = fuzz(
        Duration::from_secs(secs),
        sources.iter().map(|(_, b)| b.clone()).collect(),
    );
    panic::set_hook(default_hook);
    if let Some(first) = report.panics.first() {
        let path = std::env::temp_dir().join("normspec_fuzz_crash.bin");
        let _ = fs::write(&path, first);
        eprintln!("first crashing input written to {}", path.display());
    }
    let pass = corpus_ok == well_formed.len()
        && generated_ok == ROUND_TRIP_SPECS
        && report.panics.is_empty()
        && !report.hung;
    outcome(
        pass,
        format!(
            "fuzz {secs} s, {} inputs, {} panics, hang: {}; round trip {corpus_ok}/{} corpus files, \
             {generated_ok}/{ROUND_TRIP_SPECS} generated specs",
            report.inputs,
            report.panics.len(),
            report.hung,
            well_formed.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let broken = normspec(&[
        "check",
        "--strict-traceability",
        "fixtures/v1_missing_source_link.nspec",
    ]);
    let broken_ok = broken.status.code() == Some(1)
        && String::from_utf8_lossy(&broken.stderr).contains("MissingSourceLink");
    let clean = normspec(&["check", "--strict-traceability", "corpus_v1.nspec", "A.nscen"]);
    let trace = normspec(&["trace", "corpus_v1.nspec", "A.nscen", "KeepLane_Stop"]);
    let text = stdout(&trace);
    let listed: BTreeSet<&str> = text
        .lines()
        .skip_while(|l| *l != "sources")
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    let trace_ok =
        trace.status.success() && listed.contains("StVO_26") && listed.contains("VwV_StVO_26");
    outcome(
        broken_ok && clean.status.success() && trace_ok,
        format!(
            "strict on deleted link exit {:?}, strict on corpus exit {:?}, trace sources {listed:?}",
            broken.status.code(),
            clean.status.code()
        ),
    )
}

fn report(n: usize, name: &str, o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {n} {name}: {verdict} ({})", o.detail);
}

fn main() {
    assert!(Path::new(env!("CARGO_BIN_EXE_normspec")).exists());
    let mut random = Runs::default();
    let corpus = corpus_runs();
    let results = [
        (1, "scenario A reproduction", criterion_1()),
        (2, "scenario B insufficiency", criterion_2()),
        (3, "adapted ruleset", criterion_3()),
        (4, "oracle equivalence", criterion_4(&mut random)),
        (5, "monotonicity", criterion_5(&mut random)),
        (6, "provenance soundness", criterion_6(&random, &corpus)),
        (7, "CBG validity", criterion_7(&random, &corpus)),
        (8, "parser robustness", criterion_8()),
        (9, "traceability completeness", criterion_9()),
    ];
    for (n, name, o) in &results {
        report(*n, name, o);
    }
    let failed = results.iter().filter(|(_, _, o)| !o.pass).count();
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
