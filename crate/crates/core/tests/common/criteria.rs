//! Checks behind the acceptance criteria, parameterised by size so the
//! regular test suite can run smaller versions.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use plancheck::bmc::{
    check_spec, check_spec_with, completeness_bound, BmcOptions, CheckOutcome, DEFAULT_REACH_CAP,
};
use plancheck::eval::{
    emit_report, load_dataset, run_dataset, BenchReport, Mode, ReportFormat, RunConfig,
    UnknownPolicy,
};
use plancheck::kripke::{KripkeStructure, Trace};
use plancheck::llm::{default_exemplar, ReplayProvider};
use plancheck::ltl::eval_on_lasso;
use plancheck::plan::{
    encode_plan, simulate_plan, verify_plan, Evidence, Label, VerdictKind, DEFAULT_MAX_BOUND,
};
use plancheck::sat::{solve, CnfFormula, SatResult};
use plancheck::smv::{parse_ltl, parse_model, pretty_print, LtlFormula, ParseError};
use rand::seq::SliceRandom;
use rand::Rng;

use super::*;

/// Models whose lassos up to the complete bound number more than this are
/// skipped, keeping the explicit search cheap.
pub const PATH_LIMIT: u64 = 20_000;

/// Bytes inserted by the mutation fuzzer.
const JUNK: &[u8] = b";:()=!&|{}, \nX?";

#[derive(Debug, Default)]
pub struct CexReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CexReport {
    /// A counterexample must be a path of the model that closes into a
    /// lasso and falsifies `phi`, both by the library evaluator and by the
    /// independent oracle.
    pub fn check(&mut self, k: &KripkeStructure, phi: &LtlFormula, t: &Trace, what: &str) {
        self.checked += 1;
        if let Err(e) = k.validate_trace(t) {
            self.failures.push(format!("{what}: invalid trace: {e}"));
        } else if t.loop_back.is_none() {
            self.failures.push(format!("{what}: trace has no loop"));
        } else if eval_on_lasso(phi, t, &|e, s| k.holds(e, s)) {
            self.failures.push(format!("{what}: trace satisfies the spec"));
        } else if oracle_eval_trace(phi, t) {
            self.failures.push(format!("{what}: oracle says the trace satisfies the spec"));
        }
    }
}

#[derive(Debug, Default)]
pub struct BmcStats {
    pub cases: usize,
    pub holds: usize,
    pub violated: usize,
    pub skipped: usize,
    pub fresh_compared: usize,
    pub mismatches: Vec<String>,
    pub cex: CexReport,
}

fn same_verdict(a: &CheckOutcome, b: &CheckOutcome) -> bool {
    matches!(
        (a, b),
        (CheckOutcome::Holds { .. }, CheckOutcome::Holds { .. })
            | (CheckOutcome::CounterexampleFound { .. }, CheckOutcome::CounterexampleFound { .. })
            | (CheckOutcome::BoundExhausted { .. }, CheckOutcome::BoundExhausted { .. })
    )
}

/// Random models and formulas: the checker at the complete bound against
/// exhaustive lasso enumeration up to the same length.
pub fn bmc_vs_oracle(seed: u64, cases: usize) -> BmcStats {
    let mut rng = rng(seed);
    let mut st = BmcStats::default();
    while st.cases < cases {
        let model = random_model(&mut rng, 4, 6);
        let ex = Explicit::build(&model);
        let k = match KripkeStructure::compile(&model) {
            Ok(k) => k,
            Err(e) => {
                st.mismatches.push(format!("generated model failed to compile: {e}"));
                st.cases += 1;
                continue;
            }
        };
        let Some(cb) = completeness_bound(&k, DEFAULT_REACH_CAP) else {
            st.skipped += 1;
            continue;
        };
        if ex.path_count(cb + 1, PATH_LIMIT) >= PATH_LIMIT {
            st.skipped += 1;
            continue;
        }
        let depth = rng.gen_range(1..=4);
        let phi = random_ltl(&atoms_of(&model), depth, &mut rng);
        let case = st.cases;
        st.cases += 1;
        let outcome = match check_spec(&k, &phi, cb) {
            Ok(o) => o,
            Err(e) => {
                st.mismatches.push(format!("case {case}: checker error {e}"));
                continue;
            }
        };
        let oracle = ex.find_violation(&phi, cb + 1);
        let describe = || format!("case {case}:\n{}LTLSPEC {phi:?}", pretty_print(&model));
        match (&outcome, &oracle) {
            (CheckOutcome::Holds { complete: true, .. }, None) => st.holds += 1,
            (CheckOutcome::CounterexampleFound { trace, .. }, Some(_)) => {
                st.violated += 1;
                if trace.states.len() > cb + 1 {
                    st.mismatches.push(format!("{}: trace longer than the bound", describe()));
                }
                st.cex.check(&k, &phi, trace, &format!("case {case}"));
            }
            _ => st.mismatches.push(format!(
                "{}: checker {outcome:?}, oracle {}",
                describe(),
                if oracle.is_some() { "violated" } else { "holds" }
            )),
        }
        if case % 10 == 0 {
            st.fresh_compared += 1;
            let opts = BmcOptions {
                incremental: false,
                ..BmcOptions::default()
            };
            match check_spec_with(&k, &phi, cb, &opts) {
                Ok(fresh) if same_verdict(&fresh, &outcome) => {}
                other => st
                    .mismatches
                    .push(format!("case {case}: fresh encoding gave {other:?}, incremental {outcome:?}")),
            }
        }
    }
    st
}

#[derive(Debug, Default)]
pub struct PlanStats {
    pub cases: usize,
    pub valid: usize,
    pub mismatches: Vec<String>,
    pub cex: CexReport,
}

/// Random problems: model checking the encoding against step-by-step
/// simulation and the label fixed by construction.
pub fn plan_pipeline(seed: u64, cases: usize) -> PlanStats {
    let mut rng = rng(seed);
    let mut st = PlanStats::default();
    for i in 0..cases {
        let p = random_problem(&mut rng, &format!("r{i}"), i % 2 == 0);
        st.cases += 1;
        let checked = verify_plan(&p, DEFAULT_MAX_BOUND);
        let simulated = simulate_plan(&p).kind;
        let label = p.label.expect("generated with a label");
        let by_construction = if label == Label::Valid { VerdictKind::Valid } else { VerdictKind::Invalid };
        if checked.kind == VerdictKind::Valid {
            st.valid += 1;
        }
        if checked.kind != simulated || simulated != by_construction {
            st.mismatches.push(format!(
                "problem {i}: checker {:?}, simulation {simulated:?}, label {label}",
                checked.kind
            ));
        }
        if let Some(Evidence::Counterexample(t)) = &checked.evidence {
            let (model, spec) = encode_plan(&p);
            let k = KripkeStructure::compile(&model).expect("encoding compiles");
            st.cex.check(&k, &spec, t, &format!("problem {i}"));
        }
    }
    st
}

#[derive(Debug, Default)]
pub struct SatStats {
    pub cases: usize,
    pub sat: usize,
    pub mismatches: Vec<String>,
}

pub fn sat_vs_enumeration(seed: u64, cases: usize) -> SatStats {
    let mut rng = rng(seed);
    let mut st = SatStats::default();
    for i in 0..cases {
        let (n, clauses) = random_cnf(&mut rng, 10);
        let cnf = CnfFormula {
            var_count: n,
            clauses: clauses.clone(),
            ..CnfFormula::default()
        };
        st.cases += 1;
        let expected = brute_force_sat(n, &clauses);
        match solve(&cnf) {
            SatResult::Sat(m) => {
                st.sat += 1;
                if !expected {
                    st.mismatches.push(format!("cnf {i}: solver Sat, enumeration Unsat"));
                } else if !model_satisfies(&m, &clauses) || !cnf.verify(&m) {
                    st.mismatches.push(format!("cnf {i}: model fails the clause check"));
                }
            }
            SatResult::Unsat if expected => {
                st.mismatches.push(format!("cnf {i}: solver Unsat, enumeration Sat"))
            }
            SatResult::Unsat => {}
        }
    }
    st
}

/// Expected replay results for one mode.
pub struct ReplayExpectation {
    pub verdicts: Vec<(String, String)>,
    pub unknown_pct: String,
    pub policies: Vec<(UnknownPolicy, serde_json::Value)>,
}

pub fn replay_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay")
}

fn expectation(doc: &serde_json::Value, mode: Mode) -> ReplayExpectation {
    let e = &doc[mode.as_str()];
    ReplayExpectation {
        verdicts: e["verdicts"]
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().unwrap().to_string()))
            .collect(),
        unknown_pct: e["unknown_pct"].as_str().unwrap().to_string(),
        policies: UnknownPolicy::ALL
            .iter()
            .map(|p| (*p, e["policies"][p.as_str()].clone()))
            .collect(),
    }
}

/// Runs the fixture dataset twice in `mode` and compares both reports with
/// each other and with the expected verdicts and metrics.
pub fn replay_mode(mode: Mode) -> Result<String, String> {
    let dir = replay_dir();
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).map_err(|e| e.to_string());
    let problems = load_dataset(&read("dataset.jsonl")?).map_err(|e| e.to_string())?;
    let doc: serde_json::Value =
        serde_json::from_str(&read("expected.json")?).map_err(|e| e.to_string())?;
    let exp = expectation(&doc, mode);
    let provider = match mode {
        Mode::FormalLlm => Some(ReplayProvider::new(dir.join("formal"))),
        Mode::DirectLlm => Some(ReplayProvider::new(dir.join("direct"))),
        Mode::FormalDirect => None,
    };
    let mut cfg = RunConfig::new(mode);
    let mut reports = Vec::new();
    for jobs in [1, 4] {
        cfg.parallelism = jobs;
        let results = run_dataset(
            &problems,
            &cfg,
            provider.as_ref().map(|p| p as &dyn plancheck::llm::Provider),
            &default_exemplar(),
        );
        let r = BenchReport::new(mode, &results, &UnknownPolicy::ALL, false);
        let text: String = [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json]
            .iter()
            .map(|f| emit_report(&r, *f))
            .collect();
        reports.push((r, text));
    }
    if reports[0].1 != reports[1].1 {
        return Err(format!("{mode}: reports differ between runs"));
    }
    let report = &reports[0].0;
    let got: Vec<(String, String)> = report
        .cases
        .iter()
        .map(|c| {
            let v = c.verdict().map_or("errored", |v| v.kind.as_str());
            (c.problem_id.clone(), v.to_string())
        })
        .collect();
    if got != exp.verdicts {
        return Err(format!("{mode}: verdicts {got:?}, expected {:?}", exp.verdicts));
    }
    for (row, (policy, e)) in report.rows().iter().zip(&exp.policies) {
        if row.policy != policy.as_str() || row.unknown != exp.unknown_pct {
            return Err(format!("{mode}/{policy}: unknown% {}, expected {}", row.unknown, exp.unknown_pct));
        }
        let m = report.metrics.iter().find(|m| m.counts.policy == *policy).unwrap();
        let c = &m.counts;
        let counts = [c.tp, c.fp, c.tn, c.fn_];
        let want: Vec<usize> = ["tp", "fp", "tn", "fn"]
            .iter()
            .map(|k| e[k].as_u64().unwrap() as usize)
            .collect();
        if counts[..] != want[..] {
            return Err(format!("{mode}/{policy}: counts {counts:?}, expected {want:?}"));
        }
        let cells = [&row.accuracy, &row.precision, &row.recall, &row.f1];
        for (cell, key) in cells.iter().zip(["accuracy", "precision", "recall", "f1"]) {
            if cell.as_str() != e[key].as_str().unwrap() {
                return Err(format!("{mode}/{policy}: {key} {cell}, expected {}", e[key]));
            }
        }
    }
    let unknown = got.iter().filter(|(_, v)| v.starts_with("unknown")).count();
    Ok(format!("{mode}: {} cases, {unknown} unknown", got.len()))
}

#[derive(Debug, Default)]
pub struct ParserStats {
    pub round_trips: usize,
    pub malformed_files: usize,
    pub mutations: usize,
    pub failures: Vec<String>,
}

fn position_in(text: &str, e: &ParseError) -> bool {
    let lines = text.split('\n').count() as u32;
    e.pos.line >= 1 && e.pos.line <= lines.max(1) && e.pos.col >= 1
}

fn parse_guarded(text: &str) -> Result<Result<(), ParseError>, String> {
    catch_unwind(AssertUnwindSafe(|| parse_model(text).map(|_| ())))
        .map_err(|_| "parser panicked".to_string())
}

fn ltl_guarded(text: &str) -> Result<Result<(), ParseError>, String> {
    catch_unwind(AssertUnwindSafe(|| parse_ltl(text).map(|_| ())))
        .map_err(|_| "LTL parser panicked".to_string())
}

pub fn malformed_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/malformed")
}

/// Round trips of generated models, the malformed fixtures with their
/// expected positions, and random mutations of printed models.
pub fn parser_robustness(seed: u64, models: usize, mutations: usize) -> ParserStats {
    let mut rng = rng(seed);
    let mut st = ParserStats::default();
    let mut printed = Vec::new();
    for i in 0..models {
        let m = random_model(&mut rng, 4, 6);
        let atoms = atoms_of(&m);
        let specs = (0..rng.gen_range(0..=2))
            .map(|_| {
                let d = rng.gen_range(0..=4);
                random_ltl(&atoms, d, &mut rng)
            })
            .collect();
        let m = with_specs(m, specs);
        let text = pretty_print(&m);
        match parse_model(&text) {
            Ok(back) if back == m => {
                if pretty_print(&back) != text {
                    st.failures.push(format!("model {i}: printing is not idempotent"));
                }
            }
            Ok(_) => st.failures.push(format!("model {i}: round trip changed the model")),
            Err(e) => st.failures.push(format!("model {i}: reparse failed at {e}\n{text}")),
        }
        st.round_trips += 1;
        printed.push(text);
    }

    let expected = std::fs::read_to_string(malformed_dir().join("positions.txt")).unwrap_or_default();
    for line in expected.lines().filter(|l| !l.trim().is_empty()) {
        let (file, pos) = line.split_once(' ').expect("`file line:col`");
        let text = std::fs::read_to_string(malformed_dir().join(file)).expect("fixture");
        st.malformed_files += 1;
        let result = if file.ends_with(".ltl") { ltl_guarded(&text) } else { parse_guarded(&text) };
        match result {
            Err(p) => st.failures.push(format!("{file}: {p}")),
            Ok(Ok(())) => st.failures.push(format!("{file}: parsed without error")),
            Ok(Err(e)) => {
                if e.pos.to_string() != pos.trim() || !position_in(&text, &e) {
                    st.failures.push(format!("{file}: error at {e}, expected {pos}"));
                }
            }
        }
    }

    for i in 0..mutations {
        let base = printed[i % printed.len().max(1)].as_bytes().to_vec();
        let mut bytes = base;
        for _ in 0..rng.gen_range(1..=3) {
            let at = rng.gen_range(0..bytes.len().max(1));
            match rng.gen_range(0..3) {
                0 if !bytes.is_empty() => {
                    bytes.remove(at.min(bytes.len() - 1));
                }
                1 => bytes.insert(at.min(bytes.len()), *JUNK.choose(&mut rng).unwrap()),
                _ => bytes.truncate(at),
            }
        }
        let text = String::from_utf8_lossy(&bytes).into_owned();
        st.mutations += 1;
        match parse_guarded(&text) {
            Err(p) => st.failures.push(format!("mutation {i}: {p}\n{text}")),
            Ok(Err(e)) if !position_in(&text, &e) => {
                st.failures.push(format!("mutation {i}: position {} out of range", e.pos))
            }
            Ok(_) => {}
        }
        let spec_text = text.lines().find(|l| l.starts_with("LTLSPEC")).unwrap_or("");
        if let Err(p) = ltl_guarded(spec_text.trim_start_matches("LTLSPEC")) {
            st.failures.push(format!("mutation {i}: {p}"));
        }
    }
    st
}
