use std::path::{Path, PathBuf};
use std::process::Command;

use plancheck_cli::{run, EXIT_FAILED, EXIT_OK, EXIT_PROVIDER, EXIT_UNKNOWN, EXIT_USAGE};

struct Output {
    code: u8,
    stdout: String,
    stderr: String,
}

fn plancheck(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("plancheck").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/replay")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const HOLDS: &str = "MODULE main\nVAR p : boolean;\nASSIGN init(p) := TRUE;\nLTLSPEC p\n";
const VIOLATED: &str =
    "MODULE main\nVAR p : boolean;\nASSIGN init(p) := TRUE;\nnext(p) := !p;\nLTLSPEC G p\n";
const PLAN: &str = r#"{"problem_id":"k","fluents":["a","b"],"init":{"a":false,"b":false},
  "actions_catalog":{"set_a":{"preconditions":{},"effects":{"a":true}},
                     "set_b":{"preconditions":{"a":true},"effects":{"b":true}}},
  "plan":["set_b","set_a"],"goal":{"b":true}}"#;

#[test]
fn check_holding_model_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_temp(&dir, "holds.smv", HOLDS);
    let o = plancheck(&["check", &m]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("LTLSPEC holds (complete at bound 2)"), "{}", o.stdout);
}

#[test]
fn check_violated_model_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_temp(&dir, "bad.smv", VIOLATED);
    let t = dir.path().join("trace.json");
    let o = plancheck(&["check", &m, "--trace-out", t.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_FAILED);
    assert!(o.stdout.contains("LTLSPEC violated"));
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&t).unwrap()).unwrap();
    assert_eq!(trace["states"][0]["p"], true);
    assert_eq!(trace["states"][1]["p"], false);
    assert!(trace["loop_back"].is_u64());
}

#[test]
fn check_json_goes_to_stdout_only_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_temp(&dir, "bad.smv", VIOLATED);
    let o = plancheck(&["check", &m, "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["results"][0]["verdict"], "violated");
    let o = plancheck(&["check", &m]);
    assert!(serde_json::from_str::<serde_json::Value>(&o.stdout).is_err());
}

#[test]
fn check_small_bound_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_temp(&dir, "holds.smv", HOLDS);
    let o = plancheck(&["check", &m, "--bound", "0"]);
    assert_eq!(o.code, EXIT_UNKNOWN, "{}", o.stdout);
}

#[test]
fn parse_errors_are_positioned_and_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_temp(&dir, "broken.smv", "MODULE main\nVAR p : boolean;\nASSIGN init(q) := TRUE;\n");
    let o = plancheck(&["parse", &m]);
    assert_eq!(o.code, EXIT_UNKNOWN);
    assert!(o.stderr.contains("broken.smv:3:"), "{}", o.stderr);
    assert!(o.stderr.contains("undeclared variable q"), "{}", o.stderr);
    let m = write_temp(&dir, "ok.smv", HOLDS);
    let o = plancheck(&["parse", &m]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.starts_with("MODULE main"));
}

#[test]
fn simulate_and_encode_plan() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_temp(&dir, "p.json", PLAN);
    let o = plancheck(&["simulate", "--in", &p]);
    assert_eq!(o.code, EXIT_FAILED);
    assert!(o.stdout.contains("step 1 (`set_b`)"), "{}", o.stdout);
    let smv = dir.path().join("p.smv");
    let o = plancheck(&["encode-plan", "--in", &p, "--out", smv.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK);
    let o = plancheck(&["check", smv.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_FAILED, "{}", o.stdout);
}

#[test]
fn usage_and_io_errors_exit_three() {
    let o = plancheck(&[]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("Usage:"));
    let o = plancheck(&["check"]);
    assert_eq!(o.code, EXIT_USAGE);
    let o = plancheck(&["bench", "--dataset", "x", "--mode", "nope", "--out", "y"]);
    assert_eq!(o.code, EXIT_USAGE);
    let o = plancheck(&["parse", "/nonexistent/model.smv"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("cannot read"));
    let o = plancheck(&["--version"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains(env!("CARGO_PKG_VERSION")));
    assert_eq!(plancheck(&["--help"]).code, EXIT_OK);
}

#[test]
fn translate_with_replay() {
    let cfg = fixture("formal_config.json");
    let dir = tempfile::tempdir().unwrap();
    let plan = write_temp(&dir, "plan.txt", "any text");
    let o = plancheck(&["translate", "--in", &plan, "--provider", &cfg, "--problem-id", "p01"]);
    assert_eq!(o.code, EXIT_OK, "{} {}", o.stdout, o.stderr);
    let o = plancheck(&["translate", "--in", &plan, "--provider", &cfg, "--problem-id", "p02"]);
    assert_eq!(o.code, EXIT_FAILED);
    let o = plancheck(&["translate", "--in", &plan, "--provider", &cfg, "--problem-id", "p08", "--json"]);
    assert_eq!(o.code, EXIT_UNKNOWN);
    let doc: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["verdict"], "unknown_parse");
}

#[test]
fn provider_failure_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_temp(
        &dir,
        "cfg.json",
        r#"{"kind":"http_chat","endpoint":"http://127.0.0.1:9/v1","model":"m",
            "api_key_env":"PLANCHECK_CLI_TEST_UNSET_KEY"}"#,
    );
    let plan = write_temp(&dir, "plan.txt", "text");
    let o = plancheck(&["translate", "--in", &plan, "--provider", &cfg]);
    assert_eq!(o.code, EXIT_PROVIDER, "{}", o.stderr);
    assert!(o.stderr.contains("PLANCHECK_CLI_TEST_UNSET_KEY"));

    let missing = write_temp(&dir, "missing.json", r#"{"kind":"replay","transcript_dir":"none"}"#);
    let out = dir.path().join("r.md");
    let o = plancheck(&[
        "bench", "--dataset", &fixture("dataset.jsonl"), "--mode", "formal_llm",
        "--provider", &missing, "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_PROVIDER);
    let report = std::fs::read_to_string(out).unwrap();
    assert!(report.contains("Cases: 10 (errored: 10)"));
}

#[test]
fn bench_report_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.md");
    for jobs in ["1", "4"] {
        let o = plancheck(&[
            "bench", "--dataset", &fixture("dataset.jsonl"), "--mode", "formal_llm",
            "--provider", &fixture("formal_config.json"), "--out", out.to_str().unwrap(),
            "--no-time", "--jobs", jobs,
        ]);
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        let golden = include_str!("golden/bench_formal_llm.md");
        assert_eq!(std::fs::read_to_string(&out).unwrap(), golden);
    }
}

#[test]
fn bench_csv_and_json_formats() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = plancheck(&[
        "bench", "--dataset", &fixture("dataset.jsonl"), "--mode", "formal_direct",
        "--policy", "as_valid", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("Mode,Policy,Valid,Invalid,Unk.,Accuracy"));
    let o = plancheck(&[
        "bench", "--dataset", &fixture("dataset.jsonl"), "--mode", "formal_direct",
        "--out", dir.path().join("r.txt").to_str().unwrap(), "--format", "json", "--json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(doc["metrics"].as_array().unwrap().len(), 3);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_plancheck");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    let holds = write_temp(&dir, "h.smv", HOLDS);
    let bad = write_temp(&dir, "v.smv", VIOLATED);
    let broken = write_temp(&dir, "b.smv", "MODULE main VAR");
    assert_eq!(code(&["check", &holds]), Some(0));
    assert_eq!(code(&["check", &bad]), Some(1));
    assert_eq!(code(&["check", &broken]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(3));
}
