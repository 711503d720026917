//! The `plancheck` command line, callable in-process through [`run`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value as Json};

use plancheck::bmc::{check_spec_with, BmcOptions, CheckOutcome};
use plancheck::eval::{
    emit_report, load_dataset, run_dataset, BenchReport, Mode, ReportFormat, RunConfig,
    UnknownPolicy,
};
use plancheck::kripke::{KripkeStructure, Trace};
use plancheck::llm::{default_exemplar, make_provider, translate, ProviderConfig};
use plancheck::plan::{
    check_model, encode_plan, load_problem, simulate_plan, Evidence, PlanProblem, PlanVerdict,
    VerdictKind, DEFAULT_MAX_BOUND,
};
use plancheck::smv::{check_semantics, format_ltl, parse_model, pretty_print, SmvModel};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_PROVIDER: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "plancheck",
    version,
    about = "Check plans and SMV models with SAT-based bounded model checking"
)]
struct Cli {
    /// Print machine-readable JSON on stdout
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate an SMV model, printing it in canonical form
    Parse { file: PathBuf },
    /// Model check every LTLSPEC of an SMV model
    Check {
        model: PathBuf,
        /// Largest bound to search
        #[arg(long, default_value_t = DEFAULT_MAX_BOUND)]
        bound: usize,
        /// Write the first counterexample as JSON
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Encode each bound afresh instead of reusing one solver
        #[arg(long)]
        fresh: bool,
    },
    /// Encode a plan problem as an SMV model with its LTLSPEC
    EncodePlan {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output file (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a plan problem step by step
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Translate a plan description with a provider and check the result
    Translate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Provider configuration (JSON)
        #[arg(long)]
        provider: PathBuf,
        /// Transcript name for replay providers (defaults to the file stem)
        #[arg(long)]
        problem_id: Option<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_BOUND)]
        bound: usize,
        /// Write the translated model and specification
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Run a JSONL dataset and write a metrics report
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        /// formal_llm, formal_direct or direct_llm
        #[arg(long)]
        mode: Mode,
        /// exclude, as_valid, as_invalid or all
        #[arg(long, default_value = "all")]
        policy: Policies,
        /// Report path; the extension picks the format unless --format is given
        #[arg(long)]
        out: PathBuf,
        /// markdown, csv or json
        #[arg(long)]
        format: Option<ReportFormat>,
        /// Provider configuration, required by the LLM modes
        #[arg(long)]
        provider: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_BOUND)]
        bound: usize,
        /// Leave the timing column empty so reports are byte-stable
        #[arg(long)]
        no_time: bool,
    },
}

#[derive(Debug, Clone)]
struct Policies(Vec<UnknownPolicy>);

impl FromStr for Policies {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(Self(UnknownPolicy::ALL.to_vec()));
        }
        s.parse().map(|p| Self(vec![p]))
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
}

impl Io<'_> {
    fn emit_json(&mut self, v: &Json) -> Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(v)?)?;
        Ok(())
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut io = Io {
        out,
        err,
        json: cli.json,
    };
    match dispatch(cli.command, &mut io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command, io: &mut Io<'_>) -> Result<u8> {
    match cmd {
        Command::Parse { file } => cmd_parse(&file, io),
        Command::Check {
            model,
            bound,
            trace_out,
            fresh,
        } => cmd_check(&model, bound, trace_out.as_deref(), fresh, io),
        Command::EncodePlan { input, out } => cmd_encode(&input, out.as_deref(), io),
        Command::Simulate { input } => cmd_simulate(&input, io),
        Command::Translate {
            input,
            provider,
            problem_id,
            bound,
            model_out,
        } => cmd_translate(&input, &provider, problem_id, bound, model_out.as_deref(), io),
        Command::Bench {
            dataset,
            mode,
            policy,
            out,
            format,
            provider,
            jobs,
            bound,
            no_time,
        } => {
            let format = format.unwrap_or_else(|| ReportFormat::from_path(&out));
            let mut cfg = RunConfig::new(mode);
            cfg.max_bound = bound;
            cfg.parallelism = jobs;
            cfg.provider = provider.as_deref().map(load_provider_config).transpose()?;
            cmd_bench(&dataset, &cfg, &policy.0, &out, format, !no_time, io)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Parses a model file, reporting errors and warnings on stderr. `None`
/// means the file did not parse.
fn load_model(path: &Path, io: &mut Io<'_>) -> Result<Option<SmvModel>> {
    let text = read(path)?;
    match parse_model(&text) {
        Ok(m) => {
            for d in check_semantics(&m) {
                writeln!(io.err, "{}:{d}", path.display())?;
            }
            Ok(Some(m))
        }
        Err(e) => {
            writeln!(io.err, "{}:{e}", path.display())?;
            Ok(None)
        }
    }
}

fn cmd_parse(path: &Path, io: &mut Io<'_>) -> Result<u8> {
    let Some(model) = load_model(path, io)? else {
        if io.json {
            io.emit_json(&json!({"ok": false}))?;
        }
        return Ok(EXIT_UNKNOWN);
    };
    if io.json {
        let vars: Vec<&str> = model.vars.iter().map(|v| v.name.as_str()).collect();
        let specs: Vec<String> = model.ltlspecs.iter().map(|s| format_ltl(&s.formula)).collect();
        io.emit_json(&json!({"ok": true, "vars": vars, "ltlspecs": specs}))?;
    } else {
        write!(io.out, "{}", pretty_print(&model))?;
    }
    Ok(EXIT_OK)
}

fn trace_lines(t: &Trace) -> Vec<String> {
    let mut lines = vec![format!("  vars: {}", t.var_names.join(", "))];
    for (i, s) in t.states.iter().enumerate() {
        let mark = if t.loop_back == Some(i) { "  <- loop" } else { "" };
        lines.push(format!("  {i}: {s}{mark}"));
    }
    lines
}

fn cmd_check(
    path: &Path,
    bound: usize,
    trace_out: Option<&Path>,
    fresh: bool,
    io: &mut Io<'_>,
) -> Result<u8> {
    let Some(model) = load_model(path, io)? else {
        return Ok(EXIT_UNKNOWN);
    };
    let k = match KripkeStructure::compile(&model) {
        Ok(k) => k,
        Err(e) => {
            writeln!(io.err, "{}: {e}", path.display())?;
            return Ok(EXIT_UNKNOWN);
        }
    };
    if model.ltlspecs.is_empty() {
        writeln!(io.err, "{}: no LTLSPEC to check", path.display())?;
    }
    let opts = BmcOptions {
        incremental: !fresh,
        ..BmcOptions::default()
    };
    let mut code = EXIT_OK;
    let mut results = Vec::new();
    let mut trace_written = false;
    for spec in &model.ltlspecs {
        let text = format_ltl(&spec.formula);
        let outcome = match check_spec_with(&k, &spec.formula, bound, &opts) {
            Ok(o) => o,
            Err(e) => {
                writeln!(io.err, "{}: {e}", path.display())?;
                return Ok(EXIT_UNKNOWN);
            }
        };
        let entry = match &outcome {
            CheckOutcome::Holds {
                bound,
                complete,
                vacuous,
            } => {
                if *vacuous {
                    writeln!(io.err, "warning: model has no initial state")?;
                }
                let line = match (complete, vacuous) {
                    (_, true) => "LTLSPEC holds vacuously (no initial state)".to_string(),
                    (true, false) => format!("LTLSPEC holds (complete at bound {bound})"),
                    (false, false) => {
                        code = code.max(EXIT_UNKNOWN);
                        format!("LTLSPEC unknown (no counterexample up to bound {bound})")
                    }
                };
                if !io.json {
                    writeln!(io.out, "{line}: {text}")?;
                }
                let verdict = if *complete { "holds" } else { "unknown" };
                json!({"spec": text, "verdict": verdict, "bound": bound,
                       "complete": complete, "vacuous": vacuous, "trace": null})
            }
            CheckOutcome::CounterexampleFound { trace, bound } => {
                code = EXIT_FAILED;
                if !io.json {
                    writeln!(io.out, "LTLSPEC violated (counterexample at bound {bound}): {text}")?;
                    for l in trace_lines(trace) {
                        writeln!(io.out, "{l}")?;
                    }
                }
                if let (Some(p), false) = (trace_out, trace_written) {
                    write(p, &(serde_json::to_string_pretty(&trace.to_json())? + "\n"))?;
                    trace_written = true;
                }
                json!({"spec": text, "verdict": "violated", "bound": bound,
                       "complete": true, "vacuous": false, "trace": trace.to_json()})
            }
            CheckOutcome::BoundExhausted { max_bound } => {
                code = code.max(EXIT_UNKNOWN);
                if !io.json {
                    writeln!(
                        io.out,
                        "LTLSPEC unknown (bound {max_bound} exhausted without completeness): {text}"
                    )?;
                }
                json!({"spec": text, "verdict": "unknown", "bound": max_bound,
                       "complete": false, "vacuous": false, "trace": null})
            }
        };
        results.push(entry);
    }
    if io.json {
        io.emit_json(&json!({ "results": results }))?;
    }
    Ok(code)
}

fn load_plan(path: &Path) -> Result<PlanProblem> {
    load_problem(&read(path)?).with_context(|| format!("invalid problem {}", path.display()))
}

fn cmd_encode(input: &Path, out: Option<&Path>, io: &mut Io<'_>) -> Result<u8> {
    let p = load_plan(input)?;
    let (model, _) = encode_plan(&p);
    let text = pretty_print(&model);
    match out {
        Some(path) => {
            write(path, &text)?;
            if io.json {
                io.emit_json(&json!({"problem_id": p.problem_id, "out": path.display().to_string()}))?;
            }
        }
        None => write!(io.out, "{text}")?,
    }
    Ok(EXIT_OK)
}

fn evidence_json(e: &Option<Evidence>) -> Json {
    match e {
        None => Json::Null,
        Some(Evidence::FailingAction { index, action }) => {
            json!({"failing_action": {"index": index, "action": action}})
        }
        Some(Evidence::GoalUnmet { missing }) => json!({ "goal_unmet": missing }),
        Some(Evidence::Counterexample(t)) => json!({ "counterexample": t.to_json() }),
        Some(Evidence::Parse(m)) => json!({ "parse_error": m }),
        Some(Evidence::Bound { max_bound }) => json!({ "max_bound": max_bound }),
    }
}

fn evidence_text(e: &Option<Evidence>) -> Option<String> {
    Some(match e.as_ref()? {
        Evidence::FailingAction { index, action } => {
            format!("step {} (`{action}`) runs without its preconditions", index + 1)
        }
        Evidence::GoalUnmet { missing } => format!("goal not reached: {}", missing.join(", ")),
        Evidence::Counterexample(t) => format!("counterexample with {} states", t.states.len()),
        Evidence::Parse(m) => m.clone(),
        Evidence::Bound { max_bound } => format!("no verdict up to bound {max_bound}"),
    })
}

fn verdict_code(kind: VerdictKind) -> u8 {
    match kind {
        VerdictKind::Valid => EXIT_OK,
        VerdictKind::Invalid => EXIT_FAILED,
        VerdictKind::UnknownParse | VerdictKind::UnknownBound => EXIT_UNKNOWN,
    }
}

fn report_verdict(v: &PlanVerdict, extra: Json, io: &mut Io<'_>) -> Result<u8> {
    if io.json {
        let mut doc = json!({"verdict": v.kind.as_str(), "evidence": evidence_json(&v.evidence)});
        if let (Some(d), Json::Object(x)) = (doc.as_object_mut(), extra) {
            d.extend(x);
        }
        io.emit_json(&doc)?;
    } else {
        match evidence_text(&v.evidence) {
            Some(e) => writeln!(io.out, "{}: {e}", v.kind)?,
            None => writeln!(io.out, "{}", v.kind)?,
        }
    }
    Ok(verdict_code(v.kind))
}

fn cmd_simulate(input: &Path, io: &mut Io<'_>) -> Result<u8> {
    let p = load_plan(input)?;
    let v = simulate_plan(&p);
    report_verdict(&v, json!({"problem_id": p.problem_id}), io)
}

fn load_provider_config(path: &Path) -> Result<ProviderConfig> {
    let mut cfg = ProviderConfig::from_json_str(&read(path)?)
        .with_context(|| format!("invalid provider config {}", path.display()))?;
    if let Some(dir) = path.parent() {
        cfg.resolve_paths(dir);
    }
    Ok(cfg)
}

fn cmd_translate(
    input: &Path,
    provider: &Path,
    problem_id: Option<String>,
    bound: usize,
    model_out: Option<&Path>,
    io: &mut Io<'_>,
) -> Result<u8> {
    let text = read(input)?;
    let cfg = load_provider_config(provider)?;
    let provider = make_provider(&cfg)?;
    let id = problem_id.or_else(|| Some(input.file_stem()?.to_string_lossy().into_owned()));
    let result = match translate(&text, id.as_deref(), &default_exemplar(), provider.as_ref()) {
        Ok(r) => r,
        Err(e) => {
            writeln!(io.err, "provider error: {e}")?;
            return Ok(EXIT_PROVIDER);
        }
    };
    if let (Some(path), Some(m), Some(s)) = (model_out, &result.model_text, &result.spec_text) {
        write(path, &format!("{m}{s}\n"))?;
    }
    let verdict = match (&result.parsed, &result.failure) {
        (Some((model, spec)), _) => check_model(model, spec, bound),
        (None, f) => PlanVerdict::unknown_parse(
            f.as_ref().map_or_else(|| "translation failed".into(), |f| f.to_string()),
        ),
    };
    let extra = json!({
        "model": result.model_text,
        "spec": result.spec_text,
        "latency_secs": result.latency.as_secs_f64(),
    });
    report_verdict(&verdict, extra, io)
}

fn cmd_bench(
    dataset: &Path,
    cfg: &RunConfig,
    policies: &[UnknownPolicy],
    out: &Path,
    format: ReportFormat,
    show_time: bool,
    io: &mut Io<'_>,
) -> Result<u8> {
    if cfg.validate().is_err() {
        bail!("mode {} requires --provider", cfg.mode);
    }
    let problems = load_dataset(&read(dataset)?)
        .with_context(|| format!("invalid dataset {}", dataset.display()))?;
    let provider = cfg.provider.as_ref().map(make_provider).transpose()?;
    let results = run_dataset(&problems, cfg, provider.as_deref(), &default_exemplar());
    let report = BenchReport::new(cfg.mode, &results, policies, show_time);
    write(out, &emit_report(&report, format))?;
    let errored = report.errored().count();
    for (id, e) in report.errored() {
        writeln!(io.err, "{id}: provider error: {e}")?;
    }
    if io.json {
        let doc: Json = serde_json::from_str(&emit_report(&report, ReportFormat::Json))?;
        io.emit_json(&doc)?;
    } else {
        writeln!(
            io.out,
            "{} cases, {errored} errored; report written to {}",
            results.len(),
            out.display()
        )?;
    }
    Ok(if errored > 0 { EXIT_PROVIDER } else { EXIT_OK })
}
