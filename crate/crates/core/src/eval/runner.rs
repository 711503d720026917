use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use thiserror::Error;

use super::metrics::UnknownPolicy;
use crate::llm::{
    build_judgment_prompt, parse_judgment, translate, Exemplar, Provider, ProviderConfig,
    ProviderError,
};
use crate::plan::{
    check_model, describe_problem, ground_truth, problem_from_json, verify_plan, Evidence, Label,
    PlanProblem, PlanVerdict, SchemaError, VerdictKind, DEFAULT_MAX_BOUND,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Translate the plan text with a provider, then model check.
    FormalLlm,
    /// Encode the structured problem, then model check.
    FormalDirect,
    /// Ask the provider for a VALID/INVALID judgment.
    DirectLlm,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::FormalLlm, Mode::FormalDirect, Mode::DirectLlm];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FormalLlm => "formal_llm",
            Mode::FormalDirect => "formal_direct",
            Mode::DirectLlm => "direct_llm",
        }
    }

    pub fn needs_provider(self) -> bool {
        self != Mode::FormalDirect
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            format!("unknown mode `{s}` (expected formal_llm, formal_direct or direct_llm)")
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("mode {0} requires a provider configuration")]
pub struct RunConfigError(pub Mode);

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub policy: UnknownPolicy,
    pub max_bound: usize,
    pub parallelism: usize,
    pub provider: Option<ProviderConfig>,
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            policy: UnknownPolicy::Exclude,
            max_bound: DEFAULT_MAX_BOUND,
            parallelism: 1,
            provider: None,
        }
    }

    pub fn validate(&self) -> Result<(), RunConfigError> {
        if self.mode.needs_provider() && self.provider.is_none() {
            return Err(RunConfigError(self.mode));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: invalid JSON: {message}")]
    Json { line: usize, message: String },
    #[error("line {line}: {source}")]
    Schema { line: usize, source: SchemaError },
    #[error("line {line}: duplicate problem_id `{id}`")]
    Duplicate { line: usize, id: String },
}

/// Parses a JSONL dataset, one problem per non-blank line.
pub fn load_dataset(text: &str) -> Result<Vec<PlanProblem>, DatasetError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let doc: serde_json::Value = serde_json::from_str(raw).map_err(|e| DatasetError::Json {
            line,
            message: e.to_string(),
        })?;
        let p = problem_from_json(&doc).map_err(|source| DatasetError::Schema { line, source })?;
        if !seen.insert(p.problem_id.clone()) {
            return Err(DatasetError::Duplicate {
                line,
                id: p.problem_id,
            });
        }
        out.push(p);
    }
    Ok(out)
}

fn plan_text(p: &PlanProblem) -> String {
    p.nl.clone().unwrap_or_else(|| describe_problem(p))
}

/// Runs one problem in the configured mode. Provider failures are
/// returned as errors rather than folded into a verdict.
pub fn run_case(
    p: &PlanProblem,
    cfg: &RunConfig,
    provider: Option<&dyn Provider>,
    exemplar: &Exemplar,
) -> Result<PlanVerdict, ProviderError> {
    let start = Instant::now();
    let needs = || {
        provider.ok_or_else(|| ProviderError::Config(format!("mode {} needs a provider", cfg.mode)))
    };
    let mut verdict = match cfg.mode {
        Mode::FormalDirect => verify_plan(p, cfg.max_bound),
        Mode::FormalLlm => {
            let r = translate(&plan_text(p), Some(&p.problem_id), exemplar, needs()?)?;
            match (r.parsed, r.failure) {
                (Some((model, spec)), _) => check_model(&model, &spec, cfg.max_bound),
                (None, failure) => PlanVerdict::unknown_parse(
                    failure.map_or_else(|| "translation failed".to_string(), |f| f.to_string()),
                ),
            }
        }
        Mode::DirectLlm => {
            let prompt = build_judgment_prompt(&plan_text(p)).for_problem(Some(&p.problem_id));
            let answer = needs()?.complete(&prompt)?;
            match parse_judgment(&answer) {
                Some(true) => PlanVerdict::new(VerdictKind::Valid, None),
                Some(false) => PlanVerdict::new(VerdictKind::Invalid, None),
                None => PlanVerdict::new(
                    VerdictKind::UnknownParse,
                    Some(Evidence::Parse("answer is neither VALID nor INVALID".into())),
                ),
            }
        }
    };
    verdict.wall_time = start.elapsed();
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseOutcome {
    Verdict(PlanVerdict),
    /// The provider failed; the case is left out of every metric.
    Errored(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseResult {
    pub problem_id: String,
    pub label: Label,
    pub outcome: CaseOutcome,
}

impl CaseResult {
    pub fn verdict(&self) -> Option<&PlanVerdict> {
        match &self.outcome {
            CaseOutcome::Verdict(v) => Some(v),
            CaseOutcome::Errored(_) => None,
        }
    }
}

/// Runs every problem with up to `cfg.parallelism` worker threads and
/// returns the results ordered by problem id.
pub fn run_dataset(
    problems: &[PlanProblem],
    cfg: &RunConfig,
    provider: Option<&dyn Provider>,
    exemplar: &Exemplar,
) -> Vec<CaseResult> {
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(problems.len()));
    let workers = cfg.parallelism.clamp(1, problems.len().max(1));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = problems.get(i) else { break };
                let outcome = match run_case(p, cfg, provider, exemplar) {
                    Ok(v) => CaseOutcome::Verdict(v),
                    Err(e) => {
                        log::warn!("{}: {e}", p.problem_id);
                        CaseOutcome::Errored(e.to_string())
                    }
                };
                let r = CaseResult {
                    problem_id: p.problem_id.clone(),
                    label: ground_truth(p),
                    outcome,
                };
                results.lock().unwrap_or_else(|e| e.into_inner()).push(r);
            });
        }
    });
    let mut out = results.into_inner().unwrap_or_else(|e| e.into_inner());
    out.sort_by(|a, b| a.problem_id.cmp(&b.problem_id));
    out
}
