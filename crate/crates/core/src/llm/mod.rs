//! Natural-language plans to SMV models through a text-completion
//! provider. Anything the provider returns that cannot be extracted,
//! parsed or resolved becomes a translation failure, never a panic.

mod extract;
mod prompt;
mod provider;

use std::time::{Duration, Instant};

pub use extract::{extract_artifacts, Artifacts, ExtractError};
pub use prompt::{
    build_judgment_prompt, build_prompt, default_exemplar, Exemplar, Message, Prompt, Role,
};
pub use provider::{
    make_provider, HttpProvider, Provider, ProviderConfig, ProviderError, ProviderKind,
    ReasoningEffort, ReplayProvider, RetryingProvider,
};

use crate::smv::{parse_ltlspecs, parse_model, resolve_ltl, LtlFormula, ParseError, SmvModel};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslationFailure {
    #[error("extraction failed: {0}")]
    Extract(#[from] ExtractError),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("no LTLSPEC found in the response")]
    NoSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationResult {
    pub raw_response: String,
    pub model_text: Option<String>,
    pub spec_text: Option<String>,
    /// The model and the conjunction of its specifications.
    pub parsed: Option<(SmvModel, LtlFormula)>,
    pub failure: Option<TranslationFailure>,
    pub latency: Duration,
}

/// Extracts, parses and resolves the artifacts of a response.
pub fn interpret_response(raw: &str) -> TranslationResult {
    let mut result = TranslationResult {
        raw_response: raw.to_string(),
        model_text: None,
        spec_text: None,
        parsed: None,
        failure: None,
        latency: Duration::ZERO,
    };
    let arts = match extract_artifacts(raw) {
        Ok(a) => a,
        Err(e) => {
            result.failure = Some(e.into());
            return result;
        }
    };
    result.model_text = Some(arts.model_text.clone());
    result.spec_text = Some(arts.spec_text.clone());
    match parse_artifacts(&arts) {
        Ok(p) => result.parsed = Some(p),
        Err(e) => result.failure = Some(e),
    }
    result
}

fn parse_artifacts(arts: &Artifacts) -> Result<(SmvModel, LtlFormula), TranslationFailure> {
    let mut model = parse_model(&arts.model_text)?;
    model.ltlspecs.clear();
    let specs = if arts.spec_text.trim().is_empty() {
        Vec::new()
    } else {
        parse_ltlspecs(&arts.spec_text)?
    };
    let resolved = specs
        .into_iter()
        .map(|f| resolve_ltl(&model, f))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = resolved
        .into_iter()
        .reduce(LtlFormula::and)
        .ok_or(TranslationFailure::NoSpec)?;
    Ok((model, spec))
}

/// Prompt, call the provider, and interpret the answer. Only provider
/// failures are errors; malformed answers are reported in `failure`.
pub fn translate(
    nl_plan: &str,
    problem_id: Option<&str>,
    exemplar: &Exemplar,
    provider: &dyn Provider,
) -> Result<TranslationResult, ProviderError> {
    let start = Instant::now();
    let prompt = build_prompt(nl_plan, exemplar).for_problem(problem_id);
    let raw = provider.complete(&prompt)?;
    let mut result = interpret_response(&raw);
    result.latency = start.elapsed();
    Ok(result)
}

/// Reads a direct validity judgment: the answer must name exactly one of
/// the whole words `VALID` or `INVALID` (possibly repeated).
pub fn parse_judgment(response: &str) -> Option<bool> {
    let mut found = None;
    for word in response.split(|c: char| !c.is_ascii_alphanumeric() && c != '_') {
        let v = match word {
            "VALID" => true,
            "INVALID" => false,
            _ => continue,
        };
        match found {
            None => found = Some(v),
            Some(prev) if prev != v => return None,
            Some(_) => {}
        }
    }
    found
}
