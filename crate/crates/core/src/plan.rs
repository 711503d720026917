//! Structured plan problems, their SMV encoding, and a direct simulator.
//!
//! A problem lists boolean fluents, an initial state (closed world:
//! unlisted fluents are false), a catalog of STRIPS-style actions whose
//! preconditions and effects are fluent/value maps, the plan to check, and
//! a goal. A plan is valid when every action's preconditions hold at the
//! moment it runs and the goal holds after the last action.
//!
//! The encoding uses one boolean per fluent, an enum `stage` with values
//! `s0..sN, done` (N actions) that advances one step per transition, and a
//! boolean `ok` that latches false at the first stage whose preconditions
//! fail. The goal specification is `F (stage = done & ok & goal)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::bmc::{check_spec, CheckOutcome};
use crate::kripke::{KripkeStructure, Trace};
use crate::smv::{is_identifier, Domain, Expr, LtlFormula, LtlSpec, Pos, SmvModel};

/// Bound used when the caller does not supply one.
pub const DEFAULT_MAX_BOUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {message}")]
pub struct SchemaError {
    pub field: String,
    pub message: String,
}

impl SchemaError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Valid,
    Invalid,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Valid => "valid",
            Label::Invalid => "invalid",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionSpec {
    pub preconditions: BTreeMap<String, bool>,
    pub effects: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanProblem {
    pub problem_id: String,
    pub fluents: Vec<String>,
    /// Value of every fluent in the initial state.
    pub init: BTreeMap<String, bool>,
    pub actions_catalog: BTreeMap<String, ActionSpec>,
    pub plan: Vec<String>,
    pub goal: BTreeMap<String, bool>,
    pub label: Option<Label>,
    /// Natural-language rendering of the problem, if any.
    pub nl: Option<String>,
}

const KNOWN_FIELDS: [&str; 8] = [
    "problem_id",
    "fluents",
    "init",
    "actions_catalog",
    "plan",
    "goal",
    "label",
    "nl",
];

/// Names the encoder uses for its own variables and stage literals.
fn reserved_by_encoding(name: &str) -> bool {
    name == "stage"
        || name == "ok"
        || name == "done"
        || name
            .strip_prefix('s')
            .is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
}

fn truth_map(
    doc: &Json,
    field: &str,
    fluents: &BTreeSet<String>,
) -> Result<BTreeMap<String, bool>, SchemaError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| SchemaError::new(field, "expected an object of fluent: boolean"))?;
    let mut out = BTreeMap::new();
    for (k, v) in obj {
        if !fluents.contains(k) {
            return Err(SchemaError::new(format!("{field}.{k}"), "undeclared fluent"));
        }
        let b = v
            .as_bool()
            .ok_or_else(|| SchemaError::new(format!("{field}.{k}"), "expected a boolean"))?;
        out.insert(k.clone(), b);
    }
    Ok(out)
}

/// Parses and validates a problem document.
pub fn load_problem(text: &str) -> Result<PlanProblem, SchemaError> {
    let doc: Json =
        serde_json::from_str(text).map_err(|e| SchemaError::new("document", e.to_string()))?;
    problem_from_json(&doc)
}

pub fn problem_from_json(doc: &Json) -> Result<PlanProblem, SchemaError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| SchemaError::new("document", "expected a JSON object"))?;
    if let Some(k) = obj.keys().find(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
        return Err(SchemaError::new(k.clone(), "unknown field"));
    }
    let problem_id = obj
        .get("problem_id")
        .and_then(Json::as_str)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| SchemaError::new("problem_id", "expected a non-empty string"))?
        .to_string();

    let raw_fluents = obj
        .get("fluents")
        .and_then(Json::as_array)
        .ok_or_else(|| SchemaError::new("fluents", "expected an array of names"))?;
    let mut fluents = Vec::new();
    let mut declared = BTreeSet::new();
    for (i, f) in raw_fluents.iter().enumerate() {
        let field = format!("fluents[{i}]");
        let name = f
            .as_str()
            .ok_or_else(|| SchemaError::new(&field, "expected a string"))?;
        if !is_identifier(name) {
            return Err(SchemaError::new(field, format!("`{name}` is not a valid identifier")));
        }
        if reserved_by_encoding(name) {
            return Err(SchemaError::new(
                field,
                format!("`{name}` is reserved by the plan encoding"),
            ));
        }
        if !declared.insert(name.to_string()) {
            return Err(SchemaError::new(field, format!("duplicate fluent `{name}`")));
        }
        fluents.push(name.to_string());
    }

    let mut init: BTreeMap<String, bool> = fluents.iter().map(|f| (f.clone(), false)).collect();
    if let Some(v) = obj.get("init") {
        init.extend(truth_map(v, "init", &declared)?);
    }

    let catalog = obj
        .get("actions_catalog")
        .and_then(Json::as_object)
        .ok_or_else(|| SchemaError::new("actions_catalog", "expected an object of actions"))?;
    let mut actions_catalog = BTreeMap::new();
    for (name, spec) in catalog {
        let field = format!("actions_catalog.{name}");
        let spec_obj = spec
            .as_object()
            .ok_or_else(|| SchemaError::new(&field, "expected an object"))?;
        if let Some(k) = spec_obj
            .keys()
            .find(|k| *k != "preconditions" && *k != "effects")
        {
            return Err(SchemaError::new(format!("{field}.{k}"), "unknown field"));
        }
        let part = |key: &str| -> Result<BTreeMap<String, bool>, SchemaError> {
            match spec_obj.get(key) {
                None => Ok(BTreeMap::new()),
                Some(v) => truth_map(v, &format!("{field}.{key}"), &declared),
            }
        };
        actions_catalog.insert(
            name.clone(),
            ActionSpec {
                preconditions: part("preconditions")?,
                effects: part("effects")?,
            },
        );
    }

    let raw_plan = obj
        .get("plan")
        .and_then(Json::as_array)
        .ok_or_else(|| SchemaError::new("plan", "expected an array of action names"))?;
    let mut plan = Vec::new();
    for (i, a) in raw_plan.iter().enumerate() {
        let field = format!("plan[{i}]");
        let name = a
            .as_str()
            .ok_or_else(|| SchemaError::new(&field, "expected a string"))?;
        if !actions_catalog.contains_key(name) {
            return Err(SchemaError::new(field, format!("unknown action `{name}`")));
        }
        plan.push(name.to_string());
    }

    let goal = truth_map(
        obj.get("goal")
            .ok_or_else(|| SchemaError::new("goal", "missing"))?,
        "goal",
        &declared,
    )?;
    if goal.is_empty() {
        return Err(SchemaError::new("goal", "must not be empty"));
    }

    let label = match obj.get("label") {
        None | Some(Json::Null) => None,
        Some(v) => Some(
            serde_json::from_value(v.clone())
                .map_err(|_| SchemaError::new("label", "expected \"valid\" or \"invalid\""))?,
        ),
    };
    let nl = match obj.get("nl") {
        None | Some(Json::Null) => None,
        Some(Json::String(s)) => Some(s.clone()),
        Some(_) => return Err(SchemaError::new("nl", "expected a string")),
    };

    Ok(PlanProblem {
        problem_id,
        fluents,
        init,
        actions_catalog,
        plan,
        goal,
        label,
        nl,
    })
}

fn truth_json(m: &BTreeMap<String, bool>) -> Json {
    Json::Object(m.iter().map(|(k, v)| (k.clone(), Json::Bool(*v))).collect())
}

/// Canonical JSON form: fixed field order, sorted maps, the full initial
/// state, and optional fields only when present.
pub fn emit_problem(p: &PlanProblem) -> Json {
    let mut obj = Map::new();
    obj.insert("problem_id".into(), Json::String(p.problem_id.clone()));
    obj.insert(
        "fluents".into(),
        Json::Array(p.fluents.iter().cloned().map(Json::String).collect()),
    );
    obj.insert("init".into(), truth_json(&p.init));
    let catalog: Map<String, Json> = p
        .actions_catalog
        .iter()
        .map(|(name, a)| {
            let mut spec = Map::new();
            spec.insert("preconditions".into(), truth_json(&a.preconditions));
            spec.insert("effects".into(), truth_json(&a.effects));
            (name.clone(), Json::Object(spec))
        })
        .collect();
    obj.insert("actions_catalog".into(), Json::Object(catalog));
    obj.insert(
        "plan".into(),
        Json::Array(p.plan.iter().cloned().map(Json::String).collect()),
    );
    obj.insert("goal".into(), truth_json(&p.goal));
    if let Some(l) = p.label {
        obj.insert("label".into(), Json::String(l.to_string()));
    }
    if let Some(nl) = &p.nl {
        obj.insert("nl".into(), Json::String(nl.clone()));
    }
    Json::Object(obj)
}

fn stage_literal(i: usize, n: usize) -> String {
    if i > n {
        "done".to_string()
    } else {
        format!("s{i}")
    }
}

fn at_stage(i: usize, n: usize) -> Expr {
    Expr::eq(Expr::var("stage"), Expr::sym(stage_literal(i, n)))
}

fn literal(fluent: &str, value: bool) -> Expr {
    if value {
        Expr::var(fluent)
    } else {
        Expr::not(Expr::var(fluent))
    }
}

fn conj(m: &BTreeMap<String, bool>) -> Expr {
    Expr::conjunction(m.iter().map(|(f, v)| literal(f, *v)))
}

fn case_or_keep(var: &str, mut branches: Vec<(Expr, Expr)>) -> Expr {
    if branches.is_empty() {
        return Expr::var(var);
    }
    branches.push((Expr::truth(true), Expr::var(var)));
    Expr::case(branches)
}

/// The goal specification `F (stage = done & ok & goal literals)`.
pub fn goal_spec(p: &PlanProblem) -> LtlFormula {
    let mut body = LtlFormula::Atom(at_stage(p.plan.len() + 1, p.plan.len()));
    body = LtlFormula::and(body, LtlFormula::prop("ok"));
    for (f, v) in &p.goal {
        body = LtlFormula::and(body, LtlFormula::Atom(literal(f, *v)));
    }
    LtlFormula::finally(body)
}

/// Encodes a problem as an SMV model (with the goal spec attached as its
/// only `LTLSPEC`) and returns the spec separately as well.
pub fn encode_plan(p: &PlanProblem) -> (SmvModel, LtlFormula) {
    let n = p.plan.len();
    let mut m = SmvModel::default();
    let stages: Vec<String> = (0..=n + 1).map(|i| stage_literal(i, n)).collect();
    m.declare("stage", Domain::Enum(stages));
    m.declare("ok", Domain::Bool);
    for f in &p.fluents {
        m.declare(f.clone(), Domain::Bool);
    }

    m.inits.insert("stage".into(), Expr::sym("s0"));
    m.inits.insert("ok".into(), Expr::truth(true));
    for f in &p.fluents {
        m.inits.insert(f.clone(), Expr::truth(p.init[f]));
    }

    let mut stage_steps: Vec<(Expr, Expr)> = (0..n)
        .map(|i| (at_stage(i, n), Expr::sym(stage_literal(i + 1, n))))
        .collect();
    stage_steps.push((Expr::truth(true), Expr::sym("done")));
    m.nexts.insert("stage".into(), Expr::case(stage_steps));

    let actions: Vec<&ActionSpec> = p.plan.iter().map(|a| &p.actions_catalog[a]).collect();
    let ok_branches = actions
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.preconditions.is_empty())
        .map(|(i, a)| {
            (
                Expr::and(at_stage(i, n), Expr::not(conj(&a.preconditions))),
                Expr::truth(false),
            )
        })
        .collect();
    m.nexts.insert("ok".into(), case_or_keep("ok", ok_branches));

    for f in &p.fluents {
        let branches = actions
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                a.effects.get(f).map(|&v| {
                    let guard = if a.preconditions.is_empty() {
                        at_stage(i, n)
                    } else {
                        Expr::and(at_stage(i, n), conj(&a.preconditions))
                    };
                    (guard, Expr::truth(v))
                })
            })
            .collect();
        m.nexts.insert(f.clone(), case_or_keep(f, branches));
    }

    let spec = goal_spec(p);
    m.ltlspecs.push(LtlSpec {
        formula: spec.clone(),
        pos: Pos::default(),
    });
    (m, spec)
}

fn facts(m: &BTreeMap<String, bool>) -> String {
    let parts: Vec<String> = m.iter().map(|(f, v)| format!("{f} is {v}")).collect();
    parts.join(" and ")
}

/// Plain-English rendering of a problem, used when a record carries no
/// `nl` text of its own.
pub fn describe_problem(p: &PlanProblem) -> String {
    let mut out = format!("Facts: {}.\n", p.fluents.join(", "));
    let trues: Vec<&str> = p
        .fluents
        .iter()
        .filter(|f| p.init[*f])
        .map(String::as_str)
        .collect();
    if trues.is_empty() {
        out.push_str("Initially every fact is false.\n");
    } else {
        let verb = if trues.len() == 1 { "is" } else { "are" };
        out.push_str(&format!(
            "Initially {} {verb} true; every other fact is false.\n",
            trues.join(" and ")
        ));
    }
    out.push_str("\nActions:\n");
    for (name, a) in &p.actions_catalog {
        let pre: Vec<String> = a
            .preconditions
            .iter()
            .map(|(f, v)| if *v { f.clone() } else { format!("not {f}") })
            .collect();
        let pre = if pre.is_empty() {
            "requires nothing".to_string()
        } else {
            format!("requires {}", pre.join(" and "))
        };
        let eff = if a.effects.is_empty() {
            "Nothing changes".to_string()
        } else {
            format!("Afterwards {}", facts(&a.effects))
        };
        out.push_str(&format!("- {name}: {pre}. {eff}.\n"));
    }
    out.push_str("\nPlan:\n");
    if p.plan.is_empty() {
        out.push_str("(no actions)\n");
    }
    for (i, a) in p.plan.iter().enumerate() {
        out.push_str(&format!("{}. {a}\n", i + 1));
    }
    out.push_str(&format!("\nGoal: {}.\n", facts(&p.goal)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    Valid,
    Invalid,
    UnknownParse,
    UnknownBound,
}

impl VerdictKind {
    pub fn is_unknown(self) -> bool {
        matches!(self, VerdictKind::UnknownParse | VerdictKind::UnknownBound)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Valid => "valid",
            VerdictKind::Invalid => "invalid",
            VerdictKind::UnknownParse => "unknown_parse",
            VerdictKind::UnknownBound => "unknown_bound",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// The first action whose preconditions did not hold (0-based).
    FailingAction { index: usize, action: String },
    /// Goal literals that were false after the last action.
    GoalUnmet { missing: Vec<String> },
    Counterexample(Trace),
    /// Why the model or specification could not be used.
    Parse(String),
    /// The largest bound searched without a verdict.
    Bound { max_bound: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanVerdict {
    pub kind: VerdictKind,
    pub evidence: Option<Evidence>,
    pub wall_time: Duration,
}

impl PlanVerdict {
    pub fn new(kind: VerdictKind, evidence: Option<Evidence>) -> Self {
        Self {
            kind,
            evidence,
            wall_time: Duration::ZERO,
        }
    }

    pub fn unknown_parse(message: impl Into<String>) -> Self {
        Self::new(VerdictKind::UnknownParse, Some(Evidence::Parse(message.into())))
    }
}

/// Applies the plan step by step.
pub fn simulate_plan(p: &PlanProblem) -> PlanVerdict {
    let start = Instant::now();
    let mut state = p.init.clone();
    let mut verdict = None;
    for (index, name) in p.plan.iter().enumerate() {
        let a = &p.actions_catalog[name];
        if a.preconditions.iter().any(|(f, v)| state[f] != *v) {
            verdict = Some(PlanVerdict::new(
                VerdictKind::Invalid,
                Some(Evidence::FailingAction {
                    index,
                    action: name.clone(),
                }),
            ));
            break;
        }
        state.extend(a.effects.iter().map(|(f, v)| (f.clone(), *v)));
    }
    let mut verdict = verdict.unwrap_or_else(|| {
        let missing: Vec<String> = p
            .goal
            .iter()
            .filter(|(f, v)| state[*f] != **v)
            .map(|(f, v)| if *v { f.clone() } else { format!("!{f}") })
            .collect();
        if missing.is_empty() {
            PlanVerdict::new(VerdictKind::Valid, None)
        } else {
            PlanVerdict::new(VerdictKind::Invalid, Some(Evidence::GoalUnmet { missing }))
        }
    });
    verdict.wall_time = start.elapsed();
    verdict
}

/// Model checks `spec` on `model`: holds at the complete bound is Valid,
/// a counterexample is Invalid, an unusable model is UnknownParse and an
/// exhausted or incomplete search is UnknownBound.
pub fn check_model(model: &SmvModel, spec: &LtlFormula, max_bound: usize) -> PlanVerdict {
    let start = Instant::now();
    let mut verdict = match KripkeStructure::compile(model) {
        Err(e) => PlanVerdict::unknown_parse(e.to_string()),
        Ok(k) => match check_spec(&k, spec, max_bound) {
            Ok(CheckOutcome::Holds { complete: true, .. }) => {
                PlanVerdict::new(VerdictKind::Valid, None)
            }
            Ok(CheckOutcome::Holds { bound, .. }) => PlanVerdict::new(
                VerdictKind::UnknownBound,
                Some(Evidence::Bound { max_bound: bound }),
            ),
            Ok(CheckOutcome::CounterexampleFound { trace, .. }) => {
                PlanVerdict::new(VerdictKind::Invalid, Some(Evidence::Counterexample(trace)))
            }
            Ok(CheckOutcome::BoundExhausted { max_bound }) => PlanVerdict::new(
                VerdictKind::UnknownBound,
                Some(Evidence::Bound { max_bound }),
            ),
            Err(e) => PlanVerdict::unknown_parse(e.to_string()),
        },
    };
    verdict.wall_time = start.elapsed();
    verdict
}

/// Encodes and model checks a problem.
pub fn verify_plan(p: &PlanProblem, max_bound: usize) -> PlanVerdict {
    let start = Instant::now();
    let (model, spec) = encode_plan(p);
    let mut v = check_model(&model, &spec, max_bound);
    v.wall_time = start.elapsed();
    v
}

/// The problem's label, or the simulator's verdict when it has none.
pub fn ground_truth(p: &PlanProblem) -> Label {
    p.label.unwrap_or_else(|| match simulate_plan(p).kind {
        VerdictKind::Valid => Label::Valid,
        _ => Label::Invalid,
    })
}
