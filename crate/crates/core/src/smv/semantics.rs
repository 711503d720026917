//! Name resolution, type checking and model diagnostics.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ast::{Domain, Expr, ExprKind, LtlFormula, LtlSpec, Pos, SmvModel, Value};
use super::lexer::RESERVED_WORDS;
use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: u32,
    pub col: u32,
}

impl Diagnostic {
    fn new(severity: Severity, pos: Pos, message: impl Into<String>) -> Self {
        Self {
            severity,
            message: message.into(),
            line: pos.line,
            col: pos.col,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.col, self.message)
    }
}

/// Type of an expression during checking. `Syms` is the type of a bare
/// literal (or a case over literals) before it meets a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Ty {
    Bool,
    Enum(Vec<String>),
    Syms(BTreeSet<String>),
}

impl Ty {
    fn describe(&self) -> String {
        match self {
            Ty::Bool => "boolean".to_string(),
            Ty::Enum(lits) => format!("{{{}}}", lits.join(", ")),
            Ty::Syms(s) => format!(
                "enum literal{} {}",
                if s.len() == 1 { "" } else { "s" },
                s.iter().cloned().collect::<Vec<_>>().join(", ")
            ),
        }
    }

    fn of_domain(d: &Domain) -> Ty {
        match d {
            Domain::Bool => Ty::Bool,
            Domain::Enum(l) => Ty::Enum(l.clone()),
        }
    }

    fn unify(&self, other: &Ty) -> Option<Ty> {
        match (self, other) {
            (Ty::Bool, Ty::Bool) => Some(Ty::Bool),
            (Ty::Enum(a), Ty::Enum(b)) if a == b => Some(self.clone()),
            (Ty::Enum(d), Ty::Syms(s)) | (Ty::Syms(s), Ty::Enum(d)) => {
                s.iter().all(|l| d.contains(l)).then(|| Ty::Enum(d.clone()))
            }
            (Ty::Syms(a), Ty::Syms(b)) => Some(Ty::Syms(a.union(b).cloned().collect())),
            _ => None,
        }
    }
}

struct Scope<'m> {
    vars: BTreeMap<&'m str, &'m Domain>,
    literals: BTreeSet<&'m str>,
}

impl<'m> Scope<'m> {
    fn build(model: &'m SmvModel) -> Result<Self, ParseError> {
        let mut vars = BTreeMap::new();
        for v in &model.vars {
            if RESERVED_WORDS.contains(&v.name.as_str()) {
                return Err(ParseError::new(
                    v.pos,
                    format!("reserved word `{}` cannot be used as a variable name", v.name),
                ));
            }
            if vars.insert(v.name.as_str(), &v.domain).is_some() {
                return Err(ParseError::new(
                    v.pos,
                    format!("duplicate variable {}", v.name),
                ));
            }
        }
        let mut literals = BTreeSet::new();
        for v in &model.vars {
            if let Domain::Enum(lits) = &v.domain {
                if lits.is_empty() {
                    return Err(ParseError::new(
                        v.pos,
                        format!("enum domain of {} is empty", v.name),
                    ));
                }
                let mut seen = BTreeSet::new();
                for l in lits {
                    if !seen.insert(l.as_str()) {
                        return Err(ParseError::new(
                            v.pos,
                            format!("duplicate enum literal {l} in domain of {}", v.name),
                        ));
                    }
                    if vars.contains_key(l.as_str()) {
                        return Err(ParseError::new(
                            v.pos,
                            format!("enum literal {l} clashes with a variable of the same name"),
                        ));
                    }
                    if RESERVED_WORDS.contains(&l.as_str()) {
                        return Err(ParseError::new(
                            v.pos,
                            format!("reserved word `{l}` cannot be used as an enum literal"),
                        ));
                    }
                    literals.insert(l.as_str());
                }
            }
        }
        Ok(Self { vars, literals })
    }

    fn resolve(&self, e: Expr) -> Result<Expr, ParseError> {
        let Expr { kind, pos } = e;
        let kind = match kind {
            ExprKind::VarRef(name) => {
                if self.vars.contains_key(name.as_str()) {
                    ExprKind::VarRef(name)
                } else if self.literals.contains(name.as_str()) {
                    ExprKind::Const(Value::Sym(name))
                } else {
                    return Err(ParseError::new(pos, format!("undeclared variable {name}")));
                }
            }
            ExprKind::Const(v) => ExprKind::Const(v),
            ExprKind::Not(a) => ExprKind::Not(Box::new(self.resolve(*a)?)),
            ExprKind::And(a, b) => {
                ExprKind::And(Box::new(self.resolve(*a)?), Box::new(self.resolve(*b)?))
            }
            ExprKind::Or(a, b) => {
                ExprKind::Or(Box::new(self.resolve(*a)?), Box::new(self.resolve(*b)?))
            }
            ExprKind::Eq(a, b) => {
                ExprKind::Eq(Box::new(self.resolve(*a)?), Box::new(self.resolve(*b)?))
            }
            ExprKind::Case(branches) => ExprKind::Case(
                branches
                    .into_iter()
                    .map(|(g, v)| Ok((self.resolve(g)?, self.resolve(v)?)))
                    .collect::<Result<_, ParseError>>()?,
            ),
        };
        Ok(Expr { kind, pos })
    }

    fn resolve_ltl(&self, f: LtlFormula) -> Result<LtlFormula, ParseError> {
        use LtlFormula as L;
        Ok(match f {
            L::Atom(e) => L::Atom(self.resolve(e)?),
            L::Not(a) => L::not(self.resolve_ltl(*a)?),
            L::Next(a) => L::next(self.resolve_ltl(*a)?),
            L::Finally(a) => L::finally(self.resolve_ltl(*a)?),
            L::Globally(a) => L::globally(self.resolve_ltl(*a)?),
            L::And(a, b) => L::and(self.resolve_ltl(*a)?, self.resolve_ltl(*b)?),
            L::Or(a, b) => L::or(self.resolve_ltl(*a)?, self.resolve_ltl(*b)?),
            L::Until(a, b) => L::until(self.resolve_ltl(*a)?, self.resolve_ltl(*b)?),
        })
    }

    fn type_of(&self, e: &Expr) -> Result<Ty, ParseError> {
        match &e.kind {
            ExprKind::Const(Value::Bool(_)) => Ok(Ty::Bool),
            ExprKind::Const(Value::Sym(s)) => {
                if self.literals.contains(s.as_str()) {
                    Ok(Ty::Syms(BTreeSet::from([s.clone()])))
                } else {
                    Err(ParseError::new(e.pos, format!("unknown enum literal {s}")))
                }
            }
            ExprKind::VarRef(name) => match self.vars.get(name.as_str()) {
                Some(d) => Ok(Ty::of_domain(d)),
                None => Err(ParseError::new(e.pos, format!("undeclared variable {name}"))),
            },
            ExprKind::Not(a) => {
                self.expect_bool(a, "operand of `!`")?;
                Ok(Ty::Bool)
            }
            ExprKind::And(a, b) | ExprKind::Or(a, b) => {
                self.expect_bool(a, "operand of a boolean connective")?;
                self.expect_bool(b, "operand of a boolean connective")?;
                Ok(Ty::Bool)
            }
            ExprKind::Eq(a, b) => {
                let ta = self.type_of(a)?;
                let tb = self.type_of(b)?;
                match (&ta, &tb) {
                    (Ty::Syms(_), Ty::Syms(_)) => Err(ParseError::new(
                        e.pos,
                        "comparison between two enum literals",
                    )),
                    (Ty::Enum(d), Ty::Syms(s)) | (Ty::Syms(s), Ty::Enum(d)) => {
                        match s.iter().find(|l| !d.contains(l)) {
                            Some(bad) => Err(ParseError::new(
                                e.pos,
                                format!(
                                    "literal {bad} is not in the domain {}",
                                    Ty::Enum(d.clone()).describe()
                                ),
                            )),
                            None => Ok(Ty::Bool),
                        }
                    }
                    _ => match ta.unify(&tb) {
                        Some(_) => Ok(Ty::Bool),
                        None => Err(ParseError::new(
                            e.pos,
                            format!(
                                "type mismatch: cannot compare {} with {}",
                                ta.describe(),
                                tb.describe()
                            ),
                        )),
                    },
                }
            }
            ExprKind::Case(branches) => {
                let mut result: Option<Ty> = None;
                for (g, v) in branches {
                    self.expect_bool(g, "case guard")?;
                    let tv = self.type_of(v)?;
                    result = Some(match result {
                        None => tv,
                        Some(prev) => prev.unify(&tv).ok_or_else(|| {
                            ParseError::new(
                                v.pos,
                                format!(
                                    "type mismatch: case branch of type {} after branches of type {}",
                                    tv.describe(),
                                    prev.describe()
                                ),
                            )
                        })?,
                    });
                }
                result.ok_or_else(|| {
                    ParseError::new(e.pos, "case expression needs at least one branch")
                })
            }
        }
    }

    fn expect_bool(&self, e: &Expr, what: &str) -> Result<(), ParseError> {
        match self.type_of(e)? {
            Ty::Bool => Ok(()),
            other => Err(ParseError::new(
                e.pos,
                format!("type mismatch: {what} must be boolean, found {}", other.describe()),
            )),
        }
    }

    fn check_assignment(&self, var: &str, value: &Expr, which: &str) -> Result<(), ParseError> {
        let Some(domain) = self.vars.get(var) else {
            return Err(ParseError::new(
                value.pos,
                format!("undeclared variable {var}"),
            ));
        };
        let target = Ty::of_domain(domain);
        let actual = self.type_of(value)?;
        if target.unify(&actual).as_ref() != Some(&target) {
            return Err(ParseError::new(
                value.pos,
                format!(
                    "type mismatch: {which}({var}) of type {} assigned {}",
                    target.describe(),
                    actual.describe()
                ),
            ));
        }
        Ok(())
    }

    fn check_ltl(&self, f: &LtlFormula) -> Result<(), ParseError> {
        let mut result = Ok(());
        f.visit_atoms(&mut |atom| {
            if result.is_ok() {
                result = self.expect_bool(atom, "temporal atom");
            }
        });
        result
    }
}

pub(crate) fn resolve_model(mut model: SmvModel) -> Result<SmvModel, ParseError> {
    let resolved = {
        let scope = Scope::build(&model)?;
        let mut inits = BTreeMap::new();
        let mut nexts = BTreeMap::new();
        for (slot, out) in [(&model.inits, &mut inits), (&model.nexts, &mut nexts)] {
            for (var, e) in slot {
                out.insert(var.clone(), scope.resolve(e.clone())?);
            }
        }
        let specs = model
            .ltlspecs
            .iter()
            .map(|s| {
                Ok(LtlSpec {
                    formula: scope.resolve_ltl(s.formula.clone())?,
                    pos: s.pos,
                })
            })
            .collect::<Result<Vec<_>, ParseError>>()?;
        (inits, nexts, specs)
    };
    (model.inits, model.nexts, model.ltlspecs) = resolved;
    Ok(model)
}

/// Checks declarations, references and types of an already resolved model.
pub fn validate(model: &SmvModel) -> Result<(), ParseError> {
    let scope = Scope::build(model)?;
    for (var, e) in &model.inits {
        scope.check_assignment(var, e, "init")?;
    }
    for (var, e) in &model.nexts {
        scope.check_assignment(var, e, "next")?;
    }
    for spec in &model.ltlspecs {
        scope.check_ltl(&spec.formula)?;
    }
    Ok(())
}

/// Resolves identifiers of a standalone formula against a model's
/// declarations and type checks its atoms.
pub fn resolve_ltl(model: &SmvModel, f: LtlFormula) -> Result<LtlFormula, ParseError> {
    let scope = Scope::build(model)?;
    let f = scope.resolve_ltl(f)?;
    scope.check_ltl(&f)?;
    Ok(f)
}

fn collect_cases<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match &e.kind {
        ExprKind::Const(_) | ExprKind::VarRef(_) => {}
        ExprKind::Not(a) => collect_cases(a, out),
        ExprKind::And(a, b) | ExprKind::Or(a, b) | ExprKind::Eq(a, b) => {
            collect_cases(a, out);
            collect_cases(b, out);
        }
        ExprKind::Case(branches) => {
            out.push(e);
            for (g, v) in branches {
                collect_cases(g, out);
                collect_cases(v, out);
            }
        }
    }
}

/// Model-level diagnostics. Errors block compilation, warnings do not.
///
/// * a `case` whose last guard is not the literal `TRUE` is an error;
/// * a variable without a `next` assignment is a warning (its next value
///   is unconstrained).
pub fn check_semantics(model: &SmvModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for v in &model.vars {
        for (which, slot) in [("init", &model.inits), ("next", &model.nexts)] {
            let Some(e) = slot.get(&v.name) else { continue };
            let mut cases = Vec::new();
            collect_cases(e, &mut cases);
            for c in cases {
                if let ExprKind::Case(branches) = &c.kind {
                    let total = branches.last().is_some_and(|(g, _)| g.is_true_literal());
                    if !total {
                        out.push(Diagnostic::new(
                            Severity::Error,
                            c.pos,
                            format!(
                                "case not total in {which}({}): last guard must be TRUE",
                                v.name
                            ),
                        ));
                    }
                }
            }
        }
    }
    for spec in &model.ltlspecs {
        let mut cases = Vec::new();
        spec.formula.visit_atoms(&mut |a| collect_cases(a, &mut cases));
        for c in cases {
            if let ExprKind::Case(branches) = &c.kind {
                if !branches.last().is_some_and(|(g, _)| g.is_true_literal()) {
                    out.push(Diagnostic::new(
                        Severity::Error,
                        c.pos,
                        "case not total in LTLSPEC atom: last guard must be TRUE",
                    ));
                }
            }
        }
    }
    for v in &model.vars {
        if !model.nexts.contains_key(&v.name) {
            out.push(Diagnostic::new(
                Severity::Warning,
                v.pos,
                format!("unconstrained next: {} has no next assignment", v.name),
            ));
        }
    }
    out
}
