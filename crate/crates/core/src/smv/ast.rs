//! Syntax trees for the SMV subset and for LTL specifications.
//!
//! Source positions are carried on every node but never take part in
//! equality: two trees are equal when they are structurally equal.

use std::collections::BTreeMap;
use std::fmt;

/// 1-based line/column position in the source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Bool,
    /// Symbolic enumeration; literal codes follow declaration order.
    Enum(Vec<String>),
}

impl Domain {
    pub fn size(&self) -> usize {
        match self {
            Domain::Bool => 2,
            Domain::Enum(lits) => lits.len(),
        }
    }

    pub fn literal_index(&self, lit: &str) -> Option<usize> {
        match self {
            Domain::Bool => None,
            Domain::Enum(lits) => lits.iter().position(|l| l == lit),
        }
    }

    /// All values of the domain, in code order.
    pub fn values(&self) -> Vec<Value> {
        match self {
            Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Domain::Enum(lits) => lits.iter().cloned().map(Value::Sym).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
    pub pos: Pos,
}

impl PartialEq for VarDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.domain == other.domain
    }
}

impl Eq for VarDecl {}

/// A constant value: boolean or enum literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Sym(String),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Sym(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Const(Value),
    VarRef(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    /// `case g1 : v1; ...; esac`, first matching guard wins.
    Case(Vec<(Expr, Expr)>),
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state)
    }
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Self { kind, pos }
    }

    pub fn truth(b: bool) -> Self {
        Self::new(ExprKind::Const(Value::Bool(b)), Pos::default())
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Self::new(ExprKind::Const(Value::Sym(name.into())), Pos::default())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Self::new(ExprKind::VarRef(name.into()), Pos::default())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Self::new(ExprKind::Not(Box::new(e)), Pos::default())
    }

    pub fn and(a: Expr, b: Expr) -> Self {
        Self::new(ExprKind::And(Box::new(a), Box::new(b)), Pos::default())
    }

    pub fn or(a: Expr, b: Expr) -> Self {
        Self::new(ExprKind::Or(Box::new(a), Box::new(b)), Pos::default())
    }

    pub fn eq(a: Expr, b: Expr) -> Self {
        Self::new(ExprKind::Eq(Box::new(a), Box::new(b)), Pos::default())
    }

    pub fn case(branches: Vec<(Expr, Expr)>) -> Self {
        Self::new(ExprKind::Case(branches), Pos::default())
    }

    /// Left-nested conjunction; `TRUE` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = Expr>) -> Self {
        items
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or_else(|| Expr::truth(true))
    }

    pub fn is_true_literal(&self) -> bool {
        matches!(self.kind, ExprKind::Const(Value::Bool(true)))
    }

    /// Evaluates the expression given a valuation of the variables.
    ///
    /// Expressions are assumed well typed; a case with no matching branch
    /// evaluates to `FALSE`.
    pub fn eval(&self, env: &dyn Fn(&str) -> Value) -> Value {
        match &self.kind {
            ExprKind::Const(v) => v.clone(),
            ExprKind::VarRef(name) => env(name),
            ExprKind::Not(e) => Value::Bool(!e.eval_bool(env)),
            ExprKind::And(a, b) => Value::Bool(a.eval_bool(env) && b.eval_bool(env)),
            ExprKind::Or(a, b) => Value::Bool(a.eval_bool(env) || b.eval_bool(env)),
            ExprKind::Eq(a, b) => Value::Bool(a.eval(env) == b.eval(env)),
            ExprKind::Case(branches) => branches
                .iter()
                .find(|(g, _)| g.eval_bool(env))
                .map(|(_, v)| v.eval(env))
                .unwrap_or(Value::Bool(false)),
        }
    }

    pub fn eval_bool(&self, env: &dyn Fn(&str) -> Value) -> bool {
        self.eval(env).as_bool().unwrap_or(false)
    }

    /// Calls `f` on every variable name referenced by the expression.
    pub fn visit_vars<'a>(&'a self, f: &mut dyn FnMut(&'a str, Pos)) {
        match &self.kind {
            ExprKind::Const(_) => {}
            ExprKind::VarRef(name) => f(name, self.pos),
            ExprKind::Not(e) => e.visit_vars(f),
            ExprKind::And(a, b) | ExprKind::Or(a, b) | ExprKind::Eq(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            ExprKind::Case(branches) => {
                for (g, v) in branches {
                    g.visit_vars(f);
                    v.visit_vars(f);
                }
            }
        }
    }
}

/// Linear temporal logic over state predicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LtlFormula {
    Atom(Expr),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Finally(Box<LtlFormula>),
    Globally(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
}

impl LtlFormula {
    pub fn atom(e: Expr) -> Self {
        LtlFormula::Atom(e)
    }

    pub fn prop(name: &str) -> Self {
        LtlFormula::Atom(Expr::var(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LtlFormula) -> Self {
        LtlFormula::Not(Box::new(f))
    }

    pub fn and(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(f: LtlFormula) -> Self {
        LtlFormula::Next(Box::new(f))
    }

    pub fn finally(f: LtlFormula) -> Self {
        LtlFormula::Finally(Box::new(f))
    }

    pub fn globally(f: LtlFormula) -> Self {
        LtlFormula::Globally(Box::new(f))
    }

    pub fn until(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::Until(Box::new(a), Box::new(b))
    }

    /// Number of nodes; atoms count as one.
    pub fn size(&self) -> usize {
        match self {
            LtlFormula::Atom(_) => 1,
            LtlFormula::Not(f)
            | LtlFormula::Next(f)
            | LtlFormula::Finally(f)
            | LtlFormula::Globally(f) => 1 + f.size(),
            LtlFormula::And(a, b) | LtlFormula::Or(a, b) | LtlFormula::Until(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LtlFormula::Atom(_) => 1,
            LtlFormula::Not(f)
            | LtlFormula::Next(f)
            | LtlFormula::Finally(f)
            | LtlFormula::Globally(f) => 1 + f.depth(),
            LtlFormula::And(a, b) | LtlFormula::Or(a, b) | LtlFormula::Until(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn visit_atoms<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            LtlFormula::Atom(e) => f(e),
            LtlFormula::Not(x)
            | LtlFormula::Next(x)
            | LtlFormula::Finally(x)
            | LtlFormula::Globally(x) => x.visit_atoms(f),
            LtlFormula::And(a, b) | LtlFormula::Or(a, b) | LtlFormula::Until(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LtlSpec {
    pub formula: LtlFormula,
    pub pos: Pos,
}

impl PartialEq for LtlSpec {
    fn eq(&self, other: &Self) -> bool {
        self.formula == other.formula
    }
}

impl Eq for LtlSpec {}

/// A `MODULE main` model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SmvModel {
    pub vars: Vec<VarDecl>,
    pub inits: BTreeMap<String, Expr>,
    pub nexts: BTreeMap<String, Expr>,
    pub ltlspecs: Vec<LtlSpec>,
}

impl SmvModel {
    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn declare(&mut self, name: impl Into<String>, domain: Domain) {
        self.vars.push(VarDecl {
            name: name.into(),
            domain,
            pos: Pos::default(),
        });
    }
}
