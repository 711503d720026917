//! Negation normal form and explicit lasso semantics for LTL.

use std::collections::HashSet;
use std::fmt;

use crate::kripke::{State, Trace};
use crate::smv::{format_expr, Expr, LtlFormula};

/// LTL with negation only on atoms. `Release` is the dual of `Until`
/// and never appears in surface syntax.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Nnf {
    /// An atom, negated when `positive` is false.
    Lit { atom: Expr, positive: bool },
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    Next(Box<Nnf>),
    Finally(Box<Nnf>),
    Globally(Box<Nnf>),
    Until(Box<Nnf>, Box<Nnf>),
    Release(Box<Nnf>, Box<Nnf>),
}

impl Nnf {
    pub fn size(&self) -> usize {
        match self {
            Nnf::Lit { positive, .. } => 1 + usize::from(!positive),
            Nnf::Next(a) | Nnf::Finally(a) | Nnf::Globally(a) => 1 + a.size(),
            Nnf::And(a, b) | Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Equivalent surface formula (`a R b` becomes `!(!a U !b)`).
    pub fn to_ltl(&self) -> LtlFormula {
        match self {
            Nnf::Lit { atom, positive } => {
                let a = LtlFormula::Atom(atom.clone());
                if *positive {
                    a
                } else {
                    LtlFormula::not(a)
                }
            }
            Nnf::And(a, b) => LtlFormula::and(a.to_ltl(), b.to_ltl()),
            Nnf::Or(a, b) => LtlFormula::or(a.to_ltl(), b.to_ltl()),
            Nnf::Next(a) => LtlFormula::next(a.to_ltl()),
            Nnf::Finally(a) => LtlFormula::finally(a.to_ltl()),
            Nnf::Globally(a) => LtlFormula::globally(a.to_ltl()),
            Nnf::Until(a, b) => LtlFormula::until(a.to_ltl(), b.to_ltl()),
            Nnf::Release(a, b) => LtlFormula::not(LtlFormula::until(
                LtlFormula::not(a.to_ltl()),
                LtlFormula::not(b.to_ltl()),
            )),
        }
    }
}

impl fmt::Display for Nnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nnf::Lit { atom, positive } => {
                let neg = if *positive { "" } else { "!" };
                write!(f, "{neg}({})", format_expr(atom))
            }
            Nnf::And(a, b) => write!(f, "({a} & {b})"),
            Nnf::Or(a, b) => write!(f, "({a} | {b})"),
            Nnf::Next(a) => write!(f, "X {a}"),
            Nnf::Finally(a) => write!(f, "F {a}"),
            Nnf::Globally(a) => write!(f, "G {a}"),
            Nnf::Until(a, b) => write!(f, "({a} U {b})"),
            Nnf::Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}

/// Pushes negations down to the atoms. With `negate`, the result is
/// equivalent to `!f`. `F` and `G` are kept as primitives and swap under
/// negation; `U` becomes `R`.
pub fn to_nnf(f: &LtlFormula, negate: bool) -> Nnf {
    let b = |x: &LtlFormula, n| Box::new(to_nnf(x, n));
    match f {
        LtlFormula::Atom(e) => Nnf::Lit {
            atom: e.clone(),
            positive: !negate,
        },
        LtlFormula::Not(a) => to_nnf(a, !negate),
        LtlFormula::And(x, y) if negate => Nnf::Or(b(x, true), b(y, true)),
        LtlFormula::And(x, y) => Nnf::And(b(x, false), b(y, false)),
        LtlFormula::Or(x, y) if negate => Nnf::And(b(x, true), b(y, true)),
        LtlFormula::Or(x, y) => Nnf::Or(b(x, false), b(y, false)),
        LtlFormula::Next(a) => Nnf::Next(b(a, negate)),
        LtlFormula::Finally(a) if negate => Nnf::Globally(b(a, true)),
        LtlFormula::Finally(a) => Nnf::Finally(b(a, false)),
        LtlFormula::Globally(a) if negate => Nnf::Finally(b(a, true)),
        LtlFormula::Globally(a) => Nnf::Globally(b(a, false)),
        LtlFormula::Until(x, y) if negate => Nnf::Release(b(x, true), b(y, true)),
        LtlFormula::Until(x, y) => Nnf::Until(b(x, false), b(y, false)),
    }
}

/// Distinct subformulas in post-order (children before parents).
pub fn subformulas(f: &LtlFormula) -> Vec<LtlFormula> {
    fn go(f: &LtlFormula, seen: &mut HashSet<LtlFormula>, out: &mut Vec<LtlFormula>) {
        if seen.contains(f) {
            return;
        }
        match f {
            LtlFormula::Atom(_) => {}
            LtlFormula::Not(a) | LtlFormula::Next(a) | LtlFormula::Finally(a) | LtlFormula::Globally(a) => {
                go(a, seen, out)
            }
            LtlFormula::And(a, b) | LtlFormula::Or(a, b) | LtlFormula::Until(a, b) => {
                go(a, seen, out);
                go(b, seen, out);
            }
        }
        seen.insert(f.clone());
        out.push(f.clone());
    }
    let mut out = Vec::new();
    go(f, &mut HashSet::new(), &mut out);
    out
}

/// Common shape of surface and NNF formulas for evaluation.
enum View<'a> {
    Atom(&'a Expr, bool),
    Not(Evaluable<'a>),
    And(Evaluable<'a>, Evaluable<'a>),
    Or(Evaluable<'a>, Evaluable<'a>),
    Next(Evaluable<'a>),
    Finally(Evaluable<'a>),
    Globally(Evaluable<'a>),
    Until(Evaluable<'a>, Evaluable<'a>),
    Release(Evaluable<'a>, Evaluable<'a>),
}

#[derive(Clone, Copy)]
enum Evaluable<'a> {
    Ltl(&'a LtlFormula),
    Nnf(&'a Nnf),
}

impl<'a> Evaluable<'a> {
    fn view(self) -> View<'a> {
        use Evaluable::{Ltl as L, Nnf as N};
        match self {
            L(f) => match f {
                LtlFormula::Atom(e) => View::Atom(e, true),
                LtlFormula::Not(a) => View::Not(L(a)),
                LtlFormula::And(a, b) => View::And(L(a), L(b)),
                LtlFormula::Or(a, b) => View::Or(L(a), L(b)),
                LtlFormula::Next(a) => View::Next(L(a)),
                LtlFormula::Finally(a) => View::Finally(L(a)),
                LtlFormula::Globally(a) => View::Globally(L(a)),
                LtlFormula::Until(a, b) => View::Until(L(a), L(b)),
            },
            N(f) => match f {
                Nnf::Lit { atom, positive } => View::Atom(atom, *positive),
                Nnf::And(a, b) => View::And(N(a), N(b)),
                Nnf::Or(a, b) => View::Or(N(a), N(b)),
                Nnf::Next(a) => View::Next(N(a)),
                Nnf::Finally(a) => View::Finally(N(a)),
                Nnf::Globally(a) => View::Globally(N(a)),
                Nnf::Until(a, b) => View::Until(N(a), N(b)),
                Nnf::Release(a, b) => View::Release(N(a), N(b)),
            },
        }
    }
}

struct Lasso<'a> {
    trace: &'a Trace,
    atoms: &'a dyn Fn(&Expr, &State) -> bool,
    loop_back: usize,
}

impl Lasso<'_> {
    fn succ(&self, i: usize) -> usize {
        if i + 1 < self.trace.states.len() {
            i + 1
        } else {
            self.loop_back
        }
    }

    /// Fixpoint of `v[i] = base[i] op (step[i] and v[succ(i)])`, starting
    /// from `init` (false for least, true for greatest fixpoints).
    fn fixpoint(&self, init: bool, f: impl Fn(usize, bool) -> bool) -> Vec<bool> {
        let n = self.trace.states.len();
        let mut v = vec![init; n];
        loop {
            let mut changed = false;
            for i in (0..n).rev() {
                let nv = f(i, v[self.succ(i)]);
                if nv != v[i] {
                    v[i] = nv;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    }

    fn eval(&self, f: Evaluable<'_>) -> Vec<bool> {
        let n = self.trace.states.len();
        match f.view() {
            View::Atom(e, positive) => self
                .trace
                .states
                .iter()
                .map(|s| (self.atoms)(e, s) == positive)
                .collect(),
            View::Not(a) => self.eval(a).into_iter().map(|x| !x).collect(),
            View::And(a, b) => {
                let (x, y) = (self.eval(a), self.eval(b));
                x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
            }
            View::Or(a, b) => {
                let (x, y) = (self.eval(a), self.eval(b));
                x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
            }
            View::Next(a) => {
                let x = self.eval(a);
                (0..n).map(|i| x[self.succ(i)]).collect()
            }
            View::Finally(a) => {
                let x = self.eval(a);
                self.fixpoint(false, |i, later| x[i] || later)
            }
            View::Globally(a) => {
                let x = self.eval(a);
                self.fixpoint(true, |i, later| x[i] && later)
            }
            View::Until(a, b) => {
                let (p, q) = (self.eval(a), self.eval(b));
                self.fixpoint(false, |i, later| q[i] || (p[i] && later))
            }
            View::Release(a, b) => {
                let (p, q) = (self.eval(a), self.eval(b));
                self.fixpoint(true, |i, later| q[i] && (p[i] || later))
            }
        }
    }
}

fn lasso<'a>(t: &'a Trace, atoms: &'a dyn Fn(&Expr, &State) -> bool) -> Lasso<'a> {
    let loop_back = t.loop_back.expect("lasso evaluation needs a loop_back index");
    assert!(loop_back < t.states.len(), "loop_back out of range");
    Lasso {
        trace: t,
        atoms,
        loop_back,
    }
}

/// Truth of `f` at every position of the lasso `t`.
///
/// # Panics
/// If `t.loop_back` is `None` or out of range.
pub fn eval_positions(f: &LtlFormula, t: &Trace, atoms: &dyn Fn(&Expr, &State) -> bool) -> Vec<bool> {
    lasso(t, atoms).eval(Evaluable::Ltl(f))
}

/// Truth of `f` on the infinite word `states[..l] (states[l..])^ω`.
///
/// # Panics
/// If `t.loop_back` is `None` or out of range.
pub fn eval_on_lasso(f: &LtlFormula, t: &Trace, atoms: &dyn Fn(&Expr, &State) -> bool) -> bool {
    t.states.is_empty() || eval_positions(f, t, atoms)[0]
}

/// As [`eval_on_lasso`], for a formula in negation normal form.
pub fn eval_nnf_on_lasso(f: &Nnf, t: &Trace, atoms: &dyn Fn(&Expr, &State) -> bool) -> bool {
    t.states.is_empty() || lasso(t, atoms).eval(Evaluable::Nnf(f))[0]
}
