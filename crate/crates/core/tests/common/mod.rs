//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

pub mod criteria;

use std::collections::BTreeMap;

use plancheck::kripke::{State, Trace};
use plancheck::plan::{ActionSpec, Label, PlanProblem};
use plancheck::smv::{Domain, Expr, ExprKind, LtlFormula, LtlSpec, Pos, SmvModel, Value};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- models

pub struct ModelShape {
    pub bools: Vec<String>,
    pub stage: Option<Vec<String>>,
}

fn stage_atom(lits: &[String], rng: &mut ChaCha8Rng) -> Expr {
    Expr::eq(Expr::var("stage"), Expr::sym(lits.choose(rng).unwrap().clone()))
}

/// A random boolean expression over the model's variables.
pub fn bool_expr(shape: &ModelShape, depth: u32, rng: &mut ChaCha8Rng) -> Expr {
    if depth == 0 || rng.gen_bool(0.35) {
        return match (rng.gen_range(0..10), &shape.stage) {
            (0, _) => Expr::truth(rng.gen()),
            (1..=2, Some(lits)) => stage_atom(lits, rng),
            _ => Expr::var(shape.bools.choose(rng).unwrap().clone()),
        };
    }
    match rng.gen_range(0..6) {
        0 => Expr::not(bool_expr(shape, depth - 1, rng)),
        1 => Expr::and(bool_expr(shape, depth - 1, rng), bool_expr(shape, depth - 1, rng)),
        2 => Expr::or(bool_expr(shape, depth - 1, rng), bool_expr(shape, depth - 1, rng)),
        3 => Expr::eq(bool_expr(shape, depth - 1, rng), bool_expr(shape, depth - 1, rng)),
        _ => {
            let n = rng.gen_range(1..=2);
            let mut branches: Vec<(Expr, Expr)> = (0..n)
                .map(|_| (bool_expr(shape, depth - 1, rng), bool_expr(shape, depth - 1, rng)))
                .collect();
            branches.push((Expr::truth(true), bool_expr(shape, depth - 1, rng)));
            Expr::case(branches)
        }
    }
}

fn stage_next(shape: &ModelShape, lits: &[String], rng: &mut ChaCha8Rng) -> Option<Expr> {
    match rng.gen_range(0..10) {
        0 => None,
        1 => Some(Expr::sym(lits.choose(rng).unwrap().clone())),
        _ => {
            let mut branches = Vec::new();
            for w in lits.windows(2) {
                let at = Expr::eq(Expr::var("stage"), Expr::sym(w[0].clone()));
                let guard = if rng.gen_bool(0.3) {
                    Expr::and(at, bool_expr(shape, 1, rng))
                } else {
                    at
                };
                branches.push((guard, Expr::sym(w[1].clone())));
            }
            let last = if rng.gen_bool(0.5) {
                Expr::var("stage")
            } else {
                Expr::sym(lits.choose(rng).unwrap().clone())
            };
            branches.push((Expr::truth(true), last));
            Some(Expr::case(branches))
        }
    }
}

/// A random model with up to `max_bools` booleans and, sometimes, a
/// `stage` enum of up to `max_stage` literals.
pub fn random_model(rng: &mut ChaCha8Rng, max_bools: usize, max_stage: usize) -> SmvModel {
    let nb = rng.gen_range(1..=max_bools);
    let shape = ModelShape {
        bools: (0..nb).map(|i| format!("b{i}")).collect(),
        stage: rng
            .gen_bool(0.5)
            .then(|| (0..rng.gen_range(2..=max_stage)).map(|i| format!("s{i}")).collect()),
    };
    let deterministic = rng.gen_bool(0.3);
    let mut m = SmvModel::default();
    if let Some(lits) = &shape.stage {
        m.declare("stage", Domain::Enum(lits.clone()));
        m.inits.insert("stage".into(), Expr::sym(lits[0].clone()));
        let next = stage_next(&shape, lits, rng);
        match next {
            Some(e) => {
                m.nexts.insert("stage".into(), e);
            }
            None if deterministic => {
                m.nexts.insert("stage".into(), Expr::var("stage"));
            }
            None => {}
        }
    }
    for b in &shape.bools {
        m.declare(b.clone(), Domain::Bool);
        match rng.gen_range(0..10) {
            0 if !deterministic => {}
            1 => {
                let e = bool_expr(&shape, 1, rng);
                m.inits.insert(b.clone(), e);
            }
            _ => {
                m.inits.insert(b.clone(), Expr::truth(rng.gen()));
            }
        }
        match rng.gen_range(0..10) {
            0 if !deterministic => {}
            1 => {
                m.nexts.insert(b.clone(), Expr::truth(rng.gen()));
            }
            _ => {
                let e = bool_expr(&shape, 2, rng);
                m.nexts.insert(b.clone(), e);
            }
        }
    }
    m
}

pub fn atoms_of(m: &SmvModel) -> Vec<Expr> {
    let mut out = Vec::new();
    for v in &m.vars {
        match &v.domain {
            Domain::Bool => out.push(Expr::var(v.name.clone())),
            Domain::Enum(lits) => {
                for l in lits {
                    out.push(Expr::eq(Expr::var(v.name.clone()), Expr::sym(l.clone())));
                }
            }
        }
    }
    out
}

/// A random LTL formula of temporal depth at most `depth`.
pub fn random_ltl(atoms: &[Expr], depth: u32, rng: &mut ChaCha8Rng) -> LtlFormula {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.05) {
            LtlFormula::atom(Expr::truth(rng.gen()))
        } else {
            LtlFormula::atom(atoms.choose(rng).unwrap().clone())
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => LtlFormula::not(random_ltl(atoms, d, rng)),
        1 => LtlFormula::and(random_ltl(atoms, d, rng), random_ltl(atoms, d, rng)),
        2 => LtlFormula::or(random_ltl(atoms, d, rng), random_ltl(atoms, d, rng)),
        3 => LtlFormula::next(random_ltl(atoms, d, rng)),
        4 => LtlFormula::finally(random_ltl(atoms, d, rng)),
        5 => LtlFormula::globally(random_ltl(atoms, d, rng)),
        _ => LtlFormula::until(random_ltl(atoms, d, rng), random_ltl(atoms, d, rng)),
    }
}

pub fn with_specs(mut m: SmvModel, specs: Vec<LtlFormula>) -> SmvModel {
    m.ltlspecs = specs
        .into_iter()
        .map(|formula| LtlSpec {
            formula,
            pos: Pos::default(),
        })
        .collect();
    m
}

// --------------------------------------------------- explicit-state oracle

fn eval_expr(e: &Expr, env: &BTreeMap<&str, Value>) -> Value {
    match &e.kind {
        ExprKind::Const(v) => v.clone(),
        ExprKind::VarRef(n) => env[n.as_str()].clone(),
        ExprKind::Not(a) => Value::Bool(eval_expr(a, env) != Value::Bool(true)),
        ExprKind::And(a, b) => Value::Bool(
            eval_expr(a, env) == Value::Bool(true) && eval_expr(b, env) == Value::Bool(true),
        ),
        ExprKind::Or(a, b) => Value::Bool(
            eval_expr(a, env) == Value::Bool(true) || eval_expr(b, env) == Value::Bool(true),
        ),
        ExprKind::Eq(a, b) => Value::Bool(eval_expr(a, env) == eval_expr(b, env)),
        ExprKind::Case(bs) => {
            for (g, v) in bs {
                if eval_expr(g, env) == Value::Bool(true) {
                    return eval_expr(v, env);
                }
            }
            Value::Bool(false)
        }
    }
}

/// The model's state graph, built by enumerating every assignment.
pub struct Explicit {
    pub names: Vec<String>,
    pub states: Vec<Vec<Value>>,
    pub init: Vec<usize>,
    pub succ: Vec<Vec<usize>>,
}

impl Explicit {
    pub fn build(m: &SmvModel) -> Self {
        let names: Vec<String> = m.vars.iter().map(|v| v.name.clone()).collect();
        let mut states: Vec<Vec<Value>> = vec![vec![]];
        for v in &m.vars {
            let vals: Vec<Value> = match &v.domain {
                Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
                Domain::Enum(l) => l.iter().cloned().map(Value::Sym).collect(),
            };
            states = states
                .into_iter()
                .flat_map(|s| {
                    vals.iter().map(move |x| {
                        let mut t = s.clone();
                        t.push(x.clone());
                        t
                    })
                })
                .collect();
        }
        let env = |s: &Vec<Value>| -> BTreeMap<&str, Value> {
            names.iter().map(String::as_str).zip(s.iter().cloned()).collect()
        };
        let init = (0..states.len())
            .filter(|&i| {
                let e = env(&states[i]);
                names
                    .iter()
                    .enumerate()
                    .all(|(j, n)| m.inits.get(n).is_none_or(|x| eval_expr(x, &e) == states[i][j]))
            })
            .collect();
        let succ = (0..states.len())
            .map(|i| {
                let e = env(&states[i]);
                let forced: Vec<Option<Value>> =
                    names.iter().map(|n| m.nexts.get(n).map(|x| eval_expr(x, &e))).collect();
                (0..states.len())
                    .filter(|&t| {
                        forced.iter().zip(&states[t]).all(|(f, v)| f.as_ref().is_none_or(|f| f == v))
                    })
                    .collect()
            })
            .collect();
        Self {
            names,
            states,
            init,
            succ,
        }
    }

    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut stack = self.init.clone();
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                continue;
            }
            out.push(s);
            stack.extend(self.succ[s].iter().copied());
        }
        out.sort();
        out
    }

    /// Number of paths from an initial state with at most `len` states,
    /// saturating at `cap`.
    pub fn path_count(&self, len: usize, cap: u64) -> u64 {
        let mut ways = vec![0u64; self.states.len()];
        for &i in &self.init {
            ways[i] += 1;
        }
        let mut total: u64 = ways.iter().sum();
        for _ in 1..len {
            let mut next = vec![0u64; self.states.len()];
            for (s, &w) in ways.iter().enumerate() {
                if w > 0 {
                    for &t in &self.succ[s] {
                        next[t] = next[t].saturating_add(w).min(cap);
                    }
                }
            }
            ways = next;
            total = total.saturating_add(ways.iter().sum()).min(cap);
            if total >= cap {
                return cap;
            }
        }
        total
    }

    fn holds(&self, e: &Expr, s: usize) -> bool {
        let env: BTreeMap<&str, Value> = self
            .names
            .iter()
            .map(String::as_str)
            .zip(self.states[s].iter().cloned())
            .collect();
        eval_expr(e, &env) == Value::Bool(true)
    }

    /// Searches every lasso with at most `max_states` states that starts in
    /// an initial state and returns one on which `f` is false.
    pub fn find_violation(&self, f: &LtlFormula, max_states: usize) -> Option<(Vec<usize>, usize)> {
        let mut path = Vec::new();
        for &s in &self.init {
            path.push(s);
            if let Some(v) = self.dfs(f, &mut path, max_states) {
                return Some(v);
            }
            path.pop();
        }
        None
    }

    fn dfs(&self, f: &LtlFormula, path: &mut Vec<usize>, max: usize) -> Option<(Vec<usize>, usize)> {
        let last = *path.last().unwrap();
        for l in 0..path.len() {
            if self.succ[last].contains(&path[l]) {
                let labels = |e: &Expr, i: usize| self.holds(e, path[i]);
                if !lasso_eval(f, path.len(), l, &labels)[0] {
                    return Some((path.clone(), l));
                }
            }
        }
        if path.len() < max {
            for &t in &self.succ[last] {
                path.push(t);
                if let Some(v) = self.dfs(f, path, max) {
                    return Some(v);
                }
                path.pop();
            }
        }
        None
    }

    pub fn state(&self, i: usize) -> State {
        State(self.states[i].clone())
    }
}

/// Truth of `f` at every position of the lasso `0..n` with loop target
/// `l`, computed by walking each position's future.
pub fn lasso_eval(f: &LtlFormula, n: usize, l: usize, atom: &dyn Fn(&Expr, usize) -> bool) -> Vec<bool> {
    let succ = |i: usize| if i + 1 < n { i + 1 } else { l };
    // Positions visited from i, in order, without repetition.
    let walk = |i: usize| -> Vec<usize> {
        let mut out = vec![i];
        let mut j = i;
        for _ in 1..n {
            j = succ(j);
            if out.contains(&j) {
                break;
            }
            out.push(j);
        }
        out
    };
    match f {
        LtlFormula::Atom(e) => (0..n).map(|i| atom(e, i)).collect(),
        LtlFormula::Not(a) => lasso_eval(a, n, l, atom).into_iter().map(|x| !x).collect(),
        LtlFormula::And(a, b) => {
            let (x, y) = (lasso_eval(a, n, l, atom), lasso_eval(b, n, l, atom));
            x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
        }
        LtlFormula::Or(a, b) => {
            let (x, y) = (lasso_eval(a, n, l, atom), lasso_eval(b, n, l, atom));
            x.iter().zip(&y).map(|(p, q)| *p || *q).collect()
        }
        LtlFormula::Next(a) => {
            let x = lasso_eval(a, n, l, atom);
            (0..n).map(|i| x[succ(i)]).collect()
        }
        LtlFormula::Finally(a) => {
            let x = lasso_eval(a, n, l, atom);
            (0..n).map(|i| walk(i).iter().any(|&j| x[j])).collect()
        }
        LtlFormula::Globally(a) => {
            let x = lasso_eval(a, n, l, atom);
            (0..n).map(|i| walk(i).iter().all(|&j| x[j])).collect()
        }
        LtlFormula::Until(a, b) => {
            let (x, y) = (lasso_eval(a, n, l, atom), lasso_eval(b, n, l, atom));
            (0..n)
                .map(|i| {
                    for &j in &walk(i) {
                        if y[j] {
                            return true;
                        }
                        if !x[j] {
                            return false;
                        }
                    }
                    false
                })
                .collect()
        }
    }
}

/// `f` on a trace returned by the checker, evaluated by [`lasso_eval`].
pub fn oracle_eval_trace(f: &LtlFormula, t: &Trace) -> bool {
    let l = t.loop_back.expect("lasso trace");
    let env = |e: &Expr, i: usize| {
        let env: BTreeMap<&str, Value> = t
            .var_names
            .iter()
            .map(String::as_str)
            .zip(t.states[i].0.iter().cloned())
            .collect();
        eval_expr(e, &env) == Value::Bool(true)
    };
    lasso_eval(f, t.states.len(), l, &env)[0]
}

// ---------------------------------------------------------------- plans

fn lits(
    rng: &mut ChaCha8Rng,
    fluents: &[String],
    lo: usize,
    hi: usize,
) -> BTreeMap<String, bool> {
    let k = rng.gen_range(lo..=hi.min(fluents.len()));
    fluents
        .choose_multiple(rng, k)
        .map(|f| (f.clone(), rng.gen()))
        .collect()
}

fn applicable(a: &ActionSpec, s: &BTreeMap<String, bool>) -> bool {
    a.preconditions.iter().all(|(f, v)| s[f] == *v)
}

/// Independent step-by-step execution: `true` when every action is
/// applicable in turn and the goal holds at the end.
pub fn oracle_plan_valid(p: &PlanProblem) -> bool {
    let mut s = p.init.clone();
    for name in &p.plan {
        let a = &p.actions_catalog[name];
        if !applicable(a, &s) {
            return false;
        }
        for (f, v) in &a.effects {
            s.insert(f.clone(), *v);
        }
    }
    p.goal.iter().all(|(f, v)| s[f] == *v)
}

/// A random problem that is valid or invalid by construction, as asked.
pub fn random_problem(rng: &mut ChaCha8Rng, id: &str, want_valid: bool) -> PlanProblem {
    let nf = rng.gen_range(1..=10);
    let na = rng.gen_range(1..=6);
    let fluents: Vec<String> = (0..nf).map(|i| format!("f{i}")).collect();
    let init: BTreeMap<String, bool> = fluents.iter().map(|f| (f.clone(), rng.gen())).collect();
    let actions: BTreeMap<String, ActionSpec> = (0..na)
        .map(|i| {
            let spec = ActionSpec {
                preconditions: lits(rng, &fluents, 0, 3),
                effects: lits(rng, &fluents, 1, 3),
            };
            (format!("act{i}"), spec)
        })
        .collect();
    let names: Vec<String> = actions.keys().cloned().collect();
    let len = rng.gen_range(0..=6);
    let mut plan = Vec::new();
    let mut state = init.clone();
    let mut broken = false;
    // Invalid problems break a precondition half of the time when they can.
    let break_at = (!want_valid && rng.gen_bool(0.5)).then(|| rng.gen_range(0..=len));
    for step in 0..len {
        let ok: Vec<&String> = names.iter().filter(|n| applicable(&actions[*n], &state)).collect();
        let bad: Vec<&String> = names.iter().filter(|n| !applicable(&actions[*n], &state)).collect();
        let pick = if break_at == Some(step) && !bad.is_empty() && !broken {
            broken = true;
            bad.choose(rng).copied()
        } else if broken {
            names.iter().collect::<Vec<_>>().choose(rng).copied()
        } else {
            ok.choose(rng).copied()
        };
        let Some(name) = pick else { break };
        plan.push(name.clone());
        for (f, v) in &actions[name].effects {
            state.insert(f.clone(), *v);
        }
    }
    let mut goal = lits(rng, &fluents, 1, 3);
    for (f, v) in goal.iter_mut() {
        *v = state[f];
    }
    if !want_valid && !broken {
        let f = goal.keys().next().cloned().unwrap();
        let v = goal[&f];
        goal.insert(f, !v);
    }
    let p = PlanProblem {
        problem_id: id.to_string(),
        fluents,
        init,
        actions_catalog: actions,
        plan,
        goal,
        label: Some(if want_valid { Label::Valid } else { Label::Invalid }),
        nl: None,
    };
    debug_assert_eq!(oracle_plan_valid(&p), want_valid);
    p
}

// ------------------------------------------------------------------ CNF

pub fn random_cnf(rng: &mut ChaCha8Rng, max_vars: u32) -> (u32, Vec<Vec<i32>>) {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(0..=(5 * n as usize));
    let clauses = (0..m)
        .map(|_| {
            let w = rng.gen_range(1..=3.min(n as usize));
            (0..w)
                .map(|_| {
                    let v = rng.gen_range(1..=n) as i32;
                    if rng.gen() {
                        v
                    } else {
                        -v
                    }
                })
                .collect()
        })
        .collect();
    (n, clauses)
}

pub fn brute_force_sat(n: u32, clauses: &[Vec<i32>]) -> bool {
    (0u32..1 << n).any(|bits| {
        clauses.iter().all(|c| {
            c.iter().any(|&lit| {
                let v = bits >> (lit.unsigned_abs() - 1) & 1 == 1;
                v == (lit > 0)
            })
        })
    })
}

pub fn model_satisfies(model: &[bool], clauses: &[Vec<i32>]) -> bool {
    clauses.iter().all(|c| {
        c.iter().any(|&lit| {
            let v = model.get(lit.unsigned_abs() as usize - 1).copied().unwrap_or(false);
            v == (lit > 0)
        })
    })
}
