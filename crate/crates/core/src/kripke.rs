//! Symbolic Kripke structures compiled from SMV models, plus the
//! explicit-state operations used to cross-check them.
//!
//! Each boolean variable takes one bit. An enum with `n` literals takes
//! `ceil(log2 n)` bits, little-endian, with literal `i` (declaration
//! order) encoded as the number `i`. Codes `>= n` are excluded by a domain
//! constraint conjoined into both the initial and transition predicates.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::sat::{ClauseSink, SatResult, Solver, TseitinEncoder};
use crate::smv::{check_semantics, validate, Diagnostic, Domain, Expr, ExprKind, SmvModel, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("compile error: {0}")]
    Compile(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("reachable state count exceeds cap {cap}")]
    CapExceeded { cap: usize },
    #[error("nondeterminism: {0}")]
    Nondeterminism(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarLayout {
    pub name: String,
    pub domain: Domain,
    /// Index of the least significant bit within a state's bit vector.
    pub offset: usize,
    pub width: usize,
}

/// Full valuation of the state variables, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Vec<Value>);

/// A finite path, optionally closed into a lasso by `loop_back`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub var_names: Vec<String>,
    pub states: Vec<State>,
    pub loop_back: Option<usize>,
}

impl Trace {
    /// Successor position on the lasso; `None` past the end of an open path.
    pub fn succ(&self, i: usize) -> Option<usize> {
        if i + 1 < self.states.len() {
            Some(i + 1)
        } else {
            self.loop_back
        }
    }

    pub fn to_json(&self) -> Json {
        let states: Vec<Json> = self
            .states
            .iter()
            .map(|s| {
                let mut obj = Map::new();
                for (name, v) in self.var_names.iter().zip(&s.0) {
                    let jv = match v {
                        Value::Bool(b) => Json::Bool(*b),
                        Value::Sym(l) => Json::String(l.clone()),
                    };
                    obj.insert(name.clone(), jv);
                }
                Json::Object(obj)
            })
            .collect();
        let mut obj = Map::new();
        obj.insert("states".into(), Json::Array(states));
        obj.insert(
            "loop_back".into(),
            self.loop_back.map_or(Json::Null, |l| Json::from(l as u64)),
        );
        Json::Object(obj)
    }

    /// Reads the JSON produced by [`Trace::to_json`].
    pub fn from_json(k: &KripkeStructure, doc: &Json) -> Result<Trace, KripkeError> {
        let bad = |m: &str| KripkeError::InvalidState(m.to_string());
        let states = doc
            .get("states")
            .and_then(Json::as_array)
            .ok_or_else(|| bad("trace needs a `states` array"))?;
        let mut out = Vec::with_capacity(states.len());
        for s in states {
            let mut vals = Vec::with_capacity(k.state_vars.len());
            for v in &k.state_vars {
                let val = match (s.get(&v.name), &v.domain) {
                    (Some(Json::Bool(b)), Domain::Bool) => Value::Bool(*b),
                    (Some(Json::String(l)), Domain::Enum(_)) => Value::Sym(l.clone()),
                    _ => return Err(bad(&format!("missing or ill-typed value for {}", v.name))),
                };
                vals.push(val);
            }
            let st = State(vals);
            k.check_state(&st)?;
            out.push(st);
        }
        let loop_back = match doc.get("loop_back") {
            None | Some(Json::Null) => None,
            Some(v) => Some(v.as_u64().ok_or_else(|| bad("loop_back must be an index"))? as usize),
        };
        if loop_back.is_some_and(|l| l >= out.len()) {
            return Err(bad("loop_back out of range"));
        }
        Ok(Trace {
            var_names: k.var_names(),
            states: out,
            loop_back,
        })
    }
}

#[derive(Debug, Clone)]
pub struct KripkeStructure {
    pub state_vars: Vec<VarLayout>,
    /// Inputs `0..n` are current-state bits, `n..2n` next-state bits.
    pub circuit: Circuit,
    pub init_pred: Gate,
    pub trans_pred: Gate,
    /// `p` for each boolean variable and `v=lit` for each enum literal.
    pub atom_table: BTreeMap<String, Gate>,
    pub ap_names: Vec<String>,
    pub warnings: Vec<Diagnostic>,
    model: SmvModel,
    index: HashMap<String, usize>,
    num_bits: usize,
}

/// Symbolic value of an expression: a boolean gate, or for enum-valued
/// expressions one indicator gate per literal that the value may take.
enum Sym {
    B(Gate),
    E(BTreeMap<String, Gate>),
}

fn bits_needed(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl KripkeStructure {
    /// Compiles a model. Fails if validation or `check_semantics` reports
    /// an error; warnings are kept in `warnings`.
    pub fn compile(model: &SmvModel) -> Result<Self, KripkeError> {
        validate(model).map_err(|e| KripkeError::Compile(e.to_string()))?;
        let diags = check_semantics(model);
        if let Some(err) = diags.iter().find(|d| d.is_error()) {
            return Err(KripkeError::Compile(err.to_string()));
        }
        let mut state_vars = Vec::new();
        let mut offset = 0;
        for v in &model.vars {
            let width = match &v.domain {
                Domain::Bool => 1,
                Domain::Enum(lits) => bits_needed(lits.len()),
            };
            state_vars.push(VarLayout {
                name: v.name.clone(),
                domain: v.domain.clone(),
                offset,
                width,
            });
            offset += width;
        }
        let num_bits = offset;
        let mut circuit = Circuit::new();
        let mut cur = Vec::with_capacity(num_bits);
        for l in &state_vars {
            for b in 0..l.width {
                cur.push(circuit.input(format!("{}[{b}]", l.name)));
            }
        }
        let mut nxt = Vec::with_capacity(num_bits);
        for l in &state_vars {
            for b in 0..l.width {
                nxt.push(circuit.input(format!("{}[{b}]'", l.name)));
            }
        }
        let index = state_vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        let mut k = KripkeStructure {
            state_vars,
            circuit: Circuit::new(),
            init_pred: Circuit::TRUE,
            trans_pred: Circuit::TRUE,
            atom_table: BTreeMap::new(),
            ap_names: Vec::new(),
            warnings: diags,
            model: model.clone(),
            index,
            num_bits,
        };

        let dom_cur = k.domain_constraint(&mut circuit, &cur);
        let dom_nxt = k.domain_constraint(&mut circuit, &nxt);

        let mut init_parts = vec![dom_cur];
        let mut trans_parts = vec![dom_cur, dom_nxt];
        for (i, layout) in k.state_vars.iter().enumerate() {
            if let Some(e) = model.inits.get(&layout.name) {
                let value = k.compile_expr(&mut circuit, e, &cur);
                init_parts.push(k.assign(&mut circuit, i, value, &cur));
            }
            if let Some(e) = model.nexts.get(&layout.name) {
                let value = k.compile_expr(&mut circuit, e, &cur);
                trans_parts.push(k.assign(&mut circuit, i, value, &nxt));
            }
        }
        k.init_pred = circuit.and_all(init_parts);
        k.trans_pred = circuit.and_all(trans_parts);

        for (i, layout) in k.state_vars.iter().enumerate() {
            match &layout.domain {
                Domain::Bool => {
                    k.atom_table.insert(layout.name.clone(), cur[layout.offset]);
                }
                Domain::Enum(lits) => {
                    for code in 0..lits.len() {
                        let g = k.code_eq(&mut circuit, i, code, &cur);
                        k.atom_table.insert(format!("{}={}", layout.name, lits[code]), g);
                    }
                }
            }
        }
        k.ap_names = k.atom_table.keys().cloned().collect();
        k.circuit = circuit;
        Ok(k)
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn model(&self) -> &SmvModel {
        &self.model
    }

    pub fn var_names(&self) -> Vec<String> {
        self.state_vars.iter().map(|v| v.name.clone()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Gate over `bits` that is true iff variable `var` holds code `code`.
    fn code_eq(&self, c: &mut Circuit, var: usize, code: usize, bits: &[Gate]) -> Gate {
        let l = &self.state_vars[var];
        let lits: Vec<Gate> = (0..l.width)
            .map(|b| {
                let g = bits[l.offset + b];
                if code >> b & 1 == 1 {
                    g
                } else {
                    c.not(g)
                }
            })
            .collect();
        c.and_all(lits)
    }

    /// Conjunction over enum variables of "code < domain size".
    pub fn domain_constraint(&self, c: &mut Circuit, bits: &[Gate]) -> Gate {
        let mut parts = Vec::new();
        for (i, l) in self.state_vars.iter().enumerate() {
            let n = l.domain.size();
            if matches!(l.domain, Domain::Enum(_)) && n < 1 << l.width {
                let valid: Vec<Gate> = (0..n).map(|code| self.code_eq(c, i, code, bits)).collect();
                parts.push(c.or_all(valid));
            }
        }
        c.and_all(parts)
    }

    /// Constraint that variable `var`, read from `bits`, equals `value`.
    fn assign(&self, c: &mut Circuit, var: usize, value: Sym, bits: &[Gate]) -> Gate {
        let l = &self.state_vars[var];
        match (value, &l.domain) {
            (Sym::B(g), Domain::Bool) => c.iff(bits[l.offset], g),
            (Sym::E(ind), Domain::Enum(lits)) => {
                let mut opts = Vec::new();
                for (lit, g) in ind {
                    if let Some(code) = lits.iter().position(|x| *x == lit) {
                        let eq = self.code_eq(c, var, code, bits);
                        opts.push(c.and(g, eq));
                    }
                }
                c.or_all(opts)
            }
            _ => Circuit::FALSE,
        }
    }

    fn compile_expr(&self, c: &mut Circuit, e: &Expr, bits: &[Gate]) -> Sym {
        match &e.kind {
            ExprKind::Const(Value::Bool(b)) => Sym::B(c.constant(*b)),
            ExprKind::Const(Value::Sym(l)) => Sym::E(BTreeMap::from([(l.clone(), Circuit::TRUE)])),
            ExprKind::VarRef(name) => {
                let Some(&i) = self.index.get(name) else {
                    return Sym::B(Circuit::FALSE);
                };
                let l = &self.state_vars[i];
                match &l.domain {
                    Domain::Bool => Sym::B(bits[l.offset]),
                    Domain::Enum(lits) => Sym::E(
                        lits.iter()
                            .enumerate()
                            .map(|(code, lit)| (lit.clone(), self.code_eq(c, i, code, bits)))
                            .collect(),
                    ),
                }
            }
            ExprKind::Not(a) => {
                let g = self.compile_bool(c, a, bits);
                Sym::B(c.not(g))
            }
            ExprKind::And(a, b) => {
                let (x, y) = (self.compile_bool(c, a, bits), self.compile_bool(c, b, bits));
                Sym::B(c.and(x, y))
            }
            ExprKind::Or(a, b) => {
                let (x, y) = (self.compile_bool(c, a, bits), self.compile_bool(c, b, bits));
                Sym::B(c.or(x, y))
            }
            ExprKind::Eq(a, b) => {
                let x = self.compile_expr(c, a, bits);
                let y = self.compile_expr(c, b, bits);
                Sym::B(match (x, y) {
                    (Sym::B(x), Sym::B(y)) => c.iff(x, y),
                    (Sym::E(x), Sym::E(y)) => {
                        let common: Vec<Gate> = x
                            .iter()
                            .filter_map(|(lit, &gx)| y.get(lit).map(|&gy| (gx, gy)))
                            .map(|(gx, gy)| c.and(gx, gy))
                            .collect();
                        c.or_all(common)
                    }
                    _ => Circuit::FALSE,
                })
            }
            ExprKind::Case(branches) => {
                let compiled: Vec<(Gate, Sym)> = branches
                    .iter()
                    .map(|(g, v)| (self.compile_bool(c, g, bits), self.compile_expr(c, v, bits)))
                    .collect();
                let is_enum = compiled.iter().any(|(_, v)| matches!(v, Sym::E(_)));
                let mut acc = if is_enum {
                    Sym::E(BTreeMap::new())
                } else {
                    Sym::B(Circuit::FALSE)
                };
                for (g, v) in compiled.into_iter().rev() {
                    acc = match (v, acc) {
                        (Sym::B(v), Sym::B(rest)) => Sym::B(c.ite(g, v, rest)),
                        (Sym::E(v), Sym::E(rest)) => {
                            let mut keys: Vec<&String> = v.keys().chain(rest.keys()).collect();
                            keys.sort();
                            keys.dedup();
                            let merged = keys
                                .into_iter()
                                .map(|k| {
                                    let t = v.get(k).copied().unwrap_or(Circuit::FALSE);
                                    let e = rest.get(k).copied().unwrap_or(Circuit::FALSE);
                                    (k.clone(), c.ite(g, t, e))
                                })
                                .collect();
                            Sym::E(merged)
                        }
                        (_, rest) => rest,
                    };
                }
                acc
            }
        }
    }

    fn compile_bool(&self, c: &mut Circuit, e: &Expr, bits: &[Gate]) -> Gate {
        match self.compile_expr(c, e, bits) {
            Sym::B(g) => g,
            Sym::E(_) => Circuit::FALSE,
        }
    }

    /// Builds a state predicate for a boolean expression inside `c`, reading
    /// the state from `bits` (laid out like the current-state inputs).
    pub fn predicate(&self, c: &mut Circuit, e: &Expr, bits: &[Gate]) -> Gate {
        self.compile_bool(c, e, bits)
    }

    /// Copies the initial predicate into `c` over the given state bits.
    pub fn import_init(&self, c: &mut Circuit, bits: &[Gate]) -> Gate {
        c.import(&self.circuit, self.init_pred, &|ord| bits[ord])
    }

    /// Copies the transition predicate into `c` over `cur` and `nxt` bits.
    pub fn import_trans(&self, c: &mut Circuit, cur: &[Gate], nxt: &[Gate]) -> Gate {
        let n = self.num_bits;
        c.import(&self.circuit, self.trans_pred, &|ord| {
            if ord < n {
                cur[ord]
            } else {
                nxt[ord - n]
            }
        })
    }

    pub fn check_state(&self, s: &State) -> Result<(), KripkeError> {
        if s.0.len() != self.state_vars.len() {
            return Err(KripkeError::InvalidState(format!(
                "expected {} values, got {}",
                self.state_vars.len(),
                s.0.len()
            )));
        }
        for (l, v) in self.state_vars.iter().zip(&s.0) {
            let ok = match (&l.domain, v) {
                (Domain::Bool, Value::Bool(_)) => true,
                (Domain::Enum(lits), Value::Sym(x)) => lits.contains(x),
                _ => false,
            };
            if !ok {
                return Err(KripkeError::InvalidState(format!(
                    "value {v} is outside the domain of {}",
                    l.name
                )));
            }
        }
        Ok(())
    }

    pub fn encode_state(&self, s: &State) -> Result<Vec<bool>, KripkeError> {
        self.check_state(s)?;
        let mut bits = vec![false; self.num_bits];
        for (l, v) in self.state_vars.iter().zip(&s.0) {
            let code = match v {
                Value::Bool(b) => usize::from(*b),
                Value::Sym(x) => l.domain.literal_index(x).unwrap_or(0),
            };
            for b in 0..l.width {
                bits[l.offset + b] = code >> b & 1 == 1;
            }
        }
        Ok(bits)
    }

    /// Decodes a bit vector; fails on an excluded enum code.
    pub fn decode_bits(&self, bits: &[bool]) -> Result<State, KripkeError> {
        let mut vals = Vec::with_capacity(self.state_vars.len());
        for l in &self.state_vars {
            let code = (0..l.width).fold(0usize, |acc, b| acc | usize::from(bits[l.offset + b]) << b);
            let v = match &l.domain {
                Domain::Bool => Value::Bool(code == 1),
                Domain::Enum(lits) => Value::Sym(lits.get(code).cloned().ok_or_else(|| {
                    KripkeError::InvalidState(format!("code {code} is excluded for {}", l.name))
                })?),
            };
            vals.push(v);
        }
        Ok(State(vals))
    }

    pub fn init_holds(&self, s: &State) -> Result<bool, KripkeError> {
        let bits = self.encode_state(s)?;
        Ok(self.circuit.eval(self.init_pred, &bits))
    }

    pub fn trans_holds(&self, s: &State, t: &State) -> Result<bool, KripkeError> {
        let mut bits = self.encode_state(s)?;
        bits.extend(self.encode_state(t)?);
        Ok(self.circuit.eval(self.trans_pred, &bits))
    }

    fn env<'a>(&'a self, s: &'a State) -> impl Fn(&str) -> Value + 'a {
        move |name: &str| {
            self.index
                .get(name)
                .map_or(Value::Bool(false), |&i| s.0[i].clone())
        }
    }

    /// Evaluates a state predicate, through the atom table when the
    /// expression is a variable or a `var = literal` test.
    pub fn holds(&self, atom: &Expr, s: &State) -> bool {
        let key = match &atom.kind {
            ExprKind::VarRef(v) => Some(v.clone()),
            ExprKind::Eq(a, b) => match (&a.kind, &b.kind) {
                (ExprKind::VarRef(v), ExprKind::Const(Value::Sym(l)))
                | (ExprKind::Const(Value::Sym(l)), ExprKind::VarRef(v)) => Some(format!("{v}={l}")),
                _ => None,
            },
            _ => None,
        };
        if let Some(g) = key.and_then(|k| self.atom_table.get(&k)) {
            if let Ok(bits) = self.encode_state(s) {
                return self.circuit.eval(*g, &bits);
            }
        }
        atom.eval_bool(&self.env(s))
    }

    /// Every assignment of the state variables, in lexicographic code order.
    pub fn all_states(&self) -> Vec<State> {
        let mut out = vec![State(Vec::new())];
        for l in &self.state_vars {
            let vals = l.domain.values();
            out = out
                .into_iter()
                .flat_map(|s| {
                    vals.iter().map(move |v| {
                        let mut next = s.0.clone();
                        next.push(v.clone());
                        State(next)
                    })
                })
                .collect();
        }
        out
    }

    /// Successors computed from the assignments: assigned variables take
    /// the value of their `next` expression, unassigned ones range freely.
    pub fn successors(&self, s: &State) -> Result<Vec<State>, KripkeError> {
        self.check_state(s)?;
        let env = self.env(s);
        let mut out = vec![Vec::with_capacity(self.state_vars.len())];
        for l in &self.state_vars {
            let choices = match self.model.nexts.get(&l.name) {
                Some(e) => vec![e.eval(&env)],
                None => l.domain.values(),
            };
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<Value>| {
                    choices.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v.clone());
                        next
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(State).collect())
    }

    /// Initial states by SAT enumeration with blocking clauses. Stops with
    /// `CapExceeded` once more than `cap` states are found.
    pub fn initial_states(&self, cap: usize) -> Result<Vec<State>, KripkeError> {
        let mut solver = Solver::new();
        let mut enc = TseitinEncoder::new();
        let root = enc.encode(&self.circuit, self.init_pred, &mut solver);
        solver.add_clause(&[root]);
        let bit_lits: Vec<i32> = (0..self.num_bits)
            .map(|b| {
                let g = self.circuit.input_gate(b);
                enc.lit_of(g).unwrap_or_else(|| solver.new_var())
            })
            .collect();
        let mut out = Vec::new();
        while let SatResult::Sat(m) = solver.solve() {
            let bits: Vec<bool> = bit_lits
                .iter()
                .map(|&l| m[l.unsigned_abs() as usize - 1] == (l > 0))
                .collect();
            out.push(self.decode_bits(&bits)?);
            if out.len() > cap {
                return Err(KripkeError::CapExceeded { cap });
            }
            let block: Vec<i32> = bit_lits
                .iter()
                .zip(&bits)
                .map(|(&l, &b)| if b { -l } else { l })
                .collect();
            if block.is_empty() {
                break;
            }
            solver.add_clause(&block);
        }
        out.sort();
        Ok(out)
    }

    /// Breadth-first reachable set from all initial states, in discovery
    /// order. Fails once the set would exceed `cap`.
    pub fn enumerate_reachable(&self, cap: usize) -> Result<Vec<State>, KripkeError> {
        let init = self.initial_states(cap)?;
        let mut seen: HashSet<State> = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for s in init {
            if seen.insert(s.clone()) {
                order.push(s.clone());
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            let succ = self.successors(&s)?;
            assert!(!succ.is_empty(), "transition relation is not total at {s}");
            for t in succ {
                if seen.insert(t.clone()) {
                    if order.len() >= cap {
                        return Err(KripkeError::CapExceeded { cap });
                    }
                    order.push(t.clone());
                    queue.push_back(t);
                }
            }
        }
        Ok(order)
    }

    /// Runs a deterministic model for `steps` transitions. `loop_back` is
    /// the position of the last state's successor if it already occurs.
    pub fn run_deterministic(&self, steps: usize) -> Result<Trace, KripkeError> {
        if let Some(l) = self.state_vars.iter().find(|l| !self.model.nexts.contains_key(&l.name)) {
            return Err(KripkeError::Nondeterminism(format!(
                "variable {} has no next assignment",
                l.name
            )));
        }
        let init = match self.initial_states(1) {
            Ok(v) => v,
            Err(KripkeError::CapExceeded { .. }) => {
                return Err(KripkeError::Nondeterminism("more than one initial state".into()))
            }
            Err(e) => return Err(e),
        };
        let Some(first) = init.into_iter().next() else {
            return Err(KripkeError::Nondeterminism("no initial state".into()));
        };
        let mut states = vec![first];
        let mut next_of_last;
        loop {
            let last = states.last().expect("non-empty");
            let succ = self.successors(last)?;
            if succ.len() != 1 {
                return Err(KripkeError::Nondeterminism(format!(
                    "state {last} has {} successors",
                    succ.len()
                )));
            }
            next_of_last = succ.into_iter().next().expect("one successor");
            if states.len() > steps {
                break;
            }
            states.push(next_of_last.clone());
        }
        let loop_back = states.iter().position(|s| *s == next_of_last);
        Ok(Trace {
            var_names: self.var_names(),
            states,
            loop_back,
        })
    }

    /// Checks that `t` starts in an initial state, follows the transition
    /// relation, and that its loop edge (if any) is a transition.
    pub fn validate_trace(&self, t: &Trace) -> Result<(), String> {
        let Some(first) = t.states.first() else {
            return Err("empty trace".into());
        };
        if !self.init_holds(first).map_err(|e| e.to_string())? {
            return Err("first state is not initial".into());
        }
        for (i, w) in t.states.windows(2).enumerate() {
            if !self.trans_holds(&w[0], &w[1]).map_err(|e| e.to_string())? {
                return Err(format!("no transition from position {i} to {}", i + 1));
            }
        }
        if let Some(l) = t.loop_back {
            let last = t.states.last().expect("non-empty");
            let target = t.states.get(l).ok_or("loop_back out of range")?;
            if !self.trans_holds(last, target).map_err(|e| e.to_string())? {
                return Err(format!("no transition from the last state back to {l}"));
            }
        }
        Ok(())
    }
}
