//! SAT-based bounded model checking over lasso-shaped paths.
//!
//! For bound `k` the encoding describes a path `s_0 .. s_k` from an
//! initial state whose last state loops back to some `s_l`, selected by
//! exactly one of the loop bits `L_0 .. L_k`, and which violates the
//! property. The property is negated into NNF and evaluated per loop
//! position with the usual lasso fixpoint unrolling.
//!
//! Every counterexample is therefore a lasso; there is no loop-free case.
//! Models compiled from SMV are total, so every finite path extends to a
//! lasso at some larger bound.

use std::collections::HashMap;

use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::kripke::{KripkeError, KripkeStructure, Trace};
use crate::ltl::{to_nnf, Nnf};
use crate::sat::{ClauseSink, CnfFormula, SatResult, Solver, TseitinEncoder};
use crate::smv::{Domain, LtlFormula};

/// Cap on the reachable-set size used when no stage variable decides the
/// completeness bound.
pub const DEFAULT_REACH_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BmcError {
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error("cannot decode counterexample: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckOutcome {
    /// No counterexample up to `bound`. `complete` when `bound` reached the
    /// completeness bound; `vacuous` when the model has no initial state.
    Holds {
        bound: usize,
        complete: bool,
        vacuous: bool,
    },
    CounterexampleFound { trace: Trace, bound: usize },
    BoundExhausted { max_bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BmcOptions {
    /// Reuse one solver across bounds, passing each bound's property as an
    /// assumption. Otherwise each bound is encoded and solved afresh.
    pub incremental: bool,
    pub reach_cap: usize,
}

impl Default for BmcOptions {
    fn default() -> Self {
        Self {
            incremental: true,
            reach_cap: DEFAULT_REACH_CAP,
        }
    }
}

/// The formula `Init(s_0) & Trans(s_0, s_1) & .. & loop constraints &
/// !phi(s_0 .. s_k)` as a circuit.
#[derive(Debug, Clone)]
pub struct BmcEncoding {
    pub bound: usize,
    pub circuit: Circuit,
    pub root: Gate,
    /// State bits per step, laid out like the structure's current bits.
    pub states: Vec<Vec<Gate>>,
    pub loop_selectors: Vec<Gate>,
}

/// Values at positions `0..=k` of each NNF subformula on a lasso that
/// closes at `l`.
struct LassoUnroller<'a> {
    kripke: &'a KripkeStructure,
    states: &'a [Vec<Gate>],
    l: usize,
    memo: HashMap<&'a Nnf, Vec<Gate>>,
}

impl<'a> LassoUnroller<'a> {
    fn succ(&self, i: usize) -> usize {
        if i + 1 < self.states.len() {
            i + 1
        } else {
            self.l
        }
    }

    fn enc(&mut self, c: &mut Circuit, f: &'a Nnf) -> Vec<Gate> {
        if let Some(v) = self.memo.get(f) {
            return v.clone();
        }
        let n = self.states.len();
        let l = self.l;
        let v: Vec<Gate> = match f {
            Nnf::Lit { atom, positive } => (0..n)
                .map(|i| {
                    let g = self.kripke.predicate(c, atom, &self.states[i]);
                    if *positive {
                        g
                    } else {
                        c.not(g)
                    }
                })
                .collect(),
            Nnf::And(a, b) | Nnf::Or(a, b) => {
                let (x, y) = (self.enc(c, a), self.enc(c, b));
                let conj = matches!(f, Nnf::And(..));
                x.iter()
                    .zip(&y)
                    .map(|(&p, &q)| if conj { c.and(p, q) } else { c.or(p, q) })
                    .collect()
            }
            Nnf::Next(a) => {
                let x = self.enc(c, a);
                (0..n).map(|i| x[self.succ(i)]).collect()
            }
            Nnf::Finally(a) | Nnf::Globally(a) => {
                let x = self.enc(c, a);
                let conj = matches!(f, Nnf::Globally(_));
                let on_loop = if conj {
                    c.and_all(x[l..].iter().copied())
                } else {
                    c.or_all(x[l..].iter().copied())
                };
                let mut v = vec![on_loop; n];
                for i in (0..l).rev() {
                    v[i] = if conj { c.and(x[i], v[i + 1]) } else { c.or(x[i], v[i + 1]) };
                }
                v
            }
            Nnf::Until(a, b) => {
                let (p, q) = (self.enc(c, a), self.enc(c, b));
                until_gates(c, &p, &q, l)
            }
            Nnf::Release(a, b) => {
                let p: Vec<Gate> = self.enc(c, a).into_iter().map(|g| c.not(g)).collect();
                let q: Vec<Gate> = self.enc(c, b).into_iter().map(|g| c.not(g)).collect();
                until_gates(c, &p, &q, l).into_iter().map(|g| c.not(g)).collect()
            }
        };
        self.memo.insert(f, v.clone());
        v
    }
}

/// `p U q` at every position of a lasso closing at `l`.
///
/// From a loop position `i` the path visits `i..=k`, then `l..i`, then
/// repeats, so the until is decided within one pass of the loop:
/// either `q` occurs in `i..=k` with `p` before it (`a[i]`), or `p` holds
/// on all of `i..=k` (`s[i]`) and `q` occurs in `l..i` with `p` before it
/// (`cyc[i]`).
fn until_gates(c: &mut Circuit, p: &[Gate], q: &[Gate], l: usize) -> Vec<Gate> {
    let n = p.len();
    let mut a = vec![Circuit::FALSE; n + 1];
    let mut s = vec![Circuit::TRUE; n + 1];
    for i in (l..n).rev() {
        let step = c.and(p[i], a[i + 1]);
        a[i] = c.or(q[i], step);
        s[i] = c.and(p[i], s[i + 1]);
    }
    let mut cyc = vec![Circuit::FALSE; n + 1];
    let mut pre = Circuit::TRUE;
    for i in l..n {
        let hit = c.and(q[i], pre);
        cyc[i + 1] = c.or(cyc[i], hit);
        pre = c.and(pre, p[i]);
    }
    let mut u = vec![Circuit::FALSE; n];
    for i in l..n {
        let wrap = c.and(s[i], cyc[i]);
        u[i] = c.or(a[i], wrap);
    }
    for i in (0..l).rev() {
        let step = c.and(p[i], u[i + 1]);
        u[i] = c.or(q[i], step);
    }
    u
}

/// Adds a fresh set of state-bit inputs named after step `i`.
fn new_state(c: &mut Circuit, k: &KripkeStructure, i: usize) -> Vec<Gate> {
    let mut bits = Vec::with_capacity(k.num_bits());
    for v in &k.state_vars {
        for b in 0..v.width {
            bits.push(c.input(format!("{}[{b}]@{i}", v.name)));
        }
    }
    bits
}

/// Loop constraints and the negated property for one bound, given the
/// state bits of steps `0..=bound`. Returns the root and the selectors.
fn loop_property(
    c: &mut Circuit,
    k: &KripkeStructure,
    neg: &Nnf,
    states: &[Vec<Gate>],
) -> (Gate, Vec<Gate>) {
    let bound = states.len() - 1;
    let sel: Vec<Gate> = (0..=bound).map(|l| c.input(format!("L{l}@{bound}"))).collect();
    let mut parts = vec![c.exactly_one(&sel)];
    let mut witnesses = Vec::with_capacity(sel.len());
    for (l, &sl) in sel.iter().enumerate() {
        let back = k.import_trans(c, &states[bound], &states[l]);
        parts.push(c.implies(sl, back));
        let mut un = LassoUnroller {
            kripke: k,
            states,
            l,
            memo: HashMap::new(),
        };
        let at0 = un.enc(c, neg)[0];
        witnesses.push(c.and(sl, at0));
    }
    parts.push(c.or_all(witnesses));
    (c.and_all(parts), sel)
}

/// Builds the bounded encoding of "some lasso of `bound + 1` states
/// starting in an initial state violates `phi`".
pub fn encode_psi_k(k: &KripkeStructure, phi: &LtlFormula, bound: usize) -> BmcEncoding {
    let neg = to_nnf(phi, true);
    let mut c = Circuit::new();
    let states: Vec<Vec<Gate>> = (0..=bound).map(|i| new_state(&mut c, k, i)).collect();
    let mut parts = vec![k.import_init(&mut c, &states[0])];
    for i in 0..bound {
        parts.push(k.import_trans(&mut c, &states[i], &states[i + 1]));
    }
    let (prop, loop_selectors) = loop_property(&mut c, k, &neg, &states);
    parts.push(prop);
    let root = c.and_all(parts);
    BmcEncoding {
        bound,
        circuit: c,
        root,
        states,
        loop_selectors,
    }
}

impl BmcEncoding {
    /// Tseitin-encodes the circuit and asserts the root.
    pub fn to_cnf(&self) -> (CnfFormula, TseitinEncoder) {
        let mut cnf = CnfFormula::new();
        let mut enc = TseitinEncoder::new();
        let root = enc.encode(&self.circuit, self.root, &mut cnf);
        cnf.add_clause(&[root]);
        (cnf, enc)
    }

    /// Solves the encoding; returns the counterexample when satisfiable.
    pub fn solve(&self, k: &KripkeStructure) -> Result<Option<Trace>, BmcError> {
        let mut solver = Solver::new();
        let mut enc = TseitinEncoder::new();
        let root = enc.encode(&self.circuit, self.root, &mut solver);
        solver.add_clause(&[root]);
        match solver.solve() {
            SatResult::Unsat => Ok(None),
            SatResult::Sat(m) => {
                let value = |g: Gate| enc.lit_of(g).is_some_and(|l| lit_true(&m, l));
                extract_trace(k, &self.states, &self.loop_selectors, &value).map(Some)
            }
        }
    }
}

fn lit_true(model: &[bool], lit: i32) -> bool {
    model[lit.unsigned_abs() as usize - 1] == (lit > 0)
}

/// Decodes a satisfying assignment into a lasso trace. Gates the solver
/// never saw are read as false.
pub fn extract_trace(
    k: &KripkeStructure,
    states: &[Vec<Gate>],
    loop_selectors: &[Gate],
    value: &dyn Fn(Gate) -> bool,
) -> Result<Trace, BmcError> {
    let mut decoded = Vec::with_capacity(states.len());
    for (i, bits) in states.iter().enumerate() {
        let vals: Vec<bool> = bits.iter().map(|&g| value(g)).collect();
        let s = k
            .decode_bits(&vals)
            .map_err(|e| BmcError::Decode(format!("step {i}: {e}")))?;
        decoded.push(s);
    }
    let active: Vec<usize> = loop_selectors
        .iter()
        .enumerate()
        .filter(|(_, &g)| value(g))
        .map(|(l, _)| l)
        .collect();
    let [l] = active.as_slice() else {
        return Err(BmcError::Decode(format!(
            "expected exactly one loop selector, found {}",
            active.len()
        )));
    };
    Ok(Trace {
        var_names: k.var_names(),
        states: decoded,
        loop_back: Some(*l),
    })
}

/// Bound at which the absence of counterexamples is reported complete.
///
/// With an enum variable named `stage`, this is the stage domain size
/// plus one, provided the model is deterministic and its single run
/// closes into a lasso within that many states (so every behaviour is
/// covered). Otherwise it is the number of reachable states, or `None`
/// when that exceeds `reach_cap`.
pub fn completeness_bound(k: &KripkeStructure, reach_cap: usize) -> Option<usize> {
    if let Some(v) = k.state_vars.iter().find(|v| v.name == "stage") {
        if let Domain::Enum(lits) = &v.domain {
            let b = lits.len() + 1;
            if let Ok(t) = k.run_deterministic(lits.len()) {
                if t.loop_back.is_some() && t.states.len() <= b {
                    return Some(b);
                }
            }
        }
    }
    k.enumerate_reachable(reach_cap).ok().map(|r| r.len())
}

/// Searches bounds `0..=max_bound` for a counterexample to `phi`.
pub fn check_spec(
    k: &KripkeStructure,
    phi: &LtlFormula,
    max_bound: usize,
) -> Result<CheckOutcome, BmcError> {
    check_spec_with(k, phi, max_bound, &BmcOptions::default())
}

pub fn check_spec_with(
    k: &KripkeStructure,
    phi: &LtlFormula,
    max_bound: usize,
    opts: &BmcOptions,
) -> Result<CheckOutcome, BmcError> {
    if k.initial_states(1).is_ok_and(|s| s.is_empty()) {
        log::warn!("model has no initial state; the specification holds vacuously");
        return Ok(CheckOutcome::Holds {
            bound: 0,
            complete: true,
            vacuous: true,
        });
    }
    let complete_at = completeness_bound(k, opts.reach_cap);
    let last = match complete_at {
        Some(cb) => cb.min(max_bound),
        None => max_bound,
    };
    let mut search = if opts.incremental {
        Search::Incremental(IncrementalBmc::new(k, phi))
    } else {
        Search::Fresh
    };
    for bound in 0..=last {
        let found = match &mut search {
            Search::Incremental(inc) => inc.step(bound)?,
            Search::Fresh => encode_psi_k(k, phi, bound).solve(k)?,
        };
        if let Some(trace) = found {
            return Ok(CheckOutcome::CounterexampleFound { trace, bound });
        }
        if complete_at.is_some_and(|cb| bound >= cb) {
            return Ok(CheckOutcome::Holds {
                bound,
                complete: true,
                vacuous: false,
            });
        }
    }
    Ok(CheckOutcome::BoundExhausted { max_bound })
}

enum Search<'a> {
    Incremental(IncrementalBmc<'a>),
    Fresh,
}

/// One solver across bounds. `Init` and the transitions are permanent
/// clauses; each bound's loop and property constraints are guarded by an
/// assumption literal.
struct IncrementalBmc<'a> {
    k: &'a KripkeStructure,
    neg: Nnf,
    circuit: Circuit,
    states: Vec<Vec<Gate>>,
    solver: Solver,
    enc: TseitinEncoder,
}

impl<'a> IncrementalBmc<'a> {
    fn new(k: &'a KripkeStructure, phi: &LtlFormula) -> Self {
        Self {
            k,
            neg: to_nnf(phi, true),
            circuit: Circuit::new(),
            states: Vec::new(),
            solver: Solver::new(),
            enc: TseitinEncoder::new(),
        }
    }

    fn step(&mut self, bound: usize) -> Result<Option<Trace>, BmcError> {
        while self.states.len() <= bound {
            let i = self.states.len();
            let s = new_state(&mut self.circuit, self.k, i);
            let fact = if i == 0 {
                self.k.import_init(&mut self.circuit, &s)
            } else {
                self.k.import_trans(&mut self.circuit, &self.states[i - 1], &s)
            };
            self.states.push(s);
            let lit = self.enc.encode(&self.circuit, fact, &mut self.solver);
            self.solver.add_clause(&[lit]);
        }
        let (prop, sel) = loop_property(
            &mut self.circuit,
            self.k,
            &self.neg,
            &self.states[..=bound],
        );
        let lit = self.enc.encode(&self.circuit, prop, &mut self.solver);
        match self.solver.solve_with_assumptions(&[lit]) {
            SatResult::Unsat => Ok(None),
            SatResult::Sat(m) => {
                let enc = &self.enc;
                let value = |g: Gate| enc.lit_of(g).is_some_and(|l| lit_true(&m, l));
                extract_trace(self.k, &self.states[..=bound], &sel, &value).map(Some)
            }
        }
    }
}
