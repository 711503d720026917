//! Conflict-driven clause learning with two watched literals.
//!
//! Branching takes the lowest-numbered unassigned variable and tries
//! `false` first. There are no restarts and no randomness, so a given
//! sequence of calls always produces the same answers.

use super::cnf::{clause_satisfied, ClauseSink, CnfFormula, SatResult};

/// Internal literal: `2 * var + sign`, with `var` 0-based and sign 1 for
/// negative literals.
type Lit = u32;

fn to_lit(ext: i32) -> Lit {
    let v = ext.unsigned_abs() - 1;
    2 * v + u32::from(ext < 0)
}

fn to_ext(l: Lit) -> i32 {
    let v = (l >> 1) as i32 + 1;
    if l & 1 == 1 {
        -v
    } else {
        v
    }
}

fn var(l: Lit) -> usize {
    (l >> 1) as usize
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

#[derive(Debug, Default, Clone)]
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    /// Value per variable: `None` unassigned.
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    /// Lowest variable that may be unassigned.
    search_start: usize,
    /// Clauses as given, for model verification.
    originals: Vec<Vec<i32>>,
    /// False once a conflict at level 0 has been derived.
    ok: bool,
    seen: Vec<bool>,
}

impl ClauseSink for Solver {
    fn new_var(&mut self) -> i32 {
        self.assigns.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.assigns.len() as i32
    }

    /// Adds a clause between solve calls. Unknown variables are created.
    fn add_clause(&mut self, lits: &[i32]) {
        self.add_clause_ext(lits);
    }
}

impl Solver {
    pub fn new() -> Self {
        Self {
            ok: true,
            ..Self::default()
        }
    }

    pub fn from_cnf(cnf: &CnfFormula) -> Self {
        let mut s = Self::new();
        s.ensure_vars(cnf.var_count as usize);
        for c in &cnf.clauses {
            s.add_clause_ext(c);
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    fn ensure_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            self.new_var();
        }
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assigns[var(l)].map(|b| b != (l & 1 == 1))
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = var(l);
        self.assigns[v] = Some(l & 1 == 0);
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn add_clause_ext(&mut self, lits: &[i32]) {
        assert!(lits.iter().all(|&l| l != 0), "literal 0 is not allowed");
        self.originals.push(lits.to_vec());
        let max = lits.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
        self.ensure_vars(max);
        self.backtrack(0);
        if !self.ok {
            return;
        }
        let mut c: Vec<Lit> = lits.iter().map(|&l| to_lit(l)).collect();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == neg(w[1])) {
            return;
        }
        if c.iter().any(|&l| self.value(l) == Some(true)) {
            return;
        }
        c.retain(|&l| self.value(l).is_none());
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let ci = self.clauses.len();
        self.watches[c[0] as usize].push(ci);
        self.watches[c[1] as usize].push(ci);
        self.clauses.push(c);
        ci
    }

    /// Unit propagation; returns a conflicting clause index.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = neg(p);
            let ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                if self.assigns[var(first)].map(|b| b != (first & 1 == 1)) == Some(true) {
                    kept.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let val = self.assigns[var(l)].map(|b| b != (l & 1 == 1));
                    if val != Some(false) {
                        c.swap(1, k);
                        let w = c[1] as usize;
                        self.watches[w].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(ci);
                if self.value(first) == Some(false) {
                    conflict = Some(ci);
                    kept.extend_from_slice(&ws[i..]);
                    break;
                }
                self.enqueue(first, Some(ci));
            }
            self.watches[false_lit as usize] = kept;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let mut ci = confl;
        let cur = self.decision_level();
        loop {
            for k in 0..self.clauses[ci].len() {
                let q = self.clauses[ci][k];
                if Some(var(q)) == p.map(var) {
                    continue;
                }
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] >= cur {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[var(lit)] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            ci = self.reason[var(lit)].expect("implied literal has a reason");
        }
        learnt[0] = neg(p.expect("conflict has a UIP"));
        for &l in &learnt[1..] {
            self.seen[var(l)] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[var(learnt[i])] > self.level[var(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[var(learnt[1])];
        }
        (learnt, bt)
    }

    fn backtrack(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for &l in &self.trail[lim..] {
            let v = var(l);
            self.assigns[v] = None;
            self.reason[v] = None;
            self.search_start = self.search_start.min(v);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while self.search_start < self.assigns.len() {
            if self.assigns[self.search_start].is_none() {
                return Some(2 * self.search_start as u32 + 1);
            }
            self.search_start += 1;
        }
        None
    }

    pub fn solve(&mut self) -> SatResult {
        self.solve_with_assumptions(&[])
    }

    /// Solves under temporary unit assumptions. Clauses learnt during the
    /// call stay valid for later calls.
    pub fn solve_with_assumptions(&mut self, assumptions: &[i32]) -> SatResult {
        if !self.ok {
            return SatResult::Unsat;
        }
        let max = assumptions.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
        self.ensure_vars(max);
        let assumptions: Vec<Lit> = assumptions.iter().map(|&l| to_lit(l)).collect();
        self.backtrack(0);
        let result = self.search(&assumptions);
        self.backtrack(0);
        result
    }

    fn search(&mut self, assumptions: &[Lit]) -> SatResult {
        loop {
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatResult::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.backtrack(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                continue;
            }
            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                match self.value(a) {
                    Some(true) => self.trail_lim.push(self.trail.len()),
                    Some(false) => return SatResult::Unsat,
                    None => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let decision = match next {
                Some(a) => a,
                None => match self.pick_branch() {
                    Some(l) => l,
                    None => return SatResult::Sat(self.checked_model()),
                },
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(decision, None);
        }
    }

    fn checked_model(&self) -> Vec<bool> {
        let model: Vec<bool> = self.assigns.iter().map(|a| a.unwrap_or(false)).collect();
        for c in &self.originals {
            assert!(
                clause_satisfied(c, &model),
                "solver model violates clause {c:?}"
            );
        }
        model
    }

    /// Current trail as external literals (level-0 facts after a solve).
    pub fn fixed_literals(&self) -> Vec<i32> {
        self.trail.iter().map(|&l| to_ext(l)).collect()
    }
}

/// Decides a CNF formula. Sat models are verified against every clause.
pub fn solve(cnf: &CnfFormula) -> SatResult {
    let mut s = Solver::from_cnf(cnf);
    s.ensure_vars(cnf.var_count as usize);
    let r = s.solve();
    if let SatResult::Sat(m) = &r {
        assert!(cnf.verify(m), "model failed verification");
    }
    r
}
