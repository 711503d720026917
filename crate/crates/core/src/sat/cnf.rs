use std::collections::BTreeMap;

/// Anything that accepts fresh variables and clauses over signed literals.
pub trait ClauseSink {
    /// Allocates a fresh variable and returns its (positive) index.
    fn new_var(&mut self) -> i32;
    fn add_clause(&mut self, lits: &[i32]);
}

/// A clause database with DIMACS-style literals: variable `v` is `v`,
/// its negation `-v`, variables numbered from 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    pub var_count: u32,
    pub clauses: Vec<Vec<i32>>,
    pub name_map: BTreeMap<String, u32>,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn named_var(&mut self, name: impl Into<String>) -> i32 {
        let v = self.new_var();
        self.name_map.insert(name.into(), v as u32);
        v
    }

    /// True when `model` (indexed by variable - 1) satisfies every clause.
    pub fn verify(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| clause_satisfied(c, model))
    }
}

pub(crate) fn lit_value(lit: i32, model: &[bool]) -> bool {
    let v = model.get(lit.unsigned_abs() as usize - 1).copied().unwrap_or(false);
    v == (lit > 0)
}

pub(crate) fn clause_satisfied(clause: &[i32], model: &[bool]) -> bool {
    clause.iter().any(|&l| lit_value(l, model))
}

impl ClauseSink for CnfFormula {
    fn new_var(&mut self) -> i32 {
        self.var_count += 1;
        self.var_count as i32
    }

    fn add_clause(&mut self, lits: &[i32]) {
        for &l in lits {
            assert!(l != 0, "literal 0 is not allowed");
            self.var_count = self.var_count.max(l.unsigned_abs());
        }
        self.clauses.push(lits.to_vec());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// A total assignment; entry `v - 1` is the value of variable `v`.
    Sat(Vec<bool>),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }

    /// Value of a literal in the model; `None` when unsat.
    pub fn value(&self, lit: i32) -> Option<bool> {
        self.model().map(|m| lit_value(lit, m))
    }
}
