//! CNF construction and a CDCL SAT solver.

mod cnf;
mod dimacs;
mod solver;
mod tseitin;

pub use cnf::{ClauseSink, CnfFormula, SatResult};
pub use dimacs::{parse_dimacs, to_dimacs, DimacsError};
pub use solver::{solve, Solver};
pub use tseitin::{tseitin_encode, TseitinEncoder};
