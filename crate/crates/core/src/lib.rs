//! Plan verification through SAT-based bounded model checking.

pub mod bmc;
pub mod circuit;
pub mod eval;
pub mod kripke;
pub mod llm;
pub mod ltl;
pub mod plan;
pub mod sat;
pub mod smv;
