//! Front end for the SMV modelling subset and LTL specifications.
//!
//! Supported: `MODULE main`, `VAR` with `boolean` and symbolic enum
//! domains, `ASSIGN` with `init(..)`/`next(..)`, `case .. esac`, and
//! `LTLSPEC`. Comments run from `--` to end of line.

mod ast;
mod lexer;
mod parser;
mod printer;
mod semantics;

use thiserror::Error;

pub use ast::{Domain, Expr, ExprKind, LtlFormula, LtlSpec, Pos, SmvModel, Value, VarDecl};
pub use lexer::{is_identifier, RESERVED_WORDS};
pub use parser::{parse_ltl, parse_ltlspecs, parse_model};
pub use printer::{format_expr, format_ltl, pretty_print};
pub use semantics::{check_semantics, resolve_ltl, validate, Diagnostic, Severity};

/// A lexical, syntactic or semantic error at a source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            pos,
            message: message.into(),
        }
    }
}
