use std::fmt::{self, Write as _};

use super::ast::{Domain, Expr, ExprKind, LtlFormula, SmvModel};

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_EQ: u8 = 3;
const PREC_UNARY: u8 = 4;
const PREC_ATOM: u8 = 5;

fn expr_prec(e: &Expr) -> u8 {
    match e.kind {
        ExprKind::Or(..) => PREC_OR,
        ExprKind::And(..) => PREC_AND,
        ExprKind::Eq(..) => PREC_EQ,
        ExprKind::Not(..) => PREC_UNARY,
        ExprKind::Const(_) | ExprKind::VarRef(_) | ExprKind::Case(_) => PREC_ATOM,
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let parens = expr_prec(e) < min_prec;
    if parens {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Const(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::VarRef(name) => out.push_str(name),
        ExprKind::Not(a) => {
            out.push('!');
            write_expr(out, a, PREC_UNARY);
        }
        ExprKind::And(a, b) => {
            write_expr(out, a, PREC_AND);
            out.push_str(" & ");
            write_expr(out, b, PREC_AND + 1);
        }
        ExprKind::Or(a, b) => {
            write_expr(out, a, PREC_OR);
            out.push_str(" | ");
            write_expr(out, b, PREC_OR + 1);
        }
        ExprKind::Eq(a, b) => {
            write_expr(out, a, PREC_UNARY);
            out.push_str(" = ");
            write_expr(out, b, PREC_UNARY);
        }
        ExprKind::Case(branches) => {
            out.push_str("case ");
            for (g, v) in branches {
                write_expr(out, g, PREC_OR);
                out.push_str(" : ");
                write_expr(out, v, PREC_OR);
                out.push_str("; ");
            }
            out.push_str("esac");
        }
    }
    if parens {
        out.push(')');
    }
}

/// Renders an expression on one line with minimal parentheses.
pub fn format_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, PREC_OR);
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_expr(self))
    }
}

const LTL_OR: u8 = 1;
const LTL_AND: u8 = 2;
const LTL_UNTIL: u8 = 3;
const LTL_UNARY: u8 = 4;
const LTL_ATOM: u8 = 5;

fn ltl_prec(f: &LtlFormula) -> u8 {
    match f {
        LtlFormula::Or(..) => LTL_OR,
        LtlFormula::And(..) => LTL_AND,
        LtlFormula::Until(..) => LTL_UNTIL,
        LtlFormula::Not(_)
        | LtlFormula::Next(_)
        | LtlFormula::Finally(_)
        | LtlFormula::Globally(_) => LTL_UNARY,
        LtlFormula::Atom(_) => LTL_ATOM,
    }
}

fn write_ltl(out: &mut String, f: &LtlFormula, min_prec: u8) {
    let parens = ltl_prec(f) < min_prec;
    if parens {
        out.push('(');
    }
    match f {
        LtlFormula::Atom(e) => write_expr(out, e, PREC_EQ),
        LtlFormula::Not(a) => {
            out.push('!');
            write_ltl(out, a, LTL_UNARY);
        }
        LtlFormula::Next(a) | LtlFormula::Finally(a) | LtlFormula::Globally(a) => {
            out.push_str(match f {
                LtlFormula::Next(_) => "X ",
                LtlFormula::Finally(_) => "F ",
                _ => "G ",
            });
            write_ltl(out, a, LTL_UNARY);
        }
        LtlFormula::And(a, b) => {
            write_ltl(out, a, LTL_AND);
            out.push_str(" & ");
            write_ltl(out, b, LTL_AND + 1);
        }
        LtlFormula::Or(a, b) => {
            write_ltl(out, a, LTL_OR);
            out.push_str(" | ");
            write_ltl(out, b, LTL_OR + 1);
        }
        LtlFormula::Until(a, b) => {
            write_ltl(out, a, LTL_UNARY);
            out.push_str(" U ");
            write_ltl(out, b, LTL_UNTIL);
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn format_ltl(f: &LtlFormula) -> String {
    let mut s = String::new();
    write_ltl(&mut s, f, LTL_OR);
    s
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ltl(self))
    }
}

fn write_assignment(out: &mut String, which: &str, var: &str, e: &Expr) {
    match &e.kind {
        ExprKind::Case(branches) => {
            let _ = writeln!(out, "  {which}({var}) := case");
            for (g, v) in branches {
                let _ = writeln!(out, "      {} : {};", format_expr(g), format_expr(v));
            }
            out.push_str("    esac;\n");
        }
        _ => {
            let _ = writeln!(out, "  {which}({var}) := {};", format_expr(e));
        }
    }
}

/// Renders a model in canonical layout: declarations in order, then all
/// `init` assignments, then all `next` assignments, then the specs.
pub fn pretty_print(model: &SmvModel) -> String {
    let mut out = String::from("MODULE main\n");
    if !model.vars.is_empty() {
        out.push_str("VAR\n");
        for v in &model.vars {
            match &v.domain {
                Domain::Bool => {
                    let _ = writeln!(out, "  {} : boolean;", v.name);
                }
                Domain::Enum(lits) => {
                    let _ = writeln!(out, "  {} : {{{}}};", v.name, lits.join(", "));
                }
            }
        }
    }
    if !model.inits.is_empty() || !model.nexts.is_empty() {
        out.push_str("ASSIGN\n");
        for (which, slot) in [("init", &model.inits), ("next", &model.nexts)] {
            for v in &model.vars {
                if let Some(e) = slot.get(&v.name) {
                    write_assignment(&mut out, which, &v.name, e);
                }
            }
        }
    }
    for spec in &model.ltlspecs {
        let _ = writeln!(out, "LTLSPEC {};", format_ltl(&spec.formula));
    }
    out
}
