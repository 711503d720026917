use std::fmt::Write as _;

use thiserror::Error;

use super::cnf::CnfFormula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: missing or malformed `p cnf` header")]
    Header { line: usize },
    #[error("line {line}: invalid literal `{token}`")]
    Literal { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds declared variable count {vars}")]
    OutOfRange { line: usize, lit: i32, vars: u32 },
    #[error("declared {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
    #[error("unterminated clause at end of input")]
    Unterminated,
}

/// Writes `p cnf V C` followed by one zero-terminated clause per line.
/// Variable names become `c var <index> <name>` comment lines.
pub fn to_dimacs(cnf: &CnfFormula) -> String {
    let mut out = String::new();
    for (name, v) in &cnf.name_map {
        let _ = writeln!(out, "c var {v} {name}");
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.var_count, cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut cnf = CnfFormula::new();
    let mut declared: Option<usize> = None;
    let mut current: Vec<i32> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.starts_with('%') {
            break;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if let ["var", v, name] = parts.as_slice() {
                    if let Ok(v) = v.parse::<u32>() {
                        cnf.name_map.insert((*name).to_string(), v);
                    }
                }
                continue;
            }
        }
        if line.is_empty() {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] if declared.is_none() => {
                    let v = v.parse().map_err(|_| DimacsError::Header { line: line_no })?;
                    let c = c.parse().map_err(|_| DimacsError::Header { line: line_no })?;
                    cnf.var_count = v;
                    declared = Some(c);
                }
                _ => return Err(DimacsError::Header { line: line_no }),
            }
            continue;
        }
        if declared.is_none() {
            return Err(DimacsError::Header { line: line_no });
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| DimacsError::Literal {
                line: line_no,
                token: tok.to_string(),
            })?;
            if lit == 0 {
                cnf.clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() > cnf.var_count {
                return Err(DimacsError::OutOfRange {
                    line: line_no,
                    lit,
                    vars: cnf.var_count,
                });
            } else {
                current.push(lit);
            }
        }
    }
    let declared = declared.ok_or(DimacsError::Header { line: 1 })?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if declared != cnf.clauses.len() {
        return Err(DimacsError::ClauseCount {
            declared,
            found: cnf.clauses.len(),
        });
    }
    Ok(cnf)
}
