//! DIMACS CNF text format.

use super::{Cnf, Lit};
use std::fmt::Write;

/// Renders `cnf` as DIMACS: a `p cnf V C` header, then one zero-terminated
/// clause per line in insertion order.
pub fn export_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len()).unwrap();
    for c in &cnf.clauses {
        for l in c {
            write!(out, "{} ", l.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("dimacs line {line}: {msg}")]
pub struct DimacsError {
    pub line: usize,
    pub msg: String,
}

/// Parses DIMACS CNF. Comment lines start with `c`; clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut cnf = Cnf::new();
    let mut declared: Option<(u32, usize)> = None;
    let mut current = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: &str| DimacsError { line: i + 1, msg: msg.to_string() };
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 || f[1] != "cnf" {
                return Err(err("malformed header"));
            }
            let v = f[2].parse().map_err(|_| err("bad variable count"))?;
            let c = f[3].parse().map_err(|_| err("bad clause count"))?;
            declared = Some((v, c));
            cnf.num_vars = v;
            continue;
        }
        if declared.is_none() {
            return Err(err("clause before header"));
        }
        for tok in line.split_whitespace() {
            let n: i32 = tok.parse().map_err(|_| err("bad literal"))?;
            if n == 0 {
                cnf.clauses.push(std::mem::take(&mut current));
            } else {
                let l = Lit::from_dimacs(n);
                if l.var() >= cnf.num_vars {
                    return Err(err("literal exceeds declared variable count"));
                }
                current.push(l);
            }
        }
    }
    if !current.is_empty() {
        cnf.clauses.push(current);
    }
    match declared {
        Some((_, c)) if c != cnf.clauses.len() => Err(DimacsError {
            line: text.lines().count(),
            msg: format!("header declares {} clauses, found {}", c, cnf.clauses.len()),
        }),
        Some(_) => Ok(cnf),
        None => Err(DimacsError { line: 0, msg: "missing header".into() }),
    }
}
