//! Subprocess bridge: writes the formula (assumptions as unit clauses) to a
//! temporary DIMACS file and reads back the competition-style answer.

use super::dimacs::export_dimacs;
use super::{Cnf, Lit, SatError};
use std::path::Path;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

static QUERY_SEQ: AtomicU64 = AtomicU64::new(0);

/// Runs `solver <file>`. Returns `Some(model)` when satisfiable.
pub fn solve(solver: &Path, cnf: &Cnf, assumptions: &[Lit]) -> Result<Option<Vec<bool>>, SatError> {
    let mut query = cnf.clone();
    for &a in assumptions {
        query.num_vars = query.num_vars.max(a.var() + 1);
        query.clauses.push(vec![a]);
    }
    let dir = std::env::temp_dir();
    let file = dir.join(format!(
        "wrapsynth-{}-{}.cnf",
        std::process::id(),
        QUERY_SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::write(&file, export_dimacs(&query)).map_err(|e| SatError::External(e.to_string()))?;
    let output = Command::new(solver).arg(&file).output();
    let _ = std::fs::remove_file(&file);
    let output = output.map_err(|e| SatError::External(format!("{}: {}", solver.display(), e)))?;
    let text = String::from_utf8_lossy(&output.stdout);
    parse_answer(&text, query.num_vars)
}

/// Parses `s SATISFIABLE` / `s UNSATISFIABLE` plus `v` lines. Variables the
/// solver leaves out of the model default to false.
pub fn parse_answer(text: &str, num_vars: u32) -> Result<Option<Vec<bool>>, SatError> {
    let mut status = None;
    let mut model = vec![false; num_vars as usize];
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" | "SAT" => true,
                "UNSATISFIABLE" | "UNSAT" => false,
                other => return Err(SatError::External(format!("unknown status {other:?}"))),
            });
        } else if let Some(rest) = line.strip_prefix("v ") {
            for tok in rest.split_whitespace() {
                let n: i32 = tok
                    .parse()
                    .map_err(|_| SatError::External(format!("bad model literal {tok:?}")))?;
                if n != 0 {
                    let l = Lit::from_dimacs(n);
                    if let Some(slot) = model.get_mut(l.var() as usize) {
                        *slot = !l.is_negative();
                    }
                }
            }
        } else if line == "SAT" || line == "UNSAT" {
            status = Some(line == "SAT");
        }
    }
    match status {
        Some(true) => Ok(Some(model)),
        Some(false) => Ok(None),
        None => Err(SatError::External("no status line in solver output".into())),
    }
}
