//! Feasible mode vectors.

use super::SynthError;
use crate::encoder::BlockEncoding;
use crate::isa::{Mode, ModeVector};
use crate::sat::{Lit, Session};

fn multimodal(enc: &BlockEncoding) -> Vec<(usize, &[(Mode, Lit)])> {
    enc.instrs.iter().enumerate().filter(|(_, i)| !i.modes.is_empty()).map(|(k, i)| (k, i.modes.as_slice())).collect()
}

/// Depth-first search over the multi-modal instructions in block order. A
/// prefix is extended only while it stays satisfiable, so infeasible
/// subtrees cost one query each. Results are in lexicographic mode order.
pub fn feasible_modes(enc: &BlockEncoding, session: &mut Session, cap: usize) -> Result<Vec<ModeVector>, SynthError> {
    let multi = multimodal(enc);
    let mut out = Vec::new();
    let mut prefix: Vec<(usize, Mode)> = Vec::new();
    let mut assumptions: Vec<Lit> = Vec::new();
    dfs(&multi, session, cap, &mut prefix, &mut assumptions, &mut out)?;
    Ok(out)
}

fn dfs(
    multi: &[(usize, &[(Mode, Lit)])],
    session: &mut Session,
    cap: usize,
    prefix: &mut Vec<(usize, Mode)>,
    assumptions: &mut Vec<Lit>,
    out: &mut Vec<ModeVector>,
) -> Result<(), SynthError> {
    let depth = prefix.len();
    if depth == multi.len() {
        if out.len() == cap {
            return Err(SynthError::TooManyModes(cap));
        }
        out.push(ModeVector(prefix.clone()));
        return Ok(());
    }
    let (instr, alphabet) = multi[depth];
    for &(m, l) in alphabet {
        assumptions.push(l);
        if session.solve(assumptions)? {
            prefix.push((instr, m));
            dfs(multi, session, cap, prefix, assumptions, out)?;
            prefix.pop();
        }
        assumptions.pop();
    }
    Ok(())
}

/// One query per element of the full product of alphabets.
pub fn feasible_modes_flat(enc: &BlockEncoding, session: &mut Session) -> Result<Vec<ModeVector>, SynthError> {
    let multi = multimodal(enc);
    let mut out = Vec::new();
    let total: usize = multi.iter().map(|(_, a)| a.len()).product();
    for mut code in 0..total {
        let mut mv = Vec::with_capacity(multi.len());
        let mut lits = Vec::with_capacity(multi.len());
        // Last instruction varies fastest, matching the search order.
        let mut picks = vec![0; multi.len()];
        for (d, (_, a)) in multi.iter().enumerate().rev() {
            picks[d] = code % a.len();
            code /= a.len();
        }
        for (d, &(instr, a)) in multi.iter().enumerate() {
            let (m, l) = a[picks[d]];
            mv.push((instr, m));
            lits.push(l);
        }
        if session.solve(&lits)? {
            out.push(ModeVector(mv));
        }
    }
    Ok(out)
}
