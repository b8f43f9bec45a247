//! Guards: optimal template bounds over the inputs of one mode.

use super::{ModeCtx, SynthError};
use crate::encoder::{encode_linear, LinearExpr, LinearSum, SumKind};
use crate::ext::ExtInt;
use crate::octdom::Octagon;
use crate::sat::{Lit, Session};
use crate::template::{Pattern, TemplateSet};
use crate::tf::GuardRow;
use num_bigint::BigInt;
use num_traits::One;

/// Largest value of `sum` under `assumptions`, fixing one bit per query from
/// the most significant end. Returns `−∞` when the assumptions are
/// unsatisfiable. `known_feasible` skips the extra query that an all-UNSAT
/// probe sequence would otherwise need for unsigned sums.
pub fn max_linear(
    session: &mut Session,
    sum: &LinearSum,
    assumptions: &[Lit],
    known_feasible: bool,
) -> Result<ExtInt, SynthError> {
    maximize(session, sum, assumptions, known_feasible, false)
}

/// As [`max_linear`], but a bit that the last model already sets the wanted
/// way is fixed without a query. Same result, fewer calls.
pub fn max_linear_guided(
    session: &mut Session,
    sum: &LinearSum,
    assumptions: &[Lit],
    known_feasible: bool,
) -> Result<ExtInt, SynthError> {
    maximize(session, sum, assumptions, known_feasible, true)
}

fn maximize(
    session: &mut Session,
    sum: &LinearSum,
    assumptions: &[Lit],
    known_feasible: bool,
    guided: bool,
) -> Result<ExtInt, SynthError> {
    let k = sum.bits.len();
    let mut fixed: Vec<Lit> = assumptions.to_vec();
    let mut bits = vec![false; k];
    let mut any_sat = false;
    // Bits of the last model; it satisfies every literal fixed so far.
    let mut model: Option<Vec<bool>> = None;
    let probe = |session: &mut Session, fixed: &mut Vec<Lit>, idx: usize, want: bool, model: &mut Option<Vec<bool>>| {
        let l = if want { sum.bits[idx] } else { !sum.bits[idx] };
        if guided && model.as_ref().is_some_and(|m| m[idx] == want) {
            fixed.push(l);
            return Ok::<bool, SynthError>(true);
        }
        fixed.push(l);
        if session.solve(fixed)? {
            if guided {
                *model = Some(sum.bits.iter().map(|&b| session.value(b)).collect());
            }
            Ok(true)
        } else {
            fixed.pop();
            fixed.push(!l);
            Ok(false)
        }
    };
    match sum.kind {
        SumKind::Signed => {
            // The sign probe asks for a non-negative value.
            if probe(session, &mut fixed, k - 1, false, &mut model)? {
                any_sat = true;
            } else {
                bits[k - 1] = true;
            }
            for i in (0..k - 1).rev() {
                if probe(session, &mut fixed, i, true, &mut model)? {
                    any_sat = true;
                    bits[i] = true;
                }
            }
            // The width leaves −2^(k−1) unreachable, so a run of UNSAT
            // answers after a failed sign probe means no model at all.
            if !any_sat {
                return Ok(ExtInt::NegInf);
            }
        }
        SumKind::Unsigned | SumKind::NegatedUnsigned => {
            let want = sum.kind == SumKind::Unsigned;
            for i in (0..k).rev() {
                let sat = probe(session, &mut fixed, i, want, &mut model)?;
                any_sat |= sat;
                bits[i] = if sat { want } else { !want };
            }
            if !any_sat && !known_feasible && !session.solve(&fixed)? {
                return Ok(ExtInt::NegInf);
            }
        }
    }
    let mag: BigInt = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| BigInt::one() << i).sum();
    Ok(ExtInt::Fin(match sum.kind {
        SumKind::Signed if bits[k - 1] => mag - (BigInt::one() << k),
        SumKind::NegatedUnsigned => -mag,
        _ => mag,
    }))
}

pub(crate) fn pattern_expr(p: &Pattern, names: &[String]) -> LinearExpr {
    p.support().into_iter().fold(LinearExpr::new(), |e, (i, c)| e.term(c as i128, names[i].clone()))
}

/// Optimal bound of every pattern over the inputs of the context's mode.
/// The mode is known to be feasible, so every bound is finite.
pub(crate) fn synth_guard(ctx: &mut ModeCtx, templates: &TemplateSet) -> Result<Vec<GuardRow>, SynthError> {
    let names = ctx.input_names();
    let mut rows = Vec::with_capacity(templates.len());
    for p in &templates.patterns {
        let sum = encode_linear(&mut ctx.b, &mut ctx.vars, &pattern_expr(p, &names))?;
        ctx.sync();
        let bound = max_linear(&mut ctx.session, &sum, &ctx.mode, true)?;
        rows.push(GuardRow { pattern: p.clone(), bound });
    }
    Ok(rows)
}

/// Removes rows whose bound follows from the remaining octagonal rows,
/// scanning from the last row backwards. Non-octagonal rows are kept.
pub fn drop_redundant(rows: &[GuardRow], n: usize) -> Vec<GuardRow> {
    let mut keep: Vec<bool> = vec![true; rows.len()];
    for i in (0..rows.len()).rev() {
        if !rows[i].pattern.is_octagonal() {
            continue;
        }
        let mut o = Octagon::top(n);
        for (j, r) in rows.iter().enumerate() {
            if j != i && keep[j] {
                o.add(&r.pattern, &r.bound);
            }
        }
        let o = o.close();
        if o.bound_of(&rows[i].pattern) <= rows[i].bound {
            keep[i] = false;
        }
    }
    rows.iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r.clone()).collect()
}
