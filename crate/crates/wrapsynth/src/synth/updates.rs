//! Update synthesis: affine input/output relations, their lifting to the
//! template constants, and the per-pattern fallback ladder.

use super::guards::{max_linear_guided, pattern_expr};
use super::{ModeCtx, PairStats, SynthError};
use crate::affine::{rref, solve_for_outputs, AffineEquation, AffineSpace, OutputEquation, Q};
use crate::encoder::{
    encode_linear, encode_linear_as, encode_monomial, encode_row_violation, encode_strict_violation, fix_assumptions,
    read_signed, read_unsigned, Builder, EncodeError, LinearExpr, LinearSum, Row, SumKind, VarMap,
};
use crate::octdom::{cell, Octagon};
use crate::sat::Lit;
use crate::template::{Pattern, TemplateSet};
use crate::tf::{Candidate, Domain, GuardRow, UpdateRow};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use crate::ext::ExtInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Which update construction to run for each output pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Exact symbolic update, else relational candidates with the constant
    /// bound (plus lifted nonlinear candidates when monomials are given).
    #[default]
    Ladder,
    Exact,
    Relational,
    Const,
    /// Interval lifting of the affine relation, summed for binary patterns.
    Medium,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Strategy, String> {
        Ok(match s {
            "ladder" => Strategy::Ladder,
            "exact" => Strategy::Exact,
            "relational" => Strategy::Relational,
            "const" => Strategy::Const,
            "medium" => Strategy::Medium,
            _ => return Err(format!("unknown strategy `{s}`")),
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Ladder => "ladder",
            Strategy::Exact => "exact",
            Strategy::Relational => "relational",
            Strategy::Const => "const",
            Strategy::Medium => "medium",
        })
    }
}

fn small(v: &BigInt) -> Result<i128, SynthError> {
    v.to_i128().ok_or(SynthError::Encode(EncodeError::TooWide(v.bits() as usize)))
}

fn row_of(eq: &AffineEquation, names: &[String]) -> Result<Row, SynthError> {
    let mut terms = Vec::new();
    for (c, n) in eq.coeffs.iter().zip(names) {
        if !c.is_zero() {
            terms.push((small(c)?, n.clone()));
        }
    }
    Ok(Row { terms, constant: small(&eq.constant)? })
}

/// Term `coef·expr` for a sum whose bits may hold the negated expression.
fn sum_term(sum: &LinearSum, coef: i128) -> (i128, String) {
    match sum.kind {
        SumKind::NegatedUnsigned => (-coef, sum.name.clone()),
        _ => (coef, sum.name.clone()),
    }
}

fn read(ctx: &ModeCtx, name: &str) -> BigInt {
    let e = ctx.vars.get(name).expect("encoded name");
    let v = |l: Lit| ctx.session.value(l);
    BigInt::from(if e.signed { read_signed(&e.lits, v) } else { read_unsigned(&e.lits, v) })
}

/// `expr ≤ 0` as a literal.
fn le_zero(b: &mut Builder, vars: &mut VarMap, expr: &LinearExpr) -> Result<Lit, SynthError> {
    let s = encode_linear_as(b, vars, expr, true)?;
    let neg = *s.bits.last().expect("non-empty sum");
    let z = b.is_zero(&s.bits);
    Ok(b.or(neg, z))
}

/// Encodes each monomial over the inputs; returns the product names.
pub(crate) fn monomial_names(ctx: &mut ModeCtx, monomials: &[Vec<usize>]) -> Result<Vec<String>, SynthError> {
    let inputs = ctx.input_names();
    let mut v = Vec::new();
    for m in monomials {
        let fs: Vec<&str> = m.iter().map(|&k| inputs[k].as_str()).collect();
        v.push(encode_monomial(&mut ctx.b, &mut ctx.vars, &fs)?);
    }
    ctx.sync();
    Ok(v)
}

/// Affine hull of `(outputs, inputs, monomials)` over the runs of the mode:
/// repeatedly asks for a run violating the current rows and joins it in.
pub(crate) fn affine_io(ctx: &mut ModeCtx, monomials: &[String]) -> Result<AffineSpace, SynthError> {
    let names: Vec<String> = ctx.output_names().into_iter().chain(ctx.input_names()).chain(monomials.iter().cloned()).collect();
    let mut s = AffineSpace::empty(names.len());
    loop {
        let mut assume = ctx.mode.clone();
        if !s.is_empty() {
            let rows = s.to_constraints()?;
            if rows.is_empty() {
                break;
            }
            let rows: Vec<Row> = rows.iter().map(|r| row_of(r, &names)).collect::<Result<_, _>>()?;
            let viol = encode_row_violation(&mut ctx.b, &mut ctx.vars, &rows)?;
            ctx.sync();
            assume.push(viol);
        }
        if !ctx.session.solve(&assume)? {
            break;
        }
        let point: Vec<BigInt> = names.iter().map(|n| read(ctx, n)).collect();
        s = s.join(&AffineSpace::from_point(&point))?;
    }
    Ok(s)
}

/// Interval lifting of `λ·x'_o = Σ c·col + c₀`: upper bounds of `x'_o` and
/// `−x'_o` in terms of the unary constants (`d_k` bounds `x_k`, `d_{n+k}`
/// bounds `−x_k`) and monomial aggregates. Columns follow [`affine_io`].
pub fn lift_interval(eq: &OutputEquation, n: usize) -> (Candidate, Candidate) {
    let mut up = Candidate {
        divisor: eq.lambda.clone(),
        constant: eq.constant.clone(),
        terms: Vec::new(),
        aggregates: Vec::new(),
    };
    let mut down = Candidate { constant: -&eq.constant, ..up.clone() };
    for (col, c) in &eq.terms {
        if *col < 2 * n {
            let k = col - n;
            if c.is_positive() {
                up.terms.push((k, c.clone()));
                down.terms.push((n + k, c.clone()));
            } else {
                up.terms.push((n + k, -c));
                down.terms.push((k, -c));
            }
        } else {
            up.aggregates.push((col - 2 * n, c.clone()));
            down.aggregates.push((col - 2 * n, -c));
        }
    }
    (up.normalized(), down.normalized())
}

/// Target index of `±x'_o` in the unary part of the templates.
fn unary_index(n: usize, o: usize, sign: i64) -> usize {
    if sign > 0 {
        o
    } else {
        n + o
    }
}

/// Medium lifting: unary rows straight from [`lift_interval`], binary rows
/// as sums of the two unary rows.
fn lift_medium(eqs: &[OutputEquation], templates: &TemplateSet, n: usize) -> Vec<Option<Candidate>> {
    let mut unary: Vec<Option<Candidate>> = vec![None; 2 * n];
    for eq in eqs {
        let (up, down) = lift_interval(eq, n);
        unary[eq.output] = Some(up);
        unary[n + eq.output] = Some(down);
    }
    templates
        .patterns
        .iter()
        .map(|p| {
            let s = p.support();
            match s.as_slice() {
                [(o, c)] if c.abs() == 1 => unary[unary_index(n, *o, *c)].clone(),
                [(a, ca), (b, cb)] if ca.abs() == 1 && cb.abs() == 1 => {
                    match (&unary[unary_index(n, *a, *ca)], &unary[unary_index(n, *b, *cb)]) {
                        (Some(x), Some(y)) => Some(x.add(y)),
                        _ => None,
                    }
                }
                _ => None,
            }
        })
        .collect()
}

/// Symbolic constants and the d-space constraints, shared by all targets of
/// one mode. `act` enables the constraints.
struct SymbolicD {
    names: Vec<String>,
    act: Lit,
    /// Constants of octagonal hulls of a few runs each.
    seeds: Vec<Vec<BigInt>>,
}

/// Inputs of up to `count` runs of the mode, steered apart by random
/// assumptions on input bits.
fn sample_runs(ctx: &mut ModeCtx, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<i128>>, SynthError> {
    let inputs = ctx.input_names();
    let bits: Vec<Lit> = inputs.iter().map(|n| ctx.vars.lits(n).map(<[Lit]>::to_vec)).collect::<Result<Vec<_>, _>>()?.concat();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut wish: Vec<Lit> = Vec::new();
        for &l in &bits {
            if rng.gen_bool(0.5) {
                wish.push(if rng.gen_bool(0.5) { l } else { !l });
            }
        }
        loop {
            let mut assume = ctx.mode.clone();
            assume.extend(&wish);
            if ctx.session.solve(&assume)? {
                break;
            }
            if wish.is_empty() {
                return Ok(out);
            }
            wish.truncate(wish.len() / 2);
        }
        let x: Vec<i128> = inputs.iter().map(|n| read(ctx, n)).map(|v| small(&v)).collect::<Result<_, _>>()?;
        out.push(x);
    }
    Ok(out)
}

fn symbolic_d(ctx: &mut ModeCtx, templates: &TemplateSet, bounds: &[GuardRow], width: usize) -> Result<SymbolicD, SynthError> {
    let n = ctx.regs.len();
    let m = templates.len();
    let mut names = Vec::with_capacity(m);
    for _ in 0..m {
        let v = ctx.b.fresh_vec(width);
        names.push(ctx.vars.insert_fresh("d", v, true));
    }
    let act = ctx.b.fresh();
    let inputs = ctx.input_names();
    let mut exprs: Vec<LinearExpr> = Vec::new();
    for (k, p) in templates.patterns.iter().enumerate() {
        // Every input of the octagon satisfies its constraints...
        exprs.push(pattern_expr(p, &inputs).term(-1, names[k].clone()));
        // ...and the octagon lies inside the guard.
        let g = bounds[k].bound.finite().expect("feasible mode has finite guard bounds");
        exprs.push(LinearExpr::new().term(1, names[k].clone()).plus(-small(g)?));
    }
    // Matrix entries `m[i][j] = scale·d_k`, with `0` on the diagonal.
    let mut entry: Vec<Vec<Option<(i128, usize)>>> = vec![vec![None; 2 * n]; 2 * n];
    for (k, p) in templates.patterns.iter().enumerate() {
        if let Some((i, j, s)) = cell(p) {
            entry[i][j] = Some((s as i128, k));
            entry[j ^ 1][i ^ 1] = Some((s as i128, k));
        }
    }
    let bar = |i: usize| i ^ 1;
    let add = |e: LinearExpr, c: i128, x: Option<(i128, usize)>| match x {
        Some((s, k)) => e.term(c * s, names[k].clone()),
        None => e,
    };
    let mut push_le = |lhs: &[(i128, Option<(i128, usize)>)]| {
        let e = lhs.iter().fold(LinearExpr::new(), |e, &(c, x)| add(e, c, x));
        exprs.push(e);
    };
    for i in 0..2 * n {
        for j in 0..2 * n {
            let ij = if i == j { None } else { entry[i][j] };
            for k in 0..2 * n {
                if k == i || k == j {
                    continue;
                }
                // m[i][j] ≤ m[i][k] + m[k][j]
                push_le(&[(1, ij), (-1, entry[i][k]), (-1, entry[k][j])]);
            }
            if i != j && j != bar(i) {
                // 2·m[i][j] ≤ m[i][ī] + m[j̄][j]
                push_le(&[(2, ij), (-1, entry[i][bar(i)]), (-1, entry[bar(j)][j])]);
            }
        }
        // m[i][ī] + m[ī][i] ≥ 0
        push_le(&[(-1, entry[i][bar(i)]), (-1, entry[bar(i)][i])]);
    }
    let mut seen = BTreeSet::new();
    for e in exprs {
        let mut terms: Vec<(String, i128)> = Vec::new();
        for (c, name) in e.terms {
            match terms.iter_mut().find(|(n, _)| *n == name) {
                Some(t) => t.1 += c,
                None => terms.push((name, c)),
            }
        }
        terms.retain(|(_, c)| *c != 0);
        terms.sort();
        if terms.is_empty() && e.constant <= 0 {
            continue;
        }
        if !seen.insert((terms.clone(), e.constant)) {
            continue;
        }
        let expr = LinearExpr { terms: terms.into_iter().map(|(n, c)| (c, n)).collect(), constant: e.constant };
        let le = le_zero(&mut ctx.b, &mut ctx.vars, &expr)?;
        ctx.b.clause(&[!act, le]);
    }
    ctx.sync();

    let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
    let runs = sample_runs(ctx, 2 * m, &mut rng)?;
    let span = 1i128 << ctx.width;
    let mut seeds = Vec::new();
    if !runs.is_empty() {
        for _ in 0..2 * m + 4 {
            // Hull of a few runs, some bounds loosened, cut back to the guard.
            let pick: Vec<&Vec<i128>> = (0..rng.gen_range(1..=4)).map(|_| &runs[rng.gen_range(0..runs.len())]).collect();
            let mut o = Octagon::top(n);
            for (p, g) in templates.patterns.iter().zip(bounds) {
                let mut b = pick.iter().map(|x| p.eval(x)).max().expect("non-empty pick");
                if rng.gen_bool(0.5) {
                    b += rng.gen_range(0..=span / 2);
                }
                o.add(p, &ExtInt::from(b));
                o.add(p, &g.bound);
            }
            let o = o.close();
            let d: Option<Vec<BigInt>> = templates.patterns.iter().map(|p| o.bound_of(p).finite().cloned()).collect();
            if let Some(d) = d.filter(|d| !seeds.contains(d)) {
                seeds.push(d);
            }
        }
    }
    Ok(SymbolicD { names, act, seeds })
}

/// Whether some run of the mode has `λ·o + Σ a_k·(p_k·x) > c` for the row
/// `λ·d' + Σ a_k·d_k = c`.
fn x_only_violated(ctx: &mut ModeCtx, o: &LinearSum, row: &AffineEquation, templates: &TemplateSet) -> Result<bool, SynthError> {
    let inputs = ctx.input_names();
    let mut weights = vec![0i128; inputs.len()];
    for (a, pk) in row.coeffs[1..].iter().zip(&templates.patterns) {
        let a = small(a)?;
        for (i, c) in pk.support() {
            weights[i] += a * c as i128;
        }
    }
    let mut r = Row { terms: vec![sum_term(o, small(&row.coeffs[0])?)], constant: small(&row.constant)? };
    r.terms.extend(weights.iter().zip(&inputs).filter(|(w, _)| **w != 0).map(|(w, n)| (*w, n.clone())));
    let v = encode_strict_violation(&mut ctx.b, &mut ctx.vars, &r)?;
    ctx.sync();
    let mut assume = ctx.mode.clone();
    assume.push(v);
    Ok(ctx.session.solve(&assume)?)
}

/// Exact symbolic update for output pattern `p`: grows the affine hull of
/// `(d'_p, d_1, …, d_m)` over tightly closed input octagons inside the
/// guard, where `d'_p` is the optimal output bound. Each round asks for an
/// octagon off the current d-relations or with an output above the current
/// row. Seed octagons built from concrete runs enter the hull first, so
/// most rounds are cheap pinned queries. `None` when no affine row for
/// `d'_p` exists.
fn exact_update(ctx: &mut ModeCtx, d: &SymbolicD, p: &Pattern, templates: &TemplateSet) -> Result<Option<Candidate>, SynthError> {
    let outputs = ctx.output_names();
    let o = encode_linear(&mut ctx.b, &mut ctx.vars, &pattern_expr(p, &outputs))?;
    ctx.sync();
    let m = d.names.len();
    let mut s = AffineSpace::empty(m + 1);
    for dv in &d.seeds {
        let mut pinned = ctx.mode.clone();
        pinned.push(d.act);
        for (name, v) in d.names.iter().zip(dv) {
            pinned.extend(fix_assumptions(ctx.vars.lits(name)?, small(v)?));
        }
        if let ExtInt::Fin(best) = max_linear_guided(&mut ctx.session, &o, &pinned, false)? {
            let point: Vec<BigInt> = std::iter::once(best).chain(dv.iter().cloned()).collect();
            if !s.contains(&point) {
                s = s.join(&AffineSpace::from_point(&point))?;
            }
        }
    }
    loop {
        let mut assume = ctx.mode.clone();
        assume.push(d.act);
        if !s.is_empty() {
            let rows = s.to_constraints()?;
            let Some(target) = rows.iter().find(|r| !r.coeffs[0].is_zero()) else { return Ok(None) };
            let d_rows: Vec<Row> = rows
                .iter()
                .filter(|r| r.coeffs[0].is_zero())
                .map(|r| row_of(&AffineEquation { coeffs: r.coeffs[1..].to_vec(), constant: r.constant.clone() }, &d.names))
                .collect::<Result<_, _>>()?;
            let off = encode_row_violation(&mut ctx.b, &mut ctx.vars, &d_rows)?;
            let mut strict = Row { terms: vec![sum_term(&o, small(&target.coeffs[0])?)], constant: small(&target.constant)? };
            for (c, name) in target.coeffs[1..].iter().zip(&d.names) {
                if !c.is_zero() {
                    strict.terms.push((small(c)?, name.clone()));
                }
            }
            // With non-negative weights on the d's, `d_k ≥ p_k·x` turns the
            // row into a claim over the inputs alone, a far easier query.
            let above = if target.coeffs[1..].iter().all(|a| !a.is_positive())
                && !x_only_violated(ctx, &o, target, templates)?
            {
                ctx.b.constant(false)
            } else {
                encode_strict_violation(&mut ctx.b, &mut ctx.vars, &strict)?
            };
            let either = ctx.b.or(off, above);
            ctx.sync();
            if ctx.b.const_of(either) == Some(false) {
                break;
            }
            assume.push(either);
        }
        if !ctx.session.solve(&assume)? {
            break;
        }
        let dv: Vec<BigInt> = d.names.iter().map(|n| read(ctx, n)).collect();
        let mut pinned = ctx.mode.clone();
        pinned.push(d.act);
        for (name, v) in d.names.iter().zip(&dv) {
            pinned.extend(fix_assumptions(ctx.vars.lits(name)?, small(v)?));
        }
        let best = max_linear_guided(&mut ctx.session, &o, &pinned, true)?;
        let best = best.finite().expect("pinned octagon holds a run").clone();
        let point: Vec<BigInt> = std::iter::once(best).chain(dv).collect();
        assert!(!s.contains(&point), "exact update made no progress");
        s = s.join(&AffineSpace::from_point(&point))?;
    }
    let rows = s.to_constraints()?;
    let Some(target) = rows.iter().find(|r| !r.coeffs[0].is_zero()) else { return Ok(None) };
    let c = Candidate {
        divisor: target.coeffs[0].clone(),
        constant: target.constant.clone(),
        terms: target.coeffs[1..].iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k, -c)).collect(),
        aggregates: Vec::new(),
    };
    Ok(Some(c.normalized()))
}

fn max_expr(ctx: &mut ModeCtx, expr: &LinearExpr) -> Result<BigInt, SynthError> {
    let sum = encode_linear(&mut ctx.b, &mut ctx.vars, expr)?;
    ctx.sync();
    let v = max_linear_guided(&mut ctx.session, &sum, &ctx.mode, true)?;
    Ok(v.finite().expect("feasible mode").clone())
}

/// Largest value of output pattern `p` over the mode.
fn const_bound(ctx: &mut ModeCtx, p: &Pattern) -> Result<BigInt, SynthError> {
    let e = pattern_expr(p, &ctx.output_names());
    max_expr(ctx, &e)
}

/// Candidates `d_k + max(p·x' − p_k·x)`, dropping those that can never beat
/// `konst` given the guard's lower bound on `d_k`.
fn relational(
    ctx: &mut ModeCtx,
    templates: &TemplateSet,
    bounds: &[GuardRow],
    p: &Pattern,
    konst: &BigInt,
) -> Result<Vec<Candidate>, SynthError> {
    let (inputs, outputs) = (ctx.input_names(), ctx.output_names());
    let mut out = Vec::new();
    for (k, pk) in templates.patterns.iter().enumerate() {
        let mut e = pattern_expr(p, &outputs);
        for (c, n) in pattern_expr(pk, &inputs).terms {
            e = e.term(-c, n);
        }
        let c = max_expr(ctx, &e)?;
        let floor = templates.index_of(&pk.negate()).and_then(|j| bounds[j].bound.finite().map(|g| -g));
        if floor.is_some_and(|lo| &c + lo >= *konst) {
            continue;
        }
        out.push(Candidate::shifted(k, c));
    }
    Ok(out)
}

/// Whether `p·x'` equals an affine function of the inputs alone on every
/// run, given the hull rows over `(outputs, inputs, monomials)`. Only then
/// can the largest value be affine in the input constants, so the ladder
/// skips the exact search otherwise.
fn affine_in_inputs(rows: &[AffineEquation], p: &Pattern, n: usize) -> bool {
    // Solve Σ λ_i·row_i = (p, *, 0) on the output and monomial columns.
    let cols: Vec<usize> = (0..n).chain(2 * n..rows.first().map_or(2 * n, |r| r.coeffs.len())).collect();
    let system: Vec<Vec<Q>> = cols
        .iter()
        .map(|&c| {
            let target = if c < n { BigInt::from(p.0[c]) } else { BigInt::zero() };
            rows.iter().map(|r| Q::from_integer(r.coeffs[c].clone())).chain(std::iter::once(Q::from_integer(target))).collect()
        })
        .collect();
    let k = rows.len();
    rref(system).iter().all(|r| r[..k].iter().any(|x| !x.is_zero()) || r[k].is_zero())
}

pub(crate) fn synth_updates(
    ctx: &mut ModeCtx,
    templates: &TemplateSet,
    bounds: &[GuardRow],
    monomials: &[Vec<usize>],
    stats: &mut PairStats,
) -> Result<Vec<UpdateRow>, SynthError> {
    let n = ctx.regs.len();
    let strategy = ctx.cfg.strategy;
    let domain = ctx.cfg.domain;

    let mono_names = monomial_names(ctx, monomials)?;
    let wants_io = matches!(strategy, Strategy::Medium | Strategy::Ladder) || domain == Domain::Interval;
    let mut io_rows = None;
    let lifted: Vec<Option<Candidate>> = if wants_io && strategy != Strategy::Const {
        let before = ctx.session.calls();
        let io = affine_io(ctx, &mono_names)?;
        stats.affine_calls += ctx.session.calls() - before;
        let rows = io.to_constraints()?;
        let (eqs, _) = solve_for_outputs(&rows, n);
        io_rows = Some(rows);
        lift_medium(&eqs, templates, n)
    } else {
        vec![None; templates.len()]
    };

    let before = ctx.session.calls();
    let mut rows = Vec::new();
    if domain == Domain::Interval {
        for (j, p) in templates.patterns.iter().enumerate() {
            let cands = match (&lifted[j], strategy) {
                (Some(c), s) if s != Strategy::Const => vec![c.clone()],
                _ => vec![Candidate::constant(const_bound(ctx, p)?)],
            };
            rows.push(UpdateRow { target: j, candidates: cands });
        }
        stats.update_calls += ctx.session.calls() - before;
        return Ok(rows);
    }

    // Exact searches get their own copy of the solver state: the constant
    // vectors and their constraints would slow down every other query.
    let wants_exact = |p: &Pattern| match strategy {
        Strategy::Exact => true,
        Strategy::Ladder => affine_in_inputs(io_rows.as_deref().expect("computed"), p, n),
        _ => false,
    };
    let mut exact: Vec<Option<Candidate>> = vec![None; templates.len()];
    if templates.patterns.iter().any(wants_exact) {
        let mut ectx = ctx.clone();
        let width = ectx.width + 3;
        let sym = symbolic_d(&mut ectx, templates, bounds, width)?;
        for (j, p) in templates.patterns.iter().enumerate() {
            if wants_exact(p) {
                exact[j] = exact_update(&mut ectx, &sym, p, templates)?;
            }
        }
        stats.update_calls += ectx.session.calls() - ctx.session.calls();
    }
    for (j, p) in templates.patterns.iter().enumerate() {
        let cands = match strategy {
            Strategy::Exact => exact[j].clone().into_iter().collect(),
            Strategy::Medium => lifted[j].clone().into_iter().collect(),
            Strategy::Const => vec![Candidate::constant(const_bound(ctx, p)?)],
            Strategy::Relational => {
                let k = const_bound(ctx, p)?;
                let mut v = relational(ctx, templates, bounds, p, &k)?;
                v.push(Candidate::constant(k));
                v
            }
            Strategy::Ladder => match &exact[j] {
                Some(c) => vec![c.clone()],
                None => {
                    let k = const_bound(ctx, p)?;
                    let mut v: Vec<Candidate> = lifted[j].clone().into_iter().collect();
                    for c in relational(ctx, templates, bounds, p, &k)? {
                        if !v.contains(&c) {
                            v.push(c);
                        }
                    }
                    v.push(Candidate::constant(k));
                    v
                }
            },
        };
        if !cands.is_empty() {
            rows.push(UpdateRow { target: j, candidates: cands });
        }
    }
    stats.update_calls += ctx.session.calls() - before;
    Ok(rows)
}
