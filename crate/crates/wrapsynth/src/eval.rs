//! Applying a transfer function to an octagon. Arithmetic only: no solver.

use crate::ext::ExtInt;
use crate::isa::range;
use crate::octdom::{Octagon, TemplateConstraint};
use crate::template::Pattern;
use crate::tf::{Candidate, Pair, TransferFunction};
use num_bigint::BigInt;
use num_traits::Signed;

/// Values of the input constants and monomial ranges for one pair.
struct Env {
    d: Vec<ExtInt>,
    /// `(min, max)` corner product per monomial; `None` if unbounded.
    agg: Vec<Option<(BigInt, BigInt)>>,
}

fn corners(factors: &[(BigInt, BigInt)]) -> (BigInt, BigInt) {
    let mut lo = BigInt::from(1);
    let mut hi = BigInt::from(1);
    for (a, b) in factors {
        let ps = [&lo * a, &lo * b, &hi * a, &hi * b];
        lo = ps.iter().min().expect("four products").clone();
        hi = ps.iter().max().expect("four products").clone();
    }
    (lo, hi)
}

fn env(tf: &TransferFunction, o: &Octagon) -> Env {
    let d = tf.templates.patterns.iter().map(|p| o.bound_of(p)).collect();
    let agg = tf
        .monomials
        .iter()
        .map(|m| {
            let factors: Option<Vec<(BigInt, BigInt)>> = m
                .iter()
                .map(|&k| match o.interval(k) {
                    (ExtInt::Fin(lo), ExtInt::Fin(hi)) => Some((lo, hi)),
                    _ => None,
                })
                .collect();
            factors.map(|f| corners(&f))
        })
        .collect();
    Env { d, agg }
}

/// Any unbounded operand with a nonzero weight saturates to `+∞`.
fn eval_candidate(c: &Candidate, env: &Env) -> ExtInt {
    let mut acc = c.constant.clone();
    for (k, coef) in &c.terms {
        match &env.d[*k] {
            ExtInt::Fin(v) => acc += coef * v,
            _ => return ExtInt::PosInf,
        }
    }
    for (m, coef) in &c.aggregates {
        match &env.agg[*m] {
            Some((lo, hi)) => acc += coef * if coef.is_positive() { hi } else { lo },
            None => return ExtInt::PosInf,
        }
    }
    ExtInt::Fin(acc).div_floor(&c.divisor)
}

/// Output of one pair, or `None` when its guard excludes the input.
pub fn apply_pair(tf: &TransferFunction, pair: &Pair, input: &Octagon) -> Option<Octagon> {
    let guard: Vec<TemplateConstraint> =
        pair.guard.iter().map(|g| TemplateConstraint::new(g.pattern.clone(), g.bound.clone())).collect();
    let met = input.meet(&guard);
    if met.is_bottom() {
        return None;
    }
    let env = env(tf, &met);
    let n = tf.registers.len();
    let mut out = Octagon::top(n);
    for (j, p) in tf.templates.patterns.iter().enumerate() {
        let bound = match pair.row(j) {
            Some(r) => r.candidates.iter().map(|c| eval_candidate(c, &env)).min().unwrap_or(ExtInt::PosInf),
            None => ExtInt::PosInf,
        };
        out.add(p, &bound);
    }
    let (lo, hi) = range(tf.width, tf.interpretation);
    for k in 0..n {
        out.add(&Pattern::unit(n, k, 1), &ExtInt::from(hi));
        out.add(&Pattern::unit(n, k, -1), &ExtInt::from(-lo));
    }
    Some(out.close())
}

/// Join of the outputs of all applicable pairs; bottom if none applies.
pub fn apply_tf(tf: &TransferFunction, input: &Octagon) -> Octagon {
    let n = tf.registers.len();
    assert_eq!(input.dim(), n, "input octagon must range over the tracked registers");
    tf.pairs
        .iter()
        .filter_map(|p| apply_pair(tf, p, input))
        .fold(Octagon::bottom(n), |acc, o| acc.join(&o))
}

/// Input constants `d_k` of a closed octagon, for display and tests.
pub fn input_constants(tf: &TransferFunction, o: &Octagon) -> Vec<ExtInt> {
    tf.templates.patterns.iter().map(|p| o.bound_of(p)).collect()
}

/// Evaluates every row of `pair` on explicit constants, without a guard
/// meet. Missing rows are `+∞`.
pub fn eval_rows(tf: &TransferFunction, pair: &Pair, d: &[ExtInt], agg: &[(BigInt, BigInt)]) -> Vec<ExtInt> {
    let env = Env { d: d.to_vec(), agg: agg.iter().cloned().map(Some).collect() };
    (0..tf.templates.len())
        .map(|j| match pair.row(j) {
            Some(r) => r.candidates.iter().map(|c| eval_candidate(c, &env)).min().unwrap_or(ExtInt::PosInf),
            None => ExtInt::PosInf,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_products() {
        let f = |a: i64, b: i64| (BigInt::from(a), BigInt::from(b));
        assert_eq!(corners(&[f(-2, 3), f(-2, 3)]), (BigInt::from(-6), BigInt::from(9)));
        assert_eq!(corners(&[f(1, 2), f(3, 4), f(-1, 1)]), (BigInt::from(-8), BigInt::from(8)));
        assert_eq!(corners(&[f(0, 0)]).0, BigInt::from(0));
    }
}
