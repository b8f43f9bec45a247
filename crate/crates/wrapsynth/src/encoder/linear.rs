use super::{read_signed, read_unsigned, Builder, EncodeError, VarMap};
use crate::sat::Lit;
use std::fmt;

/// `Σ c_i·v_i + constant` over named vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LinearExpr {
    pub terms: Vec<(i128, String)>,
    pub constant: i128,
}

impl LinearExpr {
    pub fn new() -> LinearExpr {
        LinearExpr::default()
    }

    pub fn term(mut self, c: i128, name: impl Into<String>) -> LinearExpr {
        if c != 0 {
            self.terms.push((c, name.into()));
        }
        self
    }

    pub fn plus(mut self, c: i128) -> LinearExpr {
        self.constant += c;
        self
    }

    pub fn negated(&self) -> LinearExpr {
        LinearExpr { terms: self.terms.iter().map(|(c, n)| (-c, n.clone())).collect(), constant: -self.constant }
    }
}

impl fmt::Display for LinearExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, n) in &self.terms {
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}{n}")?;
            } else {
                write!(f, "{sign}{mag}{n}")?;
            }
            first = false;
        }
        if self.constant != 0 || first {
            if first {
                write!(f, "{}", self.constant)?;
            } else {
                write!(f, "{:+}", self.constant)?;
            }
        }
        Ok(())
    }
}

/// How the bits of a [`LinearSum`] encode the expression value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumKind {
    /// Two's complement value of the expression.
    Signed,
    /// Unsigned value of the expression (all terms non-negative).
    Unsigned,
    /// Unsigned value of the negated expression (all terms non-positive).
    NegatedUnsigned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSum {
    pub name: String,
    pub bits: Vec<Lit>,
    pub kind: SumKind,
}

impl LinearSum {
    pub fn width(&self) -> usize {
        self.bits.len()
    }

    /// Expression value under a model.
    pub fn value(&self, model: impl Fn(Lit) -> bool) -> i128 {
        match self.kind {
            SumKind::Signed => read_signed(&self.bits, model),
            SumKind::Unsigned => read_unsigned(&self.bits, model),
            SumKind::NegatedUnsigned => -read_unsigned(&self.bits, model),
        }
    }
}

/// Smallest `n` with `2^n >= x`.
fn ceil_log2(x: u128) -> usize {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros() as usize
    }
}

fn magnitude(width: usize, signed: bool) -> u128 {
    if signed {
        1u128 << (width - 1)
    } else {
        (1u128 << width) - 1
    }
}

/// Builds the circuit for `expr`. Sums of unsigned vectors with uniformly
/// signed coefficients get an unsigned result vector of the minimal width;
/// everything else gets a signed vector of `1 + ⌈log₂(1 + M)⌉` bits, where
/// `M` bounds the magnitude of the sum.
pub fn encode_linear(b: &mut Builder, vars: &mut VarMap, expr: &LinearExpr) -> Result<LinearSum, EncodeError> {
    encode_linear_as(b, vars, expr, false)
}

pub fn encode_linear_as(
    b: &mut Builder,
    vars: &mut VarMap,
    expr: &LinearExpr,
    force_signed: bool,
) -> Result<LinearSum, EncodeError> {
    let mut ops = Vec::with_capacity(expr.terms.len());
    for (c, name) in &expr.terms {
        let e = vars.get(name).ok_or_else(|| EncodeError::UnknownName(name.clone()))?;
        ops.push((*c, e.lits.clone(), e.signed));
    }
    let all_unsigned = ops.iter().all(|(_, _, s)| !s);
    let kind = if force_signed || !all_unsigned || ops.is_empty() {
        SumKind::Signed
    } else if ops.iter().all(|(c, _, _)| *c > 0) && expr.constant >= 0 {
        SumKind::Unsigned
    } else if ops.iter().all(|(c, _, _)| *c < 0) && expr.constant <= 0 {
        SumKind::NegatedUnsigned
    } else {
        SumKind::Signed
    };
    let too_wide = || EncodeError::TooWide(129);
    let mut bound: u128 = expr.constant.unsigned_abs();
    for (c, lits, s) in &ops {
        if lits.len() >= 127 {
            return Err(too_wide());
        }
        let m = c.unsigned_abs().checked_mul(magnitude(lits.len(), *s)).ok_or_else(too_wide)?;
        bound = bound.checked_add(m).ok_or_else(too_wide)?;
    }
    let width = match kind {
        SumKind::Signed => 1 + ceil_log2(bound.checked_add(1).ok_or_else(too_wide)?),
        _ => ceil_log2(bound.checked_add(1).ok_or_else(too_wide)?).max(1),
    };
    if width > 128 {
        return Err(EncodeError::TooWide(width));
    }
    let sign = if kind == SumKind::NegatedUnsigned { -1 } else { 1 };
    let mut acc = b.const_vec(sign * expr.constant, width);
    for (c, lits, s) in &ops {
        let ext = if *s { b.sext(lits, width) } else { b.zext(lits, width) };
        let term = b.mul_const(&ext, sign * c);
        let f = b.constant(false);
        acc = b.add(&acc, &term, f).0;
    }
    let name = vars.insert_fresh("lin", acc.clone(), kind == SumKind::Signed);
    Ok(LinearSum { name, bits: acc, kind })
}

/// Exact product of named vectors as a signed vector of `Σ k_i + 1` bits
/// (unsigned factors count one extra bit).
pub fn encode_monomial(b: &mut Builder, vars: &mut VarMap, names: &[&str]) -> Result<String, EncodeError> {
    assert!(names.len() >= 2, "a monomial has at least two factors");
    let mut factors = Vec::new();
    for &n in names {
        let e = vars.get(n).ok_or_else(|| EncodeError::UnknownName(n.into()))?;
        factors.push((e.lits.clone(), e.signed));
    }
    let width: usize = factors.iter().map(|(l, s)| l.len() + usize::from(!s)).sum::<usize>() + 1;
    if width > 128 {
        return Err(EncodeError::TooWide(width));
    }
    let product = multiply_exact(b, &factors, width);
    Ok(vars.insert_fresh("mono", product, true))
}

fn multiply_exact(b: &mut Builder, factors: &[(Vec<Lit>, bool)], width: usize) -> Vec<Lit> {
    let ext = |b: &mut Builder, (l, s): &(Vec<Lit>, bool)| if *s { b.sext(l, width) } else { b.zext(l, width) };
    let mut acc = ext(b, &factors[0]);
    for f in &factors[1..] {
        let x = ext(b, f);
        acc = b.mul(&acc, &x);
    }
    acc
}

/// Largest (or smallest) product over the corners of a box given as signed
/// `(lo, hi)` vector pairs per factor. The result has width `Σ k_i + 1`.
pub fn encode_corner_aggregate(b: &mut Builder, factors: &[(Vec<Lit>, Vec<Lit>)], maximize: bool) -> Vec<Lit> {
    let width: usize = factors.iter().map(|(lo, hi)| lo.len().max(hi.len())).sum::<usize>() + 1;
    let k = factors.len();
    let mut best: Option<Vec<Lit>> = None;
    for corner in 0..1usize << k {
        let picked: Vec<(Vec<Lit>, bool)> = factors
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| (if corner >> i & 1 == 1 { hi.clone() } else { lo.clone() }, true))
            .collect();
        let p = multiply_exact(b, &picked, width);
        best = Some(match best {
            None => p,
            Some(q) if maximize => b.smax(&q, &p),
            Some(q) => b.smin(&q, &p),
        });
    }
    best.expect("at least one corner")
}

/// A row `Σ c_i·v_i = constant` over named vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub terms: Vec<(i128, String)>,
    pub constant: i128,
}

impl Row {
    fn difference(&self) -> LinearExpr {
        LinearExpr { terms: self.terms.clone(), constant: -self.constant }
    }
}

/// Literal that holds exactly when at least one row is violated. With no
/// rows the result is the constant false.
pub fn encode_row_violation(b: &mut Builder, vars: &mut VarMap, rows: &[Row]) -> Result<Lit, EncodeError> {
    let mut viol = Vec::with_capacity(rows.len());
    for r in rows {
        let s = encode_linear_as(b, vars, &r.difference(), true)?;
        let z = b.is_zero(&s.bits);
        viol.push(!z);
    }
    Ok(b.or_all(&viol))
}

/// Literal that holds exactly when `Σ c_i·v_i > constant`.
pub fn encode_strict_violation(b: &mut Builder, vars: &mut VarMap, row: &Row) -> Result<Lit, EncodeError> {
    let s = encode_linear_as(b, vars, &row.difference(), true)?;
    let z = b.is_zero(&s.bits);
    let neg = *s.bits.last().expect("non-empty sum");
    Ok(b.and(!z, !neg))
}
