//! Affine equalities over exact rationals: affine hulls of integer points,
//! kept in generator form with the basis in reduced row echelon form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AffineError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("the empty space has no constraint form")]
    Empty,
    #[error("row {0} relates outputs to one another only")]
    Unliftable(usize),
}

/// `Σ coeffs_i·x_i = constant`, integer, gcd 1, leading coefficient positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineEquation {
    pub coeffs: Vec<BigInt>,
    pub constant: BigInt,
}

impl AffineEquation {
    pub fn eval(&self, v: &[BigInt]) -> BigInt {
        self.coeffs.iter().zip(v).map(|(c, x)| c * x).sum()
    }

    pub fn holds(&self, v: &[BigInt]) -> bool {
        self.eval(v) == self.constant
    }

    /// Integerises a rational row and normalises sign and content.
    pub fn from_rational(coeffs: &[Q], constant: &Q) -> AffineEquation {
        let mut den = BigInt::one();
        for q in coeffs.iter().chain(std::iter::once(constant)) {
            den = den.lcm(q.denom());
        }
        let scale = |q: &Q| (q * Q::from_integer(den.clone())).to_integer();
        let mut c: Vec<BigInt> = coeffs.iter().map(scale).collect();
        let mut k = scale(constant);
        let mut g = k.abs();
        for x in &c {
            g = g.gcd(x);
        }
        if !g.is_zero() && !g.is_one() {
            c.iter_mut().for_each(|x| *x /= &g);
            k /= &g;
        }
        if c.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            c.iter_mut().for_each(|x| *x = -&*x);
            k = -k;
        }
        AffineEquation { coeffs: c, constant: k }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let mut s = String::new();
        for (c, n) in self.coeffs.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if s.is_empty() { "" } else { "+" };
            let mag = c.abs();
            if mag.is_one() {
                s += &format!("{sign}{n}");
            } else {
                s += &format!("{sign}{mag}{n}");
            }
        }
        if s.is_empty() {
            s.push('0');
        }
        format!("{s} = {}", self.constant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Generators {
    point: Vec<Q>,
    /// Reduced row echelon form; `pivots[i]` is the leading column of row i.
    basis: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

/// An affine subspace of ℚⁿ, or the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSpace {
    dim: usize,
    gens: Option<Generators>,
}

fn to_q(v: &[BigInt]) -> Vec<Q> {
    v.iter().map(|x| Q::from_integer(x.clone())).collect()
}

/// Reduces `v` against an RREF basis in place.
fn reduce(basis: &[Vec<Q>], pivots: &[usize], v: &mut [Q]) {
    for (row, &p) in basis.iter().zip(pivots) {
        if v[p].is_zero() {
            continue;
        }
        let f = v[p].clone();
        for (x, b) in v.iter_mut().zip(row) {
            if !b.is_zero() {
                *x -= &f * b;
            }
        }
    }
}

/// Inserts `v` into an RREF basis if independent; returns whether it grew.
fn insert(basis: &mut Vec<Vec<Q>>, pivots: &mut Vec<usize>, mut v: Vec<Q>) -> bool {
    reduce(basis, pivots, &mut v);
    let Some(p) = v.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    let lead = v[p].clone();
    v.iter_mut().for_each(|x| *x /= &lead);
    for row in basis.iter_mut() {
        if row[p].is_zero() {
            continue;
        }
        let f = row[p].clone();
        for (x, b) in row.iter_mut().zip(&v) {
            if !b.is_zero() {
                *x -= &f * b;
            }
        }
    }
    let at = pivots.iter().position(|&q| q > p).unwrap_or(pivots.len());
    basis.insert(at, v);
    pivots.insert(at, p);
    true
}

/// Reduced row echelon form of `rows` (each of length `n + 1`, the last entry
/// being the constant), dropping zero rows.
pub fn rref(rows: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let mut basis = Vec::new();
    let mut pivots = Vec::new();
    for r in rows {
        insert(&mut basis, &mut pivots, r);
    }
    basis
}

impl AffineSpace {
    pub fn empty(dim: usize) -> AffineSpace {
        AffineSpace { dim, gens: None }
    }

    pub fn universe(dim: usize) -> AffineSpace {
        let basis: Vec<Vec<Q>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        AffineSpace { dim, gens: Some(Generators { point: vec![Q::zero(); dim], basis, pivots: (0..dim).collect() }) }
    }

    pub fn from_point(v: &[BigInt]) -> AffineSpace {
        AffineSpace { dim: v.len(), gens: Some(Generators { point: to_q(v), basis: Vec::new(), pivots: Vec::new() }) }
    }

    /// The solution set of integer equations; empty if inconsistent.
    pub fn from_equations(dim: usize, eqs: &[AffineEquation]) -> AffineSpace {
        let rows: Vec<Vec<Q>> = eqs
            .iter()
            .map(|e| {
                let mut r = to_q(&e.coeffs);
                r.push(Q::from_integer(e.constant.clone()));
                r
            })
            .collect();
        let red = rref(rows);
        let mut point = vec![Q::zero(); dim];
        let mut pivot_cols = Vec::new();
        for r in &red {
            let p = r.iter().position(|x| !x.is_zero()).expect("non-zero row");
            if p == dim {
                return AffineSpace::empty(dim);
            }
            point[p] = r[dim].clone();
            pivot_cols.push(p);
        }
        let mut space = AffineSpace { dim, gens: Some(Generators { point, basis: Vec::new(), pivots: Vec::new() }) };
        let g = space.gens.as_mut().expect("non-empty");
        for f in (0..dim).filter(|c| !pivot_cols.contains(c)) {
            let mut v = vec![Q::zero(); dim];
            v[f] = Q::one();
            for (r, &p) in red.iter().zip(&pivot_cols) {
                v[p] = -r[f].clone();
            }
            insert(&mut g.basis, &mut g.pivots, v);
        }
        space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_none()
    }

    /// Dimension of the space as an affine set; `None` when empty.
    pub fn rank(&self) -> Option<usize> {
        self.gens.as_ref().map(|g| g.basis.len())
    }

    pub fn join(&self, other: &AffineSpace) -> Result<AffineSpace, AffineError> {
        if self.dim != other.dim {
            return Err(AffineError::Dimension(self.dim, other.dim));
        }
        let (a, b) = match (&self.gens, &other.gens) {
            (None, _) => return Ok(other.clone()),
            (_, None) => return Ok(self.clone()),
            (Some(a), Some(b)) => (a, b),
        };
        let mut g = a.clone();
        let offset: Vec<Q> = b.point.iter().zip(&a.point).map(|(x, y)| x - y).collect();
        insert(&mut g.basis, &mut g.pivots, offset);
        for v in &b.basis {
            insert(&mut g.basis, &mut g.pivots, v.clone());
        }
        Ok(AffineSpace { dim: self.dim, gens: Some(g) })
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.contains_q(&to_q(v))
    }

    pub fn contains_q(&self, v: &[Q]) -> bool {
        let Some(g) = &self.gens else { return false };
        if v.len() != self.dim {
            return false;
        }
        let mut d: Vec<Q> = v.iter().zip(&g.point).map(|(x, y)| x - y).collect();
        reduce(&g.basis, &g.pivots, &mut d);
        d.iter().all(Zero::is_zero)
    }

    /// Canonical constraint rows: the reduced echelon form of the equation
    /// system, one row per missing dimension.
    pub fn to_constraints(&self) -> Result<Vec<AffineEquation>, AffineError> {
        let g = self.gens.as_ref().ok_or(AffineError::Empty)?;
        let n = self.dim;
        let mut rows = Vec::new();
        for f in (0..n).filter(|c| !g.pivots.contains(c)) {
            let mut c = vec![Q::zero(); n];
            c[f] = Q::one();
            for (row, &p) in g.basis.iter().zip(&g.pivots) {
                c[p] = -row[f].clone();
            }
            let k: Q = c.iter().zip(&g.point).map(|(a, b)| a * b).sum();
            c.push(k);
            rows.push(c);
        }
        Ok(rref(rows)
            .iter()
            .map(|r| AffineEquation::from_rational(&r[..n], &r[n]))
            .collect())
    }
}

impl fmt::Display for AffineSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_constraints() {
            Err(_) => f.write_str("EMPTY"),
            Ok(rows) => {
                let names: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
                let parts: Vec<String> = rows.iter().map(|r| r.display_with(&names)).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
        }
    }
}

/// `λ·x_output = Σ c·x + constant` with `λ > 0` and the right-hand side over
/// non-output columns only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputEquation {
    pub output: usize,
    pub lambda: BigInt,
    pub terms: Vec<(usize, BigInt)>,
    pub constant: BigInt,
}

/// Splits canonical rows into one equation per bound output column
/// (`0..outputs`). Rows whose leading column is not an output constrain the
/// inputs only and are skipped; rows that tie two outputs together are
/// reported in the second component.
pub fn solve_for_outputs(rows: &[AffineEquation], outputs: usize) -> (Vec<OutputEquation>, Vec<AffineError>) {
    let mut eqs = Vec::new();
    let mut errs = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let Some(p) = r.coeffs.iter().position(|x| !x.is_zero()) else { continue };
        if p >= outputs {
            continue;
        }
        if r.coeffs[p + 1..outputs].iter().any(|x| !x.is_zero()) {
            errs.push(AffineError::Unliftable(i));
            continue;
        }
        let terms = r.coeffs[outputs..]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (outputs + j, -c))
            .collect();
        eqs.push(OutputEquation { output: p, lambda: r.coeffs[p].clone(), terms, constant: r.constant.clone() });
    }
    (eqs, errs)
}
