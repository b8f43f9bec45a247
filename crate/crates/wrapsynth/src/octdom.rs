//! Integer octagons as difference-bound matrices over `2n` signed copies of
//! the variables: `v_{2k} = x_k`, `v_{2k+1} = −x_k`, and entry `m[i][j]`
//! bounds `v_j − v_i`.

use crate::ext::ExtInt;
use crate::template::Pattern;
use num_bigint::BigInt;
use num_integer::Integer;
use std::fmt;

type Bound = Option<BigInt>;

fn bmin(a: &Bound, b: &Bound) -> Bound {
    match (a, b) {
        (None, x) | (x, None) => x.clone(),
        (Some(x), Some(y)) => Some(x.min(y).clone()),
    }
}

fn badd(a: &Bound, b: &Bound) -> Bound {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

fn bar(i: usize) -> usize {
    i ^ 1
}

/// `c·x ≤ bound` for an octagonal pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateConstraint {
    pub pattern: Pattern,
    pub bound: ExtInt,
}

impl TemplateConstraint {
    pub fn new(pattern: Pattern, bound: impl Into<ExtInt>) -> TemplateConstraint {
        TemplateConstraint { pattern, bound: bound.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Octagon {
    n: usize,
    /// `None` is the empty octagon.
    m: Option<Vec<Vec<Bound>>>,
    closed: bool,
}

/// Matrix cell `(row, col)` and scale for an octagonal pattern:
/// `pattern·x ≤ c` is `v_col − v_row ≤ scale·c`.
pub(crate) fn cell(p: &Pattern) -> Option<(usize, usize, i64)> {
    if !p.is_octagonal() {
        return None;
    }
    let s = p.support();
    let idx = |(k, c): (usize, i64)| if c > 0 { 2 * k } else { 2 * k + 1 };
    Some(match s.as_slice() {
        [u] => {
            let a = idx(*u);
            (bar(a), a, 2)
        }
        [u, w] => (bar(idx(*w)), idx(*u), 1),
        _ => unreachable!(),
    })
}

impl Octagon {
    pub fn top(n: usize) -> Octagon {
        let mut m = vec![vec![None; 2 * n]; 2 * n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Some(BigInt::from(0));
        }
        Octagon { n, m: Some(m), closed: true }
    }

    pub fn bottom(n: usize) -> Octagon {
        Octagon { n, m: None, closed: true }
    }

    /// The box `lo_k ≤ x_k ≤ hi_k`, closed.
    pub fn from_box(bounds: &[(BigInt, BigInt)]) -> Octagon {
        let n = bounds.len();
        let mut o = Octagon::top(n);
        for (k, (lo, hi)) in bounds.iter().enumerate() {
            o.add(&Pattern::unit(n, k, 1), &ExtInt::Fin(hi.clone()));
            o.add(&Pattern::unit(n, k, -1), &ExtInt::Fin(-lo));
        }
        o.close()
    }

    pub fn from_point(x: &[BigInt]) -> Octagon {
        Octagon::from_box(&x.iter().map(|v| (v.clone(), v.clone())).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_bottom(&self) -> bool {
        self.m.is_none()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Adds `pattern·x ≤ bound` without closing. Non-octagonal patterns are
    /// ignored, which over-approximates.
    pub fn add(&mut self, pattern: &Pattern, bound: &ExtInt) {
        let Some(m) = &mut self.m else { return };
        let Some((i, j, scale)) = cell(pattern) else { return };
        let b = match bound {
            ExtInt::PosInf => return,
            ExtInt::NegInf => {
                self.m = None;
                return;
            }
            ExtInt::Fin(v) => v * scale,
        };
        let cur = &m[i][j];
        if cur.as_ref().is_none_or(|c| b < *c) {
            m[i][j] = Some(b.clone());
            m[bar(j)][bar(i)] = Some(b);
            self.closed = false;
        }
    }

    pub fn meet(&self, constraints: &[TemplateConstraint]) -> Octagon {
        let mut o = self.clone();
        for c in constraints {
            o.add(&c.pattern, &c.bound);
        }
        o.close()
    }

    /// Integer tight closure: shortest paths, even unary bounds, then
    /// strengthening through the unary bounds. Empty results become bottom.
    pub fn close(mut self) -> Octagon {
        if self.closed {
            return self;
        }
        let Some(m) = &mut self.m else { return self };
        let d = 2 * self.n;
        for k in 0..d {
            for i in 0..d {
                let Some(ik) = m[i][k].clone() else { continue };
                for j in 0..d {
                    if let Some(kj) = &m[k][j] {
                        let via = &ik + kj;
                        if m[i][j].as_ref().is_none_or(|c| via < *c) {
                            m[i][j] = Some(via);
                        }
                    }
                }
            }
        }
        if (0..d).any(|i| m[i][i].as_ref().is_some_and(|v| v.sign() == num_bigint::Sign::Minus)) {
            self.m = None;
            return self;
        }
        let two = BigInt::from(2);
        for i in 0..d {
            if let Some(v) = &m[i][bar(i)] {
                m[i][bar(i)] = Some(v.div_floor(&two) * &two);
            }
        }
        for i in 0..d {
            for j in 0..d {
                let s = badd(&m[i][bar(i)], &m[bar(j)][j]).map(|v| v.div_floor(&two));
                m[i][j] = bmin(&m[i][j], &s);
            }
        }
        for i in 0..d {
            let sum = badd(&m[i][bar(i)], &m[bar(i)][i]);
            if sum.is_some_and(|v| v.sign() == num_bigint::Sign::Minus) {
                self.m = None;
                return self;
            }
            if m[i][i].as_ref().is_some_and(|v| v.sign() == num_bigint::Sign::Minus) {
                self.m = None;
                return self;
            }
        }
        self.closed = true;
        self
    }

    /// Least upper bound of two closed octagons.
    pub fn join(&self, other: &Octagon) -> Octagon {
        assert_eq!(self.n, other.n, "octagons over different variables");
        let a = self.clone().close();
        let b = other.clone().close();
        let (ma, mb) = match (&a.m, &b.m) {
            (None, _) => return b,
            (_, None) => return a,
            (Some(x), Some(y)) => (x, y),
        };
        let m = ma
            .iter()
            .zip(mb)
            .map(|(ra, rb)| {
                ra.iter()
                    .zip(rb)
                    .map(|(x, y)| match (x, y) {
                        (Some(x), Some(y)) => Some(x.max(y).clone()),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        Octagon { n: self.n, m: Some(m), closed: true }
    }

    /// Tightest `d` with `pattern·x ≤ d`; `−∞` on bottom. Only meaningful on
    /// closed octagons and octagonal patterns (others give `+∞`).
    pub fn bound_of(&self, pattern: &Pattern) -> ExtInt {
        let Some(m) = &self.m else { return ExtInt::NegInf };
        let Some((i, j, scale)) = cell(pattern) else { return ExtInt::PosInf };
        match &m[i][j] {
            None => ExtInt::PosInf,
            Some(v) => ExtInt::Fin(v.div_floor(&BigInt::from(scale))),
        }
    }

    /// Inclusion on closed octagons.
    pub fn leq(&self, other: &Octagon) -> bool {
        let a = self.clone().close();
        let b = other.clone().close();
        match (&a.m, &b.m) {
            (None, _) => true,
            (_, None) => false,
            (Some(x), Some(y)) => x
                .iter()
                .zip(y)
                .all(|(rx, ry)| rx.iter().zip(ry).all(|(p, q)| q.as_ref().is_none_or(|q| p.as_ref().is_some_and(|p| p <= q)))),
        }
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        let Some(m) = &self.m else { return false };
        let v = |i: usize| if i % 2 == 0 { x[i / 2].clone() } else { -x[i / 2].clone() };
        let d = 2 * self.n;
        (0..d).all(|i| (0..d).all(|j| m[i][j].as_ref().is_none_or(|b| v(j) - v(i) <= *b)))
    }

    /// Unary bounds `[lo, hi]` of variable `k`.
    pub fn interval(&self, k: usize) -> (ExtInt, ExtInt) {
        let hi = self.bound_of(&Pattern::unit(self.n, k, 1));
        let lo = -self.bound_of(&Pattern::unit(self.n, k, -1));
        (lo, hi)
    }

    /// Finite constraints of the closed form, unary first, in pattern order
    /// of [`crate::template::TemplateSet::octagon`].
    pub fn constraints(&self) -> Vec<TemplateConstraint> {
        let t = crate::template::TemplateSet::octagon(self.n);
        t.patterns
            .into_iter()
            .filter_map(|p| {
                let b = self.bound_of(&p);
                b.is_finite().then_some(TemplateConstraint { pattern: p, bound: b })
            })
            .collect()
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_bottom() {
            return "BOTTOM".into();
        }
        let cs = self.constraints();
        if cs.is_empty() {
            return "TOP".into();
        }
        let parts: Vec<String> =
            cs.iter().map(|c| format!("{} <= {}", c.pattern.display_with(names), c.bound)).collect();
        parts.join(", ")
    }
}

impl fmt::Display for Octagon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.n).map(|i| format!("x{i}")).collect();
        f.write_str(&self.display_with(&names))
    }
}
