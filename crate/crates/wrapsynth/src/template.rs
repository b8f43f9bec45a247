//! Template inequalities: coefficient patterns over the tracked registers.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Coefficients of `Σ c_i·x_i`, dense over the tracked registers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern(pub Vec<i64>);

impl Pattern {
    pub fn unit(n: usize, var: usize, sign: i64) -> Pattern {
        let mut c = vec![0; n];
        c[var] = sign;
        Pattern(c)
    }

    pub fn pair(n: usize, (i, si): (usize, i64), (j, sj): (usize, i64)) -> Pattern {
        let mut c = vec![0; n];
        c[i] = si;
        c[j] = sj;
        Pattern(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn negate(&self) -> Pattern {
        Pattern(self.0.iter().map(|c| -c).collect())
    }

    /// Non-zero `(index, coefficient)` pairs.
    pub fn support(&self) -> Vec<(usize, i64)> {
        self.0.iter().enumerate().filter(|&(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect()
    }

    /// At most two non-zero coefficients, each ±1.
    pub fn is_octagonal(&self) -> bool {
        let s = self.support();
        !s.is_empty() && s.len() <= 2 && s.iter().all(|&(_, c)| c.abs() == 1)
    }

    pub fn is_unary(&self) -> bool {
        let s = self.support();
        s.len() == 1 && s[0].1.abs() == 1
    }

    pub fn eval(&self, x: &[i128]) -> i128 {
        self.0.iter().zip(x).map(|(&c, &v)| c as i128 * v).sum()
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let mut s = String::new();
        for (i, c) in self.support() {
            let sign = if c < 0 { "-" } else if s.is_empty() { "" } else { "+" };
            if c.abs() == 1 {
                let _ = write!(s, "{sign}{}", names[i]);
            } else {
                let _ = write!(s, "{sign}{}{}", c.abs(), names[i]);
            }
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Interval,
    #[default]
    Octagon,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("pattern {0} is zero")]
    Zero(usize),
    #[error("pattern {0} repeats an earlier one")]
    Duplicate(usize),
    #[error("pattern {0} has {1} coefficients, expected {2}")]
    Arity(usize, usize, usize),
}

/// An ordered, duplicate-free list of patterns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemplateSet {
    pub family: Family,
    pub patterns: Vec<Pattern>,
}

impl TemplateSet {
    /// `+x_i` for every i, then `−x_i` for every i.
    pub fn interval(n: usize) -> TemplateSet {
        let mut p: Vec<Pattern> = (0..n).map(|i| Pattern::unit(n, i, 1)).collect();
        p.extend((0..n).map(|i| Pattern::unit(n, i, -1)));
        TemplateSet { family: Family::Interval, patterns: p }
    }

    /// The interval patterns, then for each pair `i < j`:
    /// `x_i+x_j`, `−x_i−x_j`, `−x_i+x_j`, `x_i−x_j`.
    pub fn octagon(n: usize) -> TemplateSet {
        let mut t = TemplateSet::interval(n);
        for i in 0..n {
            for j in i + 1..n {
                for (si, sj) in [(1, 1), (-1, -1), (-1, 1), (1, -1)] {
                    t.patterns.push(Pattern::pair(n, (i, si), (j, sj)));
                }
            }
        }
        t.family = Family::Octagon;
        t
    }

    pub fn custom(n: usize, patterns: Vec<Pattern>) -> Result<TemplateSet, TemplateError> {
        for (k, p) in patterns.iter().enumerate() {
            if p.len() != n {
                return Err(TemplateError::Arity(k, p.len(), n));
            }
            if p.is_zero() {
                return Err(TemplateError::Zero(k));
            }
            if patterns[..k].contains(p) {
                return Err(TemplateError::Duplicate(k));
            }
        }
        Ok(TemplateSet { family: Family::Custom, patterns })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn index_of(&self, p: &Pattern) -> Option<usize> {
        self.patterns.iter().position(|q| q == p)
    }

    /// Number of tracked variables.
    pub fn arity(&self) -> usize {
        self.patterns.first().map_or(0, Pattern::len)
    }
}
