//! Bit-blasting into CNF. Gates are Tseitin-encoded with constant folding
//! and structural hashing; bit-vectors are literal lists, LSB first.

mod block;
mod linear;

pub use block::{encode_block, BlockEncoding, InstrEncoding};
pub use block::{input_name, output_name};
pub use linear::{
    encode_corner_aggregate, encode_linear, encode_linear_as, encode_monomial, encode_row_violation,
    encode_strict_violation, LinearExpr, LinearSum, Row, SumKind,
};

use crate::sat::{Cnf, Lit};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("width {0} outside [4, 64]")]
    Width(u32),
    #[error("mode {mode} not in the alphabet of instruction {instr}")]
    Mode { instr: usize, mode: char },
    #[error("unknown vector {0:?}")]
    UnknownName(String),
    #[error("value {value} does not fit the {width}-bit vector {name:?}")]
    OutOfRange { name: String, value: i128, width: usize },
    #[error("circuit width {0} exceeds 128 bits")]
    TooWide(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarEntry {
    pub lits: Vec<Lit>,
    /// Read as two's complement when set, otherwise as unsigned.
    pub signed: bool,
}

/// Named bit-vectors of an encoding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarMap {
    entries: BTreeMap<String, VarEntry>,
    anon: usize,
}

impl VarMap {
    pub fn insert(&mut self, name: &str, lits: Vec<Lit>, signed: bool) {
        self.entries.insert(name.to_string(), VarEntry { lits, signed });
    }

    /// Registers a vector under a generated `prefix#n` name.
    pub fn insert_fresh(&mut self, prefix: &str, lits: Vec<Lit>, signed: bool) -> String {
        let name = format!("{prefix}#{}", self.anon);
        self.anon += 1;
        self.insert(&name, lits, signed);
        name
    }

    pub fn get(&self, name: &str) -> Option<&VarEntry> {
        self.entries.get(name)
    }

    pub fn lits(&self, name: &str) -> Result<&[Lit], EncodeError> {
        self.get(name).map(|e| e.lits.as_slice()).ok_or_else(|| EncodeError::UnknownName(name.into()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Gate {
    And(Lit, Lit),
    Xor(Lit, Lit),
    Mux(Lit, Lit, Lit),
}

/// Owns a growing clause list and builds gates into it.
#[derive(Debug, Clone)]
pub struct Builder {
    pub cnf: Cnf,
    truth: Lit,
    cache: HashMap<Gate, Lit>,
}

impl Default for Builder {
    fn default() -> Self {
        Builder::new()
    }
}

impl Builder {
    pub fn new() -> Builder {
        let mut cnf = Cnf::new();
        let truth = cnf.new_var();
        cnf.add_clause(&[truth]);
        Builder { cnf, truth, cache: HashMap::new() }
    }

    pub fn constant(&self, b: bool) -> Lit {
        if b {
            self.truth
        } else {
            !self.truth
        }
    }

    pub fn const_of(&self, l: Lit) -> Option<bool> {
        if l == self.truth {
            Some(true)
        } else if l == !self.truth {
            Some(false)
        } else {
            None
        }
    }

    pub fn fresh(&mut self) -> Lit {
        self.cnf.new_var()
    }

    pub fn fresh_vec(&mut self, width: usize) -> Vec<Lit> {
        (0..width).map(|_| self.fresh()).collect()
    }

    pub fn clause(&mut self, lits: &[Lit]) {
        self.cnf.add_clause(lits);
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.const_of(a), self.const_of(b)) {
            (Some(false), _) | (_, Some(false)) => return self.constant(false),
            (Some(true), _) => return b,
            (_, Some(true)) => return a,
            _ => {}
        }
        if a == b {
            return a;
        }
        if a == !b {
            return self.constant(false);
        }
        let key = if a < b { Gate::And(a, b) } else { Gate::And(b, a) };
        if let Some(&x) = self.cache.get(&key) {
            return x;
        }
        let x = self.fresh();
        self.clause(&[!x, a]);
        self.clause(&[!x, b]);
        self.clause(&[x, !a, !b]);
        self.cache.insert(key, x);
        x
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.const_of(a), self.const_of(b)) {
            (Some(x), _) => return if x { !b } else { b },
            (_, Some(y)) => return if y { !a } else { a },
            _ => {}
        }
        if a == b {
            return self.constant(false);
        }
        if a == !b {
            return self.constant(true);
        }
        // Normalise polarity so x ^ y, !x ^ y, ... share one gate.
        let flip = a.is_negative() ^ b.is_negative();
        let (pa, pb) = (Lit::pos(a.var()), Lit::pos(b.var()));
        let key = if pa < pb { Gate::Xor(pa, pb) } else { Gate::Xor(pb, pa) };
        let x = match self.cache.get(&key) {
            Some(&x) => x,
            None => {
                let x = self.fresh();
                self.clause(&[!x, pa, pb]);
                self.clause(&[!x, !pa, !pb]);
                self.clause(&[x, !pa, pb]);
                self.clause(&[x, pa, !pb]);
                self.cache.insert(key, x);
                x
            }
        };
        if flip {
            !x
        } else {
            x
        }
    }

    pub fn equiv(&mut self, a: Lit, b: Lit) -> Lit {
        !self.xor(a, b)
    }

    /// `s ? a : b`
    pub fn mux(&mut self, s: Lit, a: Lit, b: Lit) -> Lit {
        match self.const_of(s) {
            Some(true) => return a,
            Some(false) => return b,
            None => {}
        }
        if a == b {
            return a;
        }
        match (self.const_of(a), self.const_of(b)) {
            (Some(true), _) => return self.or(s, b),
            (Some(false), _) => return self.and(!s, b),
            (_, Some(true)) => return self.or(!s, a),
            (_, Some(false)) => return self.and(s, a),
            _ => {}
        }
        let key = Gate::Mux(s, a, b);
        if let Some(&x) = self.cache.get(&key) {
            return x;
        }
        let x = self.fresh();
        self.clause(&[!s, !a, x]);
        self.clause(&[!s, a, !x]);
        self.clause(&[s, !b, x]);
        self.clause(&[s, b, !x]);
        self.cache.insert(key, x);
        x
    }

    pub fn and_all(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().fold(self.constant(true), |acc, &l| self.and(acc, l))
    }

    pub fn or_all(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().fold(self.constant(false), |acc, &l| self.or(acc, l))
    }

    /// Returns `(sum, carry)`.
    pub fn full_add(&mut self, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
        let ab = self.xor(a, b);
        let sum = self.xor(ab, c);
        let g = self.and(a, b);
        let p = self.and(ab, c);
        let carry = self.or(g, p);
        (sum, carry)
    }

    // Bit-vector layer.

    pub fn const_vec(&self, value: i128, width: usize) -> Vec<Lit> {
        (0..width).map(|i| self.constant(i < 128 && (value >> i) & 1 == 1 || i >= 128 && value < 0)).collect()
    }

    pub fn sext(&self, a: &[Lit], width: usize) -> Vec<Lit> {
        let mut v = a.to_vec();
        let top = *a.last().expect("empty vector");
        v.resize(width.max(a.len()), top);
        v.truncate(width);
        v
    }

    pub fn zext(&self, a: &[Lit], width: usize) -> Vec<Lit> {
        let mut v = a.to_vec();
        v.resize(width.max(a.len()), self.constant(false));
        v.truncate(width);
        v
    }

    /// Ripple-carry addition of equal-width vectors; returns sum and carry-out.
    pub fn add(&mut self, a: &[Lit], b: &[Lit], cin: Lit) -> (Vec<Lit>, Lit) {
        assert_eq!(a.len(), b.len());
        let mut c = cin;
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let (s, co) = self.full_add(x, y, c);
            out.push(s);
            c = co;
        }
        (out, c)
    }

    pub fn not_vec(&self, a: &[Lit]) -> Vec<Lit> {
        a.iter().map(|&l| !l).collect()
    }

    pub fn neg(&mut self, a: &[Lit]) -> Vec<Lit> {
        let zero = self.const_vec(0, a.len());
        let na = self.not_vec(a);
        self.add(&na, &zero, self.constant(true)).0
    }

    pub fn sub(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let nb = self.not_vec(b);
        self.add(a, &nb, self.constant(true)).0
    }

    /// Product modulo `2^len`, shift-and-add.
    pub fn mul(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        assert_eq!(a.len(), b.len());
        let w = a.len();
        let mut acc = self.const_vec(0, w);
        for (j, &bj) in b.iter().enumerate() {
            if self.const_of(bj) == Some(false) {
                continue;
            }
            let mut partial = self.const_vec(0, w);
            for i in 0..w - j {
                partial[i + j] = self.and(a[i], bj);
            }
            acc = self.add(&acc, &partial, self.constant(false)).0;
        }
        acc
    }

    /// `c·a` modulo `2^len(a)`.
    pub fn mul_const(&mut self, a: &[Lit], c: i128) -> Vec<Lit> {
        let w = a.len();
        let mag = c.unsigned_abs();
        let mut acc = self.const_vec(0, w);
        for j in 0..w.min(128) {
            if mag >> j & 1 == 0 {
                continue;
            }
            let mut shifted = self.const_vec(0, w);
            shifted[j..].copy_from_slice(&a[..w - j]);
            acc = self.add(&acc, &shifted, self.constant(false)).0;
        }
        if c < 0 {
            self.neg(&acc)
        } else {
            acc
        }
    }

    pub fn eq(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        assert_eq!(a.len(), b.len());
        let bits: Vec<Lit> = a.iter().zip(b).map(|(&x, &y)| self.equiv(x, y)).collect();
        self.and_all(&bits)
    }

    pub fn is_zero(&mut self, a: &[Lit]) -> Lit {
        let nz = self.or_all(a);
        !nz
    }

    pub fn ult(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        assert_eq!(a.len(), b.len());
        let mut lt = self.constant(false);
        for (&x, &y) in a.iter().zip(b) {
            let here = self.and(!x, y);
            let same = self.equiv(x, y);
            let keep = self.and(same, lt);
            lt = self.or(here, keep);
        }
        lt
    }

    pub fn slt(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut fa = a.to_vec();
        let mut fb = b.to_vec();
        let top = a.len() - 1;
        fa[top] = !fa[top];
        fb[top] = !fb[top];
        self.ult(&fa, &fb)
    }

    pub fn select(&mut self, s: Lit, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        a.iter().zip(b).map(|(&x, &y)| self.mux(s, x, y)).collect()
    }

    pub fn smax(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let lt = self.slt(a, b);
        self.select(lt, b, a)
    }

    pub fn smin(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let lt = self.slt(a, b);
        self.select(lt, a, b)
    }

    /// Unit clauses fixing `a` to the low bits of `value`.
    pub fn fix(&mut self, a: &[Lit], value: i128) {
        for (i, &l) in a.iter().enumerate() {
            let bit = if i < 127 { value >> i & 1 == 1 } else { value < 0 };
            self.clause(&[if bit { l } else { !l }]);
        }
    }
}

/// Literals that pin `a` to `value`, for use as assumptions.
pub fn fix_assumptions(a: &[Lit], value: i128) -> Vec<Lit> {
    a.iter()
        .enumerate()
        .map(|(i, &l)| {
            let bit = if i < 127 { value >> i & 1 == 1 } else { value < 0 };
            if bit {
                l
            } else {
                !l
            }
        })
        .collect()
}

/// Signed value of a vector under a model.
pub fn read_signed(a: &[Lit], value: impl Fn(Lit) -> bool) -> i128 {
    let mut v: i128 = 0;
    for (i, &l) in a.iter().enumerate() {
        if value(l) {
            if i + 1 == a.len() {
                v -= 1i128 << i;
            } else {
                v |= 1i128 << i;
            }
        }
    }
    v
}

pub fn read_unsigned(a: &[Lit], value: impl Fn(Lit) -> bool) -> i128 {
    a.iter().enumerate().filter(|&(_, &l)| value(l)).fold(0i128, |v, (i, _)| v | 1i128 << i)
}

/// Checks `value` fits a vector of `width` bits read signed or unsigned.
pub fn fits(value: i128, width: usize, signed: bool) -> bool {
    if width >= 127 {
        return true;
    }
    if signed {
        let h = 1i128 << (width - 1);
        (-h..h).contains(&value)
    } else {
        (0..1i128 << width).contains(&value)
    }
}

/// Unit clauses pinning named vectors to constants.
pub fn encode_fix(b: &mut Builder, vars: &VarMap, pins: &[(&str, i128)]) -> Result<(), EncodeError> {
    for &(name, value) in pins {
        let e = vars.get(name).ok_or_else(|| EncodeError::UnknownName(name.into()))?;
        if !fits(value, e.lits.len(), e.signed) {
            return Err(EncodeError::OutOfRange { name: name.into(), value, width: e.lits.len() });
        }
        let lits = e.lits.clone();
        b.fix(&lits, value);
    }
    Ok(())
}
