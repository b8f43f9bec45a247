//! Integers extended with ±∞.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtInt {
    NegInf,
    Fin(BigInt),
    PosInf,
}

impl ExtInt {
    pub fn fin(v: impl Into<BigInt>) -> ExtInt {
        ExtInt::Fin(v.into())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtInt::Fin(_))
    }

    pub fn finite(&self) -> Option<&BigInt> {
        match self {
            ExtInt::Fin(v) => Some(v),
            _ => None,
        }
    }

    /// Scales by an integer; `0·±∞` is taken as 0.
    pub fn scale(&self, k: &BigInt) -> ExtInt {
        if k.is_zero() {
            return ExtInt::fin(0);
        }
        match self {
            ExtInt::Fin(v) => ExtInt::Fin(v * k),
            inf if k.is_positive() => inf.clone(),
            inf => -inf.clone(),
        }
    }

    /// `⌊self / k⌋` for `k > 0`.
    pub fn div_floor(&self, k: &BigInt) -> ExtInt {
        debug_assert!(k.is_positive());
        match self {
            ExtInt::Fin(v) => ExtInt::Fin(v.div_floor(k)),
            inf => inf.clone(),
        }
    }
}

impl From<i128> for ExtInt {
    fn from(v: i128) -> ExtInt {
        ExtInt::Fin(BigInt::from(v))
    }
}

impl From<BigInt> for ExtInt {
    fn from(v: BigInt) -> ExtInt {
        ExtInt::Fin(v)
    }
}

impl Ord for ExtInt {
    fn cmp(&self, other: &ExtInt) -> Ordering {
        use ExtInt::*;
        match (self, other) {
            (Fin(a), Fin(b)) => a.cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
        }
    }
}

impl PartialOrd for ExtInt {
    fn partial_cmp(&self, other: &ExtInt) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Addition saturating towards +∞: `+∞ + −∞ = +∞`, the sound choice for
/// upper bounds.
impl Add for ExtInt {
    type Output = ExtInt;
    fn add(self, other: ExtInt) -> ExtInt {
        use ExtInt::*;
        match (self, other) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Fin(a), Fin(b)) => Fin(a + b),
        }
    }
}

impl Neg for ExtInt {
    type Output = ExtInt;
    fn neg(self) -> ExtInt {
        match self {
            ExtInt::NegInf => ExtInt::PosInf,
            ExtInt::PosInf => ExtInt::NegInf,
            ExtInt::Fin(v) => ExtInt::Fin(-v),
        }
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::NegInf => f.write_str("-inf"),
            ExtInt::PosInf => f.write_str("+inf"),
            ExtInt::Fin(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for ExtInt {
    type Err = String;
    fn from_str(s: &str) -> Result<ExtInt, String> {
        match s.trim() {
            "-inf" => Ok(ExtInt::NegInf),
            "+inf" | "inf" => Ok(ExtInt::PosInf),
            t => BigInt::from_str(t).map(ExtInt::Fin).map_err(|_| format!("bad bound {t:?}")),
        }
    }
}

impl Serialize for ExtInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<ExtInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde helpers writing `BigInt` as a decimal string.
pub mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(serde::de::Error::custom)
    }
}
