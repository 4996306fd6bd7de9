//! Exact rational numbers extended with a single `+inf` marker.
//!
//! Every model quantity (bounds, capacities, susceptances, angles, costs) is an
//! [`ExtRational`]. Infinity only ever stands for an absent upper bound: it can be
//! compared, printed and parsed, but arithmetic on it is rejected.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("arithmetic on +inf")]
    InfiniteOperand,
    #[error("cannot parse {0:?} as a rational (expected \"p\", \"p/q\" or \"inf\")")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// A rational number or `+inf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinity,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(Rational::zero())
    }

    pub fn one() -> Self {
        ExtRational::Finite(Rational::one())
    }

    pub fn int(v: i64) -> Self {
        ExtRational::Finite(Rational::from_integer(BigInt::from(v)))
    }

    /// `num / den`, reduced. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        ExtRational::Finite(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinity => None,
        }
    }

    pub fn try_finite(&self) -> Result<&Rational, RationalError> {
        self.finite().ok_or(RationalError::InfiniteOperand)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtRational::Finite(r) if r.is_zero())
    }

    pub fn is_positive(&self) -> bool {
        match self {
            ExtRational::Finite(r) => r.is_positive(),
            ExtRational::Infinity => true,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, ExtRational::Finite(r) if r.is_negative())
    }

    pub fn checked_add(&self, other: &ExtRational) -> Result<ExtRational, RationalError> {
        Ok(ExtRational::Finite(self.try_finite()? + other.try_finite()?))
    }

    pub fn checked_sub(&self, other: &ExtRational) -> Result<ExtRational, RationalError> {
        Ok(ExtRational::Finite(self.try_finite()? - other.try_finite()?))
    }

    pub fn checked_mul(&self, other: &ExtRational) -> Result<ExtRational, RationalError> {
        Ok(ExtRational::Finite(self.try_finite()? * other.try_finite()?))
    }

    /// Sum of finite values; `+inf` if any term is infinite.
    ///
    /// This is the one place where infinity is allowed to absorb arithmetic: it is
    /// used for aggregate upper bounds, where an absent bound stays absent.
    pub fn saturating_sum<'a>(values: impl IntoIterator<Item = &'a ExtRational>) -> ExtRational {
        let mut acc = Rational::zero();
        for v in values {
            match v {
                ExtRational::Finite(r) => acc += r,
                ExtRational::Infinity => return ExtRational::Infinity,
            }
        }
        ExtRational::Finite(acc)
    }

    pub fn min_of(a: &ExtRational, b: &ExtRational) -> ExtRational {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max_of(a: &ExtRational, b: &ExtRational) -> ExtRational {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        ExtRational::Finite(r)
    }
}

impl From<i64> for ExtRational {
    fn from(v: i64) -> Self {
        ExtRational::int(v)
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
            (ExtRational::Finite(_), ExtRational::Infinity) => Ordering::Less,
            (ExtRational::Infinity, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Infinity, ExtRational::Infinity) => Ordering::Equal,
        }
    }
}

/// Formats as `p` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` (optionally signed) into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, RationalError> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| RationalError::Parse(s.to_string()))?;
    let den: BigInt = den.parse().map_err(|_| RationalError::Parse(s.to_string()))?;
    if den.is_zero() {
        return Err(RationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => f.write_str(&format_rational(r)),
            ExtRational::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtRational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "+inf" {
            return Ok(ExtRational::Infinity);
        }
        parse_rational(t).map(ExtRational::Finite)
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(v) => Ok(ExtRational::int(v)),
        }
    }
}

/// Serde adapter for plain [`Rational`] fields, using the same `p/q` text form.
pub mod rational_text {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_to_lowest_terms() {
        let r: ExtRational = "3/6".parse().unwrap();
        assert_eq!(r, ExtRational::ratio(1, 2));
        assert_eq!(r.to_string(), "1/2");
        assert_eq!("-4/2".parse::<ExtRational>().unwrap().to_string(), "-2");
        assert_eq!("4/-6".parse::<ExtRational>().unwrap().to_string(), "-2/3");
    }

    #[test]
    fn infinity_round_trip_and_order() {
        let inf: ExtRational = "inf".parse().unwrap();
        assert!(inf.is_infinite());
        assert_eq!(inf.to_string(), "inf");
        assert!(ExtRational::int(1_000_000) < inf);
        assert_eq!(ExtRational::min_of(&inf, &ExtRational::int(3)), ExtRational::int(3));
    }

    #[test]
    fn rejects_garbage() {
        assert!("1/0".parse::<ExtRational>().is_err());
        assert!("abc".parse::<ExtRational>().is_err());
        assert!("1.5".parse::<ExtRational>().is_err());
    }

    #[test]
    fn arithmetic_on_infinity_is_an_error() {
        let inf = ExtRational::Infinity;
        assert_eq!(inf.checked_add(&ExtRational::one()), Err(RationalError::InfiniteOperand));
        assert_eq!(
            ExtRational::ratio(1, 2).checked_add(&ExtRational::ratio(1, 3)).unwrap(),
            ExtRational::ratio(5, 6)
        );
        assert!(ExtRational::saturating_sum([&ExtRational::one(), &inf]).is_infinite());
    }

    #[test]
    fn serde_accepts_strings_and_integers() {
        let v: Vec<ExtRational> = serde_json::from_str(r#"["2/4", 3, "inf"]"#).unwrap();
        assert_eq!(v, vec![ExtRational::ratio(1, 2), ExtRational::int(3), ExtRational::Infinity]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1/2","3","inf"]"#);
    }
}
