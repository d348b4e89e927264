//! Exact rational numbers and the rational-or-infinity extension used by rounding.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Shorthand for an integral rational.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Shorthand for `num / den`. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Formats a rational the way every file and report in this crate does: `p` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalLiteralError(pub String);

/// Parses `INT` or `INT/POSINT`. A leading `-` is accepted; callers decide whether negatives
/// are allowed.
pub fn parse_rational(text: &str) -> Result<Rational, RationalLiteralError> {
    let err = || RationalLiteralError(text.to_string());
    let parse_int = |s: &str, allow_sign: bool| -> Result<BigInt, RationalLiteralError> {
        let digits = if allow_sign { s.strip_prefix('-').unwrap_or(s) } else { s };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        BigInt::from_str(s).map_err(|_| err())
    };
    match text.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(text, true)?)),
        Some((num, den)) => {
            let num = parse_int(num, true)?;
            let den = parse_int(den, false)?;
            if den.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Largest integer `<= r`.
pub fn floor_int(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Smallest integer `>= r`.
pub fn ceil_int(r: &Rational) -> BigInt {
    r.numer().div_ceil(r.denom())
}

/// Distance from `r` to the nearest integer.
pub fn fractionality(r: &Rational) -> Rational {
    let frac = r - r.floor();
    let up = Rational::one() - &frac;
    frac.min(up)
}

/// A rational or the symbol infinity, which compares above every rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinity,
}

impl ExtRational {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinity => None,
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        ExtRational::Finite(r)
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

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => f.write_str(&format_rational(r)),
            ExtRational::Infinity => f.write_str("inf"),
        }
    }
}

/// `true` when `r` is strictly negative.
pub(crate) fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}
