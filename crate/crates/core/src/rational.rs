//! Exact rational numbers.
//!
//! Every numeric entry in this crate is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. Text and JSON
//! renderings use `p/q` (or a bare integer when the denominator is 1).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("invalid rational literal {0:?}")]
    Syntax(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("division by zero")]
    DivisionByZero,
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    assert!(denom != 0, "zero denominator");
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn checked_div(a: &Rational, b: &Rational) -> Result<Rational, RationalError> {
    if b.is_zero() {
        Err(RationalError::DivisionByZero)
    } else {
        Ok(a / b)
    }
}

/// Parses an integer literal or `p/q`. Signs are allowed on either part.
pub fn parse(text: &str) -> Result<Rational, RationalError> {
    let text = text.trim();
    let bad = || RationalError::Syntax(text.to_string());
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), Some(q.trim())),
        None => (text, None),
    };
    let numer: BigInt = parse_integer(numer).ok_or_else(bad)?;
    let denom: BigInt = match denom {
        Some(q) => parse_integer(q).ok_or_else(bad)?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(RationalError::ZeroDenominator(text.to_string()));
    }
    Ok(Rational::new(numer, denom))
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.trim_start_matches('+').parse().ok()
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn to_text(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Lossy decimal rendering for human-facing output only.
pub fn approx(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(if value.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Renders as `p/q (~decimal)` when the value is not an integer.
pub struct Human<'a>(pub &'a Rational);

impl fmt::Display for Human<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{} (~{:.6})", to_text(self.0), approx(self.0))
        }
    }
}

pub fn vec_to_text(values: &[Rational]) -> Vec<String> {
    values.iter().map(to_text).collect()
}

pub fn vec_from_text<S: AsRef<str>>(values: &[S]) -> Result<Vec<Rational>, RationalError> {
    values.iter().map(|v| parse(v.as_ref())).collect()
}

/// Serde adapters that store rationals as `p/q` strings.
pub mod serde_text {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::Serialize;

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            vec_to_text(values).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let text = Vec::<String>::deserialize(d)?;
            vec_from_text(&text).map_err(serde::de::Error::custom)
        }
    }

    pub mod matrix {
        use super::*;
        use serde::Serialize;

        pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            rows.iter()
                .map(|r| vec_to_text(r))
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            let text = Vec::<Vec<String>>::deserialize(d)?;
            text.iter()
                .map(|r| vec_from_text(r))
                .collect::<Result<_, _>>()
                .map_err(serde::de::Error::custom)
        }
    }

    pub mod option {
        use super::*;
        use serde::Serialize;

        pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            value.as_ref().map(to_text).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| parse(&t))
                .transpose()
                .map_err(serde::de::Error::custom)
        }
    }
}
