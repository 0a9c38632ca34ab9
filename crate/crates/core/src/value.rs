//! Exact nonnegative values.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ValueError;

/// A nonnegative rational number in canonical reduced form.
///
/// Ordering and equality are exact. On the wire a value is a string `"p/q"`,
/// or `"p"` when the denominator is one; bare JSON integers are accepted on input.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Value(BigRational);

impl Value {
    pub fn zero() -> Self {
        Value(BigRational::zero())
    }

    pub fn from_u64(v: u64) -> Self {
        Value(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_u128(v: u128) -> Self {
        Value(BigRational::from_integer(BigInt::from(v)))
    }

    /// `numer / denom`, rejecting a zero denominator or a negative result.
    pub fn new(numer: i64, denom: i64) -> Result<Self, ValueError> {
        if denom == 0 {
            return Err(ValueError::ZeroDenominator);
        }
        Self::from_ratio(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_ratio(r: BigRational) -> Result<Self, ValueError> {
        if r.is_negative() {
            return Err(ValueError::Negative(r.to_string()));
        }
        Ok(Value(r))
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The value as a `u64` when it is an integer that fits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.0.is_integer() {
            self.0.numer().to_u64()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn scale(&self, k: u64) -> Value {
        Value(&self.0 * BigRational::from_integer(BigInt::from(k)))
    }

    pub fn div_int(&self, k: u64) -> Value {
        assert!(k > 0, "division of a value by zero");
        Value(&self.0 / BigRational::from_integer(BigInt::from(k)))
    }

    /// `self - other` when the result stays nonnegative.
    pub fn checked_sub(&self, other: &Value) -> Option<Value> {
        if other.0 > self.0 {
            None
        } else {
            Some(Value(&self.0 - &other.0))
        }
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &Value) -> Value {
        Value((&self.0 - &other.0).abs())
    }
}

impl Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        Value(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Value> for &'a Value {
    type Output = Value;
    fn add(self, rhs: &'a Value) -> Value {
        Value(&self.0 + &rhs.0)
    }
}

impl std::iter::Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |a, b| a + b)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::from_u64(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Value {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt, ValueError> {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| ValueError::Parse(s.to_string()))
        };
        let r = match s.split_once('/') {
            Some((p, q)) => {
                let q = parse_int(q)?;
                if q.is_zero() {
                    return Err(ValueError::ZeroDenominator);
                }
                BigRational::new(parse_int(p)?, q)
            }
            None => BigRational::from_integer(parse_int(s)?),
        };
        Value::from_ratio(r)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Text(String),
            Int(u64),
        }
        match Wire::deserialize(deserializer)? {
            Wire::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Wire::Int(v) => Ok(Value::from_u64(v)),
        }
    }
}
