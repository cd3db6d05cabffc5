//! Scalars that are either exact rationals or floating-point values.
//!
//! File formats and fixture parameters carry numbers as strings: `"3"` and
//! `"-5/7"` denote exact rationals, `"1.5"` or `"2e-3"` denote floats.
//! Exactness is preserved through every construction that can afford it; the
//! verifier switches to integer arithmetic exactly when all inputs are
//! `Exact`.

use std::cmp::Ordering;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};

use crate::error::{HlieError, Result};

/// A real number that remembers whether it is known exactly.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Approx(f64),
}

impl Scalar {
    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Scalar::from_int(0)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Approx(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx(x) => Scalar::Approx(x.abs()),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r.clone()),
            Scalar::Approx(x) => Scalar::Approx(-x),
        }
    }

    /// Product; exact only when both factors are exact.
    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::Approx(self.to_f64() * other.to_f64()),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::Approx(self.to_f64() + other.to_f64()),
        }
    }

    /// Equality as real numbers: exact when both sides are exact, by f64
    /// value otherwise.
    pub fn value_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }

    pub fn value_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }

    /// Parses a number string: `"3"`, `"-5/7"` are exact, `"1.5"`, `"2e-3"`
    /// are floats.
    pub fn parse(s: &str) -> Result<Scalar> {
        let t = s.trim();
        if t.is_empty() {
            return Err(HlieError::NumberParse(s.to_string()));
        }
        if let Some((num, den)) = t.split_once('/') {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|_| HlieError::NumberParse(s.to_string()))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|_| HlieError::NumberParse(s.to_string()))?;
            if d.is_zero() {
                return Err(HlieError::NumberParse(s.to_string()));
            }
            return Ok(Scalar::Exact(BigRational::new(n, d)));
        }
        if !t.contains(['.', 'e', 'E']) {
            if let Ok(n) = t.parse::<BigInt>() {
                return Ok(Scalar::Exact(BigRational::from_integer(n)));
            }
        }
        t.parse::<f64>()
            .map(Scalar::Approx)
            .map_err(|_| HlieError::NumberParse(s.to_string()))
    }

    /// Formats so that `parse` round-trips: rationals as `"n"` or `"p/q"`,
    /// floats through the shortest representation that re-reads bit-exactly
    /// (always containing `.` or `e` so float-ness survives the trip).
    pub fn format(&self) -> String {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Approx(x) => format!("{x:?}"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

/// Collects exact values out of a slice, or `None` if any entry is a float.
pub fn all_exact(values: &[Scalar]) -> Option<Vec<BigRational>> {
    values
        .iter()
        .map(|v| v.as_exact().cloned())
        .collect::<Option<Vec<_>>>()
}
