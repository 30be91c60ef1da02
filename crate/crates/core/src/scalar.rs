//! Exact-or-floating numbers.
//!
//! Probabilities, step displacements and look-around radii are accepted as
//! integers, fractions `a/b`, finite decimals or scientific notation. The first
//! three parse to exact rationals; scientific notation is kept as `f64` only.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Row sums are accepted within this tolerance whenever a floating value is involved.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed number `{0}`")]
pub struct ParseScalarError(pub String);

/// A real number carried exactly when it is rational.
#[derive(Debug, Clone)]
pub struct Scalar {
    exact: Option<BigRational>,
    value: f64,
}

impl Scalar {
    pub fn from_rational(r: BigRational) -> Self {
        let value = rational_to_f64(&r);
        Self { exact: Some(r), value }
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn integer(v: i64) -> Self {
        Self::ratio(v, 1)
    }

    pub fn float(value: f64) -> Self {
        Self { exact: None, value }
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_zero(),
            None => self.value == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_negative(),
            None => self.value < 0.0,
        }
    }

    /// Integer value, if this scalar is an exact integer.
    pub fn as_integer(&self) -> Option<i64> {
        match &self.exact {
            Some(r) if r.is_integer() => r.to_integer().to_i64(),
            Some(_) => None,
            None => {
                if self.value.fract() == 0.0 && self.value.abs() < 9.0e15 {
                    Some(self.value as i64)
                } else {
                    None
                }
            }
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Scalar::from_rational(a + b),
            _ => Scalar::float(self.value + other.value),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Scalar::from_rational(a - b),
            _ => Scalar::float(self.value - other.value),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Scalar::from_rational(a * b),
            _ => Scalar::float(self.value * other.value),
        }
    }

    pub fn neg(&self) -> Scalar {
        match &self.exact {
            Some(a) => Scalar::from_rational(-a),
            None => Scalar::float(-self.value),
        }
    }

    /// Sum of a sequence, exact when every term is exact.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
        items.into_iter().fold(Scalar::zero(), |acc, x| acc.add(x))
    }

    /// Whether this value equals one (exactly, or within [`ROW_SUM_TOLERANCE`] for floats).
    pub fn is_unit_sum(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_one(),
            None => (self.value - 1.0).abs() <= ROW_SUM_TOLERANCE,
        }
    }

    /// Sign with exact comparison when possible, else against `tol`.
    pub fn signum_with_tolerance(&self, tol: f64) -> i32 {
        match &self.exact {
            Some(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            None => {
                if self.value.abs() <= tol {
                    0
                } else if self.value > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self.value.to_bits() == other.value.to_bits(),
            _ => false,
        }
    }
}

impl fmt::Display for Scalar {
    /// Exact values print as `n` or `n/d`; floats print in scientific notation so
    /// that reparsing keeps them floating.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) => write!(f, "{}", format_rational(r)),
            None => write!(f, "{:e}", self.value),
        }
    }
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = parse_signed_int(n).ok_or_else(err)?;
            let d: BigInt = parse_signed_int(d).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Scalar::from_rational(BigRational::new(n, d)));
        }
        if t.contains(['e', 'E']) || t.eq_ignore_ascii_case("inf") || t.contains("nan") {
            let v: f64 = t.parse().map_err(|_| err())?;
            if !v.is_finite() {
                return Err(err());
            }
            return Ok(Scalar::float(v));
        }
        parse_decimal(t).map(Scalar::from_rational).ok_or_else(err)
    }
}

fn parse_signed_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix('+').unwrap_or(s);
    let body = digits.strip_prefix('-').unwrap_or(digits);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num::pow(BigInt::from(10u32), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on absurdly large components
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        let a: Scalar = "1/2".parse().unwrap();
        let b: Scalar = "0.5".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "1/2");
        let c: Scalar = "-1".parse().unwrap();
        assert_eq!(c.as_integer(), Some(-1));
        let d: Scalar = "+1".parse().unwrap();
        assert_eq!(d.as_integer(), Some(1));
    }

    #[test]
    fn scientific_notation_stays_float() {
        let a: Scalar = "2.5e-1".parse().unwrap();
        assert!(!a.is_exact());
        let back: Scalar = a.to_string().parse().unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn unit_sum_exact_and_float() {
        let s = Scalar::sum(&["1/3".parse().unwrap(), "2/3".parse().unwrap()]);
        assert!(s.is_unit_sum());
        let s = Scalar::sum(&["0.5".parse().unwrap(), "0.6".parse().unwrap()]);
        assert!(!s.is_unit_sum());
        assert_eq!(s.value(), 1.1);
        let f = Scalar::float(1.0 + 1e-12);
        assert!(f.is_unit_sum());
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1/0", "1..2", "-", "inf", "1e400"] {
            assert!(s.parse::<Scalar>().is_err(), "{s}");
        }
    }
}
