//! Scalar fields used by the cone engine.
//!
//! Polyhedral data is carried as exact rationals ([`Q`]); spectral (PSD) data
//! as `f64`. Every predicate that compares against zero goes through
//! [`Field::near_zero`] / [`Field::is_neg`], which are exact for rationals
//! and tolerance-based (see [`crate::settings::tolerance`]) for floats.

use std::fmt;
use std::ops::{AddAssign, Mul, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{ComError, Result};
use crate::settings;

/// Exact rational scalar.
pub type Q = BigRational;

pub trait Field:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + num_traits::Num
    + Signed
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    /// True for exact arithmetic.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;
    fn from_frac(num: i64, den: i64) -> Self;
    fn from_q(q: &Q) -> Self;
    /// Exact binary expansion for rationals.
    fn from_float(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact rational value (binary expansion for floats).
    fn to_q(&self) -> Q;

    /// Zero test: exact for rationals, `|x| <= eps` for floats.
    fn near_zero(&self) -> bool;

    fn is_neg(&self) -> bool {
        !self.near_zero() && *self < Self::zero()
    }

    fn is_pos(&self) -> bool {
        !self.near_zero() && *self > Self::zero()
    }

    fn is_nonneg(&self) -> bool {
        !self.is_neg()
    }

    fn as_json(&self) -> serde_json::Value;
}

impl Field for Q {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }

    fn from_frac(num: i64, den: i64) -> Self {
        Q::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_q(q: &Q) -> Self {
        q.clone()
    }

    fn from_float(x: f64) -> Self {
        <Q as FromPrimitive>::from_f64(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_q(&self) -> Q {
        self.clone()
    }

    fn near_zero(&self) -> bool {
        self.is_zero()
    }

    fn as_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_q(self))
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_frac(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_q(q: &Q) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn from_float(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_q(&self) -> Q {
        q_from_f64(*self).unwrap_or_else(Q::zero)
    }

    fn near_zero(&self) -> bool {
        self.abs() <= settings::tolerance()
    }

    fn as_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

pub fn q(num: i64, den: i64) -> Q {
    Q::from_frac(num, den)
}

pub fn qi(v: i64) -> Q {
    Q::from_int(v)
}

/// `"p/q"` for non-integers, `"p"` for integers.
pub fn format_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parses `"p/q"`, `"p"` or a plain decimal (`"-0.25"`, `"1e-3"`) exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || ComError::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(Q::from_integer(n));
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut v = Q::from_integer(digits);
    if scale >= 0 {
        v *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        v /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -v } else { v })
}

/// Reads a JSON scalar (number or rational string) exactly.
pub fn q_from_json(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) => parse_q(&n.to_string()),
        other => Err(ComError::Parse(format!("expected a number, got {other}"))),
    }
}

pub fn f64_from_json(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| ComError::Parse(format!("bad number {n}"))),
        serde_json::Value::String(s) => parse_q(s).map(|q| Field::to_f64(&q)),
        other => Err(ComError::Parse(format!("expected a number, got {other}"))),
    }
}

/// Field-generic JSON reader.
pub fn from_json<F: Field>(v: &serde_json::Value) -> Result<F> {
    if F::EXACT {
        Ok(F::from_q(&q_from_json(v)?))
    } else {
        let x = f64_from_json(v)?;
        if !x.is_finite() {
            return Err(ComError::Parse(format!("non-finite number {x}")));
        }
        Ok(F::from_float(x))
    }
}

/// Lossless float-to-rational conversion (binary expansion).
pub fn q_from_f64(x: f64) -> Option<Q> {
    <Q as FromPrimitive>::from_f64(x)
}

/// Positive multiple of `v` with coprime integer entries.
pub fn primitive_integer_vector(v: &[Q]) -> Vec<Q> {
    let den = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Q::from_integer(x / &g)).collect()
}

pub fn max_abs<F: Field>(xs: &[F]) -> f64 {
    xs.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
}

pub fn one<F: Field>() -> F {
    F::one()
}

pub fn zero<F: Field>() -> F {
    F::zero()
}
