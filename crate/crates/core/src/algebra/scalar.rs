//! Scalars that are either exact rationals or finite floats.
//!
//! Mixing the two modes promotes to float. Exact arithmetic never rounds.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Exact `n`-th root of a rational, if it exists.
pub fn rational_nth_root(r: &Rational, n: u32) -> Option<Rational> {
    if r.is_negative() {
        if n % 2 == 0 {
            return None;
        }
        return rational_nth_root(&-r, n).map(|x| -x);
    }
    let p = r.numer().nth_root(n);
    let q = r.denom().nth_root(n);
    if num_traits::pow(p.clone(), n as usize) == *r.numer()
        && num_traits::pow(q.clone(), n as usize) == *r.denom()
    {
        Some(Rational::new(p, q))
    } else {
        None
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(rat(p, q))
    }

    /// A float scalar; NaN and infinities are rejected.
    pub fn float(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(Scalar::Float(v))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => *f == 0.0,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(f) => *f,
        }
    }

    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Exact(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Float(f) => {
                if *f == 0.0 {
                    0
                } else if *f > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        }
    }

    pub fn recip(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Exact(r) => Scalar::Exact(r.recip()),
            Scalar::Float(f) => Scalar::Float(1.0 / f),
        })
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self * &other.recip()?)
    }

    pub fn powi(&self, n: i32) -> Scalar {
        match self {
            Scalar::Exact(r) => {
                if n >= 0 {
                    Scalar::Exact(num_traits::pow(r.clone(), n as usize))
                } else {
                    Scalar::Exact(num_traits::pow(r.recip(), (-n) as usize))
                }
            }
            Scalar::Float(f) => Scalar::Float(f.powi(n)),
        }
    }

    /// Square root; exact mode succeeds only on perfect rational squares.
    pub fn sqrt(&self) -> Result<Scalar> {
        if self.signum() < 0 {
            return Err(Error::NegativeRadicand);
        }
        match self {
            Scalar::Exact(r) => rational_nth_root(r, 2)
                .map(Scalar::Exact)
                .ok_or_else(|| Error::NonSquareRational(r.to_string())),
            Scalar::Float(f) => Ok(Scalar::Float(f.sqrt())),
        }
    }

    /// Square root that falls back to float when the exact root is irrational.
    pub fn sqrt_or_float(&self) -> Result<Scalar> {
        match self.sqrt() {
            Err(Error::NonSquareRational(_)) => Ok(Scalar::Float(self.to_f64().sqrt())),
            other => other,
        }
    }

    /// `self^(p/q)` for `self > 0`, exact when the root is rational, float otherwise.
    pub fn pow_ratio(&self, p: i32, q: u32) -> Result<Scalar> {
        if self.signum() <= 0 {
            return Err(if self.is_zero() { Error::DivisionByZero } else { Error::NegativeRadicand });
        }
        if let Scalar::Exact(r) = self {
            if let Some(root) = rational_nth_root(r, q) {
                return Ok(Scalar::Exact(root).powi(p));
            }
        }
        Ok(Scalar::Float(self.to_f64().powf(p as f64 / q as f64)))
    }

    /// Bring two scalars into a common mode.
    pub fn same_mode(&self, other: &Scalar) -> bool {
        self.is_exact() == other.is_exact()
    }

    pub fn max_abs<'a>(it: impl IntoIterator<Item = &'a Scalar>) -> f64 {
        it.into_iter().map(|s| s.to_f64().abs()).fold(0.0, f64::max)
    }
}

fn binop(a: &Scalar, b: &Scalar, fr: impl Fn(&Rational, &Rational) -> Rational, ff: impl Fn(f64, f64) -> f64) -> Scalar {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(fr(x, y)),
        _ => Scalar::Float(ff(a.to_f64(), b.to_f64())),
    }
}

macro_rules! impl_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                binop(self, rhs, |x, y| x $op y, |x, y| x $op y)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);
impl_binop!(Mul, mul, *);

// Division by an exact zero panics, as integer division does; use
// `checked_div` where the divisor is data-dependent.
impl_binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(r)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(x) => write!(f, "{x:?}"),
        }
    }
}

/// Parse a decimal string (no exponent) into an exact rational.
fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = Rational::new(n, d);
    Some(if neg { -r } else { r })
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts `p`, `p/q`, exact decimals such as `-1.25`, and anything else
    /// `f64` parses (which becomes a float scalar).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| Error::Invalid(format!("bad rational '{s}'")))?;
            let q: BigInt = q.trim().parse().map_err(|_| Error::Invalid(format!("bad rational '{s}'")))?;
            if q.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(Scalar::Exact(Rational::new(p, q)));
        }
        if let Ok(n) = t.parse::<BigInt>() {
            return Ok(Scalar::Exact(Rational::from_integer(n)));
        }
        if let Some(r) = parse_decimal(t) {
            return Ok(Scalar::Exact(r));
        }
        let v: f64 = t.parse().map_err(|_| Error::Invalid(format!("bad number '{s}'")))?;
        Scalar::float(v)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(_) => ser.serialize_str(&self.to_string()),
            Scalar::Float(f) => ser.serialize_f64(*f),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Scalar;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a \"p/q\" string")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Scalar, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::int(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::Exact(Rational::from_integer(BigInt::from(v))))
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<Scalar, E> {
                Scalar::float(v).map_err(E::custom)
            }
        }
        de.deserialize_any(Visitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_is_canonical() {
        let a = Scalar::ratio(2, 4);
        assert_eq!(a.to_string(), "1/2");
        assert_eq!((Scalar::ratio(1, 3) + Scalar::ratio(2, 3)).to_string(), "1");
        assert_eq!(Scalar::ratio(3, -6).to_string(), "-1/2");
    }

    #[test]
    fn mixing_modes_promotes_to_float() {
        let s = Scalar::ratio(1, 2) + Scalar::Float(0.25);
        assert!(!s.is_exact());
        assert_eq!(s.to_f64(), 0.75);
    }

    #[test]
    fn float_rejects_non_finite() {
        assert_eq!(Scalar::float(f64::NAN), Err(Error::NonFinite));
        assert_eq!(Scalar::float(f64::INFINITY), Err(Error::NonFinite));
    }

    #[test]
    fn sqrt_exact_and_fallback() {
        assert_eq!(Scalar::ratio(9, 16).sqrt().unwrap(), Scalar::ratio(3, 4));
        assert!(matches!(Scalar::int(2).sqrt(), Err(Error::NonSquareRational(_))));
        assert!(!Scalar::int(2).sqrt_or_float().unwrap().is_exact());
        assert_eq!(Scalar::int(-1).sqrt(), Err(Error::NegativeRadicand));
    }

    #[test]
    fn quarter_powers() {
        assert_eq!(Scalar::int(16).pow_ratio(-1, 4).unwrap(), Scalar::ratio(1, 2));
        let f = Scalar::int(2).pow_ratio(1, 4).unwrap();
        assert!(!f.is_exact());
        assert!((f.to_f64() - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn parsing() {
        assert_eq!("3/6".parse::<Scalar>().unwrap(), Scalar::ratio(1, 2));
        assert_eq!("-1.25".parse::<Scalar>().unwrap(), Scalar::ratio(-5, 4));
        assert!(!"1e-3".parse::<Scalar>().unwrap().is_exact());
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("abc".parse::<Scalar>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let v = vec![Scalar::ratio(-7, 3), Scalar::Float(0.5), Scalar::int(4)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["-7/3",0.5,"4"]"#);
        let back: Vec<Scalar> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(back[0].is_exact() && !back[1].is_exact());
    }
}
