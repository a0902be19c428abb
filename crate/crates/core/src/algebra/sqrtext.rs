//! Elements `a + b*s` of the quadratic extension with `s^2 = u_xy^2 - u_xx*u_yy`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::poly::{pv, Poly, Var};
use super::ratfunc::RatFunc;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// `s^2`, that is minus the Hessian determinant.
pub fn s_squared() -> Poly {
    pv(Var::UXY).pow(2) - pv(Var::UXX) * pv(Var::UYY)
}

#[derive(Clone, PartialEq, Debug)]
pub struct SqrtExt {
    pub re: RatFunc,
    pub im: RatFunc,
}

impl SqrtExt {
    pub fn new(re: RatFunc, im: RatFunc) -> SqrtExt {
        SqrtExt { re, im }
    }

    /// The formal square root `s` itself.
    pub fn s() -> SqrtExt {
        SqrtExt { re: RatFunc::zero(), im: RatFunc::one() }
    }

    pub fn zero() -> SqrtExt {
        SqrtExt { re: RatFunc::zero(), im: RatFunc::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_s_free(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> SqrtExt {
        SqrtExt { re: self.re.clone(), im: -&self.im }
    }

    /// `(a + bs)(a - bs) = a^2 - b^2 s^2`.
    pub fn norm(&self) -> RatFunc {
        &self.re.pow(2) - &(&self.im.pow(2) * &RatFunc::from(s_squared()))
    }

    pub fn checked_div(&self, o: &SqrtExt) -> Result<SqrtExt> {
        let n = o.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self * &o.conj();
        Ok(SqrtExt { re: p.re.checked_div(&n)?, im: p.im.checked_div(&n)? })
    }

    /// Numeric value for a chosen value of `s`.
    pub fn eval(&self, val: &dyn Fn(Var) -> Option<Scalar>, s: &Scalar) -> Result<Scalar> {
        Ok(self.re.eval(val)? + self.im.eval(val)? * s)
    }
}

impl From<Poly> for SqrtExt {
    fn from(p: Poly) -> SqrtExt {
        SqrtExt { re: RatFunc::from(p), im: RatFunc::zero() }
    }
}

impl From<RatFunc> for SqrtExt {
    fn from(r: RatFunc) -> SqrtExt {
        SqrtExt { re: r, im: RatFunc::zero() }
    }
}

impl Add<&SqrtExt> for &SqrtExt {
    type Output = SqrtExt;
    fn add(self, o: &SqrtExt) -> SqrtExt {
        SqrtExt { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub<&SqrtExt> for &SqrtExt {
    type Output = SqrtExt;
    fn sub(self, o: &SqrtExt) -> SqrtExt {
        SqrtExt { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul<&SqrtExt> for &SqrtExt {
    type Output = SqrtExt;
    fn mul(self, o: &SqrtExt) -> SqrtExt {
        let d = RatFunc::from(s_squared());
        SqrtExt {
            re: &(&self.re * &o.re) + &(&(&self.im * &o.im) * &d),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }
}

impl Neg for &SqrtExt {
    type Output = SqrtExt;
    fn neg(self) -> SqrtExt {
        SqrtExt { re: -&self.re, im: -&self.im }
    }
}

impl fmt::Display for SqrtExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] + [{}]*s", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::pc;
    use proptest::prelude::*;

    #[test]
    fn s_times_s() {
        let p = &SqrtExt::s() * &SqrtExt::s();
        assert!(p.is_s_free());
        assert_eq!(p.re, RatFunc::from(s_squared()));
    }

    #[test]
    fn conjugate_product_is_s_free() {
        let p = pv(Var::UXXX) + pc(2);
        let q = pv(Var::UYY);
        let a = SqrtExt::new(p.clone().into(), q.clone().into());
        let prod = &a * &a.conj();
        assert!(prod.is_s_free());
        assert_eq!(prod.re, RatFunc::from(p.pow(2) - s_squared() * q.pow(2)));
    }

    #[test]
    fn division_inverts_product() {
        let a = SqrtExt::new(pv(Var::UXX).into(), pc(1).into());
        let b = SqrtExt::new(pv(Var::UYY).into(), pv(Var::UXY).into());
        let q = (&a * &b).checked_div(&b).unwrap();
        assert_eq!(q, a);
    }

    proptest! {
        #[test]
        fn numeric_evaluation_matches(c in proptest::collection::vec(-5i64..=5, 4), uxx in -4i64..=4, uxy in -4i64..=4, uyy in 1i64..=4) {
            // choose jets with s^2 = uxy^2 - uxx*uyy and check (a+bs)(c+ds) numerically
            let a = SqrtExt::new(pc(c[0]).into(), (pc(c[1]) * pv(Var::UXX)).into());
            let b = SqrtExt::new((pc(c[2]) * pv(Var::UYY)).into(), pc(c[3]).into());
            let d2 = uxy * uxy - uxx * uyy;
            prop_assume!(d2 > 0);
            let s = Scalar::int(d2).sqrt_or_float().unwrap();
            let val = |v: Var| match v {
                Var::UXX => Some(Scalar::int(uxx)),
                Var::UXY => Some(Scalar::int(uxy)),
                Var::UYY => Some(Scalar::int(uyy)),
                _ => None,
            };
            let lhs = (&a * &b).eval(&val, &s).unwrap().to_f64();
            let rhs = a.eval(&val, &s).unwrap().to_f64() * b.eval(&val, &s).unwrap().to_f64();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
