//! Quotients of polynomials.
//!
//! There is no multivariate gcd here. Normalization cancels the common
//! monomial factor, makes the denominator's leading coefficient 1 and drops
//! the denominator when it divides the numerator. Equality is decided by
//! cross-multiplication, so it is exact regardless of representation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::{Mono, Poly, Var};
use super::scalar::{Rational, Scalar};
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFunc { num, den }.normalized())
    }

    pub fn zero() -> RatFunc {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> RatFunc {
        RatFunc::from(Poly::one())
    }

    pub fn constant(c: Rational) -> RatFunc {
        RatFunc::from(Poly::constant(c))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_constant()
    }

    /// The polynomial this equals, if the denominator is constant.
    pub fn as_poly(&self) -> Option<Poly> {
        if self.den.is_constant() {
            let c = self.den.constant_term();
            Some(self.num.scale(&c.recip()))
        } else {
            None
        }
    }

    fn normalized(mut self) -> RatFunc {
        if self.num.is_zero() {
            return RatFunc::zero();
        }
        let g = self.num.monomial_content().gcd(&self.den.monomial_content());
        if g != Mono::ONE {
            let one = Rational::one();
            self.num = self.num.div_term(&one, &g).expect("content divides");
            self.den = self.den.div_term(&one, &g).expect("content divides");
        }
        if self.den.len() > 1 {
            if let Ok(q) = self.num.exact_div(&self.den) {
                return RatFunc::from(q);
            }
        }
        let lc = self.den.leading().map(|(_, c)| c.clone()).expect("nonzero denominator");
        if !lc.is_one() {
            let inv = lc.recip();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
        self
    }

    pub fn recip(&self) -> Result<RatFunc> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, o: &RatFunc) -> Result<RatFunc> {
        Ok(self * &o.recip()?)
    }

    pub fn scale(&self, c: &Rational) -> RatFunc {
        RatFunc { num: self.num.scale(c), den: self.den.clone() }.normalized()
    }

    pub fn pow(&self, n: u32) -> RatFunc {
        RatFunc { num: self.num.pow(n), den: self.den.pow(n) }.normalized()
    }

    pub fn derivative(&self, v: Var) -> RatFunc {
        // (n/d)' = (n' d - n d') / d^2
        let dn = self.num.derivative(v);
        let dd = self.den.derivative(v);
        if dd.is_zero() {
            return RatFunc { num: dn, den: self.den.clone() }.normalized();
        }
        RatFunc { num: &(&dn * &self.den) - &(&self.num * &dd), den: self.den.pow(2) }.normalized()
    }

    /// Replace `v` by a rational function.
    pub fn substitute(&self, v: Var, r: &RatFunc) -> RatFunc {
        if !self.num.uses(v) && !self.den.uses(v) {
            return self.clone();
        }
        let (n, dn) = homogenized_subst(&self.num, v, r);
        let (d, dd) = homogenized_subst(&self.den, v, r);
        // num = n / r.den^dn, den = d / r.den^dd
        let (num, den) = if dn >= dd {
            (n, &d * &r.den.pow((dn - dd) as u32))
        } else {
            (&n * &r.den.pow((dd - dn) as u32), d)
        };
        RatFunc::new(num, den).expect("substitution keeps a nonzero denominator")
    }

    pub fn eval(&self, val: &dyn Fn(Var) -> Option<Scalar>) -> Result<Scalar> {
        let d = self.den.eval(val)?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.num.eval(val)? / d)
    }

    pub fn map_vars(&self, f: impl Fn(Var) -> Var + Copy) -> RatFunc {
        RatFunc::new(self.num.map_vars(f), self.den.map_vars(f)).expect("renaming keeps a nonzero denominator")
    }
}

/// `p(v -> n/d) * d^deg` together with `deg`.
fn homogenized_subst(p: &Poly, v: Var, r: &RatFunc) -> (Poly, usize) {
    let coeffs = p.coefficients_in(v);
    let deg = coeffs.len() - 1;
    let mut acc = Poly::zero();
    let mut npow = Poly::one();
    let dpows: Vec<Poly> = {
        let mut out = vec![Poly::one()];
        for k in 1..=deg {
            let next = &out[k - 1] * &r.den;
            out.push(next);
        }
        out
    };
    for (k, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            acc = &acc + &(&(c * &npow) * &dpows[deg - k]);
        }
        if k < deg {
            npow = &npow * &r.num;
        }
    }
    (acc, deg)
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> RatFunc {
        RatFunc { num: p, den: Poly::one() }
    }
}

impl From<Var> for RatFunc {
    fn from(v: Var) -> RatFunc {
        RatFunc::from(Poly::var(v))
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &RatFunc) -> bool {
        if self.den == o.den {
            return self.num == o.num;
        }
        &self.num * &o.den == &o.num * &self.den
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

fn common_denominator(a: &RatFunc, b: &RatFunc) -> (Poly, Poly, Poly) {
    // Returns (a_num', b_num', den) with a = a_num'/den, b = b_num'/den.
    if a.den == b.den {
        return (a.num.clone(), b.num.clone(), a.den.clone());
    }
    if let (Some((ma, ca)), Some((mb, cb))) = (a.den.as_monomial(), b.den.as_monomial()) {
        let l = ma.lcm(mb);
        let fa = ma.quotient_of(&l);
        let fb = mb.quotient_of(&l);
        let an = a.num.mul_term(&cb.clone(), &fa);
        let bn = b.num.mul_term(&ca.clone(), &fb);
        let den = Poly::term(ca * cb, l);
        return (an, bn, den);
    }
    (&a.num * &b.den, &b.num * &a.den, &a.den * &b.den)
}

impl Add<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, d) = common_denominator(self, rhs);
        RatFunc { num: &a + &b, den: d }.normalized()
    }
}

impl Sub<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: &self.num * &rhs.num, den: &self.den * &rhs.den }.normalized()
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: RatFunc) -> RatFunc {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: &RatFunc) -> RatFunc {
                (&self).$m(rhs)
            }
        }
        impl $tr<RatFunc> for &RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: RatFunc) -> RatFunc {
                self.$m(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::{pc, pv};

    #[test]
    fn cancels_monomial_content() {
        let r = RatFunc::new(pv(Var::UXX) * pv(Var::UYY).pow(3), pc(2) * pv(Var::UYY).pow(2)).unwrap();
        assert!(r.is_poly());
        assert_eq!(r.as_poly().unwrap(), pv(Var::UXX) * pv(Var::UYY) * Poly::constant(crate::algebra::rat(1, 2)));
    }

    #[test]
    fn sums_with_monomial_denominators() {
        let a = RatFunc::new(pc(1), pv(Var::UYY)).unwrap();
        let b = RatFunc::new(pc(1), pv(Var::UYY).pow(2)).unwrap();
        let s = &a + &b;
        assert_eq!(s, RatFunc::new(pv(Var::UYY) + pc(1), pv(Var::UYY).pow(2)).unwrap());
        assert_eq!(s.den(), &pv(Var::UYY).pow(2));
    }

    #[test]
    fn quotient_rule() {
        let r = RatFunc::new(pv(Var::X), pv(Var::Y)).unwrap();
        assert_eq!(r.derivative(Var::Y), RatFunc::new(-pv(Var::X), pv(Var::Y).pow(2)).unwrap());
    }

    #[test]
    fn substitution_of_rational_function() {
        // x^2 + 1 with x -> 1/y gives (1 + y^2)/y^2
        let p = RatFunc::from(pv(Var::X).pow(2) + pc(1));
        let r = RatFunc::new(pc(1), pv(Var::Y)).unwrap();
        let out = p.substitute(Var::X, &r);
        assert_eq!(out, RatFunc::new(pc(1) + pv(Var::Y).pow(2), pv(Var::Y).pow(2)).unwrap());
    }

    #[test]
    fn exact_denominator_is_dropped() {
        let d = pv(Var::X) + pv(Var::Y);
        let r = RatFunc::new(&d * &(pv(Var::X) - pv(Var::Y)), d.clone()).unwrap();
        assert!(r.is_poly());
    }
}
