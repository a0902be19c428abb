//! Sums `sum_e c_e * r^(e/4)` where `r = sigma * det Hess` and the `c_e` are
//! rational functions. Exponents are kept in `0..4`; whole powers of `r`
//! are folded into the coefficients.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use super::poly::{pv, Poly, Var};
use super::ratfunc::RatFunc;
use super::scalar::{rat, Scalar};
use crate::error::Result;

/// `u_xx*u_yy - u_xy^2`.
pub fn hessian_det() -> Poly {
    pv(Var::UXX) * pv(Var::UYY) - pv(Var::UXY).pow(2)
}

#[derive(Clone, Debug)]
pub struct GradedRho {
    sigma: i64,
    slots: BTreeMap<u8, RatFunc>,
}

impl GradedRho {
    /// The zero element for `r = sigma * det Hess` (`sigma = 1` or `-1`).
    pub fn zero(sigma: i64) -> GradedRho {
        assert!(sigma == 1 || sigma == -1);
        GradedRho { sigma, slots: BTreeMap::new() }
    }

    /// `c * r^(e/4)`.
    pub fn term(sigma: i64, c: RatFunc, e: i32) -> GradedRho {
        let mut g = GradedRho::zero(sigma);
        g.add_slot(e, c);
        g
    }

    pub fn from_ratfunc(sigma: i64, c: RatFunc) -> GradedRho {
        GradedRho::term(sigma, c, 0)
    }

    pub fn sigma(&self) -> i64 {
        self.sigma
    }

    /// `r` as a polynomial.
    pub fn r(&self) -> Poly {
        hessian_det().scale(&rat(self.sigma, 1))
    }

    fn add_slot(&mut self, e: i32, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        let q = e.div_euclid(4);
        let rem = e.rem_euclid(4) as u8;
        let r = RatFunc::from(self.r());
        let c = if q >= 0 {
            &c * &r.pow(q as u32)
        } else {
            c.checked_div(&r.pow((-q) as u32)).expect("r is nonzero")
        };
        let entry = self.slots.entry(rem).or_insert_with(RatFunc::zero);
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.slots.remove(&rem);
        }
    }

    /// Coefficient of `r^(e/4)` for `e` in `0..4`.
    pub fn slot(&self, e: u8) -> RatFunc {
        self.slots.get(&e).cloned().unwrap_or_else(RatFunc::zero)
    }

    /// Nonzero slots as `(e, coefficient)`.
    pub fn slots(&self) -> impl Iterator<Item = (u8, &RatFunc)> {
        self.slots.iter().map(|(e, c)| (*e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn scale(&self, c: &RatFunc) -> GradedRho {
        let mut out = GradedRho::zero(self.sigma);
        for (e, v) in &self.slots {
            out.add_slot(*e as i32, v * c);
        }
        out
    }

    /// Numeric value given the numeric `r > 0`.
    pub fn eval(&self, val: &dyn Fn(Var) -> Option<Scalar>) -> Result<Scalar> {
        let r = self.r().eval(val)?;
        let mut acc = Scalar::zero();
        for (e, c) in &self.slots {
            acc += &(c.eval(val)? * r.pow_ratio(*e as i32, 4)?);
        }
        Ok(acc)
    }
}

impl Add<&GradedRho> for &GradedRho {
    type Output = GradedRho;
    fn add(self, o: &GradedRho) -> GradedRho {
        assert_eq!(self.sigma, o.sigma, "mixed regions");
        let mut out = self.clone();
        for (e, c) in &o.slots {
            out.add_slot(*e as i32, c.clone());
        }
        out
    }
}

impl Mul<&GradedRho> for &GradedRho {
    type Output = GradedRho;
    fn mul(self, o: &GradedRho) -> GradedRho {
        assert_eq!(self.sigma, o.sigma, "mixed regions");
        let mut out = GradedRho::zero(self.sigma);
        for (e1, c1) in &self.slots {
            for (e2, c2) in &o.slots {
                out.add_slot(*e1 as i32 + *e2 as i32, c1 * c2);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::pc;

    #[test]
    fn whole_power_merges_into_slot_zero() {
        let p = RatFunc::from(pv(Var::UXXX) + pc(1));
        let g = GradedRho::term(1, p.clone(), 4);
        assert_eq!(g.slots().count(), 1);
        assert_eq!(g.slot(0), &p * &RatFunc::from(hessian_det()));
    }

    #[test]
    fn exponents_add() {
        let rho = GradedRho::term(1, RatFunc::one(), -1);
        let rho4 = &(&rho * &rho) * &(&rho * &rho);
        assert_eq!(rho4.slots().count(), 1);
        assert_eq!(rho4.slot(0), RatFunc::one().checked_div(&RatFunc::from(hessian_det())).unwrap());
    }

    #[test]
    fn minus_region_uses_absolute_determinant() {
        let g = GradedRho::term(-1, RatFunc::one(), 4);
        assert_eq!(g.slot(0), RatFunc::from(-hessian_det()));
        let val = |v: Var| match v {
            Var::UXX => Some(Scalar::int(1)),
            Var::UXY => Some(Scalar::int(0)),
            Var::UYY => Some(Scalar::int(-16)),
            _ => None,
        };
        let h = GradedRho::term(-1, RatFunc::one(), 1);
        assert_eq!(h.eval(&val).unwrap(), Scalar::int(2));
    }
}
