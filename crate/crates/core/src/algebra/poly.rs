//! Sparse multivariate polynomials with rational coefficients over a fixed
//! registry of jet variables.
//!
//! Canonical form: no zero coefficients, terms kept in graded-lex order
//! (the leading term is the last entry of the map).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::scalar::{Rational, Scalar};
use crate::error::{Error, Result};

/// Highest jet order with a registered variable.
pub const MAX_JET_ORDER: usize = 5;

/// Number of registered variables.
pub const NVARS: usize = 28;

const NAMES: [&str; NVARS] = [
    "x", "y", "u", "u_x", "u_y", "u_xx", "u_xy", "u_yy", "u_xxx", "u_xxy", "u_xyy", "u_yyy",
    "u_xxxx", "u_xxxy", "u_xxyy", "u_xyyy", "u_yyyy", "u_xxxxx", "u_xxxxy", "u_xxxyy",
    "u_xxyyy", "u_xyyyy", "u_yyyyy", "eta1", "eta2", "a11", "a12", "a22",
];

/// A registered variable: base coordinates, jet coordinates up to order 5,
/// symbol variables and the entries of a symmetric 2x2 matrix.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(u8);

impl Var {
    pub const X: Var = Var(0);
    pub const Y: Var = Var(1);
    pub const U: Var = Var(2);
    pub const UX: Var = Var(3);
    pub const UY: Var = Var(4);
    pub const UXX: Var = Var(5);
    pub const UXY: Var = Var(6);
    pub const UYY: Var = Var(7);
    pub const UXXX: Var = Var(8);
    pub const UXXY: Var = Var(9);
    pub const UXYY: Var = Var(10);
    pub const UYYY: Var = Var(11);
    pub const ETA1: Var = Var(23);
    pub const ETA2: Var = Var(24);
    pub const A11: Var = Var(25);
    pub const A12: Var = Var(26);
    pub const A22: Var = Var(27);

    /// The jet coordinate u with `nx` x-derivatives and `ny` y-derivatives.
    pub fn deriv(nx: usize, ny: usize) -> Var {
        let o = nx + ny;
        assert!(o <= MAX_JET_ORDER, "jet order {o} not registered");
        if o == 0 {
            return Var::U;
        }
        Var((3 + (o - 1) * (o + 2) / 2 + ny) as u8)
    }

    /// `(nx, ny)` for u and its derivatives; `None` for other variables.
    pub fn jet_index(self) -> Option<(usize, usize)> {
        let i = self.0 as usize;
        if i == 2 {
            return Some((0, 0));
        }
        if !(3..23).contains(&i) {
            return None;
        }
        let mut o = 1;
        while 3 + o * (o + 3) / 2 <= i {
            o += 1;
        }
        let ny = i - (3 + (o - 1) * (o + 2) / 2);
        Some((o - ny, ny))
    }

    /// Jet order of the variable (0 for x, y, u and the non-jet variables).
    pub fn order(self) -> usize {
        self.jet_index().map_or(0, |(a, b)| a + b)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        NAMES[self.0 as usize]
    }

    pub fn from_name(name: &str) -> Option<Var> {
        NAMES.iter().position(|n| *n == name).map(|i| Var(i as u8))
    }

    pub fn all() -> impl Iterator<Item = Var> {
        (0..NVARS as u8).map(Var)
    }

    /// Image under the exchange x <-> y.
    pub fn swap_xy(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
            Var::ETA1 => Var::ETA2,
            Var::ETA2 => Var::ETA1,
            Var::A11 => Var::A22,
            Var::A22 => Var::A11,
            v => match v.jet_index() {
                Some((a, b)) => Var::deriv(b, a),
                None => v,
            },
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub [u8; NVARS]);

impl Mono {
    pub const ONE: Mono = Mono([0; NVARS]);

    pub fn var(v: Var) -> Mono {
        let mut e = [0; NVARS];
        e[v.index()] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exp(&self, v: Var) -> u8 {
        self.0[v.index()]
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(o.0.iter()) {
            *a = a.checked_add(*b).expect("exponent overflow");
        }
        Mono(e)
    }

    pub fn divides(&self, o: &Mono) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    /// `o / self`, assuming `self` divides `o`.
    pub fn quotient_of(&self, o: &Mono) -> Mono {
        let mut e = o.0;
        for (a, b) in e.iter_mut().zip(self.0.iter()) {
            *a -= *b;
        }
        Mono(e)
    }

    pub fn gcd(&self, o: &Mono) -> Mono {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(o.0.iter()) {
            *a = (*a).min(*b);
        }
        Mono(e)
    }

    pub fn lcm(&self, o: &Mono) -> Mono {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(o.0.iter()) {
            *a = (*a).max(*b);
        }
        Mono(e)
    }

    pub fn vars(&self) -> impl Iterator<Item = (Var, u8)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| (Var(i as u8), e))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Default, Hash)]
pub struct Poly {
    terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    // ---- Constructors ----

    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Mono::ONE, c);
        p
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(super::scalar::rat(n, 1))
    }

    pub fn var(v: Var) -> Poly {
        Poly::term(Rational::one(), Mono::var(v))
    }

    pub fn term(c: Rational, m: Mono) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    /// `c * prod v^e` from a list of `(variable, exponent)` pairs.
    pub fn monomial(c: Rational, factors: &[(Var, u8)]) -> Poly {
        let mut e = [0; NVARS];
        for &(v, k) in factors {
            e[v.index()] += k;
        }
        Poly::term(c, Mono(e))
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    // ---- Queries ----

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Mono, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| *m == Mono::ONE)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Mono::ONE).cloned().unwrap_or_else(Rational::zero)
    }

    /// Single-term polynomial, if it is one.
    pub fn as_monomial(&self) -> Option<(&Mono, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn uses(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.exp(v) > 0)
    }

    pub fn degree_in(&self, v: Var) -> u8 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    /// Highest jet order among the variables that occur.
    pub fn max_jet_order(&self) -> usize {
        self.variables().iter().map(|v| v.order()).max().unwrap_or(0)
    }

    pub fn variables(&self) -> Vec<Var> {
        Var::all().filter(|&v| self.uses(v)).collect()
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.keys();
        match it.next() {
            None => Mono::ONE,
            Some(first) => it.fold(*first, |g, m| g.gcd(m)),
        }
    }

    // ---- Arithmetic ----

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect() }
    }

    pub fn mul_term(&self, c: &Rational, m: &Mono) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Divide by a single term; fails unless it divides every term.
    pub fn div_term(&self, c: &Rational, m: &Mono) -> Result<Poly> {
        if c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut out = Poly::zero();
        for (k, a) in &self.terms {
            if !m.divides(k) {
                return Err(Error::DivisionNotExact);
            }
            out.terms.insert(m.quotient_of(k), a / c);
        }
        Ok(out)
    }

    /// Exact quotient `self / b` by leading-term elimination.
    ///
    /// If `b` divides `self`, the leading term of `b` divides the leading term
    /// of every intermediate remainder, so a stuck step proves non-divisibility.
    pub fn exact_div(&self, b: &Poly) -> Result<Poly> {
        let (lm, lc) = match b.leading() {
            None => return Err(Error::DivisionByZero),
            Some((m, c)) => (*m, c.clone()),
        };
        if b.len() == 1 {
            return self.div_term(&lc, &lm);
        }
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((rm, rc)) = r.leading().map(|(m, c)| (*m, c.clone())) {
            if !lm.divides(&rm) {
                return Err(Error::DivisionNotExact);
            }
            let tm = lm.quotient_of(&rm);
            let tc = rc / &lc;
            r = &r - &b.mul_term(&tc, &tm);
            q.add_term(tm, tc);
        }
        Ok(q)
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let i = v.index();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut nm = *m;
                nm.0[i] -= 1;
                out.add_term(nm, c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Coefficients of `self` as a polynomial in `v`: entry `k` multiplies `v^k`.
    pub fn coefficients_in(&self, v: Var) -> Vec<Poly> {
        let i = v.index();
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let mut nm = *m;
            let e = nm.0[i];
            nm.0[i] = 0;
            out[e as usize].add_term(nm, c.clone());
        }
        out
    }

    /// Replace `v` by `p`.
    pub fn substitute(&self, v: Var, p: &Poly) -> Poly {
        if !self.uses(v) {
            return self.clone();
        }
        let coeffs = self.coefficients_in(v);
        // Horner in v.
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * p) + c;
        }
        acc
    }

    /// Rename variables through `f`.
    pub fn map_vars(&self, f: impl Fn(Var) -> Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut e = [0; NVARS];
            for (v, k) in m.vars() {
                e[f(v).index()] += k;
            }
            out.add_term(Mono(e), c.clone());
        }
        out
    }

    /// Evaluate with values supplied per variable.
    pub fn eval(&self, val: &dyn Fn(Var) -> Option<Scalar>) -> Result<Scalar> {
        let vars = self.variables();
        let mut table: Vec<Option<Vec<Scalar>>> = vec![None; NVARS];
        for v in vars {
            let x = val(v).ok_or(Error::MissingVariable(v.name()))?;
            let d = self.degree_in(v) as usize;
            let mut pw = Vec::with_capacity(d + 1);
            pw.push(Scalar::one());
            for k in 1..=d {
                let next = &pw[k - 1] * &x;
                pw.push(next);
            }
            table[v.index()] = Some(pw);
        }
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut t = Scalar::Exact(c.clone());
            for (v, e) in m.vars() {
                t *= &table[v.index()].as_ref().expect("tabulated")[e as usize];
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Largest absolute value of a term after evaluation (scale for residuals).
    pub fn eval_term_scale(&self, val: &dyn Fn(Var) -> Option<Scalar>) -> Result<f64> {
        let mut best: f64 = 0.0;
        for (m, c) in &self.terms {
            let t = Poly::term(c.clone(), *m).eval(val)?;
            best = best.max(t.to_f64().abs());
        }
        Ok(best)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !a.is_one() || *m == Mono::ONE {
                parts.push(Scalar::Exact(a).to_string());
            }
            for (v, e) in m.vars() {
                if e == 1 {
                    parts.push(v.name().to_string());
                } else {
                    parts.push(format!("{}^{}", v.name(), e));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                self.$m(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl From<Var> for Poly {
    fn from(v: Var) -> Poly {
        Poly::var(v)
    }
}

/// Shorthand for a variable as a polynomial.
pub fn pv(v: Var) -> Poly {
    Poly::var(v)
}

/// Shorthand for an integer constant polynomial.
pub fn pc(n: i64) -> Poly {
    Poly::int(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn registry_round_trips() {
        for o in 0..=MAX_JET_ORDER {
            for ny in 0..=o {
                let v = Var::deriv(o - ny, ny);
                assert_eq!(v.jet_index(), Some((o - ny, ny)));
                let word: String = "x".repeat(o - ny) + &"y".repeat(ny);
                let expect = if o == 0 { "u".to_string() } else { format!("u_{word}") };
                assert_eq!(v.name(), expect);
            }
        }
        assert_eq!(Var::deriv(1, 2), Var::UXYY);
        assert_eq!(Var::ETA1.jet_index(), None);
        assert_eq!(Var::from_name("u_xxyy"), Some(Var::deriv(2, 2)));
        assert_eq!(Var::UXXY.swap_xy(), Var::UXYY);
    }

    #[test]
    fn difference_of_squares() {
        let a = pv(Var::UXX) + pv(Var::UYY);
        let b = pv(Var::UXX) - pv(Var::UYY);
        assert_eq!(&a * &b, pv(Var::UXX).pow(2) - pv(Var::UYY).pow(2));
    }

    #[test]
    fn exact_division_by_common_factor() {
        let a = pv(Var::UXX).pow(2) * pv(Var::UYY) - pv(Var::UXX) * pv(Var::UXY).pow(2);
        let q = a.exact_div(&pv(Var::UXX)).unwrap();
        assert_eq!(q, pv(Var::UXX) * pv(Var::UYY) - pv(Var::UXY).pow(2));
    }

    #[test]
    fn non_divisible_is_an_error() {
        let a = pv(Var::UXX) + pc(1);
        assert_eq!(a.exact_div(&pv(Var::UXX)), Err(Error::DivisionNotExact));
        let b = pv(Var::UXX).pow(2) + pc(1);
        assert_eq!(b.exact_div(&(pv(Var::UXX) + pc(1))), Err(Error::DivisionNotExact));
        assert_eq!(a.exact_div(&Poly::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn substitution_and_derivative() {
        let p = pv(Var::X).pow(3) + pv(Var::X) * pv(Var::Y);
        let q = p.substitute(Var::X, &(pv(Var::Y) + pc(1)));
        let expect = (pv(Var::Y) + pc(1)).pow(3) + (pv(Var::Y) + pc(1)) * pv(Var::Y);
        assert_eq!(q, expect);
        assert_eq!(p.derivative(Var::X), pc(3) * pv(Var::X).pow(2) + pv(Var::Y));
    }

    #[test]
    fn display_is_readable() {
        let p = pc(3) * pv(Var::UXX).pow(2) - pv(Var::UXY) + pc(-2);
        assert_eq!(p.to_string(), "3*u_xx^2 - u_xy - 2");
    }

    fn small_poly() -> impl Strategy<Value = Poly> {
        let vars = [Var::UXX, Var::UXY, Var::UYY, Var::UXXX];
        proptest::collection::vec((-10i64..=10, proptest::collection::vec(0u8..3, 4)), 0..5).prop_map(
            move |terms| {
                let mut p = Poly::zero();
                for (c, e) in terms {
                    let f: Vec<(Var, u8)> = vars.iter().copied().zip(e).collect();
                    p = p + Poly::monomial(super::super::scalar::rat(c, 1), &f);
                }
                p
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn ring_axioms(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn division_inverts_multiplication(a in small_poly(), b in small_poly()) {
            prop_assume!(!b.is_zero());
            let prod = &a * &b;
            prop_assert_eq!(prod.exact_div(&b).unwrap(), a);
        }
    }
}
