//! Truncated bivariate Taylor expansions `sum c_ij (x-x0)^i (y-y0)^j`, `i+j <= K`.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::scalar::{Rational, Scalar};
use crate::error::{Error, Result};

/// Largest supported truncation order.
pub const MAX_TAYLOR_ORDER: usize = 6;

fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

fn len_for(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorMap {
    x0: Scalar,
    y0: Scalar,
    order: usize,
    c: Vec<Scalar>,
}

impl TaylorMap {
    // ---- Constructors ----

    pub fn zero(x0: Scalar, y0: Scalar, order: usize) -> TaylorMap {
        assert!(order <= MAX_TAYLOR_ORDER, "order {order} above cap");
        TaylorMap { x0, y0, order, c: vec![Scalar::zero(); len_for(order)] }
    }

    pub fn constant(x0: Scalar, y0: Scalar, order: usize, v: Scalar) -> TaylorMap {
        let mut t = TaylorMap::zero(x0, y0, order);
        t.c[0] = v;
        t
    }

    /// The coordinate function `x` expanded at the base point.
    pub fn var_x(x0: Scalar, y0: Scalar, order: usize) -> TaylorMap {
        let mut t = TaylorMap::constant(x0.clone(), y0, order, x0);
        if order >= 1 {
            t.c[idx(1, 0)] = Scalar::one();
        }
        t
    }

    /// The coordinate function `y` expanded at the base point.
    pub fn var_y(x0: Scalar, y0: Scalar, order: usize) -> TaylorMap {
        let mut t = TaylorMap::constant(x0, y0.clone(), order, y0);
        if order >= 1 {
            t.c[idx(0, 1)] = Scalar::one();
        }
        t
    }

    pub fn from_fn(x0: Scalar, y0: Scalar, order: usize, f: impl Fn(usize, usize) -> Scalar) -> TaylorMap {
        let mut t = TaylorMap::zero(x0, y0, order);
        for d in 0..=order {
            for j in 0..=d {
                t.c[idx(d - j, j)] = f(d - j, j);
            }
        }
        t
    }

    fn like(&self, order: usize) -> TaylorMap {
        TaylorMap::zero(self.x0.clone(), self.y0.clone(), order)
    }

    // ---- Accessors ----

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> (&Scalar, &Scalar) {
        (&self.x0, &self.y0)
    }

    pub fn coeff(&self, i: usize, j: usize) -> &Scalar {
        &self.c[idx(i, j)]
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, v: Scalar) {
        self.c[idx(i, j)] = v;
    }

    pub fn value(&self) -> &Scalar {
        &self.c[0]
    }

    pub fn is_exact(&self) -> bool {
        self.x0.is_exact() && self.y0.is_exact() && self.c.iter().all(Scalar::is_exact)
    }

    pub fn to_float(&self) -> TaylorMap {
        TaylorMap {
            x0: self.x0.to_float(),
            y0: self.y0.to_float(),
            order: self.order,
            c: self.c.iter().map(Scalar::to_float).collect(),
        }
    }

    /// Same series, truncated to a lower order.
    pub fn truncate(&self, order: usize) -> TaylorMap {
        let order = order.min(self.order);
        TaylorMap::from_fn(self.x0.clone(), self.y0.clone(), order, |i, j| self.coeff(i, j).clone())
    }

    /// Evaluate the truncated polynomial at offsets `(dx, dy)` from the base.
    pub fn eval_offset(&self, dx: &Scalar, dy: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for d in 0..=self.order {
            for j in 0..=d {
                let i = d - j;
                acc += &(self.coeff(i, j) * dx.powi(i as i32) * dy.powi(j as i32));
            }
        }
        acc
    }

    // ---- Calculus ----

    pub fn derivative_x(&self) -> TaylorMap {
        let k = self.order.saturating_sub(1);
        let mut t = self.like(k);
        if self.order == 0 {
            return t;
        }
        for d in 0..=k {
            for j in 0..=d {
                let i = d - j;
                t.c[idx(i, j)] = self.coeff(i + 1, j) * Scalar::int(i as i64 + 1);
            }
        }
        t
    }

    pub fn derivative_y(&self) -> TaylorMap {
        let k = self.order.saturating_sub(1);
        let mut t = self.like(k);
        if self.order == 0 {
            return t;
        }
        for d in 0..=k {
            for j in 0..=d {
                let i = d - j;
                t.c[idx(i, j)] = self.coeff(i, j + 1) * Scalar::int(j as i64 + 1);
            }
        }
        t
    }

    pub fn scale(&self, s: &Scalar) -> TaylorMap {
        let mut t = self.clone();
        for v in &mut t.c {
            *v = &*v * s;
        }
        t
    }

    /// `sum_n a_n h^n` where `h = self - self(0)`.
    fn apply_series(&self, a: &[Scalar]) -> TaylorMap {
        let mut h = self.clone();
        h.c[0] = Scalar::zero();
        let mut out = TaylorMap::constant(self.x0.clone(), self.y0.clone(), self.order, a[0].clone());
        let mut hp = TaylorMap::constant(self.x0.clone(), self.y0.clone(), self.order, Scalar::one());
        for an in a.iter().skip(1) {
            hp = &hp * &h;
            out = &out + &hp.scale(an);
        }
        out
    }

    pub fn reciprocal(&self) -> Result<TaylorMap> {
        let c = self.value();
        if c.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let inv = c.recip()?;
        let mut a = Vec::with_capacity(self.order + 1);
        let mut p = inv.clone();
        for _ in 0..=self.order {
            a.push(p.clone());
            p = -(&p * &inv);
        }
        Ok(self.apply_series(&a))
    }

    /// `self^(p/q)` with a positive constant term.
    ///
    /// Exact when the constant term has a rational `q`-th root; otherwise the
    /// result is float in float mode and `NonSquareRational` in exact mode for
    /// square roots.
    pub fn pow_ratio(&self, p: i64, q: u32) -> Result<TaylorMap> {
        let c = self.value();
        match c.signum() {
            0 => return Err(Error::ZeroConstantTerm),
            -1 => return Err(Error::NegativeRadicand),
            _ => {}
        }
        let lead = c.pow_ratio(p as i32, q)?;
        let exact = lead.is_exact() && self.is_exact();
        let alpha = super::scalar::rat(p, q as i64);
        let inv = c.recip()?;
        let mut a = Vec::with_capacity(self.order + 1);
        let mut binom = Rational::one();
        let mut cpow = Scalar::one();
        for n in 0..=self.order {
            let coef = Scalar::Exact(binom.clone()) * &lead * &cpow;
            a.push(if exact { coef } else { coef.to_float() });
            binom = binom * (&alpha - Rational::from_integer((n as i64).into())) / Rational::from_integer((n as i64 + 1).into());
            cpow = &cpow * &inv;
        }
        let base = if exact { self.clone() } else { self.to_float() };
        Ok(base.apply_series(&a))
    }

    /// Square root; exact mode requires a rational-square constant term.
    pub fn sqrt(&self) -> Result<TaylorMap> {
        if self.value().is_exact() {
            self.value().sqrt()?;
        }
        self.pow_ratio(1, 2)
    }

    /// Square root, switching to float mode when the constant is not a rational square.
    pub fn sqrt_or_float(&self) -> Result<TaylorMap> {
        match self.sqrt() {
            Err(Error::NonSquareRational(_)) => self.to_float().sqrt(),
            other => other,
        }
    }

    /// `self(g1, g2)`: substitute the pair of series for `(x, y)`.
    ///
    /// The result is expanded at the base point of `g1`, `g2`. It is the
    /// analytic composition to order `K` when `g(base) = (x0, y0)`.
    pub fn compose(&self, g1: &TaylorMap, g2: &TaylorMap) -> TaylorMap {
        let k = g1.order.min(g2.order);
        let h1 = &g1.truncate(k) - &TaylorMap::constant(g1.x0.clone(), g1.y0.clone(), k, self.x0.clone());
        let h2 = &g2.truncate(k) - &TaylorMap::constant(g1.x0.clone(), g1.y0.clone(), k, self.y0.clone());
        let one = TaylorMap::constant(g1.x0.clone(), g1.y0.clone(), k, Scalar::one());
        let mut p1 = vec![one.clone()];
        let mut p2 = vec![one];
        for n in 1..=self.order {
            let a = &p1[n - 1] * &h1;
            let b = &p2[n - 1] * &h2;
            p1.push(a);
            p2.push(b);
        }
        let mut out = TaylorMap::zero(g1.x0.clone(), g1.y0.clone(), k);
        for d in 0..=self.order {
            for j in 0..=d {
                let i = d - j;
                let c = self.coeff(i, j);
                if !c.is_zero() {
                    out = &out + &(&p1[i] * &p2[j]).scale(c);
                }
            }
        }
        out
    }

    /// Inverse of the map `(x, y) -> (g1, g2)`, expanded at `(g1(0), g2(0))`.
    pub fn invert2d(g1: &TaylorMap, g2: &TaylorMap) -> Result<(TaylorMap, TaylorMap)> {
        let k = g1.order.min(g2.order);
        let (a, b) = (g1.coeff(1, 0).clone(), g1.coeff(0, 1).clone());
        let (c, d) = (g2.coeff(1, 0).clone(), g2.coeff(0, 1).clone());
        let det = &a * &d - &b * &c;
        let singular = match &det {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => {
                let scale = (a.to_f64() * d.to_f64()).abs() + (b.to_f64() * c.to_f64()).abs();
                f.abs() <= 1e-14 * scale || *f == 0.0
            }
        };
        if k == 0 || singular {
            return Err(Error::SingularJacobian);
        }
        let inv = det.recip()?;
        let (ia, ib, ic, id) = (&d * &inv, -(&b * &inv), -(&c * &inv), &a * &inv);
        let (x0, y0) = (g1.x0.clone(), g1.y0.clone());
        let (bx, by) = (g1.value().clone(), g2.value().clone());
        // Nonlinear parts, expanded at (x0, y0).
        let strip = |g: &TaylorMap| {
            let mut n = g.truncate(k);
            n.c[0] = Scalar::zero();
            n.c[idx(1, 0)] = Scalar::zero();
            n.c[idx(0, 1)] = Scalar::zero();
            n
        };
        let (n1, n2) = (strip(g1), strip(g2));
        let e1 = &TaylorMap::var_x(bx.clone(), by.clone(), k) - &TaylorMap::constant(bx.clone(), by.clone(), k, bx.clone());
        let e2 = &TaylorMap::var_y(bx.clone(), by.clone(), k) - &TaylorMap::constant(bx.clone(), by.clone(), k, by.clone());
        let solve = |r1: &TaylorMap, r2: &TaylorMap| (&r1.scale(&ia) + &r2.scale(&ib), &r1.scale(&ic) + &r2.scale(&id));
        let (mut d1, mut d2) = solve(&e1, &e2);
        let shift_x = TaylorMap::constant(bx.clone(), by.clone(), k, x0.clone());
        let shift_y = TaylorMap::constant(bx.clone(), by.clone(), k, y0.clone());
        for _ in 0..k {
            let px = &shift_x + &d1;
            let py = &shift_y + &d2;
            let m1 = n1.compose(&px, &py);
            let m2 = n2.compose(&px, &py);
            let (nd1, nd2) = solve(&(&e1 - &m1), &(&e2 - &m2));
            d1 = nd1;
            d2 = nd2;
        }
        Ok((&shift_x + &d1, &shift_y + &d2))
    }
}

fn check_compatible(a: &TaylorMap, b: &TaylorMap) {
    debug_assert!(
        (a.x0.to_f64() - b.x0.to_f64()).abs() <= 1e-12 * (1.0 + a.x0.to_f64().abs())
            && (a.y0.to_f64() - b.y0.to_f64()).abs() <= 1e-12 * (1.0 + a.y0.to_f64().abs()),
        "series expanded at different base points"
    );
}

impl Add<&TaylorMap> for &TaylorMap {
    type Output = TaylorMap;
    fn add(self, o: &TaylorMap) -> TaylorMap {
        check_compatible(self, o);
        let k = self.order.min(o.order);
        let mut t = self.like(k);
        for n in 0..len_for(k) {
            t.c[n] = &self.c[n] + &o.c[n];
        }
        t
    }
}

impl Sub<&TaylorMap> for &TaylorMap {
    type Output = TaylorMap;
    fn sub(self, o: &TaylorMap) -> TaylorMap {
        check_compatible(self, o);
        let k = self.order.min(o.order);
        let mut t = self.like(k);
        for n in 0..len_for(k) {
            t.c[n] = &self.c[n] - &o.c[n];
        }
        t
    }
}

impl Mul<&TaylorMap> for &TaylorMap {
    type Output = TaylorMap;
    fn mul(self, o: &TaylorMap) -> TaylorMap {
        check_compatible(self, o);
        let k = self.order.min(o.order);
        let mut t = self.like(k);
        for d1 in 0..=k {
            for j1 in 0..=d1 {
                let a = self.coeff(d1 - j1, j1);
                if a.is_zero() {
                    continue;
                }
                for d2 in 0..=(k - d1) {
                    for j2 in 0..=d2 {
                        let b = o.coeff(d2 - j2, j2);
                        if b.is_zero() {
                            continue;
                        }
                        let n = idx(d1 - j1 + d2 - j2, j1 + j2);
                        t.c[n] = &t.c[n] + &(a * b);
                    }
                }
            }
        }
        t
    }
}

impl Neg for &TaylorMap {
    type Output = TaylorMap;
    fn neg(self) -> TaylorMap {
        self.scale(&Scalar::int(-1))
    }
}

impl Zero for TaylorMap {
    fn zero() -> Self {
        TaylorMap::zero(Scalar::zero(), Scalar::zero(), MAX_TAYLOR_ORDER)
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(Scalar::is_zero)
    }
}

impl Add for TaylorMap {
    type Output = TaylorMap;
    fn add(self, o: TaylorMap) -> TaylorMap {
        &self + &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::rat;
    use proptest::prelude::*;

    fn origin(order: usize) -> (TaylorMap, TaylorMap) {
        (TaylorMap::var_x(Scalar::zero(), Scalar::zero(), order), TaylorMap::var_y(Scalar::zero(), Scalar::zero(), order))
    }

    fn binom(n: usize, k: usize) -> i64 {
        (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
    }

    #[test]
    fn invert_identity() {
        let (x, y) = origin(4);
        let (ix, iy) = TaylorMap::invert2d(&x, &y).unwrap();
        assert_eq!(ix, x);
        assert_eq!(iy, y);
    }

    #[test]
    fn invert_linear_scaling() {
        let (x, y) = origin(3);
        let (ix, iy) = TaylorMap::invert2d(&x.scale(&Scalar::int(2)), &y).unwrap();
        assert_eq!(ix, x.scale(&Scalar::ratio(1, 2)));
        assert_eq!(iy, y);
    }

    #[test]
    fn singular_jacobian() {
        let (x, _) = origin(3);
        assert_eq!(TaylorMap::invert2d(&x, &x).unwrap_err(), Error::SingularJacobian);
    }

    #[test]
    fn geometric_series_composed_with_sum_gives_binomials() {
        let k = 6;
        let (x, y) = origin(k);
        let geo = TaylorMap::from_fn(Scalar::zero(), Scalar::zero(), k, |_, j| if j == 0 { Scalar::one() } else { Scalar::zero() });
        let out = geo.compose(&(&x + &y), &TaylorMap::zero(Scalar::zero(), Scalar::zero(), k));
        for d in 0..=k {
            for j in 0..=d {
                assert_eq!(out.coeff(d - j, j), &Scalar::int(binom(d, j)), "({}, {j})", d - j);
            }
        }
    }

    #[test]
    fn reciprocal_of_one_plus_x() {
        let (x, _) = origin(5);
        let one = TaylorMap::constant(Scalar::zero(), Scalar::zero(), 5, Scalar::one());
        let r = (&one + &x).reciprocal().unwrap();
        for i in 0..=5 {
            assert_eq!(r.coeff(i, 0), &Scalar::int(if i % 2 == 0 { 1 } else { -1 }));
        }
        assert_eq!(TaylorMap::zero(Scalar::zero(), Scalar::zero(), 2).reciprocal().unwrap_err(), Error::ZeroConstantTerm);
    }

    #[test]
    fn sqrt_of_one() {
        let one = TaylorMap::constant(Scalar::zero(), Scalar::zero(), 4, Scalar::one());
        assert_eq!(one.sqrt().unwrap(), one);
        let two = TaylorMap::constant(Scalar::zero(), Scalar::zero(), 4, Scalar::int(2));
        assert!(matches!(two.sqrt(), Err(Error::NonSquareRational(_))));
        assert!(!two.sqrt_or_float().unwrap().is_exact());
        let neg = TaylorMap::constant(Scalar::zero(), Scalar::zero(), 4, Scalar::int(-1));
        assert_eq!(neg.sqrt().unwrap_err(), Error::NegativeRadicand);
    }

    /// Binomial series of (1 - t)^(1/2) with t = x^2 + y^2.
    #[test]
    fn hemisphere_matches_binomial_series() {
        let k = 5;
        let (x, y) = origin(k);
        let one = TaylorMap::constant(Scalar::zero(), Scalar::zero(), k, Scalar::one());
        let f = (&(&one - &(&x * &x)) - &(&y * &y)).sqrt().unwrap();
        // a_n = (-1)^n binom(1/2, n)
        let mut a = vec![rat(1, 1)];
        for n in 1..=2 {
            let prev: Rational = a[n - 1].clone();
            a.push(-prev * (rat(1, 2) - rat(n as i64 - 1, 1)) / rat(n as i64, 1));
        }
        // (x^2+y^2)^n contributes binom(n, m) x^(2n-2m) y^(2m).
        for d in 0..=k {
            for j in 0..=d {
                let i = d - j;
                let expect = if i % 2 == 0 && j % 2 == 0 {
                    let n = (i + j) / 2;
                    Scalar::Exact(a[n].clone() * rat(binom(n, j / 2), 1))
                } else {
                    Scalar::zero()
                };
                assert_eq!(f.coeff(i, j), &expect, "({i}, {j})");
            }
        }
        assert_eq!(f.coeff(2, 0), &Scalar::ratio(-1, 2));
        assert_eq!(f.coeff(2, 2), &Scalar::ratio(-1, 4));
    }

    fn poly_strategy() -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-5i64..=5, len_for(3))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        /// Products and reciprocals of polynomials match central finite differences.
        #[test]
        fn matches_finite_differences(cs in poly_strategy(), ds in poly_strategy(), bx in -2i64..=2, by in -2i64..=2) {
            let (x0, y0) = (Scalar::Float(bx as f64 * 0.25), Scalar::Float(by as f64 * 0.25));
            let p = TaylorMap::from_fn(x0.clone(), y0.clone(), 3, |i, j| Scalar::int(cs[idx(i, j)]).to_float());
            let mut q = TaylorMap::from_fn(x0.clone(), y0.clone(), 3, |i, j| Scalar::int(ds[idx(i, j)]).to_float());
            q.set_coeff(0, 0, Scalar::Float(7.0));
            let f = &p * &q.reciprocal().unwrap();
            let eval = |dx: f64, dy: f64| {
                let (a, b) = (Scalar::Float(dx), Scalar::Float(dy));
                p.eval_offset(&a, &b).to_f64() / q.eval_offset(&a, &b).to_f64()
            };
            let h = 1e-4;
            let fx = (eval(h, 0.0) - eval(-h, 0.0)) / (2.0 * h);
            let fyy = (eval(0.0, h) - 2.0 * eval(0.0, 0.0) + eval(0.0, -h)) / (h * h);
            let fxy = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
            prop_assert!((f.value().to_f64() - eval(0.0, 0.0)).abs() < 1e-9);
            prop_assert!((f.coeff(1, 0).to_f64() - fx).abs() < 1e-6);
            prop_assert!((2.0 * f.coeff(0, 2).to_f64() - fyy).abs() < 1e-6 * (1.0 + fyy.abs()) + 1e-5);
            prop_assert!((f.coeff(1, 1).to_f64() - fxy).abs() < 1e-6 * (1.0 + fxy.abs()) + 1e-5);
        }

        #[test]
        fn invert_then_compose_is_identity(a in 1i64..=4, b in -3i64..=3, c in -3i64..=3, q in -3i64..=3) {
            let (x, y) = origin(4);
            let g1 = &(&x.scale(&Scalar::int(a)) + &y.scale(&Scalar::int(b))) + &(&x * &y).scale(&Scalar::int(q));
            let g2 = &(&y.scale(&Scalar::int(a + 1)) + &x.scale(&Scalar::int(c))) + &(&x * &x).scale(&Scalar::int(q));
            prop_assume!(a * (a + 1) - b * c != 0);
            let (ix, iy) = TaylorMap::invert2d(&g1, &g2).unwrap();
            prop_assert_eq!(g1.compose(&ix, &iy), x.clone());
            prop_assert_eq!(g2.compose(&ix, &iy), y.clone());
        }
    }
}
