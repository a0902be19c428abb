//! Seeded random jets, rationals and affine maps for tests and benchmarks.

use rand::Rng;

use crate::algebra::Scalar;
use crate::jetspace::{JetPoint, Region};
use crate::symmetry::AffineMap3;

/// `p/q` with `|p| <= num` and `1 <= q <= den`.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, num: i64, den: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

fn nonzero_rational<R: Rng + ?Sized>(rng: &mut R, num: i64, den: i64) -> Scalar {
    loop {
        let v = random_rational(rng, num, den);
        if !v.is_zero() {
            return v;
        }
    }
}

fn fill<R: Rng + ?Sized>(rng: &mut R, j: &mut JetPoint, from: usize) {
    for o in from..=j.order() {
        for ny in 0..=o {
            j.set(o - ny, ny, random_rational(rng, 9, 4));
        }
    }
}

fn with_base<R: Rng + ?Sized>(rng: &mut R, order: usize) -> JetPoint {
    let mut j = JetPoint::new(order, random_rational(rng, 5, 3), random_rational(rng, 5, 3), random_rational(rng, 5, 3));
    fill(rng, &mut j, 1);
    j
}

/// A random exact jet. With `region` set, the Hessian is resampled until it
/// lies in that region. Without it, the Hessian is only required to be nondegenerate.
pub fn random_jet<R: Rng + ?Sized>(rng: &mut R, order: usize, region: Option<Region>) -> JetPoint {
    let mut j = with_base(rng, order);
    if order < 2 {
        return j;
    }
    if region == Some(Region::Degenerate) {
        // a c = b^2
        let a = nonzero_rational(rng, 5, 3);
        let b = random_rational(rng, 5, 3);
        let c = &(&b * &b) / &a;
        j.set(2, 0, a);
        j.set(1, 1, b);
        j.set(0, 2, c);
        return j;
    }
    loop {
        let det = j.hessian_det();
        let ok = match region {
            None => !det.is_zero(),
            Some(Region::Plus) => det.signum() > 0,
            Some(Region::Minus) => det.signum() < 0,
            Some(Region::Degenerate) => unreachable!(),
        };
        if ok {
            return j;
        }
        for ny in 0..=2 {
            j.set(2 - ny, ny, random_rational(rng, 9, 4));
        }
    }
}

/// A jet with `|det Hess|` a fourth power of a rational, so `|det|^(1/4)` is exact.
pub fn random_jet_rational_rho<R: Rng + ?Sized>(rng: &mut R, order: usize) -> JetPoint {
    let mut j = with_base(rng, order);
    let a = nonzero_rational(rng, 5, 3);
    let b = random_rational(rng, 5, 3);
    let t = nonzero_rational(rng, 3, 2);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    let det = Scalar::int(sign) * t.powi(4);
    let c = &(&det + &(&b * &b)) / &a;
    j.set(2, 0, a);
    j.set(1, 1, b);
    j.set(0, 2, c);
    j
}

/// A minus-region jet with `s = sqrt(-det Hess)` rational and `u_yy != 0`. Returns the jet and `s`.
pub fn random_minus_jet_rational_s<R: Rng + ?Sized>(rng: &mut R, order: usize) -> (JetPoint, Scalar) {
    loop {
        let mut j = with_base(rng, order);
        let c = nonzero_rational(rng, 5, 3);
        let b = random_rational(rng, 5, 3);
        let s = nonzero_rational(rng, 5, 3);
        // a c = b^2 - s^2
        let a = &(&(&b * &b) - &(&s * &s)) / &c;
        j.set(2, 0, a);
        j.set(1, 1, b);
        j.set(0, 2, c);
        if !j.get(2, 0).is_zero() {
            return (j, s.abs());
        }
    }
}

/// A random invertible affine map with small rational entries.
pub fn random_affine_map<R: Rng + ?Sized>(rng: &mut R) -> AffineMap3 {
    loop {
        let m = std::array::from_fn(|_| std::array::from_fn(|_| random_rational(rng, 3, 2)));
        let t = std::array::from_fn(|_| random_rational(rng, 3, 2));
        if let Ok(g) = AffineMap3::new(m, t) {
            return g;
        }
    }
}
