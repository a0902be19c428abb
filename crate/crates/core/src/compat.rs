//! Prolongation of the convex-region system to orders four and five, its
//! compatibility conditions, and the conic-based solution recipes.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::algebra::{hessian_det, pv, rat, Poly, RatFunc, Scalar, TaylorMap, Var};
use crate::error::{Error, Result};
use crate::invariantpde::system_plus;
use crate::jetspace::{jet_of_surface, total_derivative_rf, Dir, JetPoint};
use crate::linalg;

fn d(n: usize, m: usize) -> Var {
    Var::deriv(n, m)
}

fn p(n: usize, m: usize) -> Poly {
    pv(d(n, m))
}

/// `u_xy u_yy u_yyyy - 2u_xy u_yyy^2 + 2u_xyy u_yy u_yyy - u_xyyy u_yy^2`.
pub fn cond4() -> Poly {
    &(&(&(&(&p(1, 1) * &p(0, 2)) * &p(0, 4)) - &(&p(1, 1) * &p(0, 3).pow(2)).scale(&rat(2, 1)))
        + &(&(&p(1, 2) * &p(0, 2)) * &p(0, 3)).scale(&rat(2, 1)))
        - &(&p(1, 3) * &p(0, 2).pow(2))
}

/// `9u_yy^2 u_yyyyy - 45u_yy u_yyy u_yyyy + 40u_yyy^3`.
pub fn cond5() -> Poly {
    &(&(&p(0, 2).pow(2) * &p(0, 5)).scale(&rat(9, 1)) - &(&(&p(0, 2) * &p(0, 3)) * &p(0, 4)).scale(&rat(45, 1)))
        + &p(0, 3).pow(3).scale(&rat(40, 1))
}

fn swap(q: &Poly) -> Poly {
    q.map_vars(Var::swap_xy)
}

/// The convex-region system solved for the `x`-heavy derivatives, prolonged to order five.
#[derive(Clone, Debug)]
pub struct ProlongedSystem {
    pub solved: BTreeMap<Var, RatFunc>,
    /// `D_y(u_xxx) - D_x(u_xxy)` before the order-four condition is imposed.
    pub r4: RatFunc,
    /// `D_y(u_xxxx) - D_x(u_xxxy)` before the order-five condition is imposed.
    pub r5: RatFunc,
    /// Differences of alternative derivations of the same entry after both conditions.
    pub consistency: Vec<(String, RatFunc)>,
}

/// Free coordinates on the prolonged system.
pub const FREE: [(usize, usize); 9] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (1, 2), (0, 3), (0, 4)];

impl ProlongedSystem {
    pub fn get(&self, nx: usize, ny: usize) -> Option<&RatFunc> {
        self.solved.get(&d(nx, ny))
    }
}

fn dt(r: &RatFunc, dir: Dir) -> RatFunc {
    total_derivative_rf(r, dir, 5).expect("order at most four")
}

fn reduce(r: &RatFunc, subs: &[(Var, RatFunc)]) -> RatFunc {
    subs.iter().fold(r.clone(), |acc, (v, val)| acc.substitute(*v, val))
}

fn build() -> ProlongedSystem {
    let uyy = RatFunc::from(p(0, 2));
    let uyy2 = uyy.pow(2);
    // u_xxx = -u_xx (2u_xy u_yyy - 3u_xyy u_yy) / u_yy^2
    let s3 = RatFunc::new(-(&p(2, 0) * &(&(&p(1, 1) * &p(0, 3)).scale(&rat(2, 1)) - &(&p(1, 2) * &p(0, 2)).scale(&rat(3, 1)))), p(0, 2).pow(2))
        .expect("nonzero");
    // u_xxy = (u_xx u_yy u_yyy - 4u_xy^2 u_yyy + 6u_xy u_xyy u_yy) / (3u_yy^2)
    let t3num = &(&(&(&p(2, 0) * &p(0, 2)) * &p(0, 3)) - &(&p(1, 1).pow(2) * &p(0, 3)).scale(&rat(4, 1)))
        + &(&(&p(1, 1) * &p(1, 2)) * &p(0, 2)).scale(&rat(6, 1));
    let t3 = RatFunc::new(t3num, p(0, 2).pow(2).scale(&rat(3, 1))).expect("nonzero");
    let sub3 = vec![(d(3, 0), s3.clone()), (d(2, 1), t3.clone())];

    // order four with u_xyyy still free
    let dyt3_free = reduce(&dt(&t3, Dir::Y), &sub3);
    let mut sub_a = sub3.clone();
    sub_a.push((d(2, 2), dyt3_free));
    let r4 = &reduce(&dt(&s3, Dir::Y), &sub_a) - &reduce(&dt(&t3, Dir::X), &sub_a);

    // impose the order-four condition
    let c4 = RatFunc::from(cond4());
    let uxyyy = (&c4 + &RatFunc::from(&p(1, 3) * &p(0, 2).pow(2))).checked_div(&uyy2).expect("nonzero");
    let mut sub4 = sub3.clone();
    sub4.push((d(1, 3), uxyyy.clone()));
    let uxxyy = reduce(&dt(&t3, Dir::Y), &sub4);
    sub4.push((d(2, 2), uxxyy.clone()));
    let uxxxx = reduce(&dt(&s3, Dir::X), &sub4);
    let uxxxy = reduce(&dt(&s3, Dir::Y), &sub4);
    let mut consistency = vec![("xxxy".to_string(), &reduce(&dt(&t3, Dir::X), &sub4) - &uxxxy)];

    // order five with u_yyyyy free
    let uxyyyy_free = reduce(&dt(&uxyyy, Dir::Y), &sub4);
    let mut sub5 = sub4.clone();
    sub5.push((d(1, 4), uxyyyy_free.clone()));
    let r5 = &reduce(&dt(&uxxxx, Dir::Y), &sub5) - &reduce(&dt(&uxxxy, Dir::X), &sub5);

    // impose the order-five condition
    let c5 = RatFunc::from(cond5());
    let uyyyyy = (&RatFunc::from(&p(0, 2).pow(2) * &p(0, 5)).scale(&rat(9, 1)) - &c5)
        .checked_div(&RatFunc::from(p(0, 2).pow(2).scale(&rat(9, 1))))
        .expect("nonzero");
    let uxyyyy = uxyyyy_free.substitute(d(0, 5), &uyyyyy);
    let mut sub5c = sub4.clone();
    sub5c.push((d(1, 4), uxyyyy.clone()));
    sub5c.push((d(0, 5), uyyyyy.clone()));
    let uxxyyy = reduce(&dt(&uxxyy, Dir::Y), &sub5c);
    let uxxxyy = reduce(&dt(&uxxxy, Dir::Y), &sub5c);
    let uxxxxy = reduce(&dt(&uxxxx, Dir::Y), &sub5c);
    let uxxxxx = reduce(&dt(&uxxxx, Dir::X), &sub5c);
    consistency.push(("xxxxy".to_string(), &reduce(&dt(&uxxxy, Dir::X), &sub5c) - &uxxxxy));
    consistency.push(("xxxyy".to_string(), &reduce(&dt(&uxxyy, Dir::X), &sub5c) - &uxxxyy));
    consistency.push(("xxyyy".to_string(), &reduce(&dt(&uxyyy, Dir::X), &sub5c) - &uxxyyy));
    consistency.push(("xyyyy".to_string(), &reduce(&dt(&RatFunc::from(p(0, 4)), Dir::X), &sub5c) - &uxyyyy));

    let mut solved = BTreeMap::new();
    for (v, r) in [
        (d(3, 0), s3),
        (d(2, 1), t3),
        (d(1, 3), uxyyy),
        (d(2, 2), uxxyy),
        (d(4, 0), uxxxx),
        (d(3, 1), uxxxy),
        (d(0, 5), uyyyyy),
        (d(1, 4), uxyyyy),
        (d(2, 3), uxxyyy),
        (d(3, 2), uxxxyy),
        (d(4, 1), uxxxxy),
        (d(5, 0), uxxxxx),
    ] {
        solved.insert(v, r);
    }
    ProlongedSystem { solved, r4, r5, consistency }
}

pub fn build_prolonged_system() -> &'static ProlongedSystem {
    static SYS: OnceLock<ProlongedSystem> = OnceLock::new();
    SYS.get_or_init(build)
}

/// `-(8/3) det Hess cond4 / u_yy^4`.
pub fn r4_factored() -> RatFunc {
    RatFunc::new((&hessian_det() * &cond4()).scale(&rat(-8, 3)), p(0, 2).pow(4)).expect("nonzero")
}

/// `(1/9) (u_xx / u_yy^5) det Hess cond5`.
pub fn r5_factored() -> RatFunc {
    RatFunc::new((&(&p(2, 0) * &hessian_det()) * &cond5()).scale(&rat(1, 9)), p(0, 2).pow(5)).expect("nonzero")
}

/// The cross-derivative residuals, checked against their factored forms.
pub fn cross_residuals(sys: &ProlongedSystem) -> Result<(RatFunc, RatFunc)> {
    if sys.r4 != r4_factored() {
        return Err(Error::IdentityFailed("order-four cross derivative".into()));
    }
    if sys.r5 != r5_factored() {
        return Err(Error::IdentityFailed("order-five cross derivative".into()));
    }
    Ok((sys.r4.clone(), sys.r5.clone()))
}

/// `(c4, c5, c4x, c5x)`: the two conditions and their `x <-> y` mirrors.
pub fn compat_conditions(j: &JetPoint) -> Result<[Scalar; 4]> {
    if j.order() < 5 {
        return Err(Error::OrderTooLow { have: j.order(), need: 5 });
    }
    Ok([j.eval(&cond4())?, j.eval(&cond5())?, j.eval(&swap(&cond4()))?, j.eval(&swap(&cond5()))?])
}

/// Overwrites the solved entries of an order-5 jet from its free entries.
pub fn point_on_prolonged_system(j: &JetPoint) -> Result<JetPoint> {
    if j.order() < 5 {
        return Err(Error::OrderTooLow { have: j.order(), need: 5 });
    }
    if j.get(0, 2).is_zero() {
        return Err(Error::DegenerateSample("u_yy".into(), "0".into()));
    }
    let mut out = j.clone();
    let val = |v: Var| j.value(v);
    for (v, r) in &build_prolonged_system().solved {
        let (nx, ny) = v.jet_index().expect("jet variable");
        out.set(nx, ny, r.eval(&val)?);
    }
    Ok(out)
}

fn close(a: &Scalar, b: &Scalar, tol: f64) -> bool {
    if a.is_exact() && b.is_exact() {
        a == b
    } else {
        (a.to_f64() - b.to_f64()).abs() <= tol * (1.0 + b.to_f64().abs())
    }
}

/// Residuals of `order-k form = Hessian form * (k-2)-form` for `k = 3, 4, 5`, as max absolute entries.
pub fn higher_proportionality(j: &JetPoint) -> Result<[Scalar; 3]> {
    if j.order() < 5 {
        return Err(Error::OrderTooLow { have: j.order(), need: 5 });
    }
    let target = point_on_prolonged_system(j)?;
    for o in 3..=5 {
        for ny in 0..=o {
            if !close(j.get(o - ny, ny), target.get(o - ny, ny), 1e-8) {
                return Err(Error::NotOnProlongedManifold);
            }
        }
    }
    let [a, b, c] = j.hessian();
    let mut out: [Scalar; 3] = Default::default();
    for (slot, k) in (3..=5).enumerate() {
        // columns: coefficients of the (k-2)-form; rows: monomials dx^(k-i) dy^i
        let n = k - 1;
        let mut m = vec![vec![Scalar::zero(); n]; k + 1];
        for q in 0..n {
            m[q][q] += &a;
            m[q + 1][q] += &(Scalar::int(2) * &b);
            m[q + 2][q] += &c;
        }
        let rhs: Vec<Scalar> =
            (0..=k).map(|i| Scalar::int(crate::jetspace::binomial(k, i)) * j.get(k - i, i)).collect();
        let (_, res) = linalg::least_squares(&m, &rhs).ok_or(Error::DegenerateHessian)?;
        out[slot] = res.iter().fold(Scalar::zero(), |acc, r| if r.abs() > acc { r.abs() } else { acc });
    }
    Ok(out)
}

/// Coefficients of `a u^2 + (h0 + h1 x + h2 y + h3 xy) u + k0 + k1 x + k2 y + k3 x^2 + k4 xy + k5 y^2 + k6 x^2y + k7 xy^2 + k8 x^2y^2 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicCoeffs {
    pub a: Scalar,
    pub h: [Scalar; 4],
    pub k: [Scalar; 9],
}

impl ConicCoeffs {
    /// `x^2 + y^2 + u^2 = 1`.
    pub fn unit_sphere() -> ConicCoeffs {
        let z = Scalar::zero;
        let mut k: [Scalar; 9] = Default::default();
        k[0] = Scalar::int(-1);
        k[3] = Scalar::one();
        k[5] = Scalar::one();
        ConicCoeffs { a: Scalar::one(), h: [z(), z(), z(), z()], k }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleResult {
    pub x: Scalar,
    pub y: Scalar,
    /// Values of the two convex-region equations.
    pub residuals: Vec<Scalar>,
    /// Largest residual divided by `max(1, largest monomial)`.
    pub scaled: f64,
    pub det_sign: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compat: Option<[Scalar; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub samples: usize,
    pub max_residual: f64,
    pub per_sample: Vec<SampleResult>,
}

fn fmt_point(x: &Scalar, y: &Scalar) -> String {
    format!("({x}, {y})")
}

fn report(per_sample: Vec<SampleResult>) -> SampleReport {
    let max_residual = per_sample.iter().map(|s| s.scaled).fold(0.0, f64::max);
    SampleReport { samples: per_sample.len(), max_residual, per_sample }
}

fn sample_result(x: &Scalar, y: &Scalar, j: &JetPoint, with_compat: bool) -> Result<SampleResult> {
    let val = |v: Var| j.value(v);
    let mut residuals = Vec::with_capacity(2);
    let mut scaled: f64 = 0.0;
    for e in system_plus() {
        let r = j.eval(&e)?;
        let scale = e.eval_term_scale(&val)?.max(1.0);
        scaled = scaled.max(r.to_f64().abs() / scale);
        residuals.push(r);
    }
    let compat = if with_compat { Some(compat_conditions(j)?) } else { None };
    Ok(SampleResult { x: x.clone(), y: y.clone(), residuals, scaled, det_sign: j.hessian_det().signum(), compat })
}

/// Solves the conic relation for `u` near each sample and evaluates the convex-region system.
pub fn conic_check(c: &ConicCoeffs, branch: Branch, samples: &[(Scalar, Scalar)]) -> Result<SampleReport> {
    let mut out = Vec::with_capacity(samples.len());
    for (x0, y0) in samples {
        let k = 5;
        let x = TaylorMap::var_x(x0.clone(), y0.clone(), k);
        let y = TaylorMap::var_y(x0.clone(), y0.clone(), k);
        let cst = |s: &Scalar| TaylorMap::constant(x0.clone(), y0.clone(), k, s.clone());
        let xy = &x * &y;
        let bq = &(&(&cst(&c.h[0]) + &x.scale(&c.h[1])) + &y.scale(&c.h[2])) + &xy.scale(&c.h[3]);
        let mons = [cst(&Scalar::one()), x.clone(), y.clone(), &x * &x, xy.clone(), &y * &y, &(&x * &x) * &y, &(&x * &y) * &y, &xy * &xy];
        let cq = mons.iter().zip(&c.k).fold(TaylorMap::zero(x0.clone(), y0.clone(), k), |acc, (m, kk)| &acc + &m.scale(kk));
        let u = if c.a.is_zero() {
            if bq.value().is_zero() {
                return Err(Error::DegenerateSample(fmt_point(x0, y0), "linear coefficient vanishes".into()));
            }
            -&(&cq * &bq.reciprocal()?)
        } else {
            let disc = &(&bq * &bq) - &cq.scale(&(Scalar::int(4) * &c.a));
            if disc.value().signum() < 0 {
                return Err(Error::NoRealBranch(fmt_point(x0, y0), disc.value().to_string()));
            }
            if disc.value().is_zero() {
                return Err(Error::DegenerateSample(fmt_point(x0, y0), "discriminant vanishes".into()));
            }
            let root = disc.sqrt_or_float()?;
            let signed = match branch {
                Branch::Plus => root,
                Branch::Minus => -&root,
            };
            (&signed - &bq).scale(&(Scalar::int(2) * &c.a).recip()?)
        };
        let j = jet_of_surface(&u, 5)?;
        out.push(sample_result(x0, y0, &j, false)?);
    }
    Ok(report(out))
}

/// Evaluates the convex-region system and the compatibility conditions on the
/// order-5 jet of an arbitrary surface at each sample.
pub fn surface_check(
    samples: &[(Scalar, Scalar)],
    mut surface: impl FnMut(&Scalar, &Scalar, usize) -> Result<TaylorMap>,
) -> Result<SampleReport> {
    let mut out = Vec::with_capacity(samples.len());
    for (x0, y0) in samples {
        let j = jet_of_surface(&surface(x0, y0, 5)?, 5)?;
        out.push(sample_result(x0, y0, &j, true)?);
    }
    Ok(report(out))
}

/// Evaluates the convex-region system and the compatibility conditions on
/// `u = (a0 + a1 x + a2 y + a3 xy + a4 y^2 + a5 xy^2) / (b0 + b1 y)`.
pub fn family_check(a: &[Scalar; 6], b: &[Scalar; 2], samples: &[(Scalar, Scalar)]) -> Result<SampleReport> {
    let mut out = Vec::with_capacity(samples.len());
    for (x0, y0) in samples {
        let k = 5;
        let x = TaylorMap::var_x(x0.clone(), y0.clone(), k);
        let y = TaylorMap::var_y(x0.clone(), y0.clone(), k);
        let one = TaylorMap::constant(x0.clone(), y0.clone(), k, Scalar::one());
        let mons = [one.clone(), x.clone(), y.clone(), &x * &y, &y * &y, &(&x * &y) * &y];
        let num = mons.iter().zip(a).fold(TaylorMap::zero(x0.clone(), y0.clone(), k), |acc, (m, c)| &acc + &m.scale(c));
        let den = &one.scale(&b[0]) + &y.scale(&b[1]);
        if den.value().is_zero() {
            return Err(Error::PoleAtSample(fmt_point(x0, y0), "b0 + b1 y = 0".into()));
        }
        let j = jet_of_surface(&(&num * &den.reciprocal()?), 5)?;
        out.push(sample_result(x0, y0, &j, true)?);
    }
    Ok(report(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetspace::{taylor_of_jet, total_derivative};
    use crate::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(n: i64) -> Scalar {
        Scalar::int(n)
    }

    fn den_is_power_of_uyy(r: &RatFunc) -> bool {
        r.den().as_monomial().is_some_and(|(m, _)| m.vars().all(|(v, _)| v == Var::UYY))
    }

    #[test]
    fn solved_entries_use_only_free_coordinates() {
        let sys = build_prolonged_system();
        assert_eq!(sys.solved.len(), 12);
        let free: Vec<Var> = FREE.iter().map(|&(a, b)| d(a, b)).collect();
        for (v, r) in &sys.solved {
            assert!(den_is_power_of_uyy(r), "{}", v.name());
            for w in r.num().variables() {
                assert!(free.contains(&w), "{} uses {}", v.name(), w.name());
            }
        }
    }

    #[test]
    fn solved_uxxx_matches_display() {
        let sys = build_prolonged_system();
        let expect = RatFunc::new(
            -(&p(2, 0) * &(&(&p(1, 1) * &p(0, 3)).scale(&rat(2, 1)) - &(&p(1, 2) * &p(0, 2)).scale(&rat(3, 1)))),
            p(0, 2).pow(2),
        )
        .unwrap();
        assert_eq!(sys.get(3, 0).unwrap(), &expect);
        // u_xyyy solved from the order-four condition
        let uxyyy = RatFunc::new(
            &(&(&(&p(1, 1) * &p(0, 2)) * &p(0, 4)) - &(&p(1, 1) * &p(0, 3).pow(2)).scale(&rat(2, 1))) + &(&(&p(1, 2) * &p(0, 2)) * &p(0, 3)).scale(&rat(2, 1)),
            p(0, 2).pow(2),
        )
        .unwrap();
        assert_eq!(sys.get(1, 3).unwrap(), &uxyyy);
    }

    #[test]
    fn quadric_jet_gives_zero_entries() {
        let j = JetPoint::fiducial(5, 1);
        let val = |v: Var| j.value(v);
        for r in build_prolonged_system().solved.values() {
            assert_eq!(r.eval(&val).unwrap(), s(0));
        }
    }

    #[test]
    fn uxxxx_matches_independent_differentiation() {
        // Differentiate the numerator and denominator of u_xxx separately, then substitute.
        let sys = build_prolonged_system();
        let s3 = sys.get(3, 0).unwrap();
        let num = s3.num().clone();
        let den = s3.den().clone();
        let dn = total_derivative(&num, Dir::X, 4).unwrap();
        let dd = total_derivative(&den, Dir::X, 4).unwrap();
        let raw = RatFunc::new(&(&dn * &den) - &(&num * &dd), den.pow(2)).unwrap();
        let mut r = raw;
        for (nx, ny) in [(3, 0), (2, 1), (2, 2), (1, 3)] {
            r = r.substitute(d(nx, ny), sys.get(nx, ny).unwrap());
        }
        assert_eq!(&r, sys.get(4, 0).unwrap());
    }

    #[test]
    fn cross_residual_identities() {
        let sys = build_prolonged_system();
        let (r4, r5) = cross_residuals(sys).unwrap();
        assert_eq!(r4.substitute(d(1, 3), sys.get(1, 3).unwrap()), RatFunc::zero());
        assert_eq!(r5.substitute(d(0, 5), sys.get(0, 5).unwrap()), RatFunc::zero());
        // numeric cross-check of the order-four factorization
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let j = sample::random_jet(&mut rng, 5, Some(crate::jetspace::Region::Plus));
            if j.get(0, 2).is_zero() {
                continue;
            }
            let val = |v: Var| j.value(v);
            let direct = j.hessian_det() * j.eval(&cond4()).unwrap() * Scalar::ratio(-8, 3) / j.get(0, 2).powi(4);
            assert_eq!(r4.eval(&val).unwrap(), direct);
        }
    }

    #[test]
    fn no_further_conditions_at_order_five() {
        for (name, r) in &build_prolonged_system().consistency {
            assert!(r.is_zero(), "{name}: {r}");
        }
    }

    #[test]
    fn swapped_uxxx_is_the_uyyy_equation() {
        let s3 = build_prolonged_system().get(3, 0).unwrap().map_vars(Var::swap_xy);
        let e1 = RatFunc::from(system_plus()[0].clone());
        assert!(e1.substitute(d(0, 3), &s3).is_zero());
    }

    #[test]
    fn compat_examples() {
        assert_eq!(compat_conditions(&JetPoint::fiducial(5, 1)).unwrap(), [s(0), s(0), s(0), s(0)]);
        // u = sqrt(1 - y^2) at y = 0: u_yy = -1, u_yyyy = -3, odd derivatives vanish
        let mut j = JetPoint::new(5, s(0), s(0), s(1));
        j.set(0, 2, s(-1));
        j.set(0, 4, s(-3));
        assert_eq!(compat_conditions(&j).unwrap()[1], s(0));
        // and off the axis, in floats
        let y0 = Scalar::ratio(1, 3);
        let y = TaylorMap::var_y(s(0), y0.clone(), 5);
        let one = TaylorMap::constant(s(0), y0, 5, s(1));
        let f = (&one - &(&y * &y)).sqrt_or_float().unwrap();
        let c = compat_conditions(&jet_of_surface(&f, 5).unwrap()).unwrap();
        assert!(c[1].to_f64().abs() < 1e-12);
        // direct substitution on a random jet
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let j = sample::random_jet(&mut rng, 5, None);
        let g = |a: usize, b: usize| j.get(a, b).clone();
        let c4 = g(1, 1) * g(0, 2) * g(0, 4) - s(2) * g(1, 1) * g(0, 3).powi(2) + s(2) * g(1, 2) * g(0, 2) * g(0, 3) - g(1, 3) * g(0, 2).powi(2);
        let c5x = s(9) * g(2, 0).powi(2) * g(5, 0) - s(45) * g(2, 0) * g(3, 0) * g(4, 0) + s(40) * g(3, 0).powi(3);
        let r = compat_conditions(&j).unwrap();
        assert_eq!(r[0], c4);
        assert_eq!(r[3], c5x);
    }

    fn grid(n: usize, rng: &mut ChaCha8Rng, radius: f64) -> Vec<(Scalar, Scalar)> {
        let mut out = Vec::new();
        while out.len() < n {
            let x = Scalar::ratio(rng.gen_range(-60..=60), 100);
            let y = Scalar::ratio(rng.gen_range(-60..=60), 100);
            if x.to_f64().powi(2) + y.to_f64().powi(2) < radius {
                out.push((x, y));
            }
        }
        out
    }

    #[test]
    fn sphere_branch_solves_the_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let pts = grid(25, &mut rng, 0.5);
        let r = conic_check(&ConicCoeffs::unit_sphere(), Branch::Plus, &pts).unwrap();
        assert_eq!(r.samples, 25);
        assert!(r.max_residual < 1e-10, "{}", r.max_residual);
        assert!(r.per_sample.iter().all(|s| s.det_sign == 1));
    }

    #[test]
    fn plane_is_a_trivial_solution() {
        let mut c = ConicCoeffs { a: s(0), h: [s(2), s(0), s(0), s(0)], k: Default::default() };
        c.k[0] = s(1);
        c.k[1] = s(3);
        let r = conic_check(&c, Branch::Plus, &[(s(0), s(0)), (s(1), s(2))]).unwrap();
        assert_eq!(r.max_residual, 0.0);
        c.h[0] = s(0);
        assert!(matches!(conic_check(&c, Branch::Plus, &[(s(0), s(0))]), Err(Error::DegenerateSample(..))));
    }

    #[test]
    fn failing_conic_reports_residual() {
        let mut c = ConicCoeffs::unit_sphere();
        c.k[8] = s(3);
        c.k[6] = s(1);
        let r = conic_check(&c, Branch::Plus, &[(Scalar::ratio(1, 5), Scalar::ratio(1, 3))]).unwrap();
        assert!(r.max_residual > 1e-6);
        let far = conic_check(&ConicCoeffs::unit_sphere(), Branch::Plus, &[(s(2), s(0))]);
        assert!(matches!(far, Err(Error::NoRealBranch(..))));
    }

    #[test]
    fn rational_family_solves_the_system() {
        let r = family_check(&[s(0), s(0), s(0), s(1), s(0), s(0)], &[s(1), s(1)], &[(s(2), s(3)), (Scalar::ratio(1, 2), s(0))]).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert!(r.per_sample.iter().all(|p| p.residuals.iter().all(Scalar::is_zero)));
        let r = family_check(&[s(0), s(0), s(0), s(1), s(1), s(0)], &[s(1), s(1)], &[(s(-2), s(5))]).unwrap();
        assert_eq!(r.max_residual, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let a: [Scalar; 6] = std::array::from_fn(|_| sample::random_rational(&mut rng, 5, 3));
            let b = [sample::random_rational(&mut rng, 5, 3), sample::random_rational(&mut rng, 5, 3)];
            let pts: Vec<(Scalar, Scalar)> = (0..25)
                .map(|_| (sample::random_rational(&mut rng, 5, 3), sample::random_rational(&mut rng, 5, 3)))
                .filter(|(_, y)| !(&b[0] + &(&b[1] * y)).is_zero())
                .collect();
            let r = family_check(&a, &b, &pts).unwrap();
            assert_eq!(r.max_residual, 0.0);
            for p in &r.per_sample {
                let c = p.compat.as_ref().unwrap();
                // the family is linear in x, so the x-side and conic conditions hold identically
                assert!(c[1].is_zero() && c[2].is_zero() && c[3].is_zero());
                if (&a[5] * &b[1]).is_zero() {
                    assert!(c[0].is_zero());
                }
            }
        }
        assert!(matches!(family_check(&std::array::from_fn(|_| s(1)), &[s(1), s(1)], &[(s(0), s(-1))]), Err(Error::PoleAtSample(..))));
    }

    #[test]
    fn family_order_four_condition_is_not_implied() {
        // u_xx = 0 on the family, so the order-four condition need not hold.
        let r = family_check(&[s(0), s(0), s(0), s(0), s(0), s(1)], &[s(1), s(1)], &[(s(1), s(1))]).unwrap();
        assert!(!r.per_sample[0].compat.as_ref().unwrap()[0].is_zero());
    }

    #[test]
    fn higher_proportionality_on_the_prolonged_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let mut checked = 0;
        while checked < 30 {
            let j = sample::random_jet(&mut rng, 5, Some(crate::jetspace::Region::Plus));
            let Ok(j) = point_on_prolonged_system(&j) else { continue };
            assert_eq!(higher_proportionality(&j).unwrap(), [s(0), s(0), s(0)]);
            checked += 1;
        }
        assert_eq!(higher_proportionality(&JetPoint::fiducial(5, 1)).unwrap(), [s(0), s(0), s(0)]);
    }

    #[test]
    fn sphere_jets_satisfy_higher_proportionality() {
        let (x0, y0) = (Scalar::ratio(1, 4), Scalar::ratio(-1, 3));
        let x = TaylorMap::var_x(x0.clone(), y0.clone(), 5);
        let y = TaylorMap::var_y(x0.clone(), y0.clone(), 5);
        let one = TaylorMap::constant(x0, y0, 5, s(1));
        let f = (&(&one - &(&x * &x)) - &(&y * &y)).sqrt_or_float().unwrap();
        let j = jet_of_surface(&f, 5).unwrap();
        let r = higher_proportionality(&j).unwrap();
        assert!(r.iter().all(|v| v.to_f64().abs() < 1e-9), "{r:?}");
        let _ = taylor_of_jet(&j);
    }

    #[test]
    fn violated_order_four_condition_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let j = loop {
            let j = sample::random_jet(&mut rng, 5, Some(crate::jetspace::Region::Plus));
            if let Ok(j) = point_on_prolonged_system(&j) {
                break j;
            }
        };
        let mut bad = j.clone();
        bad.set(1, 3, j.get(1, 3) + &s(1));
        assert_eq!(higher_proportionality(&bad).unwrap_err(), Error::NotOnProlongedManifold);
        // Without the membership check the order-four form is no longer divisible.
        let [a, b, c] = bad.hessian();
        let m: Vec<Vec<Scalar>> = (0..5)
            .map(|i| (0..3).map(|q| if i == q { a.clone() } else if i == q + 1 { s(2) * &b } else if i == q + 2 { c.clone() } else { s(0) }).collect())
            .collect();
        let rhs: Vec<Scalar> = (0..=4).map(|i| s(crate::jetspace::binomial(4, i)) * bad.get(4 - i, i)).collect();
        let (_, res) = linalg::least_squares(&m, &rhs).unwrap();
        assert!(res.iter().any(|r| !r.is_zero()));
    }
}
