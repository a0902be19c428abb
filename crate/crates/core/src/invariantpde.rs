//! The Aff(3)-invariant third-order PDE `F = 0`, its split forms on the two
//! open regions of second-order jets, and its symbol.

use std::sync::OnceLock;

use serde::Serialize;

use crate::affgeom::raised_cubic;
use crate::algebra::{hessian_det, pv, rat, Poly, RatFunc, Scalar, SqrtExt, Var};
use crate::error::{Error, Result};
use crate::jetspace::{classify_fiber, JetPoint, Region, SymTensorK};

/// Third-order variables in the order `u_xxx, u_xxy, u_xyy, u_yyy`.
pub const THIRD: [Var; 4] = [Var::UXXX, Var::UXXY, Var::UXYY, Var::UYYY];

const UXX: Var = Var::UXX;
const UXY: Var = Var::UXY;
const UYY: Var = Var::UYY;
const UXXX: Var = Var::UXXX;
const UXXY: Var = Var::UXXY;
const UXYY: Var = Var::UXYY;
const UYYY: Var = Var::UYYY;

/// Builds a polynomial from `(coefficient, factors)` pairs; repeated factors are powers.
fn table(terms: &[(i64, &[Var])]) -> Poly {
    let mut out = Poly::zero();
    for (c, vars) in terms {
        let mut t = Poly::int(*c);
        for v in *vars {
            t = &t * &pv(*v);
        }
        out = &out + &t;
    }
    out
}

/// The thirteen-term polynomial `F`.
pub fn f_poly() -> &'static Poly {
    static F: OnceLock<Poly> = OnceLock::new();
    F.get_or_init(|| {
        table(&[
            (6, &[UXX, UXXX, UXY, UYY, UYYY]),
            (-6, &[UXX, UXXX, UXYY, UYY, UYY]),
            (-18, &[UXX, UXXY, UXY, UXYY, UYY]),
            (12, &[UXX, UXXY, UXY, UXY, UYYY]),
            (-6, &[UXX, UXX, UXXY, UYY, UYYY]),
            (9, &[UXX, UXXY, UXXY, UYY, UYY]),
            (-6, &[UXX, UXX, UXY, UXYY, UYYY]),
            (9, &[UXX, UXX, UXYY, UXYY, UYY]),
            (1, &[UXX, UXX, UXX, UYYY, UYYY]),
            (-6, &[UXXX, UXXY, UXY, UYY, UYY]),
            (12, &[UXXX, UXY, UXY, UXYY, UYY]),
            (-8, &[UXXX, UXY, UXY, UXY, UYYY]),
            (1, &[UXXX, UXXX, UYY, UYY, UYY]),
        ])
    })
}

/// `Q` of the splitting `u_yy^3 F = (u_yy^3 u_xxx + Q)^2 + det Hess * P^2`.
pub fn splitting_q() -> Poly {
    table(&[
        (3, &[UXX, UXY, UYY, UYYY]),
        (-3, &[UXX, UXYY, UYY, UYY]),
        (-3, &[UXXY, UXY, UYY, UYY]),
        (-4, &[UXY, UXY, UXY, UYYY]),
        (6, &[UXY, UXY, UXYY, UYY]),
    ])
}

/// `P` of the splitting; also the coefficient of `sqrt(-det Hess)` in the minus factors.
pub fn splitting_p() -> Poly {
    table(&[(1, &[UXX, UYY, UYYY]), (-3, &[UXXY, UYY, UYY]), (-4, &[UXY, UXY, UYYY]), (6, &[UXY, UXYY, UYY])])
}

/// The `sqrt`-free part of the minus factors, equal to `-(u_yy^3 u_xxx + Q)`.
pub fn minus_factor_rest() -> Poly {
    table(&[
        (-3, &[UXX, UXY, UYY, UYYY]),
        (3, &[UXX, UXYY, UYY, UYY]),
        (-1, &[UXXX, UYY, UYY, UYY]),
        (3, &[UXXY, UXY, UYY, UYY]),
        (4, &[UXY, UXY, UXY, UYYY]),
        (-6, &[UXY, UXY, UXYY, UYY]),
    ])
}

/// The two factors `f1 = s P + R`, `f2 = s P - R` with `s = sqrt(-det Hess)`.
pub fn minus_factors() -> [SqrtExt; 2] {
    let sp = SqrtExt::new(RatFunc::zero(), RatFunc::from(splitting_p()));
    let r = SqrtExt::from(minus_factor_rest());
    [&sp + &r, &sp - &r]
}

/// The two equations cutting out the solution set on the convex region.
pub fn system_plus() -> [Poly; 2] {
    [
        table(&[(1, &[UXX, UXX, UYYY]), (-3, &[UXX, UYY, UXXY]), (2, &[UXY, UYY, UXXX])]),
        table(&[(1, &[UYY, UYY, UXXX]), (-3, &[UXX, UYY, UXYY]), (2, &[UXY, UXX, UYYY])]),
    ]
}

/// `u_yy^3 F - (u_yy^3 u_xxx + Q)^2 - det Hess * P^2`; the zero polynomial.
pub fn splitting_residual() -> Poly {
    let uyy3 = pv(UYY).pow(3);
    let sq = &(&uyy3 * &pv(UXXX)) + &splitting_q();
    &(&(&uyy3 * f_poly()) - &sq.pow(2)) - &(&hessian_det() * &splitting_p().pow(2))
}

/// `f1 f2 / F`, which must be free of `s` and a polynomial.
pub fn minus_product_quotient() -> Result<Poly> {
    let [f1, f2] = minus_factors();
    let prod = &f1 * &f2;
    if !prod.is_s_free() {
        return Err(Error::IdentityFailed("minus-factor-product: product depends on s".into()));
    }
    let p = prod.re.as_poly().ok_or_else(|| Error::IdentityFailed("minus-factor-product: not a polynomial".into()))?;
    p.exact_div(f_poly()).map_err(|_| Error::NotDivisible)
}

fn require3(j: &JetPoint) -> Result<()> {
    if j.order() < 3 {
        Err(Error::OrderTooLow { have: j.order(), need: 3 })
    } else {
        Ok(())
    }
}

pub fn eval_f(j: &JetPoint) -> Result<Scalar> {
    require3(j)?;
    j.eval(f_poly())
}

/// `det Hess * F`.
pub fn eval_full_e(j: &JetPoint) -> Result<Scalar> {
    Ok(j.hessian_det() * eval_f(j)?)
}

/// Values of the two convex-region equations (evaluated in any region).
pub fn eval_system_plus(j: &JetPoint) -> Result<[Scalar; 2]> {
    require3(j)?;
    let [a, b] = system_plus();
    Ok([j.eval(&a)?, j.eval(&b)?])
}

/// `sqrt(-det Hess)` with the nonnegative branch, exact when possible.
pub fn minus_root(j: &JetPoint) -> Result<Scalar> {
    let det = j.hessian_det();
    if det.signum() >= 0 {
        return Err(Error::WrongRegion);
    }
    (-det).sqrt_or_float()
}

/// Values of the two minus factors at a jet of the hyperbolic region.
pub fn eval_factors_minus(j: &JetPoint) -> Result<[Scalar; 2]> {
    require3(j)?;
    let s = minus_root(j)?;
    let val = |v: Var| j.value(v);
    let [f1, f2] = minus_factors();
    Ok([f1.eval(&val, &s)?, f2.eval(&val, &s)?])
}

/// Region tag together with the residual values of the equation for that region.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdeResidual {
    pub region: Region,
    pub values: Vec<Scalar>,
}

/// Residuals by region: the two equations (plus), the two factors (minus), or `F` (degenerate).
pub fn residual(j: &JetPoint) -> Result<PdeResidual> {
    let region = classify_fiber(j)?;
    let values = match region {
        Region::Plus => eval_system_plus(j)?.to_vec(),
        Region::Minus => eval_factors_minus(j)?.to_vec(),
        Region::Degenerate => vec![eval_f(j)?],
    };
    Ok(PdeResidual { region, values })
}

/// `F` with the Hessian frozen at `diag(1, 1)` or `diag(1, -1)`.
pub fn fiber_restriction(which: Region) -> Result<Poly> {
    let uyy = match which {
        Region::Plus => 1,
        Region::Minus => -1,
        Region::Degenerate => return Err(Error::WrongRegion),
    };
    let p = f_poly().substitute(UXX, &Poly::one()).substitute(UXY, &Poly::zero()).substitute(UYY, &Poly::int(uyy));
    Ok(p)
}

/// Witnesses of the decomposition of the cubic form along the Hessian form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Proportionality {
    pub region: Region,
    /// Plus: the four components of `b - M alpha`. Minus: the remainders for the branches `+s` and `-s`;
    /// the second vanishes exactly on `f1 = 0`, the first on `f2 = 0`.
    pub residual: Vec<Scalar>,
    pub alpha: [Scalar; 2],
    pub beta: Option<[Scalar; 3]>,
    pub theta: Option<[Scalar; 2]>,
}

impl Proportionality {
    pub fn max_abs(&self) -> f64 {
        Scalar::max_abs(&self.residual)
    }

    /// Smallest residual across branches (the single system in the plus region).
    pub fn best(&self) -> f64 {
        match self.region {
            Region::Minus => self.residual.iter().map(|r| r.to_f64().abs()).fold(f64::INFINITY, f64::min),
            _ => self.max_abs(),
        }
    }
}

/// Monomial coefficients of `u_xxx dx^3 + 3u_xxy dx^2dy + 3u_xyy dxdy^2 + u_yyy dy^3`.
fn cubic_coefficients(j: &JetPoint) -> [Scalar; 4] {
    let [a, b, c, d] = j.third();
    [a, Scalar::int(3) * b, Scalar::int(3) * c, d]
}

/// Divides a binary cubic by the linear form `t1 dx + t2 dy`: quotient and remainder.
fn divide_linear(b: &[Scalar; 4], t: &[Scalar; 2]) -> Result<([Scalar; 3], Scalar)> {
    if !t[0].is_zero() {
        let q0 = b[0].checked_div(&t[0])?;
        let q1 = (&b[1] - &(&t[1] * &q0)).checked_div(&t[0])?;
        let q2 = (&b[2] - &(&t[1] * &q1)).checked_div(&t[0])?;
        let rem = &b[3] - &(&t[1] * &q2);
        Ok(([q0, q1, q2], rem))
    } else if !t[1].is_zero() {
        let q2 = b[3].checked_div(&t[1])?;
        let q1 = b[2].checked_div(&t[1])?;
        let q0 = b[1].checked_div(&t[1])?;
        Ok(([q0, q1, q2], b[0].clone()))
    } else {
        Err(Error::DegenerateHessian)
    }
}

/// Null covector `(u_xy + sigma s) dx + u_yy dy` of the Hessian form, or an equivalent one when it vanishes.
pub fn null_covector(j: &JetPoint, s: &Scalar, sigma: i64) -> [Scalar; 2] {
    let [a, b, c] = j.hessian();
    let ss = Scalar::int(sigma) * s;
    let t1 = &b + &ss;
    if t1.is_zero() && c.is_zero() {
        [a, &b - &ss]
    } else {
        [t1, c]
    }
}

pub fn proportionality_residual(j: &JetPoint) -> Result<Proportionality> {
    require3(j)?;
    let bvec = cubic_coefficients(j);
    let [a, b, c] = j.hessian();
    match classify_fiber(j)? {
        Region::Degenerate => Err(Error::DegenerateHessian),
        Region::Plus => {
            let z = Scalar::zero();
            let two = Scalar::int(2);
            let m1 = [a.clone(), &two * &b, c.clone(), z.clone()];
            let m2 = [z, a, &two * &b, c];
            let dot = |p: &[Scalar; 4], q: &[Scalar; 4]| p.iter().zip(q).fold(Scalar::zero(), |acc, (x, y)| acc + x * y);
            let (g11, g12, g22) = (dot(&m1, &m1), dot(&m1, &m2), dot(&m2, &m2));
            let (r1, r2) = (dot(&m1, &bvec), dot(&m2, &bvec));
            let gd = &(&g11 * &g22) - &(&g12 * &g12);
            let igd = gd.recip().map_err(|_| Error::DegenerateHessian)?;
            let al1 = &(&(&g22 * &r1) - &(&g12 * &r2)) * &igd;
            let al2 = &(&(&g11 * &r2) - &(&g12 * &r1)) * &igd;
            let residual = (0..4).map(|i| &(&bvec[i] - &(&m1[i] * &al1)) - &(&m2[i] * &al2)).collect();
            Ok(Proportionality { region: Region::Plus, residual, alpha: [al1, al2], beta: None, theta: None })
        }
        Region::Minus => {
            let s = minus_root(j)?;
            let mut best: Option<([Scalar; 3], [Scalar; 2], f64)> = None;
            let mut residual = Vec::with_capacity(2);
            for sigma in [1, -1] {
                let t = null_covector(j, &s, sigma);
                let (q, rem) = divide_linear(&bvec, &t)?;
                let size = rem.to_f64().abs();
                if best.as_ref().map_or(true, |b| size < b.2) {
                    let two = Scalar::int(2);
                    best = Some(([q[0].clone(), q[1].checked_div(&two)?, q[2].clone()], t, size));
                }
                residual.push(rem);
            }
            let (beta, theta, _) = best.expect("two branches");
            Ok(Proportionality {
                region: Region::Minus,
                residual,
                alpha: [Scalar::zero(), Scalar::zero()],
                beta: Some(beta),
                theta: Some(theta),
            })
        }
    }
}

/// The cubic `sum dpde/du_ijk eta_i eta_j eta_k` at a jet; `dpde/du_xxy` is the coefficient of `eta1^2 eta2`.
pub fn symbol(pde: &Poly, j: &JetPoint) -> Result<SymTensorK> {
    let m: Result<Vec<Scalar>> = THIRD.iter().map(|v| j.eval(&pde.derivative(*v))).collect();
    Ok(SymTensorK::from_monomial_coefficients(&m?))
}

/// Symbol of an element of the square-root extension at a chosen value of `s`.
pub fn symbol_ext(pde: &SqrtExt, j: &JetPoint, s: &Scalar) -> Result<SymTensorK> {
    let val = |v: Var| j.value(v);
    let m: Result<Vec<Scalar>> = THIRD
        .iter()
        .map(|v| SqrtExt::new(pde.re.derivative(*v), pde.im.derivative(*v)).eval(&val, s))
        .collect();
    Ok(SymTensorK::from_monomial_coefficients(&m?))
}

fn close(a: &Scalar, b: &Scalar, scale: f64) -> bool {
    if a.is_exact() && b.is_exact() {
        a == b
    } else {
        (a.to_f64() - b.to_f64()).abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE)
    }
}

fn real_cbrt(v: &Scalar) -> Scalar {
    if v.is_zero() {
        return v.clone();
    }
    match v.pow_ratio(1, 3) {
        Ok(r) => r,
        Err(_) => {
            let r = v.abs().pow_ratio(1, 3).expect("nonnegative");
            if v.signum() < 0 {
                -r
            } else {
                r
            }
        }
    }
}

/// Writes a rank-one binary cubic `c` as `(f1 eta1 + f2 eta2)^3`.
pub fn rank_one_factor(c: &SymTensorK) -> Result<[Scalar; 2]> {
    if c.k != 3 {
        return Err(Error::Invalid(format!("expected a cubic, got degree {}", c.k)));
    }
    let scale = Scalar::max_abs(&c.c);
    if c.is_zero() {
        return Ok([Scalar::zero(), Scalar::zero()]);
    }
    let (f1, f2) = if !c.c[0].is_zero() {
        let f1 = real_cbrt(&c.c[0]);
        let f2 = c.c[1].checked_div(&(&f1 * &f1))?;
        (f1, f2)
    } else {
        (Scalar::zero(), real_cbrt(&c.c[3]))
    };
    for i in 0..4 {
        let expect = &f1.powi(3 - i as i32) * &f2.powi(i as i32);
        if !close(&c.c[i], &expect, scale) {
            return Err(Error::NotRankOne);
        }
    }
    Ok([f1, f2])
}

/// Both sides of the relation between the Pick contraction and the symbol of `F`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PickSymbolCheck {
    /// Monomial coefficients of `8 |det|^(5/2) h^-1 h^-1 h^-1 C`.
    pub lhs: [Scalar; 4],
    /// Monomial coefficients of `sgn(det) * symbol(F)`.
    pub rhs: [Scalar; 4],
    pub residual: Scalar,
    pub relative: f64,
}

pub fn verify_pick_symbol(j: &JetPoint) -> Result<PickSymbolCheck> {
    require3(j)?;
    let det = j.hessian_det();
    if det.is_zero() {
        return Err(Error::DegenerateHessian);
    }
    let t = raised_cubic(j)?;
    let w = Scalar::int(8) * det.abs().pow_ratio(5, 2)?;
    let raw = [t[0][0][0].clone(), Scalar::int(3) * &t[0][0][1], Scalar::int(3) * &t[0][1][1], t[1][1][1].clone()];
    let lhs = raw.map(|v| &w * &v);
    let sg = Scalar::int(det.signum() as i64);
    let sym = symbol(f_poly(), j)?;
    let rhs: [Scalar; 4] = std::array::from_fn(|i| &sg * &sym.monomial_coefficient(i));
    let mut residual = Scalar::zero();
    for i in 0..4 {
        let d = (&lhs[i] - &rhs[i]).abs();
        if d > residual {
            residual = d;
        }
    }
    let scale = Scalar::max_abs(&rhs).max(Scalar::max_abs(&lhs));
    let relative = if scale == 0.0 { 0.0 } else { residual.to_f64() / scale };
    Ok(PickSymbolCheck { lhs, rhs, residual, relative })
}

/// The constants `(c, e)` with `pick = c * r^(e/4) * F` for `r = sigma * det Hess`.
pub fn pick_f_constants(sigma: i64) -> (crate::algebra::Rational, i32) {
    (rat(sigma, 4), -11)
}

/// Checks that the symbolic Pick invariant equals `c * r^(e/4) * F` exactly.
pub fn pick_f_identity(sigma: i64) -> Result<()> {
    let g = crate::affgeom::pick_symbolic(sigma);
    let (c, e) = pick_f_constants(sigma);
    let slot = e.rem_euclid(4) as u8;
    let whole = (e - slot as i32) / 4;
    let r = RatFunc::from(hessian_det().scale(&rat(sigma, 1)));
    let expect = RatFunc::from(f_poly().scale(&c)).checked_div(&r.pow((-whole) as u32))?;
    if g.slots().count() != 1 || g.slot(slot) != expect {
        return Err(Error::IdentityFailed(format!("Pick invariant versus F (sigma = {sigma})")));
    }
    Ok(())
}
