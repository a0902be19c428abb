//! Characteristic lines of the hyperbolic-region factor and the 3-distribution
//! they sweep inside the second-order contact distribution.

use serde::{Deserialize, Serialize};

use crate::algebra::{pv, Poly, RatFunc, Scalar, SqrtExt, Var};
use crate::error::{Error, Result};
use crate::invariantpde::{minus_factors, minus_root, rank_one_factor, symbol_ext};
use crate::jetspace::{JetPoint, SymTensorK};
use crate::linalg;

/// Tolerance for the on-equation test of float jets, relative to the largest term.
pub const ON_EQUATION_TOL: f64 = 1e-9;

/// Which of the two hyperbolic factors. `First` uses `b = u_xy - s`, `Second` uses `b = u_xy + s`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorBranch {
    #[default]
    First,
    Second,
}

impl FactorBranch {
    fn sign(self) -> i64 {
        match self {
            FactorBranch::First => 1,
            FactorBranch::Second => -1,
        }
    }
}

/// A vector `y1 D_x + y2 D_y + p11 d/du_xx + p12 d/du_xy + p22 d/du_yy` of the
/// second-order contact distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Scalar; 5]", into = "[Scalar; 5]")]
pub struct ContactVector {
    pub y1: Scalar,
    pub y2: Scalar,
    pub p11: Scalar,
    pub p12: Scalar,
    pub p22: Scalar,
}

impl From<[Scalar; 5]> for ContactVector {
    fn from([y1, y2, p11, p12, p22]: [Scalar; 5]) -> Self {
        ContactVector { y1, y2, p11, p12, p22 }
    }
}

impl From<ContactVector> for [Scalar; 5] {
    fn from(v: ContactVector) -> Self {
        [v.y1, v.y2, v.p11, v.p12, v.p22]
    }
}

impl ContactVector {
    pub fn to_array(&self) -> [Scalar; 5] {
        self.clone().into()
    }

    /// True if `self` and `o` span the same line (all 2x2 minors vanish).
    pub fn parallel(&self, o: &ContactVector, tol: f64) -> bool {
        let (a, b) = (self.to_array(), o.to_array());
        let scale = Scalar::max_abs(&a) * Scalar::max_abs(&b);
        (0..5).all(|i| {
            (i + 1..5).all(|k| {
                let m = &(&a[i] * &b[k]) - &(&a[k] * &b[i]);
                if m.is_exact() {
                    m.is_zero()
                } else {
                    m.to_f64().abs() <= tol * scale.max(f64::MIN_POSITIVE)
                }
            })
        })
    }
}

/// `sigma * sqrt(-det Hess)` for the chosen branch.
fn branch_root(j: &JetPoint, branch: FactorBranch) -> Result<Scalar> {
    Ok(minus_root(j)? * Scalar::int(branch.sign()))
}

/// The first factor evaluated with `s` replaced by the branch root; vanishes on the chosen equation.
fn factor_value(j: &JetPoint, s: &Scalar) -> Result<(Scalar, f64)> {
    let val = |v: Var| j.value(v);
    let f = &minus_factors()[0];
    let re = f.re.eval(&val)?;
    let im = &f.im.eval(&val)? * s;
    let scale = re.to_f64().abs().max(im.to_f64().abs()).max(1.0);
    Ok((re + im, scale))
}

fn require_order(j: &JetPoint, need: usize) -> Result<()> {
    if j.order() < need {
        return Err(Error::OrderTooLow { have: j.order(), need });
    }
    Ok(())
}

/// Whether a third-order jet of the hyperbolic region lies on the chosen factor.
pub fn on_equation(j: &JetPoint, branch: FactorBranch) -> Result<bool> {
    require_order(j, 3)?;
    let s = branch_root(j, branch)?;
    let (v, scale) = factor_value(j, &s)?;
    Ok(if v.is_exact() { v.is_zero() } else { v.to_f64().abs() <= ON_EQUATION_TOL * scale })
}

/// `(s u_yy, -(s u_xy + det Hess))`, the coefficients of the linear factor of the symbol.
pub fn char_covector(j: &JetPoint, branch: FactorBranch) -> Result<[Scalar; 2]> {
    let s = branch_root(j, branch)?;
    let [_, uxy, uyy] = j.hessian();
    Ok([&s * &uyy, -(&(&s * &uxy) + &j.hessian_det())])
}

/// The characteristic line at a third-order jet on the equation, projected to second-order contact coordinates.
///
/// `u_xxx` is re-solved from the equation so float jets that satisfy it only approximately give a consistent vector.
pub fn char_line(j: &JetPoint, branch: FactorBranch) -> Result<ContactVector> {
    require_order(j, 3)?;
    if !on_equation(j, branch)? {
        return Err(Error::NotOnEquation);
    }
    let s = branch_root(j, branch)?;
    let [y1, y2] = char_covector(j, branch)?;
    let [mut uxxx, uxxy, uxyy, uyyy] = j.third();
    if !j.get(0, 2).is_zero() {
        let (f, _) = factor_value(j, &s)?;
        let val = |v: Var| j.value(v);
        let f_re = minus_factors()[0].re.derivative(Var::UXXX).eval(&val)?;
        let f_im = &minus_factors()[0].im.derivative(Var::UXXX).eval(&val)? * &s;
        let coef = f_re + f_im;
        if !coef.is_zero() {
            uxxx = &uxxx - &f.checked_div(&coef)?;
        }
    }
    Ok(ContactVector {
        p11: &(&y1 * &uxxx) + &(&y2 * &uxxy),
        p12: &(&y1 * &uxxy) + &(&y2 * &uxyy),
        p22: &(&y1 * &uxyy) + &(&y2 * &uyyy),
        y1,
        y2,
    })
}

/// `b = u_xy - sigma s`.
fn b_value(j: &JetPoint, branch: FactorBranch) -> Result<Scalar> {
    Ok(j.get(1, 1) - &branch_root(j, branch)?)
}

/// Spanning vectors `-u_yy D_x + b D_y`, `2b d/du_xx + u_yy d/du_xy`, `-b^2 d/du_xx + u_yy^2 d/du_yy`.
pub fn distribution_v(j: &JetPoint, branch: FactorBranch) -> Result<[ContactVector; 3]> {
    require_order(j, 2)?;
    let b = b_value(j, branch)?;
    let uyy = j.get(0, 2).clone();
    let z = Scalar::zero;
    Ok([
        ContactVector { y1: -uyy.clone(), y2: b.clone(), p11: z(), p12: z(), p22: z() },
        ContactVector { y1: z(), y2: z(), p11: Scalar::int(2) * &b, p12: uyy.clone(), p22: z() },
        ContactVector { y1: z(), y2: z(), p11: -(&b * &b), p12: z(), p22: &uyy * &uyy },
    ])
}

/// The two linear equations whose common solutions form the distribution at `j`.
pub fn char_var_equations(j: &JetPoint, branch: FactorBranch, v: &ContactVector) -> Result<[Scalar; 2]> {
    let s = branch_root(j, branch)?;
    let [uxx, uxy, uyy] = j.hessian();
    let det = j.hessian_det();
    let e1 = &(&(&v.y1 * &uxy) * &s) + &(&(&(&v.y2 * &uyy) * &s) + &(&v.y1 * &det));
    let two = Scalar::int(2);
    let e2 = &(&(&(&two * &v.p12) * &uyy) * &s) - &(&(&(&two * &s) * &v.p22) * &uxy);
    let e2 = &e2 + &(&v.p11 * &(&uyy * &uyy));
    let e2 = &e2 - &(&(&(&two * &v.p12) * &uxy) * &uyy);
    let e2 = &e2 - &(&(&v.p22 * &uxx) * &uyy);
    let e2 = &e2 + &(&(&two * &v.p22) * &(&uxy * &uxy));
    Ok([e1, e2])
}

/// Rows `(1, 0, u_xxx, u_xxy, u_xyy)`, `(0, 1, u_xxy, u_xyy, u_yyy)` followed by the distribution basis.
fn tautological_matrix(third: &[Scalar; 4], v: &[ContactVector; 3]) -> Vec<Vec<Scalar>> {
    let [a, b, c, d] = third.clone();
    let mut rows = vec![
        vec![Scalar::one(), Scalar::zero(), a, b.clone(), c.clone()],
        vec![Scalar::zero(), Scalar::one(), b, c, d],
    ];
    rows.extend(v.iter().map(|w| w.to_array().to_vec()));
    rows
}

/// Determinant whose vanishing says the tautological plane of `(j, third)` meets the distribution.
pub fn recover_pde(j: &JetPoint, third: &[Scalar; 4], branch: FactorBranch) -> Result<Scalar> {
    let v = distribution_v(j, branch)?;
    Ok(linalg::determinant(&tautological_matrix(third, &v)))
}

fn det_ext(m: &[Vec<SqrtExt>]) -> SqrtExt {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut acc = SqrtExt::zero();
    for (c, e) in m[0].iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let minor: Vec<Vec<SqrtExt>> =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, x)| x.clone()).collect()).collect();
        let term = e * &det_ext(&minor);
        acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// The determinant of [`recover_pde`] as an element of the square-root extension.
pub fn recover_pde_symbolic(branch: FactorBranch) -> SqrtExt {
    let sx = |p: Poly| SqrtExt::from(p);
    let sign = RatFunc::constant(crate::algebra::rat(branch.sign(), 1));
    let b = &sx(pv(Var::UXY)) - &SqrtExt::new(RatFunc::zero(), sign);
    let uyy = sx(pv(Var::UYY));
    let z = SqrtExt::zero;
    let one = || sx(Poly::one());
    let t = |v: Var| sx(pv(v));
    let m = vec![
        vec![one(), z(), t(Var::UXXX), t(Var::UXXY), t(Var::UXYY)],
        vec![z(), one(), t(Var::UXXY), t(Var::UXYY), t(Var::UYYY)],
        vec![-&uyy, b.clone(), z(), z(), z()],
        vec![z(), z(), &sx(Poly::constant(crate::algebra::rat(2, 1))) * &b, uyy.clone(), z()],
        vec![z(), z(), -&(&b * &b), z(), &uyy * &uyy],
    ];
    det_ext(&m)
}

/// Quotient of the symbolic determinant by the first factor (with the branch root).
pub fn recover_pde_quotient(branch: FactorBranch) -> Result<SqrtExt> {
    let f = &minus_factors()[0];
    let f = match branch {
        FactorBranch::First => f.clone(),
        FactorBranch::Second => f.conj(),
    };
    let q = recover_pde_symbolic(branch).checked_div(&f)?;
    if !q.re.is_poly() || !q.im.is_poly() {
        return Err(Error::DivisionNotExact);
    }
    Ok(q)
}

/// Result of [`symbol_rank_one_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankOneCheck {
    /// The linear factor `(s u_yy, -(s u_xy + det Hess))`.
    pub factor: [Scalar; 2],
    /// Monomial coefficients of the symbol.
    pub symbol: Vec<Scalar>,
    /// Largest deviation of the symbol from `-(factor)^3 / s^3`, relative to its largest coefficient.
    pub residual: f64,
}

/// Checks that the symbol of the first factor is the cube of the displayed linear form.
pub fn symbol_rank_one_check(j: &JetPoint, branch: FactorBranch) -> Result<RankOneCheck> {
    let s = branch_root(j, branch)?;
    let f = &minus_factors()[0];
    let sym: SymTensorK = symbol_ext(f, j, &s)?;
    let factor = char_covector(j, branch)?;
    let lambda = -s.powi(3).recip()?;
    let coeffs: Vec<Scalar> = (0..4).map(|i| sym.monomial_coefficient(i)).collect();
    let scale = Scalar::max_abs(&coeffs).max(f64::MIN_POSITIVE);
    let mut residual: f64 = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let binom = Scalar::int(crate::jetspace::binomial(3, i));
        let expect = &(&lambda * &binom) * &(&factor[0].powi(3 - i as i32) * &factor[1].powi(i as i32));
        residual = residual.max((c - &expect).to_f64().abs() / scale);
    }
    // independent reconstruction
    rank_one_factor(&sym)?;
    Ok(RankOneCheck { factor, symbol: coeffs, residual })
}
