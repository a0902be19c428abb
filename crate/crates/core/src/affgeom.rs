//! Euclidean and equi-affine data of a graph surface at a point.
//!
//! Indices 0 and 1 stand for x and y. `f_ij` and `f_ijk` are the second and
//! third derivatives read off the jet.

use serde::Serialize;

use crate::algebra::{hessian_det, pv, rat, GradedRho, Poly, RatFunc, Scalar, TaylorMap, Var};
use crate::error::{Error, Result};
use crate::jetspace::{total_derivative, Dir, JetPoint, SymTensorK};

pub type MetricForm = SymTensorK;
pub type CubicForm = SymTensorK;

type Mat2 = [[Scalar; 2]; 2];
type Cube = [[[Scalar; 2]; 2]; 2];

fn require(j: &JetPoint, k: usize) -> Result<()> {
    if j.order() < k {
        Err(Error::OrderTooLow { have: j.order(), need: k })
    } else {
        Ok(())
    }
}

fn hess(j: &JetPoint) -> Mat2 {
    let [a, b, c] = j.hessian();
    [[a, b.clone()], [b, c]]
}

fn third(j: &JetPoint) -> Cube {
    let t = |i: usize, jj: usize, k: usize| {
        let ny = i + jj + k;
        j.get(3 - ny, ny).clone()
    };
    [[[t(0, 0, 0), t(0, 0, 1)], [t(0, 1, 0), t(0, 1, 1)]], [[t(1, 0, 0), t(1, 0, 1)], [t(1, 1, 0), t(1, 1, 1)]]]
}

fn grad(j: &JetPoint) -> [Scalar; 2] {
    [j.get(1, 0).clone(), j.get(0, 1).clone()]
}

fn metric(m: &Mat2) -> MetricForm {
    SymTensorK::new(vec![m[0][0].clone(), m[0][1].clone(), m[1][1].clone()])
}

fn cubic(c: &Cube) -> CubicForm {
    SymTensorK::new(vec![c[0][0][0].clone(), c[0][0][1].clone(), c[0][1][1].clone(), c[1][1][1].clone()])
}

/// Inverse of a symmetric 2x2 matrix via the adjugate.
fn inverse(m: &Mat2) -> Result<Mat2> {
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    if det.is_zero() {
        return Err(Error::DegenerateHessian);
    }
    let inv = det.recip()?;
    Ok([[&m[1][1] * &inv, -(&m[0][1] * &inv)], [-(&m[1][0] * &inv), &m[0][0] * &inv]])
}

/// First fundamental form, unit normal and second fundamental form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EuclidForms {
    pub first: MetricForm,
    pub normal: [Scalar; 3],
    pub second: MetricForm,
}

pub fn euclid_forms(j: &JetPoint) -> Result<EuclidForms> {
    require(j, 2)?;
    let [fx, fy] = grad(j);
    let one = Scalar::one();
    let first = SymTensorK::new(vec![&one + &fx * &fx, &fx * &fy, &one + &fy * &fy]);
    let w = (&(&one + &fx * &fx) + &fy * &fy).sqrt_or_float()?;
    let iw = w.recip()?;
    let normal = [-(&fx * &iw), -(&fy * &iw), iw.clone()];
    let [a, b, c] = j.hessian();
    let second = SymTensorK::new(vec![&a * &iw, &b * &iw, &c * &iw]);
    Ok(EuclidForms { first, normal, second })
}

/// A transversal vector field along the surface, given at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransversalField {
    /// Components on `d/dx`, `d/dy`, `d/du`.
    pub xi: [Scalar; 3],
    /// `dxi[k][a]` = derivative of component `a` along coordinate `k` of the surface.
    pub dxi: Option<[[Scalar; 3]; 2]>,
}

impl TransversalField {
    pub fn constant(xi: [Scalar; 3]) -> TransversalField {
        let z = || [Scalar::zero(), Scalar::zero(), Scalar::zero()];
        TransversalField { xi, dxi: Some([z(), z()]) }
    }
}

/// Induced data of a transversal field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransversalData {
    pub a: Scalar,
    pub h: MetricForm,
    /// `gamma[k][i][j]` = Christoffel symbol with upper index `k`.
    pub gamma: Cube,
    pub tau: Option<[Scalar; 2]>,
    pub c: CubicForm,
}

/// `A = xi3 - xi1 f_x - xi2 f_y`.
fn transversality(j: &JetPoint, xi: &[Scalar; 3]) -> Scalar {
    let [fx, fy] = grad(j);
    &(&xi[2] - &(&xi[0] * &fx)) - &(&xi[1] * &fy)
}

/// The unsymmetrized components `C_kij = B f_ijk + B^2 xi^m (f_mj f_ki + f_im f_kj + f_km f_ij)`.
pub fn cubic_components(j: &JetPoint, xi: &[Scalar; 3]) -> Result<Cube> {
    require(j, 3)?;
    let a = transversality(j, xi);
    if a.is_zero() {
        return Err(Error::DegenerateTransversal);
    }
    let b = a.recip()?;
    let b2 = &b * &b;
    let f = hess(j);
    let t = third(j);
    let mut out: Cube = Default::default();
    for k in 0..2 {
        for i in 0..2 {
            for jj in 0..2 {
                let mut s = Scalar::zero();
                for m in 0..2 {
                    let inner = &(&(&f[m][jj] * &f[k][i]) + &(&f[i][m] * &f[k][jj])) + &(&f[k][m] * &f[i][jj]);
                    s += &(&xi[m] * &inner);
                }
                out[k][i][jj] = &(&b * &t[i][jj][k]) + &(&b2 * &s);
            }
        }
    }
    Ok(out)
}

pub fn transversal_data(j: &JetPoint, field: &TransversalField) -> Result<TransversalData> {
    require(j, 3)?;
    let xi = &field.xi;
    let a = transversality(j, xi);
    if a.is_zero() {
        return Err(Error::DegenerateTransversal);
    }
    let b = a.recip()?;
    let f = hess(j);
    let h = metric(&[[&f[0][0] * &b, &f[0][1] * &b], [&f[1][0] * &b, &f[1][1] * &b]]);
    let mut gamma: Cube = Default::default();
    for (k, g) in gamma.iter_mut().enumerate() {
        for i in 0..2 {
            for jj in 0..2 {
                g[i][jj] = -(&(&f[i][jj] * &xi[k]) * &b);
            }
        }
    }
    // tau_k = B (A_k + xi1 f_k1 + xi2 f_k2) = B (d_k xi3 - d_k xi1 f_x - d_k xi2 f_y)
    let tau = field.dxi.as_ref().map(|d| {
        let [fx, fy] = grad(j);
        let t = |k: usize| &b * &(&(&d[k][2] - &(&d[k][0] * &fx)) - &(&d[k][1] * &fy));
        [t(0), t(1)]
    });
    let c = cubic(&cubic_components(j, xi)?);
    Ok(TransversalData { a, h, gamma, tau, c })
}

/// `rho = |det Hess|^(-1/4)` and its first derivatives along the surface.
fn rho_and_gradient(j: &JetPoint) -> Result<(Scalar, [Scalar; 2])> {
    require(j, 3)?;
    let det = j.hessian_det();
    if det.is_zero() {
        return Err(Error::DegenerateHessian);
    }
    let rho = det.abs().pow_ratio(-1, 4)?;
    let ddet = [hessian_det_derivative(Dir::X), hessian_det_derivative(Dir::Y)];
    let quarter = Scalar::ratio(-1, 4);
    let mut g = [Scalar::zero(), Scalar::zero()];
    for (k, p) in ddet.iter().enumerate() {
        g[k] = &(&quarter * &rho) * &j.eval(p)? / &det;
    }
    Ok((rho, g))
}

/// `D_x` or `D_y` of `u_xx u_yy - u_xy^2`.
pub fn hessian_det_derivative(dir: Dir) -> Poly {
    total_derivative(&hessian_det(), dir, 3).expect("order-2 polynomial")
}

/// The equi-affine (Blaschke) normal at the point.
pub fn affine_normal(j: &JetPoint) -> Result<TransversalField> {
    let (rho, drho) = rho_and_gradient(j)?;
    let finv = inverse(&hess(j))?;
    let irho2 = (&rho * &rho).recip()?;
    let mut xi = [Scalar::zero(), Scalar::zero(), Scalar::zero()];
    for i in 0..2 {
        let mut s = Scalar::zero();
        for (jj, d) in drho.iter().enumerate() {
            s += &(&finv[i][jj] * d);
        }
        xi[i] = &irho2 * &s;
    }
    let [fx, fy] = grad(j);
    xi[2] = &(&(&xi[0] * &fx) + &(&xi[1] * &fy)) + &rho.recip()?;
    Ok(TransversalField { xi, dxi: None })
}

/// Components of the affine normal as Taylor series along the surface.
///
/// A series of order `K` gives components of order `K - 3`.
pub fn affine_normal_series(f: &TaylorMap) -> Result<[TaylorMap; 3]> {
    if f.order() < 3 {
        return Err(Error::OrderTooLow { have: f.order(), need: 3 });
    }
    let fx = f.derivative_x();
    let fy = f.derivative_y();
    let fxx = fx.derivative_x();
    let fxy = fx.derivative_y();
    let fyy = fy.derivative_y();
    let det = &(&fxx * &fyy) - &(&fxy * &fxy);
    let sign = match det.value().signum() {
        0 => return Err(Error::DegenerateHessian),
        s => Scalar::int(s as i64),
    };
    let rho = det.scale(&sign).pow_ratio(-1, 4)?;
    let rx = rho.derivative_x();
    let ry = rho.derivative_y();
    let idet = det.reciprocal()?;
    // f^{ij} = adj(Hess)/det
    let inv = [[&fyy * &idet, -&(&fxy * &idet)], [-&(&fxy * &idet), &fxx * &idet]];
    let irho = rho.reciprocal()?;
    let irho2 = &irho * &irho;
    let x1 = &irho2 * &(&(&inv[0][0] * &rx) + &(&inv[0][1] * &ry));
    let x2 = &irho2 * &(&(&inv[1][0] * &rx) + &(&inv[1][1] * &ry));
    let x3 = &(&(&x1 * &fx) + &(&x2 * &fy)) + &irho;
    Ok([x1, x2, x3])
}

/// Affine normal together with its derivatives along the surface (needs an order-4 jet).
pub fn affine_normal_with_derivatives(j: &JetPoint) -> Result<TransversalField> {
    require(j, 4)?;
    let series = affine_normal_series(&crate::jetspace::taylor_of_jet(j))?;
    let xi = [series[0].value().clone(), series[1].value().clone(), series[2].value().clone()];
    let d = |k: usize| {
        let pick = |s: &TaylorMap| if k == 0 { s.coeff(1, 0).clone() } else { s.coeff(0, 1).clone() };
        [pick(&series[0]), pick(&series[1]), pick(&series[2])]
    };
    Ok(TransversalField { xi, dxi: Some([d(0), d(1)]) })
}

/// Blaschke metric, Fubini-Pick cubic form and Pick invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Blaschke {
    pub rho: Scalar,
    pub h: MetricForm,
    pub c: CubicForm,
    pub pick: Scalar,
}

pub fn blaschke_and_pick(j: &JetPoint) -> Result<Blaschke> {
    let (rho, drho) = rho_and_gradient(j)?;
    let f = hess(j);
    let t = third(j);
    let h: Mat2 = [[&rho * &f[0][0], &rho * &f[0][1]], [&rho * &f[1][0], &rho * &f[1][1]]];
    let mut c: Cube = Default::default();
    for i in 0..2 {
        for jj in 0..2 {
            for k in 0..2 {
                c[i][jj][k] = &(&(&(&rho * &t[i][jj][k]) + &(&f[i][jj] * &drho[k])) + &(&f[jj][k] * &drho[i])) + &(&f[i][k] * &drho[jj]);
            }
        }
    }
    let hinv = inverse(&h)?;
    let up = raise(&hinv, &c);
    let mut pick = Scalar::zero();
    for i in 0..2 {
        for jj in 0..2 {
            for k in 0..2 {
                pick += &(&up[i][jj][k] * &c[i][jj][k]);
            }
        }
    }
    Ok(Blaschke { rho, h: metric(&h), c: cubic(&c), pick })
}

/// `T^{ijk} = h^{ai} h^{bj} h^{ck} C_abc`.
pub(crate) fn raise(hinv: &Mat2, c: &Cube) -> Cube {
    let mut out: Cube = Default::default();
    for i in 0..2 {
        for jj in 0..2 {
            for k in 0..2 {
                let mut s = Scalar::zero();
                for a in 0..2 {
                    for b in 0..2 {
                        for cc in 0..2 {
                            s += &(&(&(&hinv[a][i] * &hinv[b][jj]) * &hinv[cc][k]) * &c[a][b][cc]);
                        }
                    }
                }
                out[i][jj][k] = s;
            }
        }
    }
    out
}

/// Blaschke inverse metric and cubic form, as used by the Pick/symbol relation.
pub(crate) fn raised_cubic(j: &JetPoint) -> Result<Cube> {
    let b = blaschke_and_pick(j)?;
    let h = [[b.h.c[0].clone(), b.h.c[1].clone()], [b.h.c[1].clone(), b.h.c[2].clone()]];
    let cube = {
        let g = |i: usize, jj: usize, k: usize| b.c.c[i + jj + k].clone();
        [[[g(0, 0, 0), g(0, 0, 1)], [g(0, 1, 0), g(0, 1, 1)]], [[g(1, 0, 0), g(1, 0, 1)], [g(1, 1, 0), g(1, 1, 1)]]]
    };
    Ok(raise(&inverse(&h)?, &cube))
}

/// The Pick invariant as an element of the quarter-power algebra, with
/// `r = sigma * det Hess` (`sigma = 1` for the convex region, `-1` otherwise).
pub fn pick_symbolic(sigma: i64) -> GradedRho {
    let hp = [[pv(Var::UXX), pv(Var::UXY)], [pv(Var::UXY), pv(Var::UYY)]];
    let adj = [[pv(Var::UYY), -pv(Var::UXY)], [-pv(Var::UXY), pv(Var::UXX)]];
    let t = |i: usize, jj: usize, k: usize| {
        let ny = i + jj + k;
        pv(Var::deriv(3 - ny, ny))
    };
    let rk = [hessian_det_derivative(Dir::X).scale(&rat(sigma, 1)), hessian_det_derivative(Dir::Y).scale(&rat(sigma, 1))];
    let g = |p: Poly, e: i32| GradedRho::term(sigma, RatFunc::from(p), e);
    // rho = r^(-1/4), rho_k = -(1/4) r^(-5/4) r_k
    let rho = g(Poly::one(), -1);
    let drho: Vec<GradedRho> = rk.iter().map(|r| g(r.scale(&rat(-1, 4)), -5)).collect();
    // (rho Hess)^{-1} = sigma adj(Hess) r^(-3/4)
    let hinv: Vec<Vec<GradedRho>> =
        (0..2).map(|a| (0..2).map(|b| g(adj[a][b].scale(&rat(sigma, 1)), -3)).collect()).collect();
    let mut c: Vec<GradedRho> = Vec::with_capacity(8);
    for i in 0..2 {
        for jj in 0..2 {
            for k in 0..2 {
                let mut e = &rho * &g(t(i, jj, k), 0);
                e = &e + &(&g(hp[i][jj].clone(), 0) * &drho[k]);
                e = &e + &(&g(hp[jj][k].clone(), 0) * &drho[i]);
                e = &e + &(&g(hp[i][k].clone(), 0) * &drho[jj]);
                c.push(e);
            }
        }
    }
    let ci = |i: usize, jj: usize, k: usize| &c[4 * i + 2 * jj + k];
    let mut pick = GradedRho::zero(sigma);
    for i in 0..2 {
        for jj in 0..2 {
            for k in 0..2 {
                let mut up = GradedRho::zero(sigma);
                for a in 0..2 {
                    for b in 0..2 {
                        for cc in 0..2 {
                            let term = &(&(&hinv[a][i] * &hinv[b][jj]) * &hinv[cc][k]) * ci(a, b, cc);
                            up = &up + &term;
                        }
                    }
                }
                pick = &pick + &(&up * ci(i, jj, k));
            }
        }
    }
    pick
}
