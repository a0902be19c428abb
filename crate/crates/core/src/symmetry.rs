//! Point symmetries: prolonged vector fields, the twelve generators of
//! aff(3), and the action of Aff(3) on jets of graphs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{hessian_det, pv, Poly, Rational, Scalar, TaylorMap, Var, MAX_JET_ORDER};
use crate::error::{Error, Result};
use crate::invariantpde::f_poly;
use crate::jetspace::{classify_fiber, jet_of_surface, project, taylor_of_jet, total_derivative, word, Dir, JetPoint, Region};
use crate::linalg;

/// `X1 d/dx + X2 d/dy + X0 d/du` with polynomial coefficients in `x, y, u`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField3 {
    pub x1: Poly,
    pub x2: Poly,
    pub x0: Poly,
}

impl VectorField3 {
    pub fn new(x1: Poly, x2: Poly, x0: Poly) -> VectorField3 {
        VectorField3 { x1, x2, x0 }
    }

    pub fn zero() -> VectorField3 {
        VectorField3::new(Poly::zero(), Poly::zero(), Poly::zero())
    }

    pub fn components(&self) -> [&Poly; 3] {
        [&self.x1, &self.x2, &self.x0]
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|p| p.is_zero())
    }

    /// The field as a derivation on functions of `x, y, u`.
    pub fn apply(&self, f: &Poly) -> Poly {
        &(&(&self.x1 * &f.derivative(Var::X)) + &(&self.x2 * &f.derivative(Var::Y))) + &(&self.x0 * &f.derivative(Var::U))
    }

    pub fn bracket(&self, o: &VectorField3) -> VectorField3 {
        let c = |a: &Poly, b: &Poly| &self.apply(b) - &o.apply(a);
        VectorField3::new(c(&self.x1, &o.x1), c(&self.x2, &o.x2), c(&self.x0, &o.x0))
    }
}

impl fmt::Display for VectorField3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (p, d) in self.components().iter().zip(["d_x", "d_y", "d_u"]) {
            if !p.is_zero() {
                parts.push(format!("({p})*{d}"));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Prolongation of a vector field to `J^K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedField {
    pub base: VectorField3,
    pub order: usize,
    /// `(nx, ny)` with `1 <= nx + ny <= order` to the coefficient of `d/du_{x^nx y^ny}`.
    pub components: BTreeMap<(usize, usize), Poly>,
}

impl ProlongedField {
    pub fn component(&self, nx: usize, ny: usize) -> &Poly {
        &self.components[&(nx, ny)]
    }

    /// Coefficient by word, e.g. `"xxy"`.
    pub fn by_word(&self, w: &str) -> Option<&Poly> {
        let key = crate::jetspace::parse_word(w)?;
        self.components.get(&key)
    }

    /// Coefficient of `d/dv` for any jet coordinate `v` up to the prolongation order.
    pub fn coefficient(&self, v: Var) -> Option<&Poly> {
        match v {
            Var::X => Some(&self.base.x1),
            Var::Y => Some(&self.base.x2),
            Var::U => Some(&self.base.x0),
            _ => self.components.get(&v.jet_index()?),
        }
    }

    /// Apply as a derivation to a polynomial in jet coordinates of order at most `order`.
    pub fn apply(&self, p: &Poly) -> Result<Poly> {
        let mut out = Poly::zero();
        for v in p.variables() {
            let c = self.coefficient(v).ok_or(Error::OrderTooHigh { have: v.order(), max: self.order })?;
            out = &out + &(c * &p.derivative(v));
        }
        Ok(out)
    }

    /// Coordinates `x, y, u, u_x, ...` of the lifted vector at a jet of order `order`.
    pub fn eval_vector(&self, j: &JetPoint) -> Result<Vec<Scalar>> {
        let mut v = vec![j.eval(&self.base.x1)?, j.eval(&self.base.x2)?, j.eval(&self.base.x0)?];
        for o in 1..=self.order {
            for ny in 0..=o {
                v.push(j.eval(self.component(o - ny, ny))?);
            }
        }
        Ok(v)
    }
}

/// Prolong by `X_{s,j} = D_j(X_s) - u_{s,i} D_j(X^i)`, starting from `X_() = X0`.
pub fn prolong(x: &VectorField3, order: usize) -> Result<ProlongedField> {
    if order > MAX_JET_ORDER {
        return Err(Error::OrderTooHigh { have: order, max: MAX_JET_ORDER });
    }
    let mut comps: BTreeMap<(usize, usize), Poly> = BTreeMap::new();
    let get = |comps: &BTreeMap<(usize, usize), Poly>, nx: usize, ny: usize| {
        if nx + ny == 0 {
            x.x0.clone()
        } else {
            comps[&(nx, ny)].clone()
        }
    };
    for o in 1..=order {
        for ny in 0..=o {
            let nx = o - ny;
            let (prev, dir) = if nx > 0 { ((nx - 1, ny), Dir::X) } else { ((nx, ny - 1), Dir::Y) };
            let p = get(&comps, prev.0, prev.1);
            let mut c = total_derivative(&p, dir, o)?;
            let d1 = total_derivative(&x.x1, dir, o)?;
            let d2 = total_derivative(&x.x2, dir, o)?;
            c = &c - &(&pv(Var::deriv(prev.0 + 1, prev.1)) * &d1);
            c = &c - &(&pv(Var::deriv(prev.0, prev.1 + 1)) * &d2);
            comps.insert((nx, ny), c);
        }
    }
    Ok(ProlongedField { base: x.clone(), order, components: comps })
}

pub const GENERATOR_NAMES: [&str; 12] =
    ["d_x", "d_y", "d_u", "x*d_x", "x*d_y", "x*d_u", "y*d_x", "y*d_y", "y*d_u", "u*d_x", "u*d_y", "u*d_u"];

/// `d_x, d_y, d_u, x d_x, x d_y, x d_u, y d_x, y d_y, y d_u, u d_x, u d_y, u d_u`.
pub fn aff3_generators() -> Vec<VectorField3> {
    let mut out = Vec::with_capacity(12);
    for coef in [Poly::one(), pv(Var::X), pv(Var::Y), pv(Var::U)] {
        for comp in 0..3 {
            let mut c = [Poly::zero(), Poly::zero(), Poly::zero()];
            c[comp] = coef.clone();
            let [a, b, d] = c;
            out.push(VectorField3::new(a, b, d));
        }
    }
    out
}

/// Coordinates of an affine vector field in the generator basis, or `None` if it is not affine.
pub fn aff3_coordinates(x: &VectorField3) -> Option<[Rational; 12]> {
    let mut out: [Rational; 12] = std::array::from_fn(|_| Rational::from_integer(0.into()));
    for (comp, p) in x.components().iter().enumerate() {
        for (m, c) in p.terms() {
            let vars: Vec<(Var, u8)> = m.vars().collect();
            let slot = match vars.as_slice() {
                [] => 0,
                [(v, 1)] if *v == Var::X => 1,
                [(v, 1)] if *v == Var::Y => 2,
                [(v, 1)] if *v == Var::U => 3,
                _ => return None,
            };
            out[3 * slot + comp] = c.clone();
        }
    }
    Some(out)
}

/// `X^(3)` applied to `F`.
pub fn lie_derivative_f(x: &VectorField3) -> Result<Poly> {
    prolong(x, 3)?.apply(f_poly())
}

/// `X^(3)(F) / F`; `NotDivisible` when `X` is not a symmetry.
pub fn apply_to_f(x: &VectorField3) -> Result<Poly> {
    let lf = lie_derivative_f(x)?;
    lf.exact_div(f_poly()).map_err(|_| Error::NotDivisible)
}

/// An affine map `p -> M p + t` of three-space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineMapJson", into = "AffineMapJson")]
pub struct AffineMap3 {
    pub m: [[Scalar; 3]; 3],
    pub t: [Scalar; 3],
}

#[derive(Serialize, Deserialize)]
struct AffineMapJson {
    #[serde(rename = "M")]
    m: [[Scalar; 3]; 3],
    t: [Scalar; 3],
}

impl TryFrom<AffineMapJson> for AffineMap3 {
    type Error = Error;
    fn try_from(j: AffineMapJson) -> Result<AffineMap3> {
        AffineMap3::new(j.m, j.t)
    }
}

impl From<AffineMap3> for AffineMapJson {
    fn from(g: AffineMap3) -> AffineMapJson {
        AffineMapJson { m: g.m, t: g.t }
    }
}

fn det3(m: &[[Scalar; 3]; 3]) -> Scalar {
    let minor = |a: usize, b: usize, c: usize, d: usize| &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d]);
    &(&(&m[0][0] * &minor(1, 2, 2, 1)) - &(&m[0][1] * &minor(0, 2, 2, 0))) + &(&m[0][2] * &minor(0, 1, 1, 0))
}

impl AffineMap3 {
    pub fn new(m: [[Scalar; 3]; 3], t: [Scalar; 3]) -> Result<AffineMap3> {
        if det3(&m).is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(AffineMap3 { m, t })
    }

    pub fn identity() -> AffineMap3 {
        let m = std::array::from_fn(|i| std::array::from_fn(|k| if i == k { Scalar::one() } else { Scalar::zero() }));
        AffineMap3 { m, t: std::array::from_fn(|_| Scalar::zero()) }
    }

    pub fn translation(t: [Scalar; 3]) -> AffineMap3 {
        AffineMap3 { t, ..AffineMap3::identity() }
    }

    pub fn linear(m: [[Scalar; 3]; 3]) -> Result<AffineMap3> {
        AffineMap3::new(m, std::array::from_fn(|_| Scalar::zero()))
    }

    pub fn det(&self) -> Scalar {
        det3(&self.m)
    }

    pub fn is_exact(&self) -> bool {
        self.m.iter().flatten().chain(&self.t).all(Scalar::is_exact)
    }

    pub fn apply(&self, p: &[Scalar; 3]) -> [Scalar; 3] {
        std::array::from_fn(|i| (0..3).fold(self.t[i].clone(), |acc, k| acc + &self.m[i][k] * &p[k]))
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &AffineMap3) -> AffineMap3 {
        let m = std::array::from_fn(|i| std::array::from_fn(|k| (0..3).fold(Scalar::zero(), |acc, l| acc + &self.m[i][l] * &o.m[l][k])));
        let t = self.apply(&o.t);
        AffineMap3 { m, t }
    }

    pub fn inverse(&self) -> Result<AffineMap3> {
        let d = self.det().recip().map_err(|_| Error::SingularMatrix)?;
        let m = &self.m;
        let cof = |i: usize, k: usize| {
            let (r1, r2) = ((k + 1) % 3, (k + 2) % 3);
            let (c1, c2) = ((i + 1) % 3, (i + 2) % 3);
            &(&m[r1][c1] * &m[r2][c2]) - &(&m[r1][c2] * &m[r2][c1])
        };
        let inv: [[Scalar; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|k| &cof(i, k) * &d));
        let t = std::array::from_fn(|i| -(0..3).fold(Scalar::zero(), |acc, k| acc + &inv[i][k] * &self.t[k]));
        Ok(AffineMap3 { m: inv, t })
    }
}

/// Image of the graph of `f` under `g`, as a graph expanded at the image of the base point.
pub fn act_on_taylor(g: &AffineMap3, f: &TaylorMap) -> Result<TaylorMap> {
    let (x0, y0) = f.base();
    let k = f.order();
    let coords = [TaylorMap::var_x(x0.clone(), y0.clone(), k), TaylorMap::var_y(x0.clone(), y0.clone(), k), f.clone()];
    let img: Vec<TaylorMap> = (0..3)
        .map(|i| {
            let lin = (0..3).fold(TaylorMap::zero(x0.clone(), y0.clone(), k), |acc, l| &acc + &coords[l].scale(&g.m[i][l]));
            &lin + &TaylorMap::constant(x0.clone(), y0.clone(), k, g.t[i].clone())
        })
        .collect();
    let (xs, ys) = TaylorMap::invert2d(&img[0], &img[1]).map_err(|e| match e {
        Error::SingularJacobian => Error::NonAdmissibleChart,
        e => e,
    })?;
    Ok(img[2].compose(&xs, &ys))
}

/// `k`-jet of the image of the graph of `f` under `g`.
pub fn act_on_jet(g: &AffineMap3, f: &TaylorMap, k: usize) -> Result<JetPoint> {
    jet_of_surface(&act_on_taylor(g, f)?, k)
}

/// Action on a jet of any order through its Taylor polynomial.
pub fn act_on_jetpoint(g: &AffineMap3, j: &JetPoint) -> Result<JetPoint> {
    act_on_jet(g, &taylor_of_jet(j), j.order())
}

/// Exact square root if the value is a rational square, else a float.
fn root(v: &Scalar) -> Result<Scalar> {
    v.sqrt_or_float()
}

/// An affine map sending the 2-jet of `j` to the 2-jet of `(x^2 ± y^2)/2` at the origin.
///
/// The Hessian is diagonalized by completing the square, `H = U^T diag(a, det/a) U`.
/// The `u`-scaling is `sign(a)` when both pivots have rational roots; otherwise
/// it is `1/a`, which needs only `sqrt|det|` to be rational.
pub fn normalize_to_origin(j: &JetPoint) -> Result<AffineMap3> {
    if j.order() < 2 {
        return Err(Error::OrderTooLow { have: j.order(), need: 2 });
    }
    if classify_fiber(j)? == Region::Degenerate {
        return Err(Error::DegenerateHessian);
    }
    let z = Scalar::zero;
    let one = Scalar::one;
    let (p, q) = (j.get(1, 0).clone(), j.get(0, 1).clone());
    let shift = AffineMap3 {
        m: [[one(), z(), z()], [z(), one(), z()], [-p.clone(), -q.clone(), one()]],
        t: [-j.x.clone(), -j.y.clone(), &(&(-j.u.clone()) + &(&p * &j.x)) + &(&q * &j.y)],
    };
    // Change of plane coordinates v = P w so that the (1,1) Hessian entry is nonzero.
    let [a0, b0, c0] = j.hessian();
    let pmat: [[Scalar; 2]; 2] = if !a0.is_zero() {
        [[one(), z()], [z(), one()]]
    } else if !c0.is_zero() {
        [[z(), one()], [one(), z()]]
    } else {
        [[one(), z()], [one(), one()]]
    };
    let h = [[a0, b0.clone()], [b0, c0]];
    let hw: [[Scalar; 2]; 2] = std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let mut s = Scalar::zero();
            for k in 0..2 {
                for l in 0..2 {
                    s += &(&(&pmat[k][r] * &h[k][l]) * &pmat[l][c]);
                }
            }
            s
        })
    });
    let (a, b) = (hw[0][0].clone(), hw[0][1].clone());
    let det = j.hessian_det();
    let e = &det / &a;
    let ub = &b / &a;
    let sa = Scalar::int(a.signum() as i64);
    let (beta1, beta2, mu) = {
        let r1 = root(&a.abs())?;
        let r2 = root(&e.abs())?;
        if r1.is_exact() && r2.is_exact() {
            (r1, r2, sa)
        } else {
            let rd = root(&det.abs())?;
            if rd.is_exact() {
                (one(), &rd / &a.abs(), a.recip()?)
            } else {
                (r1, r2, sa)
            }
        }
    };
    // B = diag(beta1, beta2) U with U = [[1, b/a], [0, 1]]; the new coordinates are B P^{-1} v.
    let bm = [[beta1.clone(), &beta1 * &ub], [z(), beta2]];
    let pdet = &(&pmat[0][0] * &pmat[1][1]) - &(&pmat[0][1] * &pmat[1][0]);
    let ipd = pdet.recip()?;
    let pinv = [[&pmat[1][1] * &ipd, -(&pmat[0][1] * &ipd)], [-(&pmat[1][0] * &ipd), &pmat[0][0] * &ipd]];
    let lin: [[Scalar; 2]; 2] = std::array::from_fn(|r| std::array::from_fn(|c| &(&bm[r][0] * &pinv[0][c]) + &(&bm[r][1] * &pinv[1][c])));
    let scale = AffineMap3::linear([[lin[0][0].clone(), lin[0][1].clone(), z()], [lin[1][0].clone(), lin[1][1].clone(), z()], [z(), z(), mu]])?;
    Ok(scale.compose(&shift))
}

/// The four pulled-back third-order coordinates under a symmetric `A = [[a11, a12], [a12, a22]]`.
pub fn gl2_pullback_third(a: [Scalar; 3], v: [Scalar; 4]) -> Result<[Scalar; 4]> {
    let det = &(&a[0] * &a[2]) - &(&a[1] * &a[1]);
    let w = det.powi(3).recip().map_err(|_| Error::SingularMatrix)?;
    let raw = pullback_numerators(&a, &v);
    Ok(raw.map(|x| &x * &w))
}

/// The pullback formulas without the `det(A)^-3` factor, generic over the coefficient type.
fn pullback_rows<T>(a11: &T, a12: &T, a22: &T, v: &[T; 4]) -> [T; 4]
where
    T: Clone + std::ops::Neg<Output = T>,
    for<'x> &'x T: std::ops::Add<&'x T, Output = T> + std::ops::Mul<&'x T, Output = T> + std::ops::Sub<&'x T, Output = T>,
{
    let m = |xs: &[&T]| -> T {
        let mut acc = xs[0].clone();
        for x in &xs[1..] {
            acc = &acc * *x;
        }
        acc
    };
    let sum = |xs: Vec<T>| -> T {
        let mut acc = xs[0].clone();
        for x in &xs[1..] {
            acc = &acc + x;
        }
        acc
    };
    let three = |x: T| &(&x + &x) + &x;
    let two = |x: T| &x + &x;
    let [u1, u2, u3, u4] = [&v[0], &v[1], &v[2], &v[3]];
    [
        sum(vec![m(&[a22, a22, a22, u1]), -three(m(&[a22, a22, a12, u2])), three(m(&[a22, a12, a12, u3])), -m(&[a12, a12, a12, u4])]),
        sum(vec![
            -m(&[a22, a22, a12, u1]),
            &(&two(m(&[a22, a12, a12])) + &m(&[a11, a22, a22])) * u2,
            -(&(&m(&[a12, a12, a12]) + &two(m(&[a11, a22, a12]))) * u3),
            m(&[a11, a12, a12, u4]),
        ]),
        sum(vec![
            m(&[a12, a12, a22, u1]),
            -(&(&m(&[a12, a12, a12]) + &two(m(&[a11, a22, a12]))) * u2),
            &(&m(&[a22, a11, a11]) + &two(m(&[a12, a12, a11]))) * u3,
            -m(&[a12, a11, a11, u4]),
        ]),
        sum(vec![-m(&[a12, a12, a12, u1]), three(m(&[a12, a12, a11, u2])), -three(m(&[a12, a11, a11, u3])), m(&[a11, a11, a11, u4])]),
    ]
}

fn pullback_numerators(a: &[Scalar; 3], v: &[Scalar; 4]) -> [Scalar; 4] {
    pullback_rows(&a[0], &a[1], &a[2], v)
}

/// `f(pullback) - F(Hess = A^2)` with the `det(A)` factors cleared, where
/// `f = (u_xxx - 3u_xyy)^2 + (u_yyy - 3u_xxy)^2`. The zero polynomial.
pub fn gl2_pullback_residual() -> Poly {
    let (a11, a12, a22) = (pv(Var::A11), pv(Var::A12), pv(Var::A22));
    let v = [pv(Var::UXXX), pv(Var::UXXY), pv(Var::UXYY), pv(Var::UYYY)];
    let pb = pullback_rows(&a11, &a12, &a22, &v);
    let three = Poly::int(3);
    let f = (&pb[0] - &(&three * &pb[2])).pow(2) + (&pb[3] - &(&three * &pb[1])).pow(2);
    let fa = f_poly()
        .substitute(Var::UXX, &(&a11.pow(2) + &a12.pow(2)))
        .substitute(Var::UXY, &(&a12 * &(&a11 + &a22)))
        .substitute(Var::UYY, &(&a12.pow(2) + &a22.pow(2)));
    &f - &fa
}

/// Rank of the twelve prolonged generators at a point of `J^3`.
pub fn lifted_rank(j: &JetPoint) -> Result<usize> {
    if j.order() < 3 {
        return Err(Error::OrderTooLow { have: j.order(), need: 3 });
    }
    let j3 = project(j, 3)?;
    let mut rows = Vec::with_capacity(12);
    for g in aff3_generators() {
        rows.push(prolong(&g, 3)?.eval_vector(&j3)?);
    }
    Ok(linalg::rank(&rows))
}

/// Structure constants: `[X_a, X_b]` in the generator basis.
pub fn structure_constants() -> Vec<Vec<[Rational; 12]>> {
    let gens = aff3_generators();
    gens.iter()
        .map(|a| gens.iter().map(|b| aff3_coordinates(&a.bracket(b)).expect("aff(3) is closed")).collect())
        .collect()
}

/// `det Hess` is a relative invariant: `X^(2)(det) = lambda det` for each generator.
pub fn hessian_det_weight(x: &VectorField3) -> Result<Poly> {
    prolong(x, 2)?.apply(&hessian_det())?.exact_div(&hessian_det()).map_err(|_| Error::NotDivisible)
}

/// Word labels of the prolongation components, for display.
pub fn component_labels(order: usize) -> Vec<String> {
    let mut out = Vec::new();
    for o in 1..=order {
        for ny in 0..=o {
            out.push(word(o - ny, ny));
        }
    }
    out
}
