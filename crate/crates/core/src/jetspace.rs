//! Points of the jet spaces of graphs `u = f(x, y)`, total derivatives,
//! projections and the vertical tensors between jets in one fiber.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{Poly, RatFunc, Scalar, TaylorMap, Var, MAX_JET_ORDER};
use crate::error::{Error, Result};

/// Direction of a total derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    X,
    Y,
}

/// Sign class of the Hessian determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Plus,
    Minus,
    Degenerate,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Plus => "plus",
            Region::Minus => "minus",
            Region::Degenerate => "degenerate",
        })
    }
}

/// Sorted derivative word: `nx` x's followed by `ny` y's.
pub fn word(nx: usize, ny: usize) -> String {
    "x".repeat(nx) + &"y".repeat(ny)
}

/// Parse a sorted word such as `"xxy"`; unsorted words are rejected.
pub fn parse_word(w: &str) -> Option<(usize, usize)> {
    let nx = w.chars().take_while(|&c| c == 'x').count();
    let rest = &w[nx..];
    if rest.chars().all(|c| c == 'y') {
        Some((nx, rest.len()))
    } else {
        None
    }
}

fn n_derivs(order: usize) -> usize {
    (order + 1) * (order + 2) / 2 - 1
}

fn slot(nx: usize, ny: usize) -> usize {
    Var::deriv(nx, ny).index() - Var::UX.index()
}

/// Coordinates of a point of `J^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    order: usize,
    pub x: Scalar,
    pub y: Scalar,
    pub u: Scalar,
    derivs: Vec<Scalar>,
}

impl JetPoint {
    /// A jet with all derivatives zero.
    pub fn new(order: usize, x: Scalar, y: Scalar, u: Scalar) -> JetPoint {
        assert!(order <= MAX_JET_ORDER, "jet order {order} above {MAX_JET_ORDER}");
        JetPoint { order, x, y, u, derivs: vec![Scalar::zero(); n_derivs(order)] }
    }

    /// Jet at the origin with the given Hessian and all other entries zero.
    pub fn with_hessian(order: usize, uxx: Scalar, uxy: Scalar, uyy: Scalar) -> JetPoint {
        let mut j = JetPoint::new(order, Scalar::zero(), Scalar::zero(), Scalar::zero());
        j.set(2, 0, uxx);
        j.set(1, 1, uxy);
        j.set(0, 2, uyy);
        j
    }

    /// The base jets of `u = (x^2 + y^2)/2` (sign 1) and `u = (x^2 - y^2)/2` (sign -1) at the origin.
    pub fn fiducial(order: usize, sign: i64) -> JetPoint {
        JetPoint::with_hessian(order, Scalar::one(), Scalar::zero(), Scalar::int(sign))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `u` differentiated `nx` times in x and `ny` times in y.
    pub fn get(&self, nx: usize, ny: usize) -> &Scalar {
        if nx + ny == 0 {
            return &self.u;
        }
        assert!(nx + ny <= self.order, "u_{} beyond jet order {}", word(nx, ny), self.order);
        &self.derivs[slot(nx, ny)]
    }

    pub fn set(&mut self, nx: usize, ny: usize, v: Scalar) {
        if nx + ny == 0 {
            self.u = v;
            return;
        }
        assert!(nx + ny <= self.order, "u_{} beyond jet order {}", word(nx, ny), self.order);
        self.derivs[slot(nx, ny)] = v;
    }

    /// Value of a registered variable, if this jet carries it.
    pub fn value(&self, v: Var) -> Option<Scalar> {
        match v {
            Var::X => Some(self.x.clone()),
            Var::Y => Some(self.y.clone()),
            _ => match v.jet_index() {
                Some((a, b)) if a + b <= self.order => Some(self.get(a, b).clone()),
                _ => None,
            },
        }
    }

    /// Evaluate a polynomial in the jet variables at this point.
    pub fn eval(&self, p: &Poly) -> Result<Scalar> {
        p.eval(&|v| self.value(v))
    }

    pub fn eval_rf(&self, r: &RatFunc) -> Result<Scalar> {
        r.eval(&|v| self.value(v))
    }

    /// `(u_xx, u_xy, u_yy)`.
    pub fn hessian(&self) -> [Scalar; 3] {
        [self.get(2, 0).clone(), self.get(1, 1).clone(), self.get(0, 2).clone()]
    }

    pub fn hessian_det(&self) -> Scalar {
        let [a, b, c] = self.hessian();
        &a * &c - &b * &b
    }

    /// The four third-order coordinates `(u_xxx, u_xxy, u_xyy, u_yyy)`.
    pub fn third(&self) -> [Scalar; 4] {
        [self.get(3, 0).clone(), self.get(2, 1).clone(), self.get(1, 2).clone(), self.get(0, 3).clone()]
    }

    pub fn set_third(&mut self, t: &[Scalar; 4]) {
        for (n, v) in t.iter().enumerate() {
            self.set(3 - n, n, v.clone());
        }
    }

    pub fn is_exact(&self) -> bool {
        self.x.is_exact() && self.y.is_exact() && self.u.is_exact() && self.derivs.iter().all(Scalar::is_exact)
    }

    pub fn to_float(&self) -> JetPoint {
        JetPoint {
            order: self.order,
            x: self.x.to_float(),
            y: self.y.to_float(),
            u: self.u.to_float(),
            derivs: self.derivs.iter().map(Scalar::to_float).collect(),
        }
    }

    /// Derivative entries as `(word, value)`, in order of increasing length.
    pub fn entries(&self) -> impl Iterator<Item = (String, &Scalar)> {
        (1..=self.order).flat_map(move |o| (0..=o).map(move |ny| (word(o - ny, ny), self.get(o - ny, ny))))
    }

    /// The same jet raised to a higher order with zero new entries.
    pub fn extend(&self, order: usize) -> JetPoint {
        let mut out = JetPoint::new(order.max(self.order), self.x.clone(), self.y.clone(), self.u.clone());
        out.derivs[..self.derivs.len()].clone_from_slice(&self.derivs);
        out
    }
}

#[derive(Serialize, Deserialize)]
struct JetPointJson {
    order: usize,
    x: Scalar,
    y: Scalar,
    u: Scalar,
    d: BTreeMap<String, Scalar>,
}

impl Serialize for JetPoint {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        JetPointJson {
            order: self.order,
            x: self.x.clone(),
            y: self.y.clone(),
            u: self.u.clone(),
            d: self.entries().map(|(w, v)| (w, v.clone())).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for JetPoint {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = JetPointJson::deserialize(de)?;
        if raw.order > MAX_JET_ORDER {
            return Err(D::Error::custom(format!("order {} above {MAX_JET_ORDER}", raw.order)));
        }
        let mut j = JetPoint::new(raw.order, raw.x, raw.y, raw.u);
        if raw.d.len() != n_derivs(raw.order) {
            return Err(D::Error::custom(format!(
                "order {} needs {} derivative entries, got {}",
                raw.order,
                n_derivs(raw.order),
                raw.d.len()
            )));
        }
        for (w, v) in raw.d {
            match parse_word(&w) {
                Some((a, b)) if a + b >= 1 && a + b <= raw.order => j.set(a, b, v),
                _ => return Err(D::Error::custom(format!("bad derivative key '{w}'"))),
            }
        }
        Ok(j)
    }
}

/// Symmetric k-tensor `sum_i C(k,i) c_i dx^(k-i) dy^i (x) d/du` on the plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymTensorK {
    pub k: usize,
    pub c: Vec<Scalar>,
}

pub fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

impl SymTensorK {
    pub fn new(c: Vec<Scalar>) -> SymTensorK {
        assert!(c.len() >= 2);
        SymTensorK { k: c.len() - 1, c }
    }

    pub fn zero(k: usize) -> SymTensorK {
        SymTensorK { k, c: vec![Scalar::zero(); k + 1] }
    }

    /// Build from the coefficients of `dx^(k-i) dy^i` in the expanded form.
    pub fn from_monomial_coefficients(m: &[Scalar]) -> SymTensorK {
        let k = m.len() - 1;
        SymTensorK { k, c: m.iter().enumerate().map(|(i, v)| v / Scalar::int(binomial(k, i))).collect() }
    }

    /// Coefficient of `dx^(k-i) dy^i` in the expanded form.
    pub fn monomial_coefficient(&self, i: usize) -> Scalar {
        &self.c[i] * Scalar::int(binomial(self.k, i))
    }

    /// Component with the given indices (0 for x, 1 for y), in any order.
    pub fn component(&self, idx: &[usize]) -> &Scalar {
        assert_eq!(idx.len(), self.k);
        &self.c[idx.iter().filter(|&&i| i == 1).count()]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Scalar::is_zero)
    }
}

/// The `k`-jet of a Taylor expansion at its base point.
pub fn jet_of_surface(f: &TaylorMap, k: usize) -> Result<JetPoint> {
    if f.order() < k {
        return Err(Error::OrderTooLow { have: f.order(), need: k });
    }
    if k > MAX_JET_ORDER {
        return Err(Error::OrderTooHigh { have: k, max: MAX_JET_ORDER });
    }
    let (x0, y0) = f.base();
    let mut j = JetPoint::new(k, x0.clone(), y0.clone(), f.value().clone());
    let fact = |n: usize| Scalar::int((1..=n as i64).product());
    for o in 1..=k {
        for ny in 0..=o {
            let nx = o - ny;
            j.set(nx, ny, f.coeff(nx, ny) * fact(nx) * fact(ny));
        }
    }
    Ok(j)
}

/// The Taylor polynomial whose jet is `j`.
pub fn taylor_of_jet(j: &JetPoint) -> TaylorMap {
    let fact = |n: usize| Scalar::int((1..=n as i64).product());
    TaylorMap::from_fn(j.x.clone(), j.y.clone(), j.order(), |nx, ny| j.get(nx, ny) / (fact(nx) * fact(ny)))
}

fn shifted(v: Var, dir: Dir) -> Var {
    let (a, b) = v.jet_index().expect("jet variable");
    match dir {
        Dir::X => Var::deriv(a + 1, b),
        Dir::Y => Var::deriv(a, b + 1),
    }
}

/// Total derivative `D^(k)` in direction `dir`.
pub fn total_derivative(p: &Poly, dir: Dir, k: usize) -> Result<Poly> {
    if k > MAX_JET_ORDER {
        return Err(Error::OrderTooHigh { have: k, max: MAX_JET_ORDER });
    }
    let o = p.max_jet_order();
    if k == 0 || o >= k {
        return Err(Error::OrderOverflow(o));
    }
    let base = match dir {
        Dir::X => Var::X,
        Dir::Y => Var::Y,
    };
    let mut out = p.derivative(base);
    for v in p.variables() {
        if v.jet_index().is_some() {
            out = &out + &(&p.derivative(v) * &Poly::var(shifted(v, dir)));
        }
    }
    Ok(out)
}

/// Total derivative of a quotient of jet polynomials.
pub fn total_derivative_rf(r: &RatFunc, dir: Dir, k: usize) -> Result<RatFunc> {
    let dn = total_derivative(r.num(), dir, k)?;
    let dd = total_derivative(r.den(), dir, k)?;
    let num = &(&dn * r.den()) - &(r.num() * &dd);
    if dd.is_zero() {
        return RatFunc::new(dn, r.den().clone());
    }
    RatFunc::new(num, r.den().pow(2))
}

/// Truncate a jet to order `m`.
pub fn project(j: &JetPoint, m: usize) -> Result<JetPoint> {
    if m > j.order() {
        return Err(Error::OrderTooHigh { have: m, max: j.order() });
    }
    let mut out = JetPoint::new(m, j.x.clone(), j.y.clone(), j.u.clone());
    out.derivs.clone_from_slice(&j.derivs[..n_derivs(m)]);
    Ok(out)
}

fn agree(a: &Scalar, b: &Scalar) -> bool {
    if a.is_exact() && b.is_exact() {
        a == b
    } else {
        let (x, y) = (a.to_f64(), b.to_f64());
        (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()))
    }
}

/// Difference of two jets in the same fiber of `J^k -> J^(k-1)`, as a
/// symmetric tensor.
pub fn vertical_difference(j1: &JetPoint, j2: &JetPoint) -> Result<SymTensorK> {
    let k = j1.order();
    if k != j2.order() || k < 2 {
        return Err(Error::NotSameFiber);
    }
    let lower = [(&j1.x, &j2.x), (&j1.y, &j2.y), (&j1.u, &j2.u)];
    if !lower.iter().all(|(a, b)| agree(a, b)) {
        return Err(Error::NotSameFiber);
    }
    for o in 1..k {
        for ny in 0..=o {
            if !agree(j1.get(o - ny, ny), j2.get(o - ny, ny)) {
                return Err(Error::NotSameFiber);
            }
        }
    }
    Ok(SymTensorK::new((0..=k).map(|i| j1.get(k - i, i) - j2.get(k - i, i)).collect()))
}

/// Sign class of `u_xx u_yy - u_xy^2`.
pub fn classify_fiber(j: &JetPoint) -> Result<Region> {
    if j.order() < 2 {
        return Err(Error::OrderTooLow { have: j.order(), need: 2 });
    }
    Ok(region_of(&j.hessian_det()))
}

pub fn region_of(det: &Scalar) -> Region {
    match det.signum() {
        1 => Region::Plus,
        -1 => Region::Minus,
        _ => Region::Degenerate,
    }
}
