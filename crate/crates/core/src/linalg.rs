//! Row reduction over `Scalar`.

use crate::algebra::Scalar;

/// Relative pivot threshold used when any entry is a float.
pub const FLOAT_RANK_TOL: f64 = 1e-9;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn row_reduce(rows: &mut [Vec<Scalar>], tol: f64) -> Vec<usize> {
    let exact = rows.iter().flatten().all(Scalar::is_exact);
    let scale = Scalar::max_abs(rows.iter().flatten()).max(f64::MIN_POSITIVE);
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let best = (r..rows.len()).max_by(|&a, &b| rows[a][c].to_f64().abs().total_cmp(&rows[b][c].to_f64().abs()));
        let p = match best {
            Some(p) if exact && !rows[p][c].is_zero() => p,
            Some(p) if !exact && rows[p][c].to_f64().abs() > tol * scale => p,
            _ => continue,
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip().expect("nonzero pivot");
        let pivot_row: Vec<Scalar> = rows[r].iter().map(|v| v * &inv).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &(&f * pv);
            }
        }
        rows[r] = pivot_row;
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Scalar>]) -> usize {
    rank_tol(rows, FLOAT_RANK_TOL)
}

pub fn rank_tol(rows: &[Vec<Scalar>], tol: f64) -> usize {
    let mut m = rows.to_vec();
    row_reduce(&mut m, tol).len()
}

/// A basis of the right null space `{v : rows * v = 0}`.
pub fn null_space(rows: &[Vec<Scalar>], tol: f64) -> Vec<Vec<Scalar>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m = rows.to_vec();
    let pivots = row_reduce(&mut m, tol);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Scalar::zero(); ncols];
        v[free] = Scalar::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][free].clone();
        }
        out.push(v);
    }
    out
}

/// Determinant by elimination with partial pivoting.
pub fn determinant(rows: &[Vec<Scalar>]) -> Scalar {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Scalar::one();
    for c in 0..n {
        let p = (c..n)
            .filter(|&r| !m[r][c].is_zero())
            .max_by(|&a, &b| m[a][c].to_f64().abs().total_cmp(&m[b][c].to_f64().abs()));
        let Some(p) = p else { return Scalar::zero() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        let inv = m[c][c].recip().expect("nonzero pivot");
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] * &inv;
            for k in c..n {
                let d = &f * &m[c][k];
                m[r][k] -= &d;
            }
        }
    }
    det
}

/// Least-squares solution of `a x = b` through the normal equations, with the residual `b - a x`.
///
/// `a` must have full column rank.
pub fn least_squares(a: &[Vec<Scalar>], b: &[Scalar]) -> Option<(Vec<Scalar>, Vec<Scalar>)> {
    let n = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Scalar>> = (0..n)
        .map(|p| {
            let mut row: Vec<Scalar> =
                (0..n).map(|q| a.iter().fold(Scalar::zero(), |acc, r| acc + &r[p] * &r[q])).collect();
            row.push(a.iter().zip(b).fold(Scalar::zero(), |acc, (r, v)| acc + &r[p] * v));
            row
        })
        .collect();
    let pivots = row_reduce(&mut aug, FLOAT_RANK_TOL);
    if pivots.len() != n || pivots.contains(&n) {
        return None;
    }
    let x: Vec<Scalar> = aug.iter().map(|r| r[n].clone()).collect();
    let res = a
        .iter()
        .zip(b)
        .map(|(r, v)| v - &r.iter().zip(&x).fold(Scalar::zero(), |acc, (c, xi)| acc + c * xi))
        .collect();
    Some((x, res))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Scalar::int(x)).collect()
    }

    #[test]
    fn exact_rank() {
        assert_eq!(rank(&[row(&[1, 2, 3]), row(&[2, 4, 6]), row(&[0, 1, 1])]), 2);
        assert_eq!(rank(&[row(&[0, 0]), row(&[0, 0])]), 0);
        assert_eq!(rank(&[row(&[1, 0]), row(&[0, 1])]), 2);
    }

    #[test]
    fn float_rank_ignores_roundoff() {
        let a = vec![Scalar::float(0.1).unwrap(), Scalar::float(0.2).unwrap()];
        let b = vec![Scalar::float(0.3).unwrap(), Scalar::float(0.6 + 1e-17).unwrap()];
        assert_eq!(rank(&[a, b]), 1);
    }

    #[test]
    fn least_squares_fits_a_line() {
        // points (0,1), (1,3), (2,5) lie on 1 + 2t
        let a = vec![row(&[1, 0]), row(&[1, 1]), row(&[1, 2])];
        let (x, r) = least_squares(&a, &row(&[1, 3, 5])).unwrap();
        assert_eq!(x, row(&[1, 2]));
        assert!(r.iter().all(Scalar::is_zero));
        let (x, r) = least_squares(&a, &row(&[0, 3, 0])).unwrap();
        assert_eq!(x, row(&[1, 0]));
        assert_eq!(r, row(&[-1, 2, -1]));
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        assert_eq!(determinant(&[row(&[0, 1]), row(&[1, 0])]), Scalar::int(-1));
        assert_eq!(determinant(&[row(&[2, 0, 1]), row(&[1, 3, 2]), row(&[1, 1, 2])]), Scalar::int(6));
        assert_eq!(determinant(&[row(&[1, 2]), row(&[2, 4])]), Scalar::zero());
    }

    #[test]
    fn null_space_is_annihilated() {
        let m = [row(&[1, 2, 3]), row(&[0, 1, 1])];
        let ns = null_space(&m, FLOAT_RANK_TOL);
        assert_eq!(ns.len(), 1);
        for r in &m {
            let dot = r.iter().zip(&ns[0]).fold(Scalar::zero(), |acc, (a, b)| acc + a * b);
            assert!(dot.is_zero());
        }
    }
}
