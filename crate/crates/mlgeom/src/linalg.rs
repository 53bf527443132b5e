//! Small dense complex linear algebra used by the tracker and the rank
//! suite. Singular values come from nalgebra; the hot-loop solve is a
//! plain partial-pivoting LU on a flat row-major buffer.

use nalgebra::DMatrix;
use num::{BigRational, One, Zero};

use crate::C64;

/// Solve `a x = b` in place (`a` is `n×n` row-major, overwritten; `b`
/// becomes `x`). Returns false if a zero pivot is met.
pub fn lu_solve(a: &mut [C64], n: usize, b: &mut [C64]) -> bool {
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].norm_sqr();
        for i in k + 1..n {
            let v = a[i * n + k].norm_sqr();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let d = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
            let bk = b[k];
            b[i] -= f * bk;
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k * n + j] * b[j];
        }
        b[k] = s / a[k * n + k];
    }
    true
}

pub fn to_dmatrix(rows: usize, cols: usize, data: &[C64]) -> DMatrix<C64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// 2-norm condition number; infinite for rank-deficient or non-finite input.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return f64::INFINITY;
    }
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Relative distance of `z` from the row space of `rows` (bilinear, not
/// Hermitian: the row space is taken over C as a set of vectors).
pub fn row_space_residual(rows: &[Vec<C64>], z: &[C64]) -> f64 {
    let zn = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if zn == 0.0 {
        return 0.0;
    }
    if rows.is_empty() {
        return 1.0;
    }
    let k = rows.len();
    let n = z.len();
    // Columns of M are the rows; least squares M c ≈ z.
    let m = DMatrix::from_fn(n, k, |i, j| rows[j][i]);
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = smax * 1e-12;
    let c = match svd.solve(&nalgebra::DVector::from_column_slice(z), tol) {
        Ok(c) => c,
        Err(_) => return f64::INFINITY,
    };
    let r = &m * c - nalgebra::DVector::from_column_slice(z);
    r.norm() / zn
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    for c in 0..cols {
        let r = pivots.len();
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, piv);
        let inv = BigRational::one() / &m[r][c];
        for k in c..cols {
            m[r][k] = &m[r][k] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..cols {
                    let t = &f * &m[r][k];
                    m[i][k] -= t;
                }
            }
        }
        pivots.push(c);
    }
    pivots
}

/// Basis of the right kernel `{x : m x = 0}` of a rational matrix with
/// `cols` columns.
pub fn nullspace(m: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rational;

    #[test]
    fn exact_kernel() {
        let q = |v: &[i64]| v.iter().map(|&x| rational(x, 1)).collect::<Vec<_>>();
        let m = vec![q(&[1, 2, 3]), q(&[2, 4, 6]), q(&[1, 0, 1])];
        let k = nullspace(&m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            let dot: BigRational = row.iter().zip(&k[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
        assert_eq!(nullspace(&[q(&[1, 0]), q(&[0, 1])], 2).len(), 0);
    }

    #[test]
    fn lu_small() {
        let mut a = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 1.0)];
        let mut b = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        assert!(lu_solve(&mut a, 2, &mut b));
        // 0 x + y = 1 ; 2x + (3+i) y = 0
        assert!((b[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((b[0] * 2.0 + C64::new(3.0, 1.0) - C64::new(0.0, 0.0)).norm() < 1e-15);
        let mut s = vec![C64::new(1.0, 0.0); 4];
        let mut r = vec![C64::new(1.0, 0.0); 2];
        assert!(!lu_solve(&mut s, 2, &mut r));
    }

    #[test]
    fn residuals() {
        let rows = vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]];
        assert!(row_space_residual(&rows, &[C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]) < 1e-14);
        assert!(row_space_residual(&rows, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]) > 0.9);
        let m = to_dmatrix(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1e-3, 0.0)]);
        assert!((condition_number(&m) - 1e3).abs() < 1e-6);
    }
}
