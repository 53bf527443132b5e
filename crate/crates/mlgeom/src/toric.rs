//! Toric models `X_c`: the MLE by convex geometric programming, the ML
//! degree by tracking the torus critical system, and the degree as a
//! normalized lattice volume.

use nalgebra::{DMatrix, DVector};
use num::{BigRational, Integer, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::Value;

use crate::critsys::{build_toric_system, integer_rank};
use crate::error::{invalid, Error, Result};
use crate::mldeg::{count_trials, MlReport};
use crate::poly::{rational_from_json, rational_to_f64};
use crate::rng::generic_data;
use crate::tracker::TrackerConfig;

/// Toric model given by an integer `(d+1)×(n+1)` matrix whose last row is
/// all ones and nonzero coefficients `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToricModel {
    a: Vec<Vec<i64>>,
    c: Vec<BigRational>,
}

impl ToricModel {
    pub fn new(a: Vec<Vec<i64>>, c: Vec<BigRational>) -> Result<Self> {
        let a = normalize_rows(&a)?;
        if c.len() != a[0].len() {
            return Err(Error::DimensionMismatch { expected: a[0].len(), got: c.len() });
        }
        if c.iter().any(Zero::is_zero) {
            return invalid("toric coefficients must be nonzero");
        }
        Ok(ToricModel { a, c })
    }

    pub fn with_unit_coefficients(a: Vec<Vec<i64>>) -> Result<Self> {
        let n = a.first().map_or(0, Vec::len);
        Self::new(a, vec![BigRational::from_integer(1.into()); n])
    }

    pub fn from_json(a: &Value, c: &Value) -> Result<Self> {
        let a = int_matrix_from_json(a)?;
        let c = c
            .as_array()
            .ok_or_else(|| Error::Parse("coefficients must be an array".into()))?
            .iter()
            .map(rational_from_json)
            .collect::<Result<Vec<_>>>()?;
        Self::new(a, c)
    }

    pub fn a(&self) -> &[Vec<i64>] {
        &self.a
    }

    pub fn c(&self) -> &[BigRational] {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.a.len() - 1
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Column `i` without its final one.
    pub fn a_tilde(&self, i: usize) -> Vec<i64> {
        self.a[..self.dim()].iter().map(|r| r[i]).collect()
    }
}

pub fn int_matrix_from_json(v: &Value) -> Result<Vec<Vec<i64>>> {
    let v = v.get("A").unwrap_or(v);
    v.as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse("matrix rows must be arrays".into()))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::Parse(format!("expected integer, got {x}"))))
                .collect()
        })
        .collect()
}

/// Bring `A` to the form "d independent integer rows, then all ones".
/// Accepts any integer matrix whose row space contains the ones vector.
pub fn normalize_rows(a: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let cols = a.first().map_or(0, Vec::len);
    if a.is_empty() || cols == 0 || a.iter().any(|r| r.len() != cols) {
        return invalid("A must be a nonempty rectangular integer matrix");
    }
    let ones = vec![1i64; cols];
    let full = integer_rank(a);
    let mut with_ones = a.to_vec();
    with_ones.push(ones.clone());
    if integer_rank(&with_ones) != full {
        return invalid("the all-ones vector is not in the row space of A");
    }
    let mut out: Vec<Vec<i64>> = Vec::new();
    for r in a {
        if r == &ones {
            continue;
        }
        let mut trial = out.clone();
        trial.push(r.clone());
        trial.push(ones.clone());
        if integer_rank(&trial) == trial.len() {
            out.push(r.clone());
        }
    }
    out.push(ones);
    debug_assert_eq!(out.len(), full);
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BirchResult {
    pub p: Vec<f64>,
    /// Torus point `x = e^y` (exponents as in `A`).
    pub x: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Objective value after each accepted step, starting at `y = 0`.
    pub objective_trace: Vec<f64>,
}

pub const BIRCH_MAX_ITERS: usize = 200;

/// Minimize `log f(e^y) − b·y` with `f = Σ c_i x^{ã_i}` and `b = Ã û` by
/// damped Newton. The minimizer gives the unique positive solution of
/// Birch's equations `Ã p̂ = Ã û`.
pub fn birch_mle(model: &ToricModel, u: &[BigRational], tol: f64) -> Result<BirchResult> {
    let n = model.len();
    if u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.len() });
    }
    if model.c.iter().any(|c| !c.is_positive()) {
        return invalid("geometric programming needs positive coefficients");
    }
    if u.iter().any(|x| !x.is_positive()) {
        return invalid("data must be positive");
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let d = model.dim();
    let total: BigRational = u.iter().cloned().sum();
    let uh: Vec<f64> = u.iter().map(|x| rational_to_f64(&(x / &total))).collect();
    let at: Vec<Vec<f64>> = (0..n).map(|i| model.a_tilde(i).iter().map(|&v| v as f64).collect()).collect();
    let logc: Vec<f64> = model.c.iter().map(|c| rational_to_f64(c).ln()).collect();
    let b: Vec<f64> = (0..d).map(|j| (0..n).map(|i| at[i][j] * uh[i]).sum()).collect();

    // objective, weights w_i = c_i e^{ã_i·y} / f
    let eval = |y: &[f64]| -> (f64, Vec<f64>) {
        let s: Vec<f64> = (0..n).map(|i| logc[i] + (0..d).map(|j| at[i][j] * y[j]).sum::<f64>()).collect();
        let mx = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = s.iter().map(|v| (v - mx).exp()).sum();
        let lse = mx + z.ln();
        let w: Vec<f64> = s.iter().map(|v| (v - lse).exp()).collect();
        let by: f64 = (0..d).map(|j| b[j] * y[j]).sum();
        (lse - by, w)
    };

    let mut y = vec![0.0; d];
    let (mut phi, mut w) = eval(&y);
    let mut trace = vec![phi];
    let mut iterations = 0;
    loop {
        let m: Vec<f64> = (0..d).map(|j| (0..n).map(|i| w[i] * at[i][j]).sum()).collect();
        let g = DVector::from_iterator(d, (0..d).map(|j| m[j] - b[j]));
        let gnorm = g.amax();
        if gnorm <= tol || d == 0 {
            let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            return Ok(BirchResult { p: w, x, iterations, gradient_norm: gnorm, objective_trace: trace });
        }
        if iterations >= BIRCH_MAX_ITERS {
            return Err(Error::NoConvergence(format!("Newton stopped with gradient {gnorm:e}")));
        }
        let mut h = DMatrix::<f64>::zeros(d, d);
        for i in 0..n {
            for j in 0..d {
                for k in 0..d {
                    h[(j, k)] += w[i] * (at[i][j] - m[j]) * (at[i][k] - m[k]);
                }
            }
        }
        let step = match h.clone().cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -g.clone(),
        };
        let slope = g.dot(&step);
        let mut t = 1.0;
        let accepted = loop {
            let yt: Vec<f64> = (0..d).map(|j| y[j] + t * step[j]).collect();
            let (pt, wt) = eval(&yt);
            if pt <= phi + 1e-4 * t * slope {
                break Some((yt, pt, wt));
            }
            // Near the optimum the decrease drops below the rounding of
            // phi; take the full step if it still shrinks the gradient.
            if t == 1.0 && pt - phi <= 8.0 * f64::EPSILON * phi.abs().max(1.0) {
                let mt: Vec<f64> = (0..d).map(|j| (0..n).map(|i| wt[i] * at[i][j]).sum()).collect();
                let gt = (0..d).map(|j| (mt[j] - b[j]).abs()).fold(0.0, f64::max);
                if gt < 0.5 * gnorm {
                    break Some((yt, pt, wt));
                }
            }
            t *= 0.5;
            if t < 1e-16 {
                break None;
            }
        };
        let Some((yt, pt, wt)) = accepted else {
            // no decrease possible at working precision
            if gnorm <= tol.max(1e-12) * 1e3 {
                let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
                return Ok(BirchResult { p: w, x, iterations, gradient_norm: gnorm, objective_trace: trace });
            }
            return Err(Error::NoConvergence(format!("line search failed at gradient {gnorm:e}")));
        };
        y = yt;
        phi = pt;
        w = wt;
        trace.push(phi);
        iterations += 1;
    }
}

/// ML degree of `X_c`: regular solutions of the torus critical system
/// with all `x_j ≠ 0` and `f(x) ≠ 0`, for generic data.
pub fn toric_ml_degree(model: &ToricModel, cfg: &TrackerConfig, trials: usize) -> Result<MlReport> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    count_trials(cfg, trials, |_, rng| {
        let u = generic_data(rng, model.len());
        build_toric_system(&model.a, &model.c, &u)
    })
}

/// Smith normal form diagonal of an integer matrix (nonzero invariants).
pub fn smith_invariants(m: &[Vec<i64>]) -> Vec<i64> {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero |entry| in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = Integer::div_floor(&a[i][t], &a[t][t]);
            for j in t..cols {
                a[i][j] -= q * a[t][j];
            }
            clean &= a[i][t] == 0;
        }
        for j in t + 1..cols {
            let q = Integer::div_floor(&a[t][j], &a[t][t]);
            for i in t..rows {
                a[i][j] -= q * a[i][t];
            }
            clean &= a[t][j] == 0;
        }
        if !clean {
            continue;
        }
        // divisibility condition: fold a non-divisible entry into row t
        let p = a[t][t];
        if let Some(i) = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0)) {
            for j in t..cols {
                a[t][j] += a[i][j];
            }
            continue;
        }
        out.push(p.abs() as i64);
        t += 1;
    }
    out
}

/// Degree of `X_c`: the normalized volume of `conv(ã_0, …, ã_n)` measured
/// in the affine lattice generated by the `ã_i` (supported for `d ≤ 3`).
pub fn normalized_volume(a: &[Vec<i64>]) -> Result<u64> {
    let a = normalize_rows(a)?;
    let d = a.len() - 1;
    if d > 3 {
        return Err(Error::Unsupported(format!("volume in dimension {d}")));
    }
    let n = a[0].len();
    let pts: Vec<Vec<i64>> = (0..n).map(|i| (0..d).map(|j| a[j][i]).collect()).collect();
    if d == 0 {
        return Ok(1);
    }
    let diffs: Vec<Vec<i64>> = (0..d).map(|j| (1..n).map(|i| pts[i][j] - pts[0][j]).collect()).collect();
    let inv = smith_invariants(&diffs);
    if inv.len() < d {
        return invalid("points do not span a full-dimensional polytope");
    }
    let index: i128 = inv.iter().map(|&x| x as i128).product();
    let vol = match d {
        1 => {
            let xs: Vec<i64> = pts.iter().map(|p| p[0]).collect();
            (xs.iter().max().unwrap() - xs.iter().min().unwrap()) as i128
        }
        2 => hull_area2(&pts.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>()) as i128,
        _ => volume3_normalized(&pts)?,
    };
    if vol % index != 0 {
        return Err(Error::InexactDivision(format!("volume {vol} by lattice index {index}")));
    }
    (vol / index).to_u64().ok_or(Error::Overflow("normalized volume"))
}

/// Twice the area of the convex hull of planar integer points.
fn hull_area2(points: &[(i64, i64)]) -> i64 {
    let mut p = points.to_vec();
    p.sort();
    p.dedup();
    if p.len() < 3 {
        return 0;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    let m = hull.len();
    (0..m).map(|i| hull[i].0 * hull[(i + 1) % m].1 - hull[(i + 1) % m].0 * hull[i].1).sum::<i64>().abs()
}

/// `3!·vol(conv(points))` for integer points in `Z^3`, by summing cones
/// from a vertex over all facets.
fn volume3_normalized(pts: &[Vec<i64>]) -> Result<i128> {
    let mut p: Vec<[i64; 3]> = pts.iter().map(|v| [v[0], v[1], v[2]]).collect();
    p.sort();
    p.dedup();
    let sub = |a: [i64; 3], b: [i64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let crossp = |a: [i64; 3], b: [i64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let dot = |a: [i64; 3], b: [i64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut facets: Vec<([i64; 3], i64)> = Vec::new();
    let m = p.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let mut nrm = crossp(sub(p[j], p[i]), sub(p[k], p[i]));
                if nrm == [0, 0, 0] {
                    continue;
                }
                let g = nrm.iter().fold(0i64, |g, &x| g.gcd(&x));
                nrm = [nrm[0] / g, nrm[1] / g, nrm[2] / g];
                let h = dot(nrm, p[i]);
                let vals: Vec<i64> = p.iter().map(|&q| dot(nrm, q) - h).collect();
                let (le, ge) = (vals.iter().all(|&v| v <= 0), vals.iter().all(|&v| v >= 0));
                let (nrm, h) = if le {
                    (nrm, h)
                } else if ge {
                    ([-nrm[0], -nrm[1], -nrm[2]], -h)
                } else {
                    continue;
                };
                if !facets.contains(&(nrm, h)) {
                    facets.push((nrm, h));
                }
            }
        }
    }
    if facets.is_empty() {
        return Ok(0);
    }
    let v0 = p[0];
    let mut total: i128 = 0;
    for (nrm, h) in &facets {
        let height = (*h - dot(*nrm, v0)) as i128;
        if height == 0 {
            continue;
        }
        // project the facet along its dominant normal coordinate
        let k = (0..3).max_by_key(|&i| nrm[i].abs()).unwrap();
        let on: Vec<(i64, i64)> = p
            .iter()
            .filter(|&&q| dot(*nrm, q) == *h)
            .map(|q| {
                let r: Vec<i64> = (0..3).filter(|&i| i != k).map(|i| q[i]).collect();
                (r[0], r[1])
            })
            .collect();
        let a2 = hull_area2(&on) as i128;
        let num = a2 * height;
        let den = nrm[k].abs() as i128;
        if num % den != 0 {
            return Err(Error::InexactDivision("facet cone volume".into()));
        }
        total += num / den;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rational;

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| rational(x, 1)).collect()
    }

    #[test]
    fn volumes() {
        let cubic = vec![vec![0, 3, 0, 1], vec![0, 0, 3, 1], vec![1, 1, 1, 1]];
        assert_eq!(normalized_volume(&cubic).unwrap(), 3);
        assert_eq!(normalized_volume(&[vec![2, 1, 0], vec![0, 1, 2]]).unwrap(), 2);
        let simplex = vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![1, 1, 1, 1]];
        assert_eq!(normalized_volume(&simplex).unwrap(), 1);
        // unit cube: Segre P1×P1×P1 has degree 6
        let cube = vec![
            vec![0, 1, 0, 0, 1, 1, 0, 1],
            vec![0, 0, 1, 0, 1, 0, 1, 1],
            vec![0, 0, 0, 1, 0, 1, 1, 1],
            vec![1; 8],
        ];
        assert_eq!(normalized_volume(&cube).unwrap(), 6);
        // twisted cubic
        assert_eq!(normalized_volume(&[vec![0, 1, 2, 3], vec![1, 1, 1, 1]]).unwrap(), 3);
    }

    #[test]
    fn smith_form() {
        assert_eq!(smith_invariants(&[vec![3, 0, 1], vec![0, 3, 1]]), vec![1, 3]);
        assert_eq!(smith_invariants(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]), vec![2, 6, 12]);
    }

    #[test]
    fn hardy_weinberg_birch() {
        let m = ToricModel::with_unit_coefficients(vec![vec![2, 1, 0], vec![0, 1, 2]]).unwrap();
        // c = (1, 2, 1) gives the binomial parametrization
        let m = ToricModel::new(m.a().to_vec(), q(&[1, 2, 1])).unwrap();
        let r = birch_mle(&m, &q(&[3, 5, 7]), 1e-13).unwrap();
        let want = [121.0 / 900.0, 418.0 / 900.0, 361.0 / 900.0];
        for (a, b) in r.p.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{:?}", r.p);
        }
        assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs().max(1.0)));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ToricModel::with_unit_coefficients(vec![vec![1, 2, 4]]).is_err());
        let m = ToricModel::new(vec![vec![0, 1, 2], vec![1, 1, 1]], q(&[1, -2, 1])).unwrap();
        assert!(birch_mle(&m, &q(&[1, 1, 1]), 1e-10).is_err());
        assert!(normalized_volume(&[vec![0, 1, 0, 0, 1], vec![0, 0, 1, 0, 1], vec![0, 0, 0, 1, 1], vec![0, 0, 0, 0, 1], vec![1; 5]]).is_err());
    }
}
