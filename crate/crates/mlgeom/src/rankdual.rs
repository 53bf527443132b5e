//! Determinantal models: critical points on rank varieties, the duality
//! between ranks `r` and `m−r+1`, the tangent-space criticality test, EM
//! for the mixture parametrization and the 2×2×2 supermodularity test.

use num::{BigRational, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::critsys::{build_rank_system, build_symmetric_rank_system, rank_matrix_numeric, sym_matrix_numeric, CriticalSystem};
use crate::error::{invalid, Error, Result};
use crate::linalg::{singular_values, to_dmatrix};
use crate::poly::rational_to_f64;
use crate::rng::{child_seed, generic_data, seeded};
use crate::tracker::{parameter_homotopy, solve, PathStats, SolutionClass, SolutionSet, TrackerConfig};
use crate::C64;

pub type CMatrix = Vec<Vec<C64>>;
pub type RMatrix = Vec<Vec<BigRational>>;

/// Relative singular value gap separating rank `r` from rank `r+1`.
pub const RANK_GAP: f64 = 1e-6;

/// A critical point normalized to `p_{++} = 1`.
#[derive(Clone, Debug)]
pub struct MatrixPoint {
    pub p: CMatrix,
    pub real: bool,
    pub positive: bool,
    /// `Σ u_ij log p_ij` (real part; meaningful for positive points).
    pub log_likelihood: f64,
}

impl MatrixPoint {
    fn new(mut p: CMatrix, u: &[Vec<f64>], weights: impl Fn(usize, usize) -> f64) -> Self {
        let s: C64 = p.iter().flatten().enumerate().map(|(k, z)| z * weights(k / p[0].len(), k % p[0].len())).sum();
        for z in p.iter_mut().flatten() {
            *z /= s;
        }
        let scale = p.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let real = p.iter().flatten().all(|z| z.im.abs() <= 1e-8 * scale);
        let positive = real && p.iter().flatten().all(|z| z.re > 0.0);
        let log_likelihood =
            u.iter().zip(&p).flat_map(|(ur, pr)| ur.iter().zip(pr)).filter(|(x, _)| **x != 0.0).map(|(x, z)| x * z.norm().ln()).sum();
        MatrixPoint { p, real, positive, log_likelihood }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "re": self.p.iter().map(|r| r.iter().map(|z| z.re).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "im": self.p.iter().map(|r| r.iter().map(|z| z.im).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "real": self.real,
            "positive": self.positive,
            "logLikelihood": self.log_likelihood,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RankCritical {
    pub points: Vec<MatrixPoint>,
    /// Regular solutions dropped for having the wrong rank or a zero entry.
    pub rejected: usize,
    pub stats: PathStats,
}

/// Numerical rank: the number of singular values above `RANK_GAP · σ_1`.
pub fn numerical_rank(p: &CMatrix) -> usize {
    let flat: Vec<C64> = p.iter().flatten().copied().collect();
    let sv = singular_values(&to_dmatrix(p.len(), p[0].len(), &flat));
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > RANK_GAP * top).count()
}

fn check_data(u: &[Vec<BigRational>], m: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if u.len() != m || u.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: m * n, got: u.iter().map(Vec::len).sum() });
    }
    if u.iter().flatten().any(|x| x.is_negative()) || u.iter().flatten().all(Zero::is_zero) {
        return invalid("data matrix must be nonnegative and nonzero");
    }
    Ok(u.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect())
}

fn collect_points(
    sol: &SolutionSet,
    r: usize,
    assemble: impl Fn(&[C64]) -> CMatrix,
    make: impl Fn(CMatrix) -> MatrixPoint,
) -> RankCritical {
    let mut points = Vec::new();
    let mut rejected = 0;
    for pt in sol.distinct_p(SolutionClass::OffHRegular) {
        let p = assemble(&pt.x);
        let scale = p.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if numerical_rank(&p) != r || p.iter().flatten().any(|z| z.norm() <= 1e-8 * scale) {
            rejected += 1;
            continue;
        }
        points.push(make(p));
    }
    points.sort_by(|a, b| b.log_likelihood.total_cmp(&a.log_likelihood));
    RankCritical { points, rejected, stats: sol.stats }
}

/// Critical points of `ℓ_U` on the `m×n` matrices of rank `≤ r`, solved
/// from a multihomogeneous start.
pub fn rank_critical_points(m: usize, n: usize, r: usize, u: &[Vec<BigRational>], cfg: &TrackerConfig) -> Result<RankCritical> {
    let uf = check_data(u, m, n)?;
    let sys = build_rank_system(m, n, r, u)?.to_complex();
    let sol = solve(&sys, cfg)?;
    Ok(collect_points(&sol, r, |x| rank_matrix_numeric(m, n, r, x), |p| MatrixPoint::new(p, &uf, |_, _| 1.0)))
}

/// Same as [`rank_critical_points`], but the multihomogeneous start is
/// solved once for seeded generic data and the solutions are carried to
/// `u` by a parameter homotopy.
pub fn rank_critical_points_parameter(
    m: usize,
    n: usize,
    r: usize,
    u: &[Vec<BigRational>],
    cfg: &TrackerConfig,
) -> Result<RankCritical> {
    let uf = check_data(u, m, n)?;
    let mut rng = seeded(child_seed(cfg.seed, 0xa11));
    let u0: Vec<C64> = generic_data(&mut rng, m * n).iter().map(|x| C64::new(rational_to_f64(x), 0.0)).collect();
    let family = |v: &[C64]| -> Result<CriticalSystem<C64>> {
        let rows: Vec<Vec<C64>> = v.chunks(n).map(<[C64]>::to_vec).collect();
        build_rank_system(m, n, r, &rows)
    };
    let generic = solve(&family(&u0)?, cfg)?;
    let seeds: Vec<Vec<C64>> = generic.distinct(SolutionClass::OffHRegular).iter().map(|p| p.x.clone()).collect();
    let u1: Vec<C64> = uf.iter().flatten().map(|&x| C64::new(x, 0.0)).collect();
    let sol = parameter_homotopy(&family, &u0, &seeds, &u1, cfg)?;
    Ok(collect_points(&sol, r, |x| rank_matrix_numeric(m, n, r, x), |p| MatrixPoint::new(p, &uf, |_, _| 1.0)))
}

/// Critical points on symmetric `n×n` matrices of rank `≤ r`. Points are
/// returned as `n×n` matrices `(p_ij)` with `p_ij = p_ji`; the normalization
/// and the log-likelihood use the upper triangle only.
pub fn symmetric_rank_critical_points(n: usize, r: usize, u: &[Vec<BigRational>], cfg: &TrackerConfig) -> Result<RankCritical> {
    let uf = check_data(u, n, n)?;
    let upper: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if j >= i { uf[i][j] } else { 0.0 }).collect()).collect();
    let sys = build_symmetric_rank_system(n, r, u)?.to_complex();
    let sol = solve(&sys, cfg)?;
    // the rank filter runs on the model matrix, whose diagonal is `2p_ii`
    Ok(collect_points(&sol, r, |x| sym_matrix_numeric(n, r, x), |p| {
        let q: CMatrix = (0..n).map(|i| (0..n).map(|j| if i == j { p[i][i] * 0.5 } else { p[i][j] }).collect()).collect();
        MatrixPoint::new(q, &upper, |i, j| if j >= i { 1.0 } else { 0.0 })
    }))
}

/// `Ω_U` with entries `u_ij u_{i+} u_{+j} / u_{++}^3`.
pub fn omega_matrix(u: &[Vec<BigRational>]) -> Result<RMatrix> {
    let n = u.first().map_or(0, Vec::len);
    if u.is_empty() || n == 0 || u.iter().any(|r| r.len() != n) {
        return invalid("data must be a nonempty rectangular matrix");
    }
    let rows: Vec<BigRational> = u.iter().map(|r| r.iter().cloned().sum()).collect();
    let cols: Vec<BigRational> = (0..n).map(|j| u.iter().map(|r| r[j].clone()).sum()).collect();
    let total: BigRational = rows.iter().cloned().sum();
    if total.is_zero() {
        return invalid("data sums to zero");
    }
    let t3 = &total * &total * &total;
    Ok(u.iter()
        .enumerate()
        .map(|(i, r)| r.iter().enumerate().map(|(j, x)| x * &rows[i] * &cols[j] / &t3).collect())
        .collect())
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DualityReport {
    /// `(i, σ(i))` for every matched pair.
    pub pairs: Vec<(usize, usize)>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub perfect: bool,
    /// Matched pairs agree on being real and on being positive.
    pub reality_preserved: bool,
}

/// Match critical points for ranks `r` and `m−r+1` through
/// `P ⋆ Q = Ω_U`. Pairs are taken greedily in order of residual; the
/// matching is perfect when every point is paired below `tol`.
pub fn duality_pairing(ps: &[MatrixPoint], qs: &[MatrixPoint], u: &[Vec<BigRational>], tol: f64) -> Result<DualityReport> {
    let omega: Vec<Vec<f64>> = omega_matrix(u)?.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect();
    let residual = |p: &MatrixPoint, q: &MatrixPoint| -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in omega.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                worst = worst.max((p.p[i][j] * q.p[i][j] - w).norm());
            }
        }
        worst
    };
    let mut cand: Vec<(f64, usize, usize)> =
        ps.iter().enumerate().flat_map(|(i, p)| qs.iter().enumerate().map(move |(j, q)| (residual(p, q), i, j))).collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut used_p, mut used_q) = (vec![false; ps.len()], vec![false; qs.len()]);
    let mut matched = Vec::new();
    for (res, i, j) in cand {
        if res < tol && !used_p[i] && !used_q[j] {
            used_p[i] = true;
            used_q[j] = true;
            matched.push((i, j, res));
        }
    }
    matched.sort_by_key(|m| m.0);
    let reality_preserved = matched.iter().all(|&(i, j, _)| ps[i].real == qs[j].real && ps[i].positive == qs[j].positive);
    let residuals: Vec<f64> = matched.iter().map(|m| m.2).collect();
    Ok(DualityReport {
        perfect: ps.len() == qs.len() && matched.len() == ps.len(),
        pairs: matched.iter().map(|&(i, j, _)| (i, j)).collect(),
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        residuals,
        reality_preserved,
    })
}

/// Tangent-space test: with `Z = [u_ij/p_ij − u_{++}/p_{++}]` and
/// `C`, `W` bases of the column and row space of `P`, a rank-`r` point is
/// critical iff `Cᵀ Z = 0` and `Z Wᵀ = 0`. Entries of `U` and `P` are
/// scaled to sum one, and the largest entry of `CᵀZ`, `ZWᵀ` (orthonormal
/// bases) is compared with `tol`.
pub fn verify_critical_rank(p: &CMatrix, u: &[Vec<f64>], r: usize, tol: f64) -> Result<bool> {
    let m = p.len();
    let n = p.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || u.len() != m || u.iter().any(|row| row.len() != n) || p.iter().any(|row| row.len() != n) {
        return invalid("P and U must have the same shape");
    }
    if r == 0 || r > m.min(n) {
        return invalid("rank out of range");
    }
    let flat: Vec<C64> = p.iter().flatten().copied().collect();
    let svd = to_dmatrix(m, n, &flat).svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    if sv[r - 1] <= RANK_GAP * sv[0] || sv.get(r).is_some_and(|&s| s > RANK_GAP * sv[0]) {
        return Err(Error::NoConvergence("rank factorization is ill-conditioned: no clean singular value gap".into()));
    }
    let (uu, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let ptot: C64 = flat.iter().sum();
    let utot: f64 = u.iter().flatten().sum();
    if ptot.norm() == 0.0 || utot == 0.0 || flat.iter().any(|z| z.norm() == 0.0) {
        return invalid("P must have nonzero entries and U a nonzero sum");
    }
    let z: Vec<Vec<C64>> = (0..m)
        .map(|i| (0..n).map(|j| C64::new(u[i][j] / utot, 0.0) / (p[i][j] / ptot) - C64::new(1.0, 0.0)).collect())
        .collect();
    let mut worst = 0.0f64;
    for &k in &order[..r] {
        for j in 0..n {
            let s: C64 = (0..m).map(|i| uu[(i, k)] * z[i][j]).sum();
            worst = worst.max(s.norm());
        }
        for i in 0..m {
            let s: C64 = (0..n).map(|j| z[i][j] * vt[(k, j)]).sum();
            worst = worst.max(s.norm());
        }
    }
    Ok(worst < tol)
}

/// Mixture parameters: `a` is `m×r` with columns summing to one, `lambda`
/// sums to one and `b` is `r×n` with rows summing to one, so that
/// `P = A·diag(λ)·B` is a probability matrix.
#[derive(Clone, Debug, Serialize)]
pub struct MixtureParams {
    pub a: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    pub b: Vec<Vec<f64>>,
}

impl MixtureParams {
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let (m, n, r) = (self.a.len(), self.b[0].len(), self.lambda.len());
        (0..m).map(|i| (0..n).map(|j| (0..r).map(|k| self.a[i][k] * self.lambda[k] * self.b[k][j]).sum()).collect()).collect()
    }

    /// Seeded strictly positive starting point.
    pub fn random(m: usize, n: usize, r: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let mut draw = |k: usize| -> Vec<f64> {
            let v: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect()
        };
        let cols: Vec<Vec<f64>> = (0..r).map(|_| draw(m)).collect();
        let a = (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        let lambda = draw(r);
        let b = (0..r).map(|_| draw(n)).collect();
        MixtureParams { a, lambda, b }
    }

    fn validate(&self, m: usize, n: usize, r: usize) -> Result<()> {
        let close = |s: f64| (s - 1.0).abs() < 1e-9;
        let shape = self.a.len() == m && self.a.iter().all(|x| x.len() == r) && self.lambda.len() == r && self.b.len() == r
            && self.b.iter().all(|x| x.len() == n);
        if !shape {
            return invalid("mixture parameters have the wrong shape");
        }
        let positive = self.a.iter().flatten().chain(&self.lambda).chain(self.b.iter().flatten()).all(|&x| x > 0.0);
        let stochastic = (0..r).all(|k| close(self.a.iter().map(|x| x[k]).sum()))
            && close(self.lambda.iter().sum())
            && self.b.iter().all(|x| close(x.iter().sum()));
        if !positive || !stochastic {
            return invalid("initial mixture parameters must be strictly positive and stochastic");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EmResult {
    pub params: MixtureParams,
    pub p: Vec<Vec<f64>>,
    /// `log ℓ_U` before the first and after every iteration.
    pub log_lik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `Σ u_ij log p_ij` with `0·log 0 = 0`.
pub fn log_likelihood(u: &[Vec<f64>], p: &[Vec<f64>]) -> f64 {
    u.iter().zip(p).flat_map(|(a, b)| a.iter().zip(b)).filter(|(x, _)| **x != 0.0).map(|(x, q)| x * q.ln()).sum()
}

/// EM for `P = A·diag(λ)·B`; stops once an iteration improves the
/// log-likelihood by less than `tol`.
pub fn em_mixture(u: &[Vec<f64>], r: usize, init: MixtureParams, max_iters: usize, tol: f64) -> Result<EmResult> {
    let m = u.len();
    let n = u.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || u.iter().any(|row| row.len() != n) {
        return invalid("data must be a nonempty rectangular matrix");
    }
    if u.iter().flatten().any(|&x| !(x >= 0.0)) || u.iter().flatten().sum::<f64>() <= 0.0 {
        return invalid("data must be nonnegative with a positive total");
    }
    if r == 0 {
        return invalid("rank must be positive");
    }
    init.validate(m, n, r)?;
    let total: f64 = u.iter().flatten().sum();
    let mut par = init;
    let mut p = par.matrix();
    let mut trace = vec![log_likelihood(u, &p)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut a = vec![vec![0.0; r]; m];
        let mut b = vec![vec![0.0; n]; r];
        let mut mass = vec![0.0; r];
        for i in 0..m {
            for j in 0..n {
                if u[i][j] == 0.0 {
                    continue;
                }
                for k in 0..r {
                    let w = u[i][j] * par.a[i][k] * par.lambda[k] * par.b[k][j] / p[i][j];
                    a[i][k] += w;
                    b[k][j] += w;
                    mass[k] += w;
                }
            }
        }
        for k in 0..r {
            if mass[k] > 0.0 {
                for row in a.iter_mut() {
                    row[k] /= mass[k];
                }
                for x in b[k].iter_mut() {
                    *x /= mass[k];
                }
            } else {
                // an empty component keeps its previous profile
                for i in 0..m {
                    a[i][k] = par.a[i][k];
                }
                b[k].clone_from(&par.b[k]);
            }
        }
        par = MixtureParams { a, lambda: mass.iter().map(|x| x / total).collect(), b };
        p = par.matrix();
        let ll = log_likelihood(u, &p);
        let gain = ll - trace.last().copied().unwrap_or(f64::NEG_INFINITY);
        trace.push(ll);
        if gain.abs() < tol {
            converged = true;
            break;
        }
    }
    Ok(EmResult { params: par, p, log_lik_trace: trace, iterations, converged })
}

/// The nine inequalities of one toric cell, as `(a, b, c, d)` meaning
/// `p_a p_b ≥ p_c p_d`, with index `4(i−1) + 2(j−1) + (k−1)` for `p_ijk`.
const CELL: [[usize; 4]; 9] = [
    [0, 7, 1, 6],
    [0, 7, 2, 5],
    [0, 7, 4, 3],
    [1, 7, 3, 5],
    [2, 7, 3, 6],
    [4, 7, 5, 6],
    [0, 3, 1, 2],
    [0, 5, 1, 4],
    [0, 6, 2, 4],
];

/// True if some relabeling `1 ↔ 2` of the three factors makes all nine
/// inequalities hold. `p` is indexed by `4i + 2j + k` with `i, j, k ∈ {0, 1}`.
pub fn supermodular_222(p: &[f64; 8]) -> bool {
    let slack = 1e-14 * p.iter().map(|x| x * x).sum::<f64>();
    (0..8usize).any(|flip| {
        let q: Vec<f64> = (0..8usize).map(|idx| p[idx ^ flip]).collect();
        CELL.iter().all(|&[a, b, c, d]| q[a] * q[b] + slack >= q[c] * q[d])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rational;

    fn qm(rows: &[&[i64]]) -> RMatrix {
        rows.iter().map(|r| r.iter().map(|&x| rational(x, 1)).collect()).collect()
    }

    #[test]
    fn omega_examples() {
        assert!(omega_matrix(&qm(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]])).unwrap().iter().flatten().all(|x| *x == rational(1, 81)));
        assert!(omega_matrix(&qm(&[&[1, 1], &[1, 1]])).unwrap().iter().flatten().all(|x| *x == rational(1, 16)));
        let o = omega_matrix(&qm(&[&[2, 0], &[0, 2]])).unwrap();
        assert_eq!(o, vec![vec![rational(1, 8), rational(0, 1)], vec![rational(0, 1), rational(1, 8)]]);
    }

    #[test]
    fn supermodular_examples() {
        assert!(supermodular_222(&[0.125; 8]));
        assert!(supermodular_222(&[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]));
        assert!(!supermodular_222(&[0.0, 0.25, 0.25, 0.0, 0.25, 0.0, 0.0, 0.25]));
    }

    #[test]
    fn rank_one_closed_form_is_critical() {
        let u = vec![vec![3.0, 5.0], vec![7.0, 11.0]];
        let rows = [8.0, 18.0];
        let cols = [10.0, 16.0];
        let p: CMatrix = (0..2).map(|i| (0..2).map(|j| C64::new(rows[i] * cols[j] / 676.0, 0.0)).collect()).collect();
        assert!(verify_critical_rank(&p, &u, 1, 1e-10).unwrap());
        let off: CMatrix = (0..2).map(|i| (0..2).map(|j| C64::new((i + 1) as f64 * (j + 2) as f64, 0.0)).collect()).collect();
        assert!(!verify_critical_rank(&off, &u, 1, 1e-6).unwrap());
    }

    #[test]
    fn em_rank_one_data_converges_immediately() {
        let u = vec![vec![2.0, 4.0, 6.0], vec![1.0, 2.0, 3.0]];
        let res = em_mixture(&u, 1, MixtureParams::random(2, 3, 1, 4), 50, 1e-12).unwrap();
        assert!(res.iterations <= 2);
        for i in 0..2 {
            for j in 0..3 {
                assert!((res.p[i][j] - u[i][j] / 18.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn three_by_three_rank_one() {
        let u = qm(&[&[51, 45, 33], &[28, 30, 29], &[15, 27, 38]]);
        let res = rank_critical_points(3, 3, 1, &u, &TrackerConfig::with_seed(2)).unwrap();
        assert_eq!(res.points.len(), 1);
        let rows = [129.0, 87.0, 80.0];
        let cols = [94.0, 102.0, 100.0];
        for i in 0..3 {
            for j in 0..3 {
                assert!((res.points[0].p[i][j] - C64::new(rows[i] * cols[j] / (296.0 * 296.0), 0.0)).norm() < 1e-10);
            }
        }
    }
}
