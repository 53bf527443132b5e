//! Linear models `X ⊂ P^n`: the matroid of the restricted hyperplane
//! arrangement, its characteristic polynomial and broken-circuit
//! h-vector, the resulting ML bidegree, and the critical points by
//! path tracking.

use std::collections::HashMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::critsys::{build_lagrange_system, VarietySpec};
use crate::error::{invalid, Error, Result};
use crate::linalg::{nullspace, rref};
use crate::poly::{rational_from_json, rational_to_json, BinaryForm, QPoly};
use crate::rng::seeded;
use crate::tracker::{solve, SolutionClass, SolutionSet, TrackerConfig};

/// `X` as the row space of a `(d+1)×(n+1)` rational matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    basis: Vec<Vec<BigRational>>,
}

impl LinearModel {
    pub fn new(basis: Vec<Vec<BigRational>>) -> Result<Self> {
        let cols = basis.first().map_or(0, Vec::len);
        if basis.is_empty() || cols < 2 || basis.iter().any(|r| r.len() != cols) {
            return invalid("basis must be a nonempty rectangular matrix with at least two columns");
        }
        if basis.len() > cols {
            return invalid("more basis rows than coordinates");
        }
        let mut m = basis.clone();
        if rref(&mut m).len() != basis.len() {
            return invalid("basis rows are linearly dependent");
        }
        let model = LinearModel { basis };
        if model.sum_column().iter().all(Zero::is_zero) {
            return invalid("p_+ vanishes on X");
        }
        Ok(model)
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect())
    }

    pub fn basis(&self) -> &[Vec<BigRational>] {
        &self.basis
    }

    /// Projective dimension `d`.
    pub fn dim(&self) -> usize {
        self.basis.len() - 1
    }

    /// Ambient dimension `n`.
    pub fn n(&self) -> usize {
        self.basis[0].len() - 1
    }

    fn column(&self, j: usize) -> Vec<BigRational> {
        self.basis.iter().map(|r| r[j].clone()).collect()
    }

    fn sum_column(&self) -> Vec<BigRational> {
        self.basis.iter().map(|r| r.iter().cloned().sum()).collect()
    }

    /// Basis of `X^⊥`.
    pub fn orthogonal_complement(&self) -> Vec<Vec<BigRational>> {
        nullspace(&self.basis, self.n() + 1)
    }

    /// The model as linear equations `⟨k, p⟩ = 0`, `k ∈ X^⊥`.
    pub fn to_spec(&self) -> Result<VarietySpec> {
        let gens: Vec<QPoly> =
            self.orthogonal_complement().iter().map(|k| QPoly::linear(k, BigRational::zero())).collect();
        VarietySpec::new(self.n(), gens.len(), gens)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .get("basis")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("expected {\"basis\": [[...], ...]}".into()))?;
        let basis = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("basis rows must be arrays".into()))?
                    .iter()
                    .map(rational_from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(basis)
    }

    pub fn to_json(&self) -> Value {
        json!({ "basis": self.basis.iter().map(|r| r.iter().map(rational_to_json).collect::<Vec<_>>()).collect::<Vec<_>>() })
    }
}

/// A matroid represented by vectors over the rationals.
#[derive(Clone, Debug)]
pub struct Matroid {
    vectors: Vec<Vec<BigRational>>,
}

/// Ground sets are bit masks.
pub const MAX_GROUND: usize = 63;

impl Matroid {
    pub fn from_vectors(vectors: Vec<Vec<BigRational>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.len() > MAX_GROUND {
            return invalid(format!("ground set larger than {MAX_GROUND}"));
        }
        if vectors.iter().any(|v| v.len() != dim) {
            return invalid("vectors of unequal length");
        }
        Ok(Matroid { vectors })
    }

    /// Uniform matroid `U(r, n)` realized by moment-curve vectors.
    pub fn uniform(r: usize, n: usize) -> Result<Self> {
        let vectors = (0..n)
            .map(|i| (0..r).map(|k| BigRational::from_integer(BigInt::from(i as i64 + 1).pow(k as u32))).collect())
            .collect();
        Self::from_vectors(vectors)
    }

    pub fn size(&self) -> usize {
        self.vectors.len()
    }

    pub fn ground(&self) -> u64 {
        if self.size() == 0 {
            0
        } else {
            u64::MAX >> (64 - self.size())
        }
    }

    pub fn rank_of(&self, mask: u64) -> usize {
        let mut rows: Vec<Vec<BigRational>> =
            (0..self.size()).filter(|&i| mask >> i & 1 == 1).map(|i| self.vectors[i].clone()).collect();
        rref(&mut rows).len()
    }

    pub fn rank(&self) -> usize {
        self.rank_of(self.ground())
    }

    pub fn loops(&self) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.vectors[i].iter().all(Zero::is_zero)).collect()
    }

    /// Minimal dependent sets, by brute force over subsets.
    pub fn circuits(&self) -> Vec<u64> {
        let mut rc = RankCache::new(self);
        let mut out: Vec<u64> = Vec::new();
        let mut masks: Vec<u64> = (1..=self.ground()).collect();
        masks.sort_by_key(|m| m.count_ones());
        for s in masks {
            if out.iter().any(|&c| c & s == c) {
                continue;
            }
            if rc.rank(s) < s.count_ones() as usize {
                out.push(s);
            }
        }
        out
    }
}

struct RankCache<'a> {
    m: &'a Matroid,
    memo: HashMap<u64, usize>,
}

impl<'a> RankCache<'a> {
    fn new(m: &'a Matroid) -> Self {
        RankCache { m, memo: HashMap::new() }
    }

    fn rank(&mut self, s: u64) -> usize {
        if let Some(&r) = self.memo.get(&s) {
            return r;
        }
        let r = self.m.rank_of(s);
        self.memo.insert(s, r);
        r
    }

    fn closure(&mut self, s: u64) -> u64 {
        let r = self.rank(s);
        let mut c = s;
        for e in 0..self.m.size() {
            if s >> e & 1 == 0 && self.rank(s | 1 << e) == r {
                c |= 1 << e;
            }
        }
        c
    }
}

/// The matroid of the `n+2` vectors obtained by restricting
/// `p_0, …, p_n, p_+` to `X` (basis columns and their sum).
pub fn arrangement_matroid(model: &LinearModel) -> Result<Matroid> {
    let n1 = model.n() + 1;
    if n1 + 1 > MAX_GROUND {
        return invalid("too many coordinates");
    }
    let mut v: Vec<Vec<BigRational>> = (0..n1).map(|j| model.column(j)).collect();
    v.push(model.sum_column());
    let m = Matroid::from_vectors(v)?;
    if m.rank() != model.dim() + 1 {
        return invalid("degenerate model: restricted hyperplanes do not span");
    }
    Ok(m)
}

/// Integer polynomial in `q`, ascending coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    pub coeffs: Vec<BigInt>,
}

impl CharPoly {
    fn trimmed(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        CharPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::trimmed(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn eval(&self, q: i64) -> BigInt {
        let q = BigInt::from(q);
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &q + c)
    }

    /// `χ(q) / (q − 1)`; fails if `q = 1` is not a root.
    pub fn reduced(&self) -> Result<CharPoly> {
        // synthetic division by (q − 1), highest coefficient first
        let n = self.coeffs.len();
        if n < 2 {
            return Err(Error::InexactDivision(self.to_string()));
        }
        let mut out = vec![BigInt::zero(); n - 1];
        let mut carry = BigInt::zero();
        for k in (1..n).rev() {
            carry = &carry + &self.coeffs[k];
            out[k - 1] = carry.clone();
        }
        if !(carry + &self.coeffs[0]).is_zero() {
            return Err(Error::InexactDivision(self.to_string()));
        }
        Ok(Self::trimmed(out))
    }

    fn sub(&self, o: &CharPoly) -> CharPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigInt::zero();
        Self::trimmed((0..n).map(|i| self.coeffs.get(i).unwrap_or(&z) - o.coeffs.get(i).unwrap_or(&z)).collect())
    }

    fn times_q_minus_one(&self) -> CharPoly {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= c;
        }
        Self::trimmed(out)
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let a = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let coef = if a.is_one() && k > 0 { String::new() } else if k > 0 { format!("{a}*") } else { a.to_string() };
            match k {
                0 => write!(f, "{coef}")?,
                1 => write!(f, "{coef}q")?,
                _ => write!(f, "{coef}q^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Characteristic polynomial by deletion–contraction. States are
/// (closure of the contracted set, remaining elements) and are memoized.
pub fn characteristic_polynomial(m: &Matroid) -> Result<CharPoly> {
    if !m.loops().is_empty() {
        return invalid("matroid has loops");
    }
    let mut rc = RankCache::new(m);
    let mut memo: HashMap<(u64, u64), CharPoly> = HashMap::new();
    Ok(chi(&mut rc, &mut memo, 0, m.ground()))
}

fn chi(rc: &mut RankCache, memo: &mut HashMap<(u64, u64), CharPoly>, flat: u64, rest: u64) -> CharPoly {
    if rest == 0 {
        return CharPoly::from_i64(&[1]);
    }
    if rest & flat != 0 {
        // an element in the closure of the contracted set is a loop
        return CharPoly::from_i64(&[0]);
    }
    if let Some(c) = memo.get(&(flat, rest)) {
        return c.clone();
    }
    let e = rest.trailing_zeros();
    let without = rest & !(1u64 << e);
    let r_flat = rc.rank(flat);
    let r_all = rc.rank(rest | flat) - r_flat;
    let r_without = rc.rank(without | flat) - r_flat;
    let out = if r_without < r_all {
        chi(rc, memo, flat, without).times_q_minus_one()
    } else {
        let contracted = rc.closure(flat | 1u64 << e);
        let del = chi(rc, memo, flat, without);
        let con = chi(rc, memo, contracted, without & !contracted);
        // elements of `without` swallowed by the new flat become loops
        let con = if without & contracted != 0 { CharPoly::from_i64(&[0]) } else { con };
        del.sub(&con)
    };
    memo.insert((flat, rest), out.clone());
    out
}

/// f-vector (`f[k]` = faces with `k` elements) of the broken circuit
/// complex for the given linear order on the ground set (`order[0]` is
/// smallest).
pub fn broken_circuit_fvector(m: &Matroid, order: &[usize]) -> Result<Vec<u64>> {
    let n = m.size();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return invalid("order must be a permutation of the ground set");
    }
    let mut pos = vec![0; n];
    for (k, &e) in order.iter().enumerate() {
        pos[e] = k;
    }
    let broken: Vec<u64> = m
        .circuits()
        .into_iter()
        .map(|c| {
            let min = (0..n).filter(|&i| c >> i & 1 == 1).min_by_key(|&i| pos[i]).unwrap_or(0);
            c & !(1u64 << min)
        })
        .collect();
    let mut f = vec![0u64; m.rank() + 1];
    dfs_faces(order, &broken, 0, 0, 0, &mut f);
    Ok(f)
}

fn dfs_faces(order: &[usize], broken: &[u64], start: usize, face: u64, size: usize, f: &mut Vec<u64>) {
    if size >= f.len() {
        f.resize(size + 1, 0);
    }
    f[size] += 1;
    for k in start..order.len() {
        let next = face | 1u64 << order[k];
        if broken.iter().any(|&b| b & next == b) {
            continue;
        }
        dfs_faces(order, broken, k + 1, next, size + 1, f);
    }
}

/// `h(z) = Σ_k f_k z^k (1−z)^{ρ−k}` for a complex of rank `ρ`.
pub fn h_from_f(f: &[u64], rank: usize) -> Vec<i64> {
    let mut h = vec![BigInt::zero(); rank + 1];
    for (k, &fk) in f.iter().enumerate().take(rank + 1) {
        // z^k (1−z)^{rank−k}
        let e = rank - k;
        let mut binom = BigInt::one();
        for j in 0..=e {
            let term = &binom * BigInt::from(fk);
            if j % 2 == 0 {
                h[k + j] += term;
            } else {
                h[k + j] -= term;
            }
            binom = binom * BigInt::from(e - j) / BigInt::from(j + 1);
        }
    }
    h.into_iter().map(|x| x.to_i64().unwrap_or(i64::MAX)).collect()
}

/// h-vector `(h_0, …, h_d)` of the broken circuit complex of a rank
/// `d+1` matroid. The complex is a cone, so `h_{d+1} = 0` and is dropped.
pub fn broken_circuit_hvector(m: &Matroid, order: &[usize]) -> Result<Vec<i64>> {
    let rank = m.rank();
    if rank == 0 {
        return invalid("rank zero matroid");
    }
    let f = broken_circuit_fvector(m, order)?;
    let mut h = h_from_f(&f, rank);
    if h.pop() != Some(0) && m.loops().is_empty() {
        return Err(Error::NoConvergence("broken circuit complex is not a cone".into()));
    }
    Ok(h)
}

/// `B_X(p,u) = (h_0 u^d + h_1 p u^{d−1} + ⋯ + h_d p^d)·p^{n−d}`.
pub fn linear_ml_bidegree(model: &LinearModel) -> Result<BinaryForm> {
    let m = arrangement_matroid(model)?;
    let order: Vec<usize> = (0..m.size()).collect();
    let h = broken_circuit_hvector(&m, &order)?;
    Ok(bidegree_from_h(&h, model.n()))
}

pub fn bidegree_from_h(h: &[i64], n: usize) -> BinaryForm {
    let d = h.len() - 1;
    let mut c = vec![0; n + 1];
    for i in 0..=d {
        c[i] = h[d - i];
    }
    BinaryForm::new(c)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatroidReport {
    pub charpoly: String,
    pub charpoly_coeffs: Vec<String>,
    pub fvector: Vec<u64>,
    pub hvector: Vec<i64>,
    pub bidegree: BinaryForm,
    pub ml_degree: i64,
}

pub fn matroid_report(model: &LinearModel) -> Result<MatroidReport> {
    let m = arrangement_matroid(model)?;
    let order: Vec<usize> = (0..m.size()).collect();
    let chi = characteristic_polynomial(&m)?;
    let f = broken_circuit_fvector(&m, &order)?;
    let h = broken_circuit_hvector(&m, &order)?;
    Ok(MatroidReport {
        charpoly: chi.to_string(),
        charpoly_coeffs: chi.coeffs.iter().map(ToString::to_string).collect(),
        fvector: f,
        ml_degree: *h.last().unwrap_or(&0),
        bidegree: bidegree_from_h(&h, model.n()),
        hvector: h,
    })
}

#[derive(Clone, Debug)]
pub struct LinearMle {
    pub solutions: SolutionSet,
    /// Some endpoint is a non-isolated solution off the arrangement: the
    /// data lie on a resonance locus.
    pub resonant: bool,
}

/// All critical points of the likelihood on a linear model, from the
/// Lagrange system with the equations of `X^⊥`.
pub fn mle_linear(model: &LinearModel, u: &[BigRational], cfg: &TrackerConfig) -> Result<LinearMle> {
    let spec = model.to_spec()?;
    let sys = build_lagrange_system(&spec, u, &mut seeded(cfg.seed))?.to_complex();
    let solutions = solve(&sys, cfg)?;
    let resonant = solutions.points.iter().any(|p| {
        p.class == SolutionClass::Singular && p.residual <= cfg.endpoint_tol && {
            let pn = p.p.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let s: crate::C64 = p.p.iter().sum();
            pn > 0.0 && p.p.iter().all(|z| z.norm() > 1e-6 * pn) && s.norm() > 1e-6 * pn
        }
    });
    Ok(LinearMle { solutions, resonant })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// χ(q) = Σ_S (−1)^{|S|} q^{r(E) − r(S)}.
    fn whitney(m: &Matroid) -> CharPoly {
        let r = m.rank();
        let mut c = vec![0i64; r + 1];
        for s in 0..=m.ground() {
            let sign = if s.count_ones() % 2 == 0 { 1 } else { -1 };
            c[r - m.rank_of(s)] += sign;
        }
        CharPoly::from_i64(&c)
    }

    fn two_plane_p4() -> LinearModel {
        LinearModel::from_ints(&[&[1, 0, 0, 2, 5], &[0, 1, 0, 3, -1], &[0, 0, 1, -4, 7]]).unwrap()
    }

    #[test]
    fn uniform_matroids() {
        let u36 = Matroid::uniform(3, 6).unwrap();
        let chi = characteristic_polynomial(&u36).unwrap();
        assert_eq!(chi, CharPoly::from_i64(&[-10, 15, -6, 1]));
        assert_eq!(chi, whitney(&u36));
        assert_eq!(chi.to_string(), "q^3 - 6*q^2 + 15*q - 10");
        assert_eq!(broken_circuit_hvector(&u36, &[0, 1, 2, 3, 4, 5]).unwrap(), vec![1, 3, 6]);
        let u23 = Matroid::uniform(2, 3).unwrap();
        assert_eq!(characteristic_polynomial(&u23).unwrap(), CharPoly::from_i64(&[2, -3, 1]));
        assert_eq!(broken_circuit_fvector(&u23, &[0, 1, 2]).unwrap(), vec![1, 3, 2]);
        assert_eq!(broken_circuit_hvector(&u23, &[0, 1, 2]).unwrap(), vec![1, 1]);
    }

    #[test]
    fn boolean_rank_two() {
        let q = |a: i64, b: i64| vec![BigRational::from_integer(a.into()), BigRational::from_integer(b.into())];
        let m = Matroid::from_vectors(vec![q(1, 0), q(0, 1)]).unwrap();
        assert_eq!(characteristic_polynomial(&m).unwrap(), CharPoly::from_i64(&[1, -2, 1]));
        assert_eq!(broken_circuit_hvector(&m, &[1, 0]).unwrap(), vec![1, 0]);
    }

    #[test]
    fn generic_two_plane() {
        let x = two_plane_p4();
        let m = arrangement_matroid(&x).unwrap();
        assert_eq!(m.size(), 6);
        assert_eq!(m.circuits().len(), 15);
        assert_eq!(linear_ml_bidegree(&x).unwrap(), BinaryForm::new(vec![6, 3, 1, 0, 0]));
        let chi = characteristic_polynomial(&m).unwrap();
        assert_eq!(chi.reduced().unwrap().eval(1), BigInt::from(6));
    }

    #[test]
    fn special_lines() {
        let line = LinearModel::from_ints(&[&[1, -1, 0], &[0, 0, 1]]).unwrap();
        let m = arrangement_matroid(&line).unwrap();
        assert!(m.circuits().iter().any(|c| c.count_ones() == 2));
        assert_eq!(matroid_report(&line).unwrap().ml_degree, 0);
        let c3 = LinearModel::from_ints(&[&[3, -1, 0], &[0, 0, 1]]).unwrap();
        assert_eq!(matroid_report(&c3).unwrap().ml_degree, 1);
        let generic = LinearModel::from_ints(&[&[1, 0, 2], &[0, 1, 3]]).unwrap();
        assert_eq!(linear_ml_bidegree(&generic).unwrap(), BinaryForm::new(vec![2, 1, 0]));
    }

    #[test]
    fn rejects_bad_models() {
        assert!(LinearModel::from_ints(&[&[1, 2], &[2, 4]]).is_err());
        assert!(LinearModel::from_ints(&[&[1, -1]]).is_err());
        let whole = LinearModel::from_ints(&[&[1, 0], &[0, 1]]).unwrap();
        assert!(whole.orthogonal_complement().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let x = two_plane_p4();
        assert_eq!(LinearModel::from_json(&x.to_json()).unwrap(), x);
    }
}
