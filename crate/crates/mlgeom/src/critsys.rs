//! Square polynomial systems whose isolated solutions off the arrangement
//! `H = {p_0 = 0} ∪ … ∪ {p_n = 0} ∪ {p_+ = 0}` are likelihood critical
//! points. Four formulations: Lagrange multipliers on implicit equations,
//! the plane-curve determinant, parametrized rank matrices (general and
//! symmetric), and torus coordinates for toric models.

use num::{BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::poly::{det, poly_from_json, poly_to_json, Coeff, QPoly, SparsePoly};
use crate::rng::{int_in, Rng64};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularPolicy {
    #[serde(rename = "filter")]
    FilterBySpecJacobian,
    #[serde(rename = "none")]
    None,
}

/// A model `X ⊂ P^n` given by homogeneous generators.
#[derive(Clone, Debug, PartialEq)]
pub struct VarietySpec {
    pub n: usize,
    pub codim: usize,
    pub generators: Vec<QPoly>,
    pub singular_policy: SingularPolicy,
}

#[derive(Serialize, Deserialize)]
struct VarietySpecJson {
    n: usize,
    codim: usize,
    generators: Vec<Value>,
    #[serde(rename = "singularPolicy", default = "default_policy")]
    singular_policy: SingularPolicy,
}

fn default_policy() -> SingularPolicy {
    SingularPolicy::FilterBySpecJacobian
}

impl VarietySpec {
    pub fn new(n: usize, codim: usize, generators: Vec<QPoly>) -> Result<Self> {
        let s = VarietySpec { n, codim, generators, singular_policy: SingularPolicy::FilterBySpecJacobian };
        s.validate()?;
        Ok(s)
    }

    /// Parse generators given in text form.
    pub fn from_text(n: usize, codim: usize, gens: &[&str]) -> Result<Self> {
        let g = gens
            .iter()
            .map(|s| crate::poly::parse_text(s, Some(n + 1)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, codim, g)
    }

    pub fn dim(&self) -> usize {
        self.n - self.codim
    }

    pub fn validate(&self) -> Result<()> {
        if self.codim > self.n {
            return invalid(format!("codimension {} exceeds ambient dimension {}", self.codim, self.n));
        }
        if self.codim > self.generators.len() {
            return invalid("codimension exceeds the number of generators");
        }
        for g in &self.generators {
            if g.nvars() != self.n + 1 {
                return Err(Error::DimensionMismatch { expected: self.n + 1, got: g.nvars() });
            }
            if g.is_zero() {
                return invalid("zero generator");
            }
            if !g.is_homogeneous() {
                return Err(Error::NonHomogeneous(g.to_string()));
            }
            for i in 0..=self.n {
                if g.terms().all(|(e, _)| e[i] > 0) {
                    return invalid(format!("generator {g} is divisible by p{i}"));
                }
            }
            if self.n > 0 && vanishes_on_sum_hyperplane(g) {
                return invalid(format!("generator {g} is divisible by p_+"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let j = VarietySpecJson {
            n: self.n,
            codim: self.codim,
            generators: self
                .generators
                .iter()
                .map(|g| serde_json::to_value(poly_to_json(g)).expect("serializable"))
                .collect(),
            singular_policy: self.singular_policy,
        };
        serde_json::to_value(j).expect("serializable")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let j: VarietySpecJson = serde_json::from_value(v.clone())?;
        let gens = j
            .generators
            .iter()
            .map(|g| poly_from_json(g, Some(j.n + 1)))
            .collect::<Result<Vec<_>>>()?;
        let s = VarietySpec { n: j.n, codim: j.codim, generators: gens, singular_policy: j.singular_policy };
        s.validate()?;
        Ok(s)
    }

    /// Append linear forms to the generators (each raises the codimension).
    pub fn with_hyperplanes(&self, hyperplanes: Vec<QPoly>) -> Result<Self> {
        let mut s = self.clone();
        s.codim += hyperplanes.len();
        s.generators.extend(hyperplanes);
        s.validate()?;
        Ok(s)
    }

    /// `X ∩ {p_k = 0}` as a model in `P^{n-1}`.
    pub fn restrict_coordinate(&self, k: usize) -> Result<Self> {
        if k > self.n || self.n == 0 {
            return invalid("coordinate index out of range");
        }
        let m = self.n;
        let subs: Vec<QPoly> = (0..=self.n)
            .map(|i| match i.cmp(&k) {
                std::cmp::Ordering::Less => QPoly::var(m, i),
                std::cmp::Ordering::Equal => QPoly::zero(m),
                std::cmp::Ordering::Greater => QPoly::var(m, i - 1),
            })
            .collect();
        let gens = self
            .generators
            .iter()
            .map(|g| g.compose(&subs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|g| !g.is_zero())
            .collect::<Vec<_>>();
        VarietySpec::new(self.n - 1, self.codim, gens).map(|mut s| {
            s.singular_policy = self.singular_policy;
            s
        })
    }
}

fn vanishes_on_sum_hyperplane(g: &QPoly) -> bool {
    let n1 = g.nvars();
    let m = n1 - 1;
    let mut subs: Vec<QPoly> = (0..m).map(|i| QPoly::var(m, i)).collect();
    let mut last = QPoly::zero(m);
    for i in 0..m {
        last = &last - &QPoly::var(m, i);
    }
    subs.push(last);
    g.compose(&subs).map(|h| h.is_zero()).unwrap_or(false)
}

/// What an unknown of a critical system stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    P(usize),
    Lambda(usize),
    Torus(usize),
    RankP1(usize, usize),
    RankR1(usize, usize),
    RankL1(usize, usize),
    RankLambda(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builder {
    Lagrange,
    PlaneCurve,
    Rank,
    SymmetricRank,
    Toric,
    Custom,
}

/// How to read the probability coordinates `p` off a solution vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Embedding {
    /// `p_i = x[idx[i]]`.
    Direct(Vec<usize>),
    /// Rank matrix from blocks, row-major `m×n`; with `drop_corner` the
    /// last entry is omitted.
    Rank { m: usize, n: usize, r: usize, drop_corner: bool },
    /// Symmetric rank matrix, upper triangle row-major, `p_ii = S_ii / 2`.
    SymRank { n: usize, r: usize },
    /// `p_i = c_i x^{a_i}`.
    Torus { exps: Vec<Vec<u32>>, c: Vec<C64> },
    /// The solution is the point itself.
    Identity,
}

impl Embedding {
    pub fn probabilities(&self, x: &[C64]) -> Vec<C64> {
        match self {
            Embedding::Direct(idx) => idx.iter().map(|&i| x[i]).collect(),
            Embedding::Identity => x.to_vec(),
            Embedding::Torus { exps, c } => exps
                .iter()
                .zip(c)
                .map(|(e, ci)| {
                    let mut v = *ci;
                    for (j, &k) in e.iter().enumerate() {
                        v *= x[j].powu(k);
                    }
                    v
                })
                .collect(),
            Embedding::Rank { m, n, r, drop_corner } => {
                let p = rank_matrix_numeric(*m, *n, *r, x);
                let mut v: Vec<C64> = p.into_iter().flatten().collect();
                if *drop_corner {
                    v.pop();
                }
                v
            }
            Embedding::SymRank { n, r } => {
                let s = sym_matrix_numeric(*n, *r, x);
                let mut out = Vec::new();
                for i in 0..*n {
                    for j in i..*n {
                        out.push(if i == j { s[i][i] * 0.5 } else { s[i][j] });
                    }
                }
                out
            }
        }
    }
}

/// Square system plus the bookkeeping needed to interpret its solutions.
#[derive(Clone, Debug)]
pub struct CriticalSystem<S> {
    pub nvars: usize,
    pub equations: Vec<SparsePoly<S>>,
    pub roles: Vec<Role>,
    /// The chart equation `Σ γ_i p_i − 1` (also contained in `equations`).
    pub chart: Option<SparsePoly<S>>,
    pub builder: Builder,
    pub groups: Vec<Vec<usize>>,
    pub embedding: Embedding,
    /// Data vector scaled to sum one, in `p` order.
    pub data: Vec<S>,
    /// Equations of the model in the `p` coordinates (for the singular
    /// filter and for discarding points off the model).
    pub membership: Vec<SparsePoly<S>>,
    /// Codimension of the model: the expected rank of the Jacobian of
    /// `membership` at smooth points.
    pub codim: usize,
    pub singular_filter: bool,
}

impl<S: Coeff> CriticalSystem<S> {
    pub fn is_square(&self) -> bool {
        self.equations.len() == self.nvars && self.roles.len() == self.nvars
    }

    pub fn to_complex(&self) -> CriticalSystem<C64> {
        let conv = |p: &SparsePoly<S>| p.map_coeffs(|c| c.to_c64());
        CriticalSystem {
            nvars: self.nvars,
            equations: self.equations.iter().map(conv).collect(),
            roles: self.roles.clone(),
            chart: self.chart.as_ref().map(conv),
            builder: self.builder,
            groups: self.groups.clone(),
            embedding: self.embedding.clone(),
            data: self.data.iter().map(|c| c.to_c64()).collect(),
            membership: self.membership.iter().map(conv).collect(),
            codim: self.codim,
            singular_filter: self.singular_filter,
        }
    }

    /// Evaluate every equation at a point (exact for rational input).
    pub fn eval(&self, x: &[S]) -> Result<Vec<S>> {
        self.equations.iter().map(|e| e.eval(x)).collect()
    }
}

fn normalize_data<S: Coeff>(u: &[S]) -> Result<Vec<S>> {
    let total = u.iter().cloned().fold(S::zero(), |a, b| a + b);
    if total.is_zero() {
        return invalid("data vector sums to zero");
    }
    Ok(u.iter().map(|x| x.clone() / total.clone()).collect())
}

/// Random positive rational chart coefficients with a unit first entry.
pub fn random_chart(rng: &mut Rng64, len: usize) -> Vec<BigRational> {
    (0..len)
        .map(|i| {
            if i == 0 {
                BigRational::one()
            } else {
                crate::rng::rational(int_in(rng, 1, 99), int_in(rng, 1, 99))
            }
        })
        .collect()
}

/// Replace an overdetermined set of generators by `codim` random
/// combinations of matching degree (lower-degree generators are lifted by
/// powers of random linear forms). Used when a model is cut out by more
/// equations than its codimension.
pub fn randomize_to_codim(spec: &VarietySpec, rng: &mut Rng64) -> Result<VarietySpec> {
    let r = spec.codim;
    if spec.generators.len() <= r {
        return Ok(spec.clone());
    }
    let nv = spec.n + 1;
    let mut gens = spec.generators.clone();
    gens.sort_by_key(|g| std::cmp::Reverse(g.degree().unwrap_or(0)));
    let mut out = Vec::with_capacity(r);
    for k in 0..r {
        let dk = gens[k].degree().unwrap_or(0);
        let mut acc = gens[k].clone();
        for g in gens.iter().skip(r) {
            let dj = g.degree().unwrap_or(0);
            let coeffs: Vec<BigRational> = (0..nv).map(|_| crate::rng::rational(int_in(rng, -99, 99), 1)).collect();
            let ell = QPoly::linear(&coeffs, BigRational::zero());
            let a = crate::rng::rational(int_in(rng, 1, 99), int_in(rng, 1, 99));
            let lifted = &ell.pow(dk - dj) * g;
            acc = &acc + &lifted.scale(&a);
        }
        out.push(acc);
    }
    let mut s = VarietySpec { n: spec.n, codim: r, generators: out, singular_policy: spec.singular_policy };
    s.validate()?;
    s.singular_policy = spec.singular_policy;
    Ok(s)
}

/// Lagrange formulation: unknowns `p_0..p_n, λ_0..λ_r`, equations
/// `u_i − λ_0 p_i − Σ_j λ_j p_i ∂g_j/∂p_i = 0`, `g_j = 0` and a chart.
pub fn build_lagrange_system<S: Coeff>(spec: &VarietySpec, u: &[S], rng: &mut Rng64) -> Result<CriticalSystem<S>> {
    spec.validate()?;
    if spec.generators.len() != spec.codim {
        return invalid("Lagrange system needs as many generators as the codimension; randomize first");
    }
    build_lagrange_with_membership(spec, &spec.generators, u, rng)
}

/// As [`build_lagrange_system`], but any spec is accepted: overdetermined
/// generators are randomized down to the codimension and the original
/// generators are kept for membership filtering.
pub fn build_lagrange_system_any<S: Coeff>(spec: &VarietySpec, u: &[S], rng: &mut Rng64) -> Result<CriticalSystem<S>> {
    spec.validate()?;
    let ci = randomize_to_codim(spec, rng)?;
    build_lagrange_with_membership(&ci, &spec.generators, u, rng)
}

fn build_lagrange_with_membership<S: Coeff>(
    spec: &VarietySpec,
    membership: &[QPoly],
    u: &[S],
    rng: &mut Rng64,
) -> Result<CriticalSystem<S>> {
    let n1 = spec.n + 1;
    if u.len() != n1 {
        return Err(Error::DimensionMismatch { expected: n1, got: u.len() });
    }
    let r = spec.generators.len();
    let nv = n1 + r + 1;
    let uh = normalize_data(u)?;
    let gens: Vec<SparsePoly<S>> = spec
        .generators
        .iter()
        .map(|g| g.normalized().map_coeffs(S::from_rational).embed(nv, &(0..n1).collect::<Vec<_>>()))
        .collect();
    let lam = |j: usize| SparsePoly::<S>::var(nv, n1 + j);
    let mut eqs = Vec::with_capacity(nv);
    for i in 0..n1 {
        let pi = SparsePoly::<S>::var(nv, i);
        let mut e = SparsePoly::constant(nv, uh[i].clone());
        e = &e - &(&lam(0) * &pi);
        for (j, g) in gens.iter().enumerate() {
            let t = &(&lam(j + 1) * &pi) * &g.diff(i);
            e = &e - &t;
        }
        eqs.push(e);
    }
    eqs.extend(gens.iter().cloned());
    let gamma = random_chart(rng, n1);
    let mut chart = SparsePoly::constant(nv, -S::one());
    for (i, g) in gamma.iter().enumerate() {
        chart.add_term(crate::poly::unit_exp(nv, i), S::from_rational(g));
    }
    eqs.push(chart.clone());
    let mut roles: Vec<Role> = (0..n1).map(Role::P).collect();
    roles.extend((0..=r).map(Role::Lambda));
    Ok(CriticalSystem {
        nvars: nv,
        equations: eqs,
        roles,
        chart: Some(chart),
        builder: Builder::Lagrange,
        groups: vec![(0..n1).collect(), (n1..nv).collect()],
        embedding: Embedding::Direct((0..n1).collect()),
        data: uh,
        membership: membership.iter().map(|g| g.normalized().map_coeffs(S::from_rational)).collect(),
        codim: spec.codim,
        singular_filter: spec.singular_policy == SingularPolicy::FilterBySpecJacobian,
    })
}

/// Plane curve `f(p_0,p_1,p_2) = 0` together with
/// `det[(1,1,1); (u_i/p_i); (∂f/∂p_i)] = 0` (second row multiplied by
/// `p_0p_1p_2`) and a chart.
pub fn build_plane_curve_system<S: Coeff>(f: &QPoly, u: &[S], rng: &mut Rng64) -> Result<CriticalSystem<S>> {
    if f.nvars() != 3 {
        return invalid("plane curve must be a polynomial in three variables");
    }
    if !f.is_homogeneous() || f.is_zero() {
        return Err(Error::NonHomogeneous(f.to_string()));
    }
    if u.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: u.len() });
    }
    let uh = normalize_data(u)?;
    let fs = f.normalized().map_coeffs(S::from_rational);
    let p = |i: usize| SparsePoly::<S>::var(3, i);
    let one = SparsePoly::<S>::one(3);
    let row2 = vec![
        (&p(1) * &p(2)).scale(&uh[0]),
        (&p(0) * &p(2)).scale(&uh[1]),
        (&p(0) * &p(1)).scale(&uh[2]),
    ];
    let row3: Vec<SparsePoly<S>> = (0..3).map(|i| fs.diff(i)).collect();
    let d = det(&[vec![one.clone(), one.clone(), one], row2, row3]);
    let gamma = random_chart(rng, 3);
    let mut chart = SparsePoly::constant(3, -S::one());
    for (i, g) in gamma.iter().enumerate() {
        chart.add_term(crate::poly::unit_exp(3, i), S::from_rational(g));
    }
    Ok(CriticalSystem {
        nvars: 3,
        equations: vec![fs.clone(), d, chart.clone()],
        roles: (0..3).map(Role::P).collect(),
        chart: Some(chart),
        builder: Builder::PlaneCurve,
        groups: vec![(0..3).collect()],
        embedding: Embedding::Direct(vec![0, 1, 2]),
        data: uh,
        membership: vec![fs],
        codim: 1,
        singular_filter: true,
    })
}

type PMat<S> = Vec<Vec<SparsePoly<S>>>;

fn pmat_mul<S: Coeff>(a: &PMat<S>, b: &PMat<S>, nv: usize) -> PMat<S> {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let cols = if inner == 0 && rows > 0 && !a[0].is_empty() { 0 } else { cols };
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let mut s = SparsePoly::zero(nv);
                    for k in 0..inner {
                        s = &s + &(&a[i][k] * &b[k][j]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Unknown offsets for the rank parametrization:
/// `P1 (r×r) | R1 (r×(n−r)) | L1 ((m−r)×r) | Λ ((n−r)×(m−r))`.
#[derive(Clone, Copy, Debug)]
pub struct RankLayout {
    pub m: usize,
    pub n: usize,
    pub r: usize,
}

impl RankLayout {
    pub fn p1(&self, i: usize, j: usize) -> usize {
        i * self.r + j
    }
    pub fn r1(&self, i: usize, j: usize) -> usize {
        self.r * self.r + i * (self.n - self.r) + j
    }
    pub fn l1(&self, i: usize, j: usize) -> usize {
        self.r * self.n + i * self.r + j
    }
    pub fn lam(&self, i: usize, j: usize) -> usize {
        self.r * self.n + (self.m - self.r) * self.r + i * (self.m - self.r) + j
    }
    pub fn nvars(&self) -> usize {
        self.m * self.n
    }
}

/// Assemble `P = (P1, P1R1; L1P1, L1P1R1)` numerically from a solution.
pub fn rank_matrix_numeric(m: usize, n: usize, r: usize, x: &[C64]) -> Vec<Vec<C64>> {
    let lay = RankLayout { m, n, r };
    let z = C64::new(0.0, 0.0);
    let mut b = vec![vec![z; n]; r]; // (P1, P1 R1)
    for i in 0..r {
        for j in 0..n {
            b[i][j] = if j < r {
                x[lay.p1(i, j)]
            } else {
                (0..r).map(|k| x[lay.p1(i, k)] * x[lay.r1(k, j - r)]).sum()
            };
        }
    }
    let mut p = vec![vec![z; n]; m];
    for i in 0..m {
        for j in 0..n {
            p[i][j] = if i < r { b[i][j] } else { (0..r).map(|k| x[lay.l1(i - r, k)] * b[k][j]).sum() };
        }
    }
    p
}

/// Parametrized rank-`r` critical equations `P ⋆ (RΛL)^T + u_{++}P = U`
/// with `U` scaled to `u_{++} = 1`.
pub fn build_rank_system<S: Coeff>(m: usize, n: usize, r: usize, u: &[Vec<S>]) -> Result<CriticalSystem<S>> {
    if r == 0 || r > m.min(n) {
        return invalid(format!("rank {r} out of range for {m}×{n} matrices"));
    }
    if u.len() != m || u.iter().any(|row| row.len() != n) {
        return invalid("data matrix has the wrong shape");
    }
    let flat: Vec<S> = u.iter().flatten().cloned().collect();
    let uh = normalize_data(&flat)?;
    let lay = RankLayout { m, n, r };
    let nv = lay.nvars();
    let v = |k: usize| SparsePoly::<S>::var(nv, k);
    let zero = || SparsePoly::<S>::zero(nv);
    let p1: PMat<S> = (0..r).map(|i| (0..r).map(|j| v(lay.p1(i, j))).collect()).collect();
    let r1: PMat<S> = (0..r).map(|i| (0..n - r).map(|j| v(lay.r1(i, j))).collect()).collect();
    let l1: PMat<S> = (0..m - r).map(|i| (0..r).map(|j| v(lay.l1(i, j))).collect()).collect();
    let lam: PMat<S> = (0..n - r).map(|i| (0..m - r).map(|j| v(lay.lam(i, j))).collect()).collect();
    let p1r1 = if n > r { pmat_mul(&p1, &r1, nv) } else { vec![vec![]; r] };
    let top: PMat<S> = (0..r).map(|i| p1[i].iter().chain(p1r1[i].iter()).cloned().collect()).collect();
    let bottom = if m > r { pmat_mul(&l1, &top, nv) } else { vec![] };
    let pm: PMat<S> = top.into_iter().chain(bottom).collect();
    // R = (R1; −I) is n×(n−r), L = (L1, −I) is (m−r)×m.
    let rmat: PMat<S> = (0..n)
        .map(|i| {
            (0..n - r)
                .map(|j| if i < r { r1[i][j].clone() } else if i - r == j { &zero() - &SparsePoly::one(nv) } else { zero() })
                .collect()
        })
        .collect();
    let lmat: PMat<S> = (0..m - r)
        .map(|i| {
            (0..m)
                .map(|j| if j < r { l1[i][j].clone() } else if j - r == i { &zero() - &SparsePoly::one(nv) } else { zero() })
                .collect()
        })
        .collect();
    let rl = if n > r && m > r { pmat_mul(&pmat_mul(&rmat, &lam, nv), &lmat, nv) } else { vec![vec![zero(); m]; n] };
    let mut eqs = Vec::with_capacity(nv);
    for i in 0..m {
        for j in 0..n {
            let mij = &rl[j][i];
            let e = &(&pm[i][j] * mij) + &pm[i][j];
            eqs.push(&e - &SparsePoly::constant(nv, uh[i * n + j].clone()));
        }
    }
    let mut roles = Vec::with_capacity(nv);
    let mut groups = vec![Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for i in 0..r {
        for j in 0..r {
            roles.push(Role::RankP1(i, j));
            groups[0].push(lay.p1(i, j));
        }
    }
    for i in 0..r {
        for j in 0..n - r {
            roles.push(Role::RankR1(i, j));
            groups[1].push(lay.r1(i, j));
        }
    }
    for i in 0..m - r {
        for j in 0..r {
            roles.push(Role::RankL1(i, j));
            groups[2].push(lay.l1(i, j));
        }
    }
    for i in 0..n - r {
        for j in 0..m - r {
            roles.push(Role::RankLambda(i, j));
            groups[3].push(lay.lam(i, j));
        }
    }
    groups.retain(|g| !g.is_empty());
    Ok(CriticalSystem {
        nvars: nv,
        equations: eqs,
        roles,
        chart: None,
        builder: Builder::Rank,
        groups,
        embedding: Embedding::Rank { m, n, r, drop_corner: false },
        data: uh,
        membership: Vec::new(),
        codim: 0,
        singular_filter: false,
    })
}

/// Rank system for `X ∩ {p_{m−1,n−1} = 0}` in the coordinates other than
/// the last entry: the last equation is replaced by `p_{m−1,n−1} = 0`.
pub fn build_rank_corner_slice_system<S: Coeff>(m: usize, n: usize, r: usize, u: &[Vec<S>]) -> Result<CriticalSystem<S>> {
    if r >= m.min(n) {
        return invalid("corner slice needs r < min(m, n)");
    }
    let mut u2: Vec<Vec<S>> = u.to_vec();
    u2[m - 1][n - 1] = S::zero();
    let mut sys = build_rank_system(m, n, r, &u2)?;
    let lay = RankLayout { m, n, r };
    let nv = lay.nvars();
    let v = |k: usize| SparsePoly::<S>::var(nv, k);
    let mut corner = SparsePoly::zero(nv);
    for a in 0..r {
        for b in 0..r {
            corner = &corner + &(&(&v(lay.l1(m - r - 1, a)) * &v(lay.p1(a, b))) * &v(lay.r1(b, n - r - 1)));
        }
    }
    let last = sys.equations.len() - 1;
    sys.equations[last] = corner;
    sys.embedding = Embedding::Rank { m, n, r, drop_corner: true };
    sys.data.pop();
    Ok(sys)
}

/// Unknown offsets for the symmetric parametrization
/// `S = (I; R1ᵀ) S1 (I, R1)`, normal space `N Λ Nᵀ` with `N = (R1; −I)`:
/// `S1` upper triangle `| R1 (r×(n−r)) | Λ` upper triangle.
#[derive(Clone, Copy, Debug)]
pub struct SymLayout {
    pub n: usize,
    pub r: usize,
}

impl SymLayout {
    pub fn s1(&self, i: usize, j: usize) -> usize {
        tri_index(self.r, i, j)
    }
    pub fn r1(&self, i: usize, j: usize) -> usize {
        self.r * (self.r + 1) / 2 + i * (self.n - self.r) + j
    }
    pub fn lam(&self, i: usize, j: usize) -> usize {
        self.r * (self.r + 1) / 2 + self.r * (self.n - self.r) + tri_index(self.n - self.r, i, j)
    }
    pub fn nvars(&self) -> usize {
        self.n * (self.n + 1) / 2
    }
}

/// Position of `(i, j)` (unordered) in the row-major upper triangle of a
/// `k×k` matrix.
pub fn tri_index(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * k - i * (i + 1) / 2 + j
}

pub fn sym_matrix_numeric(n: usize, r: usize, x: &[C64]) -> Vec<Vec<C64>> {
    let lay = SymLayout { n, r };
    let z = C64::new(0.0, 0.0);
    // B = (I, R1) is r×n; S = Bᵀ S1 B.
    let bmat = |k: usize, j: usize| -> C64 {
        if j < r {
            if j == k {
                C64::new(1.0, 0.0)
            } else {
                z
            }
        } else {
            x[lay.r1(k, j - r)]
        }
    };
    let mut s1b = vec![vec![z; n]; r];
    for a in 0..r {
        for j in 0..n {
            s1b[a][j] = (0..r).map(|b| x[lay.s1(a, b)] * bmat(b, j)).sum();
        }
    }
    let mut s = vec![vec![z; n]; n];
    for i in 0..n {
        for j in 0..n {
            s[i][j] = (0..r).map(|a| bmat(a, i) * s1b[a][j]).sum();
        }
    }
    s
}

/// Symmetric rank-`r` critical equations. Coordinates are `p_ij` for
/// `i ≤ j` with the model matrix having `2p_ii` on the diagonal; the data
/// matrix `u` is symmetric and only its upper triangle is read.
pub fn build_symmetric_rank_system<S: Coeff>(n: usize, r: usize, u: &[Vec<S>]) -> Result<CriticalSystem<S>> {
    if r == 0 || r > n {
        return invalid(format!("rank {r} out of range for symmetric {n}×{n} matrices"));
    }
    if u.len() != n || u.iter().any(|row| row.len() != n) {
        return invalid("data matrix has the wrong shape");
    }
    for i in 0..n {
        for j in 0..i {
            if u[i][j] != u[j][i] {
                return invalid("data matrix is not symmetric");
            }
        }
    }
    let mut flat = Vec::new();
    for i in 0..n {
        for j in i..n {
            flat.push(u[i][j].clone());
        }
    }
    let uh = normalize_data(&flat)?;
    let lay = SymLayout { n, r };
    let nv = lay.nvars();
    let v = |k: usize| SparsePoly::<S>::var(nv, k);
    let zero = || SparsePoly::<S>::zero(nv);
    let one = || SparsePoly::<S>::one(nv);
    let s1: PMat<S> = (0..r).map(|i| (0..r).map(|j| v(lay.s1(i, j))).collect()).collect();
    let bmat: PMat<S> = (0..r)
        .map(|k| (0..n).map(|j| if j < r { if j == k { one() } else { zero() } } else { v(lay.r1(k, j - r)) }).collect())
        .collect();
    let bt: PMat<S> = (0..n).map(|i| (0..r).map(|k| bmat[k][i].clone()).collect()).collect();
    let smat = pmat_mul(&pmat_mul(&bt, &s1, nv), &bmat, nv);
    let nr = n - r;
    let nmat: PMat<S> = (0..n)
        .map(|i| (0..nr).map(|j| if i < r { v(lay.r1(i, j)) } else if i - r == j { &zero() - &one() } else { zero() }).collect())
        .collect();
    let lam: PMat<S> = (0..nr).map(|i| (0..nr).map(|j| v(lay.lam(i, j))).collect()).collect();
    let kmat = if nr > 0 {
        let nt: PMat<S> = (0..nr).map(|i| (0..n).map(|k| nmat[k][i].clone()).collect()).collect();
        pmat_mul(&pmat_mul(&nmat, &lam, nv), &nt, nv)
    } else {
        vec![vec![zero(); n]; n]
    };
    let half = S::one() / S::from_i64(2);
    let mut eqs = Vec::with_capacity(nv);
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            let pij = if i == j { smat[i][i].scale(&half) } else { smat[i][j].clone() };
            let e = &(&pij * &kmat[i][j]) + &pij;
            eqs.push(&e - &SparsePoly::constant(nv, uh[idx].clone()));
            idx += 1;
        }
    }
    let mut roles = Vec::with_capacity(nv);
    let mut groups = vec![Vec::new(), Vec::new(), Vec::new()];
    for i in 0..r {
        for j in i..r {
            roles.push(Role::RankP1(i, j));
            groups[0].push(lay.s1(i, j));
        }
    }
    for i in 0..r {
        for j in 0..nr {
            roles.push(Role::RankR1(i, j));
            groups[1].push(lay.r1(i, j));
        }
    }
    for i in 0..nr {
        for j in i..nr {
            roles.push(Role::RankLambda(i, j));
            groups[2].push(lay.lam(i, j));
        }
    }
    groups.retain(|g| !g.is_empty());
    Ok(CriticalSystem {
        nvars: nv,
        equations: eqs,
        roles,
        chart: None,
        builder: Builder::SymmetricRank,
        groups,
        embedding: Embedding::SymRank { n, r },
        data: uh,
        membership: Vec::new(),
        codim: 0,
        singular_filter: false,
    })
}

/// Integer rank of a small integer matrix (exact, via rationals).
pub fn integer_rank(a: &[Vec<i64>]) -> usize {
    let rows: Vec<Vec<BigRational>> =
        a.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
    rational_rank(rows)
}

pub fn rational_rank(mut m: Vec<Vec<BigRational>>) -> usize {
    linalg::rref(&mut m).len()
}

/// Toric critical equations in torus coordinates:
/// `f(x)·b_j − u_+·Σ_i c_i ã_ij x^{ã_i} = 0`, `f = Σ c_i x^{ã_i}`, `b = Ãu`.
/// `a` is `(d+1)×(n+1)` with last row all ones.
pub fn build_toric_system<S: Coeff>(a: &[Vec<i64>], c: &[S], u: &[S]) -> Result<CriticalSystem<S>> {
    let rows = a.len();
    if rows == 0 {
        return invalid("empty matrix");
    }
    let cols = a[0].len();
    if a.iter().any(|r| r.len() != cols) {
        return invalid("ragged matrix");
    }
    if a[rows - 1].iter().any(|&x| x != 1) {
        return invalid("last row of A must be all ones");
    }
    if c.len() != cols || u.len() != cols {
        return Err(Error::DimensionMismatch { expected: cols, got: c.len().min(u.len()) });
    }
    if c.iter().any(|x| x.is_zero()) {
        return invalid("toric coefficients must be nonzero");
    }
    if integer_rank(a) < rows {
        return invalid("rank(A) < d+1; remove redundant rows");
    }
    let d = rows - 1;
    let uh = normalize_data(u)?;
    // shift exponents to be nonnegative (multiplies f by a monomial)
    let exps: Vec<Vec<u32>> = (0..cols)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mn = a[j].iter().copied().min().unwrap_or(0);
                    (a[j][i] - mn) as u32
                })
                .collect()
        })
        .collect();
    let mut f = SparsePoly::<S>::zero(d);
    for i in 0..cols {
        f.add_term(exps[i].clone(), c[i].clone());
    }
    let mut eqs = Vec::with_capacity(d);
    for j in 0..d {
        let bj = (0..cols).fold(S::zero(), |acc, i| acc + S::from_i64(exps[i][j] as i64) * uh[i].clone());
        let mut xdf = SparsePoly::<S>::zero(d);
        for i in 0..cols {
            xdf.add_term(exps[i].clone(), c[i].clone() * S::from_i64(exps[i][j] as i64));
        }
        eqs.push(&f.scale(&bj) - &xdf);
    }
    Ok(CriticalSystem {
        nvars: d,
        equations: eqs,
        roles: (0..d).map(Role::Torus).collect(),
        chart: None,
        builder: Builder::Toric,
        groups: vec![(0..d).collect()],
        embedding: Embedding::Torus { exps, c: c.iter().map(|x| x.to_c64()).collect() },
        data: uh,
        membership: Vec::new(),
        codim: 0,
        singular_filter: false,
    })
}

/// Relative distance of the dlog vector `(u_i/p_i − u_+/p_+)` from the span
/// of the generator gradients at `p` (zero exactly at critical points).
pub fn dlog_residual(generators: &[QPoly], u: &[f64], p: &[C64]) -> f64 {
    let up: f64 = u.iter().sum();
    let pp: C64 = p.iter().sum();
    let z: Vec<C64> = u.iter().zip(p).map(|(&ui, &pi)| C64::new(ui, 0.0) / pi - C64::new(up, 0.0) / pp).collect();
    let rows: Vec<Vec<C64>> = generators
        .iter()
        .map(|g| {
            let gc = g.to_complex();
            (0..p.len()).map(|i| gc.diff(i).eval(p).unwrap_or(C64::new(f64::NAN, 0.0))).collect()
        })
        .collect();
    linalg::row_space_residual(&rows, &z)
}

pub fn signed_max(q: &[BigRational]) -> BigRational {
    q.iter().map(|x| x.abs()).max().unwrap_or_else(BigRational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_text;
    use crate::rng::{rational, seeded};

    fn q(n: i64) -> BigRational {
        rational(n, 1)
    }

    #[test]
    fn spec_validation() {
        assert!(VarietySpec::from_text(2, 1, &["4*p0*p2 - p1^2"]).is_ok());
        assert!(matches!(VarietySpec::from_text(2, 1, &["p0^2 - p1"]), Err(Error::NonHomogeneous(_))));
        assert!(VarietySpec::from_text(2, 1, &["p0*p1"]).is_err());
        assert!(VarietySpec::from_text(2, 1, &["p0^2 + p0*p1 + p0*p2"]).is_err());
        assert!(VarietySpec::from_text(1, 2, &["p0 - 2*p1", "p0"]).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let s = VarietySpec::from_text(5, 1, &["p0*p5 - p1*p4 + p2*p3"]).unwrap();
        let back = VarietySpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let v: Value = serde_json::from_str(r#"{"n":2,"codim":1,"generators":["4*p0*p2 - p1^2"],"singularPolicy":"none"}"#).unwrap();
        let t = VarietySpec::from_json(&v).unwrap();
        assert_eq!(t.singular_policy, SingularPolicy::None);
    }

    #[test]
    fn lagrange_hardy_weinberg_exact_solution() {
        let spec = VarietySpec::from_text(2, 1, &["4*p0*p2 - p1^2"]).unwrap();
        let u = vec![q(1), q(2), q(1)];
        let sys = build_lagrange_system(&spec, &u, &mut seeded(1)).unwrap();
        assert!(sys.is_square());
        // p = (1/4,1/2,1/4) scaled into the chart, λ0 = 1/(p-scale), λ1 = 0
        let gamma: Vec<BigRational> = (0..3).map(|i| sys.chart.as_ref().unwrap().coeff(&crate::poly::unit_exp(5, i))).collect();
        let base = [rational(1, 4), rational(1, 2), rational(1, 4)];
        let s: BigRational = gamma.iter().zip(&base).map(|(g, b)| g * b).sum();
        let p: Vec<BigRational> = base.iter().map(|b| b / &s).collect();
        let x = vec![p[0].clone(), p[1].clone(), p[2].clone(), s.clone(), q(0)];
        let vals = sys.eval(&x).unwrap();
        assert!(vals.iter().all(|v| v.is_zero()), "{vals:?}");
    }

    #[test]
    fn lagrange_rejects_overdetermined() {
        let spec = VarietySpec::from_text(3, 2, &["p0*p2 - p1^2", "p1*p3 - p2^2", "p0*p3 - p1*p2"]).unwrap();
        let u = vec![q(1); 4];
        assert!(build_lagrange_system(&spec, &u, &mut seeded(1)).is_err());
        let sys = build_lagrange_system_any(&spec, &u, &mut seeded(1)).unwrap();
        assert!(sys.is_square());
        assert_eq!(sys.membership.len(), 3);
    }

    #[test]
    fn plane_curve_system_degrees() {
        let f = parse_text("p0^3 + 2*p1^3 - 3*p2^3 + p0*p1*p2", Some(3)).unwrap();
        let sys = build_plane_curve_system(&f, &[q(3), q(5), q(7)], &mut seeded(2)).unwrap();
        assert_eq!(sys.equations[1].degree(), Some(4));
        assert!(sys.equations[1].is_homogeneous());
    }

    #[test]
    fn rank_system_shapes_and_rank_one_solution() {
        let u = vec![vec![q(1), q(2)], vec![q(3), q(4)]];
        let sys = build_rank_system(2, 2, 1, &u).unwrap();
        assert!(sys.is_square());
        assert_eq!(sys.groups.len(), 4);
        // MLE: p = rowsum*colsum/u++^2 with rows (3,7), cols (4,6), u++ = 10
        let p11 = rational(12, 100);
        let r1 = rational(18, 12);
        let l1 = rational(28, 12);
        // Λ from equation (1,1): p11 (r1 λ l1) + p11 = 1/10
        let lam = (rational(1, 10) / &p11 - q(1)) / (&r1 * &l1);
        let vals = sys.eval(&[p11, r1, l1, lam]).unwrap();
        assert!(vals.iter().all(|v| v.is_zero()), "{vals:?}");
        assert!(build_rank_system(2, 2, 3, &u).is_err());
    }

    #[test]
    fn full_rank_system_is_linear() {
        let u = vec![vec![q(1), q(2), q(3)], vec![q(4), q(5), q(6)], vec![q(7), q(8), q(9)]];
        let sys = build_rank_system(3, 3, 3, &u).unwrap();
        assert!(sys.equations.iter().all(|e| e.degree() == Some(1)));
    }

    #[test]
    fn symmetric_layout_is_a_bijection() {
        for n in 1..5 {
            for r in 1..=n {
                let lay = SymLayout { n, r };
                let mut seen = vec![false; lay.nvars()];
                for i in 0..r {
                    for j in i..r {
                        seen[lay.s1(i, j)] = true;
                    }
                    for j in 0..n - r {
                        seen[lay.r1(i, j)] = true;
                    }
                }
                for i in 0..n - r {
                    for j in i..n - r {
                        seen[lay.lam(i, j)] = true;
                    }
                }
                assert!(seen.iter().all(|&b| b), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn symmetric_full_rank_is_empirical() {
        let u = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let sys = build_symmetric_rank_system(2, 2, &u).unwrap();
        // S1 = S with p11 = 2/6, p12 = 1/6, p22 = 3/6: S = [[4/6,1/6],[1/6,6/6]]
        let x = vec![rational(4, 6), rational(1, 6), q(1)];
        assert!(sys.eval(&x).unwrap().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn toric_rejects_bad_matrices() {
        let a = vec![vec![0, 1, 2], vec![2, 1, 0], vec![1, 1, 1]];
        let c = vec![q(1), q(2), q(1)];
        assert!(build_toric_system(&a, &c, &c).is_err());
        let a2 = vec![vec![0, 1, 2], vec![1, 1, 1]];
        let sys = build_toric_system(&a2, &c, &[q(1), q(2), q(1)]).unwrap();
        assert_eq!(sys.nvars, 1);
        // x = 1 gives p = (1,2,1)/4: f(1)·b − u_+·x f'(1) with b = 1
        let v = sys.eval(&[q(1)]).unwrap();
        assert!(v[0].is_zero());
    }

    #[test]
    fn restriction_of_quadric() {
        let s = VarietySpec::from_text(3, 1, &["p0^2 + p1^2 - 2*p2^2 + 3*p3^2 + p0*p3"]).unwrap();
        let r = s.restrict_coordinate(3).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(r.generators[0], parse_text("p0^2 + p1^2 - 2*p2^2", Some(3)).unwrap());
    }
}
