//! Homotopy continuation: start systems, path tracking, endpoint
//! refinement, clustering and classification.

pub mod eval;
mod path;
pub mod start;

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critsys::CriticalSystem;
use crate::error::{invalid, Error, Result};
use crate::linalg::{condition_number, lu_solve, singular_values, to_dmatrix};
use crate::poly::CPoly;
use crate::rng::{seeded, unit_complex};
use crate::C64;

pub use eval::{Compiled, Evaluate};
pub use path::{norm, Homotopy, PathEnd, PathStatus};
pub use start::{bezout_number, group_degrees, total_degree_count, StartSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartKind {
    #[serde(rename = "td")]
    TotalDegree,
    #[serde(rename = "mhom")]
    Multihomogeneous,
}

#[derive(Clone, Debug)]
pub struct TrackerConfig {
    pub seed: u64,
    /// Fixed γ; when `None` it is drawn on the unit circle from `seed`.
    pub gamma: Option<C64>,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub corrector_tol: f64,
    pub endpoint_tol: f64,
    pub max_newton_iters: usize,
    /// Largest first corrector update accepted after a predictor step,
    /// relative to `1 + ‖x‖`.
    pub max_correction: f64,
    pub boundary_tau: f64,
    pub singular_cond_threshold: f64,
    pub start_kind: StartKind,
    /// Cap on the number of total-degree paths.
    pub max_paths: u128,
    pub divergence_bound: f64,
    pub max_steps: usize,
    /// Relative radius for merging endpoints into one cluster.
    pub cluster_tol: f64,
    /// Rounds of re-tracking paths that landed on an already claimed
    /// regular endpoint.
    pub retrack_rounds: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            seed: 1,
            gamma: None,
            initial_step: 0.02,
            min_step: 1e-14,
            max_step: 0.1,
            corrector_tol: 1e-9,
            endpoint_tol: 1e-8,
            max_newton_iters: 12,
            max_correction: 0.1,
            boundary_tau: 1e-8,
            singular_cond_threshold: 1e10,
            start_kind: StartKind::Multihomogeneous,
            max_paths: 200_000,
            divergence_bound: 1e8,
            max_steps: 50_000,
            cluster_tol: 1e-6,
            retrack_rounds: 2,
        }
    }
}

impl TrackerConfig {
    pub fn with_seed(seed: u64) -> Self {
        TrackerConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_step > 0.0 && self.min_step <= self.initial_step && self.initial_step <= self.max_step && self.max_step < 1.0) {
            return invalid("step sizes must satisfy 0 < min ≤ initial ≤ max < 1");
        }
        let tols = [self.corrector_tol, self.endpoint_tol, self.boundary_tau, self.singular_cond_threshold, self.cluster_tol];
        if tols.iter().any(|&t| !(t > 0.0)) {
            return invalid("tolerances must be positive");
        }
        Ok(())
    }

    pub fn gamma(&self) -> C64 {
        self.gamma.unwrap_or_else(|| unit_complex(&mut seeded(self.seed ^ 0x6a09_e667)))
    }

    fn tightened(&self) -> Self {
        TrackerConfig {
            max_step: self.max_step / 8.0,
            initial_step: (self.initial_step / 8.0).max(self.min_step),
            max_correction: self.max_correction / 10.0,
            max_steps: self.max_steps * 4,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SolutionClass {
    #[serde(rename = "offH_regular")]
    OffHRegular,
    #[serde(rename = "onH")]
    OnH,
    #[serde(rename = "singular")]
    Singular,
    /// Regular solution of the system that does not lie on the model
    /// (only possible after randomizing overdetermined equations).
    #[serde(rename = "extraneous")]
    Extraneous,
    #[serde(rename = "atInfinity")]
    AtInfinity,
    #[serde(rename = "failed")]
    Failed,
}

#[derive(Clone, Debug)]
pub struct SolutionPoint {
    pub x: Vec<C64>,
    /// Probability coordinates read off `x` (empty for diverged paths).
    pub p: Vec<C64>,
    pub residual: f64,
    pub condition: f64,
    pub class: SolutionClass,
    pub cluster: usize,
    pub path: usize,
}

impl SolutionPoint {
    pub fn is_real(&self, tol: f64) -> bool {
        let s = 1.0 + norm(&self.x);
        self.x.iter().all(|z| z.im.abs() <= tol * s)
    }

    /// `p` scaled so its coordinates sum to one.
    pub fn normalized_p(&self) -> Vec<C64> {
        let s: C64 = self.p.iter().sum();
        self.p.iter().map(|z| z / s).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStats {
    pub tracked: usize,
    pub converged: usize,
    pub failed: usize,
    pub retracked: usize,
}

#[derive(Clone, Debug)]
pub struct SolutionSet {
    pub points: Vec<SolutionPoint>,
    pub stats: PathStats,
    pub cluster_tol: f64,
}

impl SolutionSet {
    /// One representative per cluster of the given class.
    pub fn distinct(&self, class: SolutionClass) -> Vec<&SolutionPoint> {
        let mut seen = std::collections::HashSet::new();
        self.points.iter().filter(|p| p.class == class && seen.insert(p.cluster)).collect()
    }

    pub fn count(&self, class: SolutionClass) -> usize {
        self.distinct(class).len()
    }

    pub fn regular(&self) -> Vec<&SolutionPoint> {
        self.distinct(SolutionClass::OffHRegular)
    }

    /// One representative per distinct point `p` (scaled to sum one) of
    /// the given class. Differs from [`SolutionSet::distinct`] when the
    /// map from unknowns to `p` is not injective, as for toric
    /// parametrizations of lattice index above one.
    pub fn distinct_p(&self, class: SolutionClass) -> Vec<&SolutionPoint> {
        let mut reps: Vec<(&SolutionPoint, Vec<C64>)> = Vec::new();
        for pt in self.distinct(class) {
            let q = pt.normalized_p();
            let r = self.cluster_tol * (1.0 + norm(&q));
            let dup = reps.iter().any(|(_, o)| o.iter().zip(&q).all(|(a, b)| (a - b).norm() <= r));
            if !dup {
                reps.push((pt, q));
            }
        }
        reps.into_iter().map(|(p, _)| p).collect()
    }

    pub fn count_p(&self, class: SolutionClass) -> usize {
        self.distinct_p(class).len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pts: Vec<serde_json::Value> = self
            .points
            .iter()
            .map(|p| {
                serde_json::json!({
                    "re": p.x.iter().map(|z| z.re).collect::<Vec<_>>(),
                    "im": p.x.iter().map(|z| z.im).collect::<Vec<_>>(),
                    "residual": p.residual,
                    "condition": if p.condition.is_finite() { serde_json::json!(p.condition) } else { serde_json::Value::Null },
                    "class": p.class,
                    "cluster": p.cluster,
                })
            })
            .collect();
        serde_json::json!({ "points": pts, "pathStats": self.stats })
    }
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var("LG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            b = b.num_threads(n);
        }
        b.build().expect("thread pool")
    })
}

/// Start system chosen for a critical system under a config.
pub fn choose_start(system: &CriticalSystem<C64>, cfg: &TrackerConfig) -> Result<(StartSystem, Vec<Vec<C64>>)> {
    let use_groups = cfg.start_kind == StartKind::Multihomogeneous && system.groups.len() > 1;
    if use_groups {
        multihom_start(system, cfg.seed)
    } else {
        let count = total_degree_count(&system.equations);
        if count > cfg.max_paths {
            return Err(Error::PathOverflow { count, cap: cfg.max_paths });
        }
        let s = StartSystem::total_degree(&system.equations)?;
        let sols = s.solutions(&[(0..system.nvars).collect()])?;
        Ok((s, sols))
    }
}

/// Linear-product start system for the variable groups of `system`;
/// with a single group this is the total-degree start.
pub fn multihom_start(system: &CriticalSystem<C64>, seed: u64) -> Result<(StartSystem, Vec<Vec<C64>>)> {
    if system.groups.iter().any(|g| g.is_empty()) {
        return invalid("empty variable group");
    }
    if system.groups.len() <= 1 {
        let s = StartSystem::total_degree(&system.equations)?;
        let sols = s.solutions(&[(0..system.nvars).collect()])?;
        return Ok((s, sols));
    }
    let mut rng = seeded(seed ^ 0xbb67_ae85);
    let s = StartSystem::linear_product(&system.equations, &system.groups, system.nvars, &mut rng)?;
    let sols = s.solutions(&system.groups)?;
    Ok((s, sols))
}

/// Multihomogeneous Bézout number of a system with respect to its groups.
pub fn multihom_path_count(system: &CriticalSystem<C64>) -> u128 {
    let deg = group_degrees(&system.equations, &system.groups);
    let sizes: Vec<usize> = system.groups.iter().map(|g| g.len()).collect();
    bezout_number(&deg, &sizes)
}

/// Ab initio solve of a square critical system.
pub fn solve(system: &CriticalSystem<C64>, cfg: &TrackerConfig) -> Result<SolutionSet> {
    cfg.validate()?;
    if !system.is_square() {
        return invalid("system is not square");
    }
    let (start, sols) = choose_start(system, cfg)?;
    track_all(system, &start, &sols, cfg)
}

/// Track `solutions0` of the system at parameters `u0` to the system at
/// `u1`. The family must depend affinely on the parameters and keep its
/// monomial support, which holds for every builder in this crate.
pub fn parameter_homotopy(
    family: &dyn Fn(&[C64]) -> Result<CriticalSystem<C64>>,
    u0: &[C64],
    solutions0: &[Vec<C64>],
    u1: &[C64],
    cfg: &TrackerConfig,
) -> Result<SolutionSet> {
    cfg.validate()?;
    let s0 = family(u0)?;
    let s1 = family(u1)?;
    if s0.nvars != s1.nvars || !s1.is_square() {
        return invalid("parameter family changes shape");
    }
    // Keep the raw equations (no per-equation rescaling) so that the two
    // systems stay on one affine line in parameter space.
    let start = Compiled::new(&scale_equations(&s0.equations, &s1.equations), s0.nvars);
    track_all_with(&s1, &start, solutions0, cfg)
}

/// Scale each start equation by the factor the target equation will get
/// when compiled, so the homotopy interpolates the unscaled pair.
fn scale_equations(start: &[CPoly], target: &[CPoly]) -> Vec<CPoly> {
    start
        .iter()
        .zip(target)
        .map(|(s, t)| {
            let ts = t.max_magnitude();
            let ss = s.max_magnitude();
            if ts > 0.0 && ss > 0.0 {
                s.scale(&C64::new(ss / ts, 0.0))
            } else {
                s.clone()
            }
        })
        .collect()
}

fn track_all(system: &CriticalSystem<C64>, start: &StartSystem, sols: &[Vec<C64>], cfg: &TrackerConfig) -> Result<SolutionSet> {
    track_all_with(system, start, sols, cfg)
}

fn track_all_with(system: &CriticalSystem<C64>, start: &dyn Evaluate, sols: &[Vec<C64>], cfg: &TrackerConfig) -> Result<SolutionSet> {
    let target = Compiled::new(&system.equations, system.nvars);
    let gamma = cfg.gamma();
    let hom = Homotopy { target: &target, start, gamma };
    let ends: Vec<PathEnd> = pool().install(|| sols.par_iter().map(|x0| hom.track(x0, cfg)).collect());
    let mut points: Vec<SolutionPoint> =
        ends.iter().enumerate().map(|(i, e)| finish_endpoint(system, &target, e, i, cfg)).collect();
    let mut retracked = 0;
    let mut tight = cfg.clone();
    for _ in 0..cfg.retrack_rounds {
        assign_clusters(&mut points, cfg.cluster_tol);
        let dup = duplicated_regular_paths(&points);
        if dup.is_empty() {
            break;
        }
        tight = tight.tightened();
        let hom2 = Homotopy { target: &target, start, gamma };
        let redo: Vec<(usize, PathEnd)> =
            pool().install(|| dup.par_iter().map(|&i| (i, hom2.track(&sols[points[i].path], &tight))).collect());
        for (i, e) in redo {
            let path = points[i].path;
            points[i] = finish_endpoint(system, &target, &e, path, cfg);
        }
        retracked += dup.len();
    }
    points.sort_by(|a, b| canonical_key(a).cmp(&canonical_key(b)));
    assign_clusters(&mut points, cfg.cluster_tol);
    let failed = points.iter().filter(|p| p.class == SolutionClass::Failed).count();
    Ok(SolutionSet {
        stats: PathStats { tracked: points.len(), converged: points.len() - failed, failed, retracked },
        points,
        cluster_tol: cfg.cluster_tol,
    })
}

fn canonical_key(p: &SolutionPoint) -> (SolutionClass, Vec<i64>) {
    let r = |v: f64| if v.is_finite() { (v * 1e6).round().clamp(-9e18, 9e18) as i64 } else { i64::MAX };
    let mut k = Vec::with_capacity(2 * p.x.len());
    for z in &p.x {
        k.push(r(z.re));
        k.push(r(z.im));
    }
    (p.class, k)
}

/// Indices of points whose regular cluster was reached by more than one
/// path (all but the first member).
fn duplicated_regular_paths(points: &[SolutionPoint]) -> Vec<usize> {
    let mut seen = std::collections::HashMap::new();
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if matches!(p.class, SolutionClass::OffHRegular | SolutionClass::OnH | SolutionClass::Extraneous) && p.condition < 1e8 {
            let first = *seen.entry(p.cluster).or_insert(i);
            if first != i {
                if !out.contains(&first) {
                    out.push(first);
                }
                out.push(i);
            }
        }
    }
    out
}

fn assign_clusters(points: &mut [SolutionPoint], tol: f64) {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let live: Vec<usize> = (0..n)
        .filter(|&i| !matches!(points[i].class, SolutionClass::AtInfinity | SolutionClass::Failed))
        .collect();
    let key = |x: &[C64]| x.iter().enumerate().map(|(k, z)| z.re * (1.0 + 0.137 * k as f64) + z.im * 0.71).sum::<f64>();
    let mut order: Vec<(f64, usize)> = live.iter().map(|&i| (key(&points[i].x), i)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    for a in 0..order.len() {
        let (ka, i) = order[a];
        let ni = norm(&points[i].x);
        let rad = tol * (1.0 + ni);
        let span = rad * 2.0 * points[i].x.len() as f64 * 1.2;
        for &(kb, j) in order.iter().skip(a + 1) {
            if kb - ka > span {
                break;
            }
            let d = points[i].x.iter().zip(&points[j].x).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
            if d <= rad {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut ids = std::collections::HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        let next = ids.len();
        points[i].cluster = *ids.entry(root).or_insert(next);
    }
}

/// Outcome of Newton refinement on the target system.
#[derive(Clone, Debug)]
pub struct RefineOutcome {
    pub point: Vec<C64>,
    pub residual: f64,
    pub converged: bool,
    pub condition: f64,
    pub iterations: usize,
}

/// Newton refinement of `point` on `system` until the relative residual
/// drops below `tol`.
pub fn refine(point: &[C64], system: &CriticalSystem<C64>, tol: f64, max_iters: usize) -> RefineOutcome {
    let target = Compiled::new(&system.equations, system.nvars);
    newton_refine(&target, point, tol, max_iters)
}

fn newton_refine(target: &Compiled, point: &[C64], tol: f64, max_iters: usize) -> RefineOutcome {
    let n = point.len();
    let z = C64::new(0.0, 0.0);
    let mut x = point.to_vec();
    let mut f = vec![z; n];
    let mut j = vec![z; n * n];
    let mut last_step = f64::INFINITY;
    let mut converged = false;
    let mut iters = 0;
    for it in 0..max_iters {
        iters = it + 1;
        target.eval_jac(&x, &mut f, &mut j);
        let mut b: Vec<C64> = f.iter().map(|v| -v).collect();
        if !lu_solve(&mut j, n, &mut b) {
            break;
        }
        let d = norm(&b);
        if !d.is_finite() {
            break;
        }
        for i in 0..n {
            x[i] += b[i];
        }
        let scale = 1.0 + norm(&x);
        if d <= 1e-13 * scale || (d <= 1e-9 * scale && d > 0.5 * last_step) {
            converged = d <= 1e-9 * scale;
            break;
        }
        if d > 4.0 * last_step && it > 2 {
            break;
        }
        last_step = d;
    }
    let residual = target.relative_residual(&x);
    if residual > tol {
        converged = false;
    } else if !converged && last_step <= 1e-9 * (1.0 + norm(&x)) {
        converged = true;
    }
    target.eval_jac(&x, &mut f, &mut j);
    // column scaling so that large coordinates do not inflate κ, then
    // row equilibration so that badly scaled equations do not either
    for c in 0..n {
        let s = 1.0 + x[c].norm();
        for r in 0..n {
            j[r * n + c] *= s;
        }
    }
    for r in 0..n {
        let m = j[r * n..(r + 1) * n].iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 0.0 {
            for v in &mut j[r * n..(r + 1) * n] {
                *v /= m;
            }
        }
    }
    let condition = condition_number(&to_dmatrix(n, n, &j));
    RefineOutcome { point: x, residual, converged, condition, iterations: iters }
}

fn finish_endpoint(system: &CriticalSystem<C64>, target: &Compiled, end: &PathEnd, path: usize, cfg: &TrackerConfig) -> SolutionPoint {
    let fail = |class| SolutionPoint {
        x: end.x.clone(),
        p: Vec::new(),
        residual: f64::INFINITY,
        condition: f64::INFINITY,
        class,
        cluster: 0,
        path,
    };
    match end.status {
        PathStatus::Diverged => return fail(SolutionClass::AtInfinity),
        PathStatus::Stalled(t) | PathStatus::MaxSteps(t) if t > 1e-6 => return fail(SolutionClass::Failed),
        _ => {}
    }
    let r = newton_refine(target, &end.x, cfg.endpoint_tol, cfg.max_newton_iters);
    let x = r.point;
    // Newton from a stalled endpoint may wander off to an unrelated root.
    let moved = x.iter().zip(&end.x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let local = moved <= 1e-3 * (1.0 + norm(&end.x));
    if !r.converged || !local {
        let x = if local { x } else { end.x.clone() };
        let class = if norm(&x) > 1e4 || !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            SolutionClass::AtInfinity
        } else {
            SolutionClass::Singular
        };
        let p = if class == SolutionClass::Singular { system.embedding.probabilities(&x) } else { Vec::new() };
        let residual = if local { r.residual } else { target.relative_residual(&x) };
        return SolutionPoint { x, p, residual, condition: r.condition, class, cluster: 0, path };
    }
    let p = system.embedding.probabilities(&x);
    let class = classify(system, &p, r.condition, cfg);
    SolutionPoint { x, p, residual: r.residual, condition: r.condition, class, cluster: 0, path }
}

fn classify(system: &CriticalSystem<C64>, p: &[C64], condition: f64, cfg: &TrackerConfig) -> SolutionClass {
    let pn = norm(p);
    let psum: C64 = p.iter().sum();
    if pn == 0.0 || p.iter().any(|z| z.norm() / pn < cfg.boundary_tau) || psum.norm() / pn < cfg.boundary_tau {
        return SolutionClass::OnH;
    }
    if condition > cfg.singular_cond_threshold {
        return SolutionClass::Singular;
    }
    if !system.membership.is_empty() {
        let comp = Compiled::new(&system.membership, p.len());
        if comp.relative_residual(p) > 1e-7 {
            return SolutionClass::Extraneous;
        }
        if system.singular_filter && spec_jacobian_degenerate(&system.membership, p, system.codim) {
            return SolutionClass::Singular;
        }
    }
    SolutionClass::OffHRegular
}

/// True if the Jacobian of the (coefficient-normalized) generators at `p`
/// has rank below `codim`.
fn spec_jacobian_degenerate(gens: &[CPoly], p: &[C64], codim: usize) -> bool {
    if codim == 0 {
        return false;
    }
    let n = p.len();
    let pn = norm(p);
    let q: Vec<C64> = p.iter().map(|z| z / pn).collect();
    let rows: Vec<C64> = gens
        .iter()
        .flat_map(|g| (0..n).map(|i| g.diff(i).eval(&q).unwrap_or(C64::new(f64::NAN, 0.0))).collect::<Vec<_>>())
        .collect();
    let sv = singular_values(&to_dmatrix(gens.len(), n, &rows));
    match (sv.first(), sv.get(codim - 1)) {
        (Some(&hi), Some(&lo)) => !(lo >= 1e-6 * hi.max(1e-3)),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critsys::{Builder, Embedding, Role};
    use crate::poly::{parse_text, CPoly};

    fn custom(eqs: &[&str], n: usize) -> CriticalSystem<C64> {
        let e: Vec<CPoly> = eqs.iter().map(|s| parse_text(s, Some(n)).unwrap().to_complex()).collect();
        CriticalSystem {
            nvars: n,
            equations: e,
            roles: (0..n).map(Role::Torus).collect(),
            chart: None,
            builder: Builder::Custom,
            groups: vec![(0..n).collect()],
            embedding: Embedding::Identity,
            data: vec![],
            membership: vec![],
            codim: 0,
            singular_filter: false,
        }
    }

    #[test]
    fn univariate_square_roots() {
        let s = custom(&["p0^2 - 4"], 1);
        let sol = solve(&s, &TrackerConfig::default()).unwrap();
        assert_eq!(sol.count(SolutionClass::OffHRegular), 2);
        let mut r: Vec<f64> = sol.regular().iter().map(|p| p.x[0].re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((r[0] + 2.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn divergent_paths_are_at_infinity() {
        // x*y = 1, x + y = 3 has two finite roots out of Bézout 2; add a
        // degree excess: x^2*y = 2, x - y = 0 → x^3 = 2 (3 roots of 3).
        let s = custom(&["p0*p1 - 1", "p0 + 2*p1 - 3"], 2);
        let sol = solve(&s, &TrackerConfig::default()).unwrap();
        assert_eq!(sol.count(SolutionClass::OffHRegular), 2);
        let s2 = custom(&["p0*p1 - 1", "p0 - 2"], 2);
        let sol2 = solve(&s2, &TrackerConfig::default()).unwrap();
        assert_eq!(sol2.count(SolutionClass::OffHRegular), 1);
        assert_eq!(sol2.count(SolutionClass::AtInfinity) + sol2.stats.failed, 1);
    }

    #[test]
    fn refine_root() {
        let s = custom(&["p0^2 - 1"], 1);
        let r = refine(&[C64::new(1.001, 0.0)], &s, 1e-14, 20);
        assert!(r.converged);
        assert!((r.point[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn double_root_is_flagged() {
        let s = custom(&["p0^2 - 2*p0 + 1"], 1);
        let r = refine(&[C64::new(1.01, 0.0)], &s, 1e-14, 12);
        assert!(!r.converged || r.condition > 1e10);
    }

    #[test]
    fn determinism() {
        let s = custom(&["p0^3 - 2*p0*p1 + 1", "p1^2 - p0 - 3"], 2);
        let a = solve(&s, &TrackerConfig::with_seed(5)).unwrap();
        let b = solve(&s, &TrackerConfig::with_seed(5)).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.x, q.x);
            assert_eq!(p.class, q.class);
        }
        assert_eq!(a.count(SolutionClass::OffHRegular), 6);
    }

    #[test]
    fn config_validation() {
        let mut c = TrackerConfig::default();
        c.min_step = 0.5;
        assert!(c.validate().is_err());
        let mut d = TrackerConfig::default();
        d.boundary_tau = 0.0;
        assert!(d.validate().is_err());
    }
}
