//! ML degrees by path tracking, sectional ML degrees by slicing, ML
//! bidegrees through the involution, closed formulas, and the
//! restriction/deletion split check.

use std::collections::BTreeMap;

use num::{BigRational, Zero};
use serde::{Deserialize, Serialize};

use crate::critsys::{
    build_lagrange_system_any, build_rank_corner_slice_system, build_rank_system, CriticalSystem, VarietySpec,
};
use crate::error::{invalid, Error, Result};
use crate::poly::{binary_form_distinct_roots, BinaryForm, QPoly};
use crate::rng::{child_seed, generic_data, int_in, rational, seeded, Rng64};
use crate::tracker::{solve, SolutionClass, TrackerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    pub seed: u64,
    pub count: usize,
    pub tracked: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MlReport {
    pub ml_degree: usize,
    pub per_trial_counts: Vec<usize>,
    pub path_failures: Vec<usize>,
    pub confidence: Confidence,
    pub trials: Vec<TrialRecord>,
}

impl MlReport {
    fn from_trials(trials: Vec<TrialRecord>) -> Self {
        let counts: Vec<usize> = trials.iter().map(|t| t.count).collect();
        let confidence = if counts.windows(2).all(|w| w[0] == w[1]) { Confidence::Stable } else { Confidence::Unstable };
        MlReport {
            ml_degree: mode(&counts),
            path_failures: trials.iter().map(|t| t.failed).collect(),
            per_trial_counts: counts,
            confidence,
            trials,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.confidence == Confidence::Stable
    }
}

/// Most frequent value; ties go to the larger value, since lost paths
/// can only lower a count.
pub fn mode(xs: &[usize]) -> usize {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &x in xs {
        *freq.entry(x).or_default() += 1;
    }
    freq.iter().max_by_key(|(v, f)| (**f, **v)).map(|(v, _)| *v).unwrap_or(0)
}

/// Count off-H regular critical points over independent trials. The
/// builder gets the trial index and a seeded generator for its random
/// choices (data, chart, slices).
pub fn count_trials<F>(cfg: &TrackerConfig, trials: usize, build: F) -> Result<MlReport>
where
    F: Fn(usize, &mut Rng64) -> Result<CriticalSystem<BigRational>>,
{
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let seed = child_seed(cfg.seed, t as u64 + 1);
        let mut rng = seeded(seed);
        let sys = build(t, &mut rng)?.to_complex();
        let tc = TrackerConfig { seed, ..cfg.clone() };
        let sol = solve(&sys, &tc)?;
        out.push(TrialRecord {
            seed,
            count: sol.count_p(SolutionClass::OffHRegular),
            tracked: sol.stats.tracked,
            failed: sol.stats.failed,
        });
    }
    Ok(MlReport::from_trials(out))
}

/// ML degree of a model: for each trial fresh generic integer data, the
/// Lagrange critical system, and the number of regular critical points
/// off the hyperplane arrangement.
pub fn ml_degree(spec: &VarietySpec, cfg: &TrackerConfig, trials: usize) -> Result<MlReport> {
    if trials < 3 {
        return invalid("at least three trials are required");
    }
    spec.validate()?;
    count_trials(cfg, trials, |_, rng| {
        let u = generic_data(rng, spec.n + 1);
        build_lagrange_system_any(spec, &u, rng)
    })
}

/// Random linear form with integer coefficients in `[-99, 99]`.
pub fn random_hyperplane(rng: &mut Rng64, nvars: usize) -> QPoly {
    loop {
        let c: Vec<BigRational> = (0..nvars).map(|_| rational(int_in(rng, -99, 99), 1)).collect();
        if c.iter().filter(|x| !x.is_zero()).count() == nvars {
            return QPoly::linear(&c, BigRational::zero());
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SectionalReport {
    pub form: BinaryForm,
    /// `slices[i]` collects the draws for `X ∩ L_{n-i}`.
    pub slices: Vec<MlReport>,
    pub stable: bool,
}

/// Number of slice draws per sectional coefficient.
pub const SLICE_DRAWS: usize = 3;

/// `s_i = MLdegree(X ∩ L)` for `i` generic hyperplanes, `i = 0..dim X`,
/// assembled into `(s_0 p^d + … + s_d u^d)·p^{n-d}`.
pub fn sectional_ml_degree(spec: &VarietySpec, cfg: &TrackerConfig) -> Result<SectionalReport> {
    spec.validate()?;
    let d = spec.dim();
    let mut coeffs = vec![0i64; spec.n + 1];
    let mut slices = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let sub = TrackerConfig { seed: child_seed(cfg.seed, 0x5ec0 + i as u64), ..cfg.clone() };
        let rep = count_trials(&sub, SLICE_DRAWS, |_, rng| {
            let hs: Vec<QPoly> = (0..i).map(|_| random_hyperplane(rng, spec.n + 1)).collect();
            let sliced = spec.with_hyperplanes(hs)?;
            let u = generic_data(rng, spec.n + 1);
            build_lagrange_system_any(&sliced, &u, rng)
        })?;
        coeffs[i] = rep.ml_degree as i64;
        slices.push(rep);
    }
    let stable = slices.iter().all(MlReport::is_stable);
    Ok(SectionalReport { form: BinaryForm::new(coeffs), slices, stable })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BidegreeReport {
    pub bidegree: BinaryForm,
    pub sectional: SectionalReport,
    /// The passage from sectional degrees to the bidegree rests on a
    /// conjectured involution; always true for this route.
    pub conjectural: bool,
}

pub fn ml_bidegree(spec: &VarietySpec, cfg: &TrackerConfig) -> Result<BidegreeReport> {
    let sectional = sectional_ml_degree(spec, cfg)?;
    bidegree_from_sectional(sectional)
}

pub fn bidegree_from_sectional(sectional: SectionalReport) -> Result<BidegreeReport> {
    let bidegree = sectional.form.b_from_s()?;
    Ok(BidegreeReport { bidegree, sectional, conjectural: true })
}

/// ML degree of a generic complete intersection of degrees `d_1..d_r`
/// in `P^n`: `d_1⋯d_r · Σ_{i_1+⋯+i_r ≤ n−r} d_1^{i_1}⋯d_r^{i_r}`.
pub fn generic_ci_ml_degree(n: usize, degrees: &[u64]) -> Result<u128> {
    let r = degrees.len();
    if r == 0 || r > n {
        return invalid("need 1 ≤ r ≤ n");
    }
    if degrees.iter().any(|&d| d == 0) {
        return invalid("degrees must be positive");
    }
    let top = n - r;
    // h[k] = complete homogeneous symmetric polynomial of degree k
    let mut h = vec![0u128; top + 1];
    h[0] = 1;
    for &d in degrees {
        for k in 1..=top {
            h[k] = h[k]
                .checked_add(h[k - 1].checked_mul(d as u128).ok_or(Error::Overflow("ci formula"))?)
                .ok_or(Error::Overflow("ci formula"))?;
        }
    }
    let mut total: u128 = 0;
    for v in h {
        total = total.checked_add(v).ok_or(Error::Overflow("ci formula"))?;
    }
    degrees
        .iter()
        .try_fold(total, |acc, &d| acc.checked_mul(d as u128))
        .ok_or(Error::Overflow("ci formula"))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlaneCurveReport {
    pub d: u32,
    pub a: usize,
    pub formula_ml_degree: i64,
}

/// Closed form `d² − 3d + a` for a smooth plane curve `V(f)`, where `a` is
/// the number of distinct points on the four lines `p_0, p_1, p_2, p_+`.
/// Smoothness is the caller's responsibility.
pub fn plane_curve_formula(f: &QPoly) -> Result<PlaneCurveReport> {
    if f.nvars() != 3 || !f.is_homogeneous() {
        return invalid("expected a homogeneous polynomial in p0, p1, p2");
    }
    let d = f.degree().filter(|&d| d > 0).ok_or_else(|| Error::InvalidInput("constant curve".into()))?;
    let x = QPoly::var(2, 0);
    let y = QPoly::var(2, 1);
    let z = QPoly::zero(2);
    let neg = -&(&x + &y);
    let lines = [
        [z.clone(), x.clone(), y.clone()],
        [x.clone(), z.clone(), y.clone()],
        [x.clone(), y.clone(), z],
        [x, y, neg],
    ];
    let mut total = 0;
    for subs in &lines {
        let g = f.compose(subs)?;
        let c: Vec<BigRational> = (0..=d).map(|i| g.coeff(&[i, d - i])).collect();
        total += binary_form_distinct_roots(&c)
            .ok_or_else(|| Error::InvalidInput("curve contains a line of the arrangement".into()))?;
    }
    // each pairwise intersection of the four lines lies on exactly two of them
    let corners: [[i64; 3]; 6] = [[0, 0, 1], [0, 1, 0], [1, 0, 0], [0, 1, -1], [1, 0, -1], [1, -1, 0]];
    let mut on = 0;
    for c in &corners {
        let pt: Vec<BigRational> = c.iter().map(|&v| rational(v, 1)).collect();
        if f.eval(&pt)?.is_zero() {
            on += 1;
        }
    }
    let a = total - on;
    let di = d as i64;
    Ok(PlaneCurveReport { d, a, formula_ml_degree: di * di - 3 * di + a as i64 })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitReport {
    pub ml_total: usize,
    pub ml_slice: usize,
    pub ml_data_zero: usize,
    pub holds: bool,
    pub stable: bool,
    pub total: MlReport,
    pub slice: MlReport,
    pub data_zero: MlReport,
}

impl SplitReport {
    fn new(total: MlReport, slice: MlReport, data_zero: MlReport) -> Self {
        SplitReport {
            ml_total: total.ml_degree,
            ml_slice: slice.ml_degree,
            ml_data_zero: data_zero.ml_degree,
            holds: total.ml_degree == slice.ml_degree + data_zero.ml_degree,
            stable: total.is_stable() && slice.is_stable() && data_zero.is_stable(),
            total,
            slice,
            data_zero,
        }
    }
}

/// Compare `MLdegree(X)` with `MLdegree(X ∩ {p_k = 0}) + MLdegree(X|_{u_k = 0})`.
pub fn restriction_split_check(spec: &VarietySpec, cfg: &TrackerConfig, k: usize, trials: usize) -> Result<SplitReport> {
    if k > spec.n {
        return invalid("coordinate index out of range");
    }
    let total = ml_degree(spec, cfg, trials)?;
    let restricted = spec.restrict_coordinate(k)?;
    let slice = ml_degree(&restricted, &TrackerConfig { seed: child_seed(cfg.seed, 0x51), ..cfg.clone() }, trials)?;
    let zero_cfg = TrackerConfig { seed: child_seed(cfg.seed, 0x52), ..cfg.clone() };
    let data_zero = count_trials(&zero_cfg, trials.max(3), |_, rng| {
        let mut u = generic_data(rng, spec.n + 1);
        u[k] = BigRational::zero();
        build_lagrange_system_any(spec, &u, rng)
    })?;
    Ok(SplitReport::new(total, slice, data_zero))
}

/// The split check for the `m×n` rank-`≤ r` model and its last entry, using
/// the parametrized rank systems.
pub fn rank_split_check(m: usize, n: usize, r: usize, cfg: &TrackerConfig, trials: usize) -> Result<SplitReport> {
    let data = |rng: &mut Rng64, zero_corner: bool| {
        let flat = generic_data(rng, m * n);
        let mut u: Vec<Vec<BigRational>> = flat.chunks(n).map(|c| c.to_vec()).collect();
        if zero_corner {
            u[m - 1][n - 1] = BigRational::zero();
        }
        u
    };
    let total = count_trials(cfg, trials, |_, rng| build_rank_system(m, n, r, &data(rng, false)))?;
    let slice = count_trials(&TrackerConfig { seed: child_seed(cfg.seed, 0x51), ..cfg.clone() }, trials, |_, rng| {
        build_rank_corner_slice_system(m, n, r, &data(rng, false))
    })?;
    let data_zero = count_trials(&TrackerConfig { seed: child_seed(cfg.seed, 0x52), ..cfg.clone() }, trials, |_, rng| {
        build_rank_system(m, n, r, &data(rng, true))
    })?;
    Ok(SplitReport::new(total, slice, data_zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_text;

    #[test]
    fn mode_prefers_frequency_then_size() {
        assert_eq!(mode(&[3, 3, 2]), 3);
        assert_eq!(mode(&[2, 3]), 3);
        assert_eq!(mode(&[]), 0);
    }

    #[test]
    fn ci_formula_examples() {
        assert_eq!(generic_ci_ml_degree(3, &[2]).unwrap(), 14);
        assert_eq!(generic_ci_ml_degree(3, &[2, 2]).unwrap(), 20);
        assert_eq!(generic_ci_ml_degree(3, &[2, 2, 2]).unwrap(), 8);
        assert_eq!(generic_ci_ml_degree(2, &[3]).unwrap(), 12);
        assert!(generic_ci_ml_degree(2, &[1, 1, 1]).is_err());
    }

    #[test]
    fn plane_curve_examples() {
        let hw = plane_curve_formula(&parse_text("4*p0*p2 - p1^2", Some(3)).unwrap()).unwrap();
        assert_eq!((hw.a, hw.formula_ml_degree), (3, 1));
        let line = plane_curve_formula(&parse_text("p0 + 3*p1", Some(3)).unwrap()).unwrap();
        assert_eq!((line.a, line.formula_ml_degree), (3, 1));
        let q = plane_curve_formula(&parse_text("3*p0^2 + 5*p1^2 - 7*p2^2 + 11*p0*p1 + 2*p1*p2 - 13*p0*p2", Some(3)).unwrap())
            .unwrap();
        assert_eq!((q.a, q.formula_ml_degree), (8, 6));
        assert!(plane_curve_formula(&parse_text("p0*p1", Some(3)).unwrap()).is_err());
    }

    #[test]
    fn hardy_weinberg_has_degree_one() {
        let spec = VarietySpec::from_text(2, 1, &["4*p0*p2 - p1^2"]).unwrap();
        let r = ml_degree(&spec, &TrackerConfig::with_seed(3), 3).unwrap();
        assert_eq!(r.ml_degree, 1);
        assert!(r.is_stable());
    }
}
