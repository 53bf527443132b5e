//! Reproduction harness: one check per acceptance criterion, each with
//! its tier and time budget.

use std::fmt;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use mlgeom::catalog::{self, CUBIC_SURFACE_A};
use mlgeom::critsys::{build_lagrange_system_any, dlog_residual, VarietySpec};
use mlgeom::horn::{horn_mle, verify_ml_degree_one};
use mlgeom::linmatroid::{arrangement_matroid, broken_circuit_hvector, matroid_report, mle_linear};
use mlgeom::mldeg::{generic_ci_ml_degree, ml_degree, rank_split_check, sectional_ml_degree};
use mlgeom::poly::{rational_to_f64, BinaryForm, QPoly};
use mlgeom::rankdual::{
    duality_pairing, em_mixture, numerical_rank, rank_critical_points, rank_critical_points_parameter,
    supermodular_222, symmetric_rank_critical_points, verify_critical_rank, MixtureParams,
};
use mlgeom::rng::{child_seed, generic_data, int_in, rational, seeded, Rng64};
use mlgeom::toric::{birch_mle, normalized_volume, toric_ml_degree};
use mlgeom::tracker::{solve, SolutionClass, TrackerConfig};
use mlgeom::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Fast,
    Standard,
    Extended,
}

impl Tier {
    pub fn parse(s: &str) -> Option<Tier> {
        match s.to_ascii_lowercase().as_str() {
            "f" | "fast" => Some(Tier::Fast),
            "s" | "standard" => Some(Tier::Standard),
            "e" | "extended" => Some(Tier::Extended),
            _ => None,
        }
    }

    fn letter(self) -> char {
        match self {
            Tier::Fast => 'F',
            Tier::Standard => 'S',
            Tier::Extended => 'E',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Outcome {
    pub id: &'static str,
    pub tier: Tier,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: u64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        write!(
            f,
            "{tag} [{}] {:>3} {:<34} {:>7.1}s/{:<4} {}",
            self.tier.letter(),
            self.id,
            self.title,
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

/// A check returns whether it passed and a one-line summary.
type Check = fn(&TrackerConfig) -> Result<(bool, String)>;

pub struct Criterion {
    pub id: &'static str,
    pub tier: Tier,
    pub title: &'static str,
    pub budget: Duration,
    check: Check,
}

const fn crit(id: &'static str, tier: Tier, title: &'static str, secs: u64, check: Check) -> Criterion {
    Criterion { id, tier, title, budget: Duration::from_secs(secs), check }
}

pub const CRITERIA: &[Criterion] = &[
    crit("1", Tier::Fast, "smooth plane curves", 30, plane_curves),
    crit("2", Tier::Fast, "nodal and cuspidal cubics", 30, singular_cubics),
    crit("3", Tier::Fast, "Hardy-Weinberg MLE", 5, hardy_weinberg),
    crit("4", Tier::Fast, "generic 2-plane in P^4", 20, linear_plane),
    crit("5", Tier::Fast, "generic complete intersections", 60, complete_intersections),
    crit("6", Tier::Standard, "Grassmannian G(2,4)", 300, grassmannian),
    crit("7", Tier::Standard, "3x3 rank 2 and duality", 300, determinantal),
    crit("8", Tier::Standard, "symmetric 3x3 rank 2", 300, symmetric),
    crit("9", Tier::Standard, "toric models", 300, toric_models),
    crit("10", Tier::Standard, "restriction/deletion split", 300, split_checks),
    crit("11", Tier::Fast, "Horn catalog", 30, horn_catalog),
    crit("12", Tier::Fast, "bidegree/sectional involution", 5, involution_pairs),
    crit("13", Tier::Standard, "twisted cubic", 300, twisted_cubic),
    crit("14", Tier::Fast, "EM on the hair-loss table", 10, em_hair),
    crit("15", Tier::Extended, "3x4 rank 2 via parameter homotopy", 2700, three_by_four),
    crit("15s", Tier::Standard, "secant variety slicing", 300, secant),
    crit("15p", Tier::Fast, "property suites", 60, properties),
];

/// Run every criterion of tier at most `tier`; the rest are reported as
/// skipped. `report` sees each outcome as soon as it is known.
pub fn run(tier: Tier, seed: u64, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let mut out = Vec::new();
    for c in CRITERIA {
        let cfg = TrackerConfig::with_seed(child_seed(seed, c.id.bytes().fold(0u64, |h, b| h * 31 + u64::from(b))));
        let o = if c.tier > tier {
            Outcome {
                id: c.id,
                tier: c.tier,
                title: c.title,
                status: Status::Skip,
                detail: format!("tier {:?} not selected", c.tier).to_lowercase(),
                seconds: 0.0,
                budget_seconds: c.budget.as_secs(),
            }
        } else {
            let t = Instant::now();
            let res = (c.check)(&cfg);
            let el = t.elapsed();
            let (ok, mut detail) = match res {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e:#}")),
            };
            let in_time = el <= c.budget;
            if !in_time {
                detail.push_str(" (over time budget)");
            }
            Outcome {
                id: c.id,
                tier: c.tier,
                title: c.title,
                status: if ok && in_time { Status::Pass } else { Status::Fail },
                detail,
                seconds: el.as_secs_f64(),
                budget_seconds: c.budget.as_secs(),
            }
        };
        report(&o);
        out.push(o);
    }
    out
}

fn random_form(rng: &mut Rng64, nvars: usize, degree: u32) -> QPoly {
    let mut terms = Vec::new();
    let mut exp = vec![0u32; nvars];
    monomials(nvars, degree, 0, &mut exp, &mut terms);
    loop {
        let f = QPoly::from_terms(
            nvars,
            terms.iter().map(|e: &Vec<u32>| (e.clone(), rational(int_in(rng, -9, 9), 1))),
        )
        .expect("valid terms");
        if f.num_terms() == terms.len() {
            return f;
        }
    }
}

fn monomials(nvars: usize, left: u32, at: usize, exp: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if at == nvars - 1 {
        exp[at] = left;
        out.push(exp.clone());
        return;
    }
    for k in (0..=left).rev() {
        exp[at] = k;
        monomials(nvars, left - k, at + 1, exp, out);
    }
}

fn plane_curves(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let mut rng = seeded(cfg.seed);
    let mut got = Vec::new();
    for d in 2..=4 {
        let spec = VarietySpec::new(2, 1, vec![random_form(&mut rng, 3, d)])?;
        got.push(ml_degree(&spec, cfg, 3)?.ml_degree);
    }
    Ok((got == [6, 12, 20], format!("degrees 2,3,4 -> {got:?}, want [6, 12, 20]")))
}

fn singular_cubics(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let mut got = Vec::new();
    for name in catalog::PLANE_CURVES {
        let spec = VarietySpec::new(2, 1, vec![catalog::plane_curve(name)?])?;
        got.push(ml_degree(&spec, cfg, 3)?.ml_degree);
    }
    Ok((got == [10, 9], format!("node, cusp -> {got:?}, want [10, 9]")))
}

fn hardy_weinberg(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let model = catalog::horn("hardy-weinberg")?;
    let spec = catalog::variety("hardy-weinberg")?;
    let mut rng = seeded(cfg.seed);
    let mut worst = 0.0f64;
    let mut exact = true;
    for _ in 0..10 {
        let u = generic_data(&mut rng, 3);
        let p = horn_mle(&model, &u)?;
        // allele counts: θ = (2u0 + u1) / 2u+
        let total: BigRational = u.iter().cloned().sum();
        let theta = (&u[0] * rational(2, 1) + &u[1]) / (&total * rational(2, 1));
        let one = rational(1, 1);
        let oracle = vec![&theta * &theta, &theta * (&one - &theta) * rational(2, 1), (&one - &theta) * (&one - &theta)];
        exact &= p == oracle;
        let sys = build_lagrange_system_any(&spec, &u, &mut rng)?.to_complex();
        let sol = solve(&sys, cfg)?;
        let reg = sol.distinct_p(SolutionClass::OffHRegular);
        ensure!(reg.len() == 1, "tracker found {} regular critical points", reg.len());
        let q = reg[0].normalized_p();
        for (a, b) in q.iter().zip(&p) {
            worst = worst.max((a - rational_to_f64(b)).norm());
        }
    }
    Ok((exact && worst < 1e-10, format!("exact closed form {exact}, max |tracker - closed form| = {worst:.1e} (tol 1e-10)")))
}

fn linear_plane(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let model = catalog::linear("linear-2-plane")?;
    let rep = matroid_report(&model)?;
    let u = generic_data(&mut seeded(cfg.seed), model.n() + 1);
    let mle = mle_linear(&model, &u, cfg)?;
    let reg = mle.solutions.regular();
    let real = reg.iter().filter(|p| p.is_real(1e-8)).count();
    let ok = rep.hvector == [1, 3, 6] && rep.bidegree.coeffs == [6, 3, 1, 0, 0] && reg.len() == 6 && real == 6;
    Ok((ok, format!("h = {:?}, B = {}, tracker {} points ({real} real)", rep.hvector, rep.bidegree, reg.len())))
}

fn complete_intersections(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let f = [generic_ci_ml_degree(3, &[2])?, generic_ci_ml_degree(3, &[2, 2])?, generic_ci_ml_degree(3, &[2, 2, 2])?];
    let mut rng = seeded(cfg.seed);
    let spec = VarietySpec::new(3, 2, vec![random_form(&mut rng, 4, 2), random_form(&mut rng, 4, 2)])?;
    let tracked = ml_degree(&spec, cfg, 3)?.ml_degree;
    Ok((f == [14, 20, 8] && tracked == 20, format!("formula {f:?} (want [14, 20, 8]), tracker (2,2) curve {tracked} (want 20)")))
}

fn grassmannian(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let spec = catalog::variety("grassmannian-2-4")?;
    let ml = ml_degree(&spec, cfg, 3)?.ml_degree;
    let s = sectional_ml_degree(&spec, cfg)?.form;
    let b = s.b_from_s()?;
    let ok = ml == 4 && s.coeffs == [4, 20, 24, 12, 2, 0] && b.coeffs == [4, 6, 6, 6, 2, 0];
    Ok((ok, format!("ML degree {ml}, S = {s}, B = {b}")))
}

fn generic_matrix(rng: &mut Rng64, m: usize, n: usize) -> Vec<Vec<BigRational>> {
    generic_data(rng, m * n).chunks(n).map(<[BigRational]>::to_vec).collect()
}

fn determinantal(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let u = generic_matrix(&mut seeded(cfg.seed), 3, 3);
    let uf: Vec<Vec<f64>> = u.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect();
    let counts: Vec<usize> =
        (1..=3).map(|r| rank_critical_points(3, 3, r, &u, cfg).map(|c| c.points.len())).collect::<mlgeom::Result<_>>()?;
    let two = rank_critical_points(3, 3, 2, &u, cfg)?;
    let d = duality_pairing(&two.points, &two.points, &u, 1e-6)?;
    let mut critical = 0;
    for p in &two.points {
        critical += usize::from(verify_critical_rank(&p.p, &uf, 2, 1e-6)?);
    }
    let ok = counts == [1, 10, 1] && d.perfect && d.max_residual < 1e-6 && d.reality_preserved && critical == 10;
    Ok((
        ok,
        format!(
            "ranks 1,2,3 -> {counts:?}; pairing perfect {} max |PQ - Omega| {:.1e} (tol 1e-6); tangent test {critical}/10",
            d.perfect, d.max_residual
        ),
    ))
}

fn symmetric(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let fix = catalog::expected("sym-det-3x3", "criticalPoints").context("fixture")?;
    let u: Vec<Vec<BigRational>> = serde_json::from_value::<Vec<Vec<i64>>>(fix["u"].clone())?
        .iter()
        .map(|r| r.iter().map(|&x| rational(x, 1)).collect())
        .collect();
    let want: Vec<Vec<f64>> = serde_json::from_value(fix["points"].clone())?;
    let want_ll: Vec<f64> = serde_json::from_value(fix["logLikelihood"].clone())?;
    let res = symmetric_rank_critical_points(3, 2, &u, cfg)?;
    let got: Vec<Vec<f64>> = res
        .points
        .iter()
        .map(|p| [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)].iter().map(|&(i, j)| p.p[i][j].re).collect())
        .collect();
    // points come sorted by log-likelihood, so matching by position also
    // checks the ordering
    let mut worst = 0.0f64;
    for (g, w) in got.iter().zip(&want) {
        worst = worst.max(g.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let ll_err = res.points.iter().zip(&want_ll).map(|(p, w)| (p.log_likelihood - w).abs()).fold(0.0, f64::max);
    let best = res.points.first().map_or(f64::NAN, |p| p.log_likelihood);
    let ok = res.points.len() == 6 && worst < 1e-3 && ll_err < 1e-3 && res.points.iter().all(|p| p.positive);
    Ok((ok, format!("{} points, max coordinate error {worst:.1e} (tol 1e-3), best log-likelihood {best:.5}", res.points.len())))
}

fn toric_models(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let mut got = Vec::new();
    for name in ["cubic-surface", "cubic-surface-special", "fourfold-plus", "fourfold-minus"] {
        got.push(toric_ml_degree(&catalog::toric(name)?, cfg, 3)?.ml_degree);
    }
    let a: Vec<Vec<i64>> = CUBIC_SURFACE_A.iter().map(|r| r.to_vec()).collect();
    let vol = normalized_volume(&a)?;
    Ok((got == [3, 2, 2, 3] && vol == 3, format!("cubic generic/special, fourfold +/- -> {got:?} (want [3, 2, 2, 3]); volume {vol}")))
}

fn split_checks(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let two = rank_split_check(3, 3, 2, cfg, 3)?;
    let one = rank_split_check(3, 3, 1, cfg, 3)?;
    let t2 = (two.ml_total, two.ml_slice, two.ml_data_zero);
    let t1 = (one.ml_total, one.ml_slice, one.ml_data_zero);
    Ok((t2 == (10, 5, 5) && t1 == (1, 0, 1), format!("rank 2: {} = {} + {}; rank 1: {} = {} + {}", t2.0, t2.1, t2.2, t1.0, t1.1, t1.2)))
}

fn horn_catalog(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in catalog::HORN {
        let v = verify_ml_degree_one(&catalog::horn(name)?, 100, cfg)?;
        ok &= v.ok;
        parts.push(format!("{name} {}", if v.ok { "ok" } else { v.failure.as_deref().unwrap_or("failed") }));
    }
    Ok((ok, parts.join(", ")))
}

fn involution_pairs(_: &TrackerConfig) -> Result<(bool, String)> {
    let names = ["grassmannian-2-4", "secant-rnc4", "sym-det-3x3", "det-3x3", "fourfold-minus", "linear-2-plane"];
    let mut bad = Vec::new();
    for name in names {
        let b = BinaryForm::new(serde_json::from_value(catalog::expected(name, "bidegree").context("fixture")?.clone())?);
        let s = BinaryForm::new(serde_json::from_value(catalog::expected(name, "sectional").context("fixture")?.clone())?);
        if b.s_from_b()? != s || s.b_from_s()? != b || b.s_from_b()?.b_from_s()? != b {
            bad.push(name);
        }
    }
    let detail = if bad.is_empty() { "6/6 pairs map to each other".to_string() } else { format!("mismatch: {bad:?}") };
    Ok((bad.is_empty(), detail))
}

fn twisted_cubic(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let spec = catalog::twisted_cubic(cfg.seed);
    let r = ml_degree(&spec, cfg, 3)?;
    Ok((r.ml_degree == 13, format!("counts {:?}, want 13", r.per_trial_counts)))
}

const HAIR: [[f64; 3]; 3] = [[51.0, 45.0, 33.0], [28.0, 30.0, 29.0], [15.0, 27.0, 38.0]];

fn em_hair(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let u: Vec<Vec<f64>> = HAIR.iter().map(|r| r.to_vec()).collect();
    let res = em_mixture(&u, 2, MixtureParams::random(3, 3, 2, cfg.seed), 200, 0.0)?;
    let tr = &res.log_lik_trace;
    let monotone = tr.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs());
    let pc: Vec<Vec<mlgeom::C64>> = res.p.iter().map(|r| r.iter().map(|&x| mlgeom::C64::new(x, 0.0)).collect()).collect();
    let rank = numerical_rank(&pc);
    let ok = monotone && res.iterations >= 100 && rank == 2;
    Ok((ok, format!("{} iterations, monotone {monotone}, final log-likelihood {:.6}, rank {rank}", res.iterations, tr[tr.len() - 1])))
}

fn three_by_four(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let u = generic_matrix(&mut seeded(cfg.seed), 3, 4);
    let res = rank_critical_points_parameter(3, 4, 2, &u, cfg)?;
    let d = duality_pairing(&res.points, &res.points, &u, 1e-6)?;
    let ok = res.points.len() == 26 && d.perfect && d.max_residual < 1e-6;
    Ok((ok, format!("{} points (want 26); self-dual pairing perfect {} max residual {:.1e}", res.points.len(), d.perfect, d.max_residual)))
}

fn secant(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let s = sectional_ml_degree(&catalog::variety("secant-rnc4")?, cfg)?.form;
    let b = s.b_from_s()?;
    Ok((s.coeffs == [12, 30, 18, 3, 0] && b.coeffs == [12, 15, 12, 3, 0], format!("S = {s}, B = {b}")))
}

/// Supermodularity with the relabelings written out on index triples.
fn supermodular_oracle(p: &[f64; 8]) -> bool {
    let at = |i: usize, j: usize, k: usize| p[4 * (i - 1) + 2 * (j - 1) + (k - 1)];
    let cell = |s: [bool; 3]| {
        let f = |x: usize, flip: bool| if flip { 3 - x } else { x };
        let q = |i, j, k| at(f(i, s[0]), f(j, s[1]), f(k, s[2]));
        let ineq = [
            q(1, 1, 1) * q(2, 2, 2) - q(1, 1, 2) * q(2, 2, 1),
            q(1, 1, 1) * q(2, 2, 2) - q(1, 2, 1) * q(2, 1, 2),
            q(1, 1, 1) * q(2, 2, 2) - q(2, 1, 1) * q(1, 2, 2),
            q(1, 1, 2) * q(2, 2, 2) - q(1, 2, 2) * q(2, 1, 2),
            q(1, 2, 1) * q(2, 2, 2) - q(1, 2, 2) * q(2, 2, 1),
            q(2, 1, 1) * q(2, 2, 2) - q(2, 1, 2) * q(2, 2, 1),
            q(1, 1, 1) * q(1, 2, 2) - q(1, 1, 2) * q(1, 2, 1),
            q(1, 1, 1) * q(2, 1, 2) - q(1, 1, 2) * q(2, 1, 1),
            q(1, 1, 1) * q(2, 2, 1) - q(1, 2, 1) * q(2, 1, 1),
        ];
        ineq.iter().all(|&v| v >= -1e-14)
    };
    (0..8).any(|m| cell([m & 1 != 0, m & 2 != 0, m & 4 != 0]))
}

fn properties(cfg: &TrackerConfig) -> Result<(bool, String)> {
    let mut rng = seeded(cfg.seed);
    let mut fails = Vec::new();

    let spec = catalog::variety("grassmannian-2-4")?;
    let u = generic_data(&mut rng, 6);
    let sys = build_lagrange_system_any(&spec, &u, &mut seeded(cfg.seed))?.to_complex();
    let a = solve(&sys, cfg)?;
    let b = solve(&sys, cfg)?;
    if a.to_json().to_string() != b.to_json().to_string() {
        fails.push("tracker determinism");
    }

    let uf: Vec<f64> = u.iter().map(rational_to_f64).collect();
    let worst = a.regular().iter().map(|p| dlog_residual(&spec.generators, &uf, &p.p)).fold(0.0, f64::max);
    if !(worst < 1e-8) {
        fails.push("dlog residual");
    }

    let model = catalog::linear("linear-2-plane")?;
    let m = arrangement_matroid(&model)?;
    let base = broken_circuit_hvector(&m, &(0..m.size()).collect::<Vec<_>>())?;
    for _ in 0..10 {
        let mut order: Vec<usize> = (0..m.size()).collect();
        order.shuffle(&mut rng);
        if broken_circuit_hvector(&m, &order)? != base {
            fails.push("h-vector order independence");
            break;
        }
    }

    for name in ["cubic-surface", "fourfold-minus"] {
        let t = catalog::toric(name)?;
        let u = generic_data(&mut rng, t.len());
        let r = birch_mle(&t, &u, 1e-12)?;
        if r.objective_trace.windows(2).any(|w| w[1] > w[0] + 1e-12 * w[0].abs()) {
            fails.push("GP monotonicity");
            break;
        }
    }

    for _ in 0..500 {
        let mut p = [0.0f64; 8];
        for x in p.iter_mut() {
            *x = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) };
        }
        let s: f64 = p.iter().sum();
        if s == 0.0 {
            continue;
        }
        p.iter_mut().for_each(|x| *x /= s);
        if supermodular_222(&p) != supermodular_oracle(&p) {
            fails.push("supermodularity brute force");
            break;
        }
    }
    let detail = if fails.is_empty() {
        "determinism, dlog residual, h-vector order, GP monotonicity, supermodularity".to_string()
    } else {
        format!("failed: {fails:?}")
    };
    Ok((fails.is_empty(), detail))
}

/// Outcomes as a JSON table.
pub fn to_json(outcomes: &[Outcome]) -> Value {
    serde_json::json!({
        "criteria": outcomes,
        "passed": outcomes.iter().filter(|o| o.status == Status::Pass).count(),
        "failed": outcomes.iter().filter(|o| o.status == Status::Fail).count(),
        "skipped": outcomes.iter().filter(|o| o.status == Status::Skip).count(),
    })
}
