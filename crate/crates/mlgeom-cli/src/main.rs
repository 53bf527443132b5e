use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mlgeom::catalog::Model;
use mlgeom::critsys::build_lagrange_system_any;
use mlgeom::horn::{horn_mle, verify_ml_degree_one};
use mlgeom::linmatroid::{matroid_report, mle_linear};
use mlgeom::mldeg::{generic_ci_ml_degree, ml_bidegree, ml_degree, restriction_split_check, sectional_ml_degree};
use mlgeom::poly::{rational_to_f64, rational_to_json};
use mlgeom::rankdual::{
    duality_pairing, em_mixture, rank_critical_points, rank_critical_points_parameter, supermodular_222,
    symmetric_rank_critical_points, MixtureParams, RankCritical,
};
use mlgeom::rng::seeded;
use mlgeom::toric::{birch_mle, int_matrix_from_json, normalized_volume, toric_ml_degree, ToricModel};
use mlgeom::tracker::{solve, SolutionClass, StartKind, TrackerConfig};
use mlgeom::BigRational;
use mlgeom_cli::harness::{self, Status, Tier};
use mlgeom_cli::input::{load_horn, load_matrix, load_model, load_toric, load_variety, parse_vector, read_json};
use serde_json::{json, Value};

const EXIT_UNSTABLE: u8 = 2;
const EXIT_FINDING: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "mlgeom", version, about = "Maximum likelihood degrees and estimates for algebraic statistical models")]
struct Cli {
    #[command(flatten)]
    tracker: TrackerArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TrackerArgs {
    /// Seed for every random choice (data, slices, start systems, gamma).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Relative threshold below which a coordinate counts as zero.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Condition number above which an endpoint is singular.
    #[arg(long = "cond-threshold", global = true)]
    cond_threshold: Option<f64>,
    #[arg(long, global = true, value_enum)]
    start: Option<StartArg>,
    /// Cap on the number of total-degree paths.
    #[arg(long = "max-paths", global = true)]
    max_paths: Option<u128>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Td,
    Mhom,
}

impl TrackerArgs {
    fn config(&self) -> Result<TrackerConfig> {
        let mut cfg = TrackerConfig::with_seed(self.seed);
        if let Some(t) = self.tau {
            cfg.boundary_tau = t;
        }
        if let Some(c) = self.cond_threshold {
            cfg.singular_cond_threshold = c;
        }
        if let Some(s) = self.start {
            cfg.start_kind = match s {
                StartArg::Td => StartKind::TotalDegree,
                StartArg::Mhom => StartKind::Multihomogeneous,
            };
        }
        if let Some(m) = self.max_paths {
            cfg.max_paths = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// ML degree of a model by repeated solves with fresh generic data.
    Mldegree {
        model: String,
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
    /// Critical points of the likelihood for given data.
    Mle {
        model: String,
        /// Data as `u0,u1,...` or a JSON array file.
        #[arg(long)]
        u: String,
    },
    /// Sectional ML degrees from generic linear slices.
    Sectional { model: String },
    /// ML bidegree from the sectional ML degrees.
    Bidegree { model: String },
    /// ML degree of a generic complete intersection in P^n.
    CiFormula { n: usize, degrees: String },
    /// Compare ML(X) with ML(X ∩ {p_k = 0}) + ML(X with u_k = 0).
    SplitCheck {
        model: String,
        #[arg(long)]
        coord: usize,
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
    /// Characteristic polynomial, f/h-vectors and bidegree of a linear model.
    Matroid { model: String },
    /// MLE of a toric model by geometric programming.
    ToricMle {
        a: String,
        /// Coefficient vector, or `ones`.
        c: String,
        u: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// ML degree of a scaled toric model.
    ToricMldeg {
        a: String,
        c: String,
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
    /// Normalized volume of conv(A) in its lattice.
    ToricVolume { a: String },
    /// Exact MLE of an ML-degree-one model in Horn form.
    HornMle {
        model_pos: Option<String>,
        u_pos: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        u: Option<String>,
    },
    /// Check the Horn MLE against the model on random data.
    HornVerify {
        model_pos: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Critical points on the variety of m×n matrices of rank at most r.
    RankCritical {
        m: usize,
        n: usize,
        r: usize,
        data: String,
        /// Solve once for generic data and move to the given data.
        #[arg(long)]
        parameter: bool,
        /// Symmetric n×n matrices (m must equal n).
        #[arg(long)]
        symmetric: bool,
    },
    /// Match rank-r and rank-(m−r+1) critical points through P ⋆ Q = Ω.
    Duality {
        m: usize,
        n: usize,
        r: usize,
        data: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// EM for the rank-r mixture model.
    Em {
        data: String,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Supermodularity test for a 2×2×2 tensor given as 8 entries.
    Supermodular { data: String },
    /// Run the acceptance checks up to a tier.
    Reproduce {
        #[arg(long, default_value = "fast")]
        tier: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((v, code)) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let unstable = matches!(
                e.downcast_ref::<mlgeom::Error>(),
                Some(mlgeom::Error::NoConvergence(_))
            );
            ExitCode::from(if unstable { EXIT_UNSTABLE } else { EXIT_INPUT })
        }
    }
}

fn stable_code(stable: bool) -> u8 {
    if stable {
        0
    } else {
        EXIT_UNSTABLE
    }
}

fn rationals(q: &[BigRational]) -> Value {
    Value::Array(q.iter().map(rational_to_json).collect())
}

fn load_c(arg: &str, len: usize) -> Result<Vec<BigRational>> {
    if arg == "ones" {
        return Ok(vec![BigRational::from_integer(1.into()); len]);
    }
    parse_vector(arg)
}

/// `A` from a file or the catalog; a catalog model brings its own `c`
/// unless one is given.
fn toric_from(a: &str, c: &str) -> Result<ToricModel> {
    if std::path::Path::new(a).exists() {
        let m = int_matrix_from_json(&read_json(a)?)?;
        let cv = load_c(c, m.first().map_or(0, Vec::len))?;
        return Ok(ToricModel::new(m, cv)?);
    }
    let t = load_toric(a)?;
    if c == "-" {
        return Ok(t);
    }
    let cv = load_c(c, t.len())?;
    Ok(ToricModel::new(t.a().to_vec(), cv)?)
}

fn to_f64(m: &[Vec<BigRational>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect()
}

fn rank_json(res: &RankCritical) -> Value {
    json!({
        "count": res.points.len(),
        "points": res.points.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        "rejected": res.rejected,
        "pathStats": res.stats,
    })
}

fn run(cli: &Cli) -> Result<(Value, u8)> {
    let cfg = cli.tracker.config()?;
    let seed = cfg.seed;
    Ok(match &cli.command {
        Command::Mldegree { model, trials } => {
            let rep = match load_model(model)? {
                Model::Toric(t) => toric_ml_degree(&t, &cfg, *trials)?,
                _ => ml_degree(&load_variety(model)?, &cfg, *trials)?,
            };
            let code = stable_code(rep.is_stable());
            let mut v = serde_json::to_value(&rep)?;
            v["seed"] = json!(seed);
            (v, code)
        }
        Command::Mle { model, u } => {
            let u = parse_vector(u)?;
            match load_model(model)? {
                Model::Horn(h) => (json!({ "mle": rationals(&horn_mle(&h, &u)?) }), 0),
                Model::Toric(t) => {
                    let r = birch_mle(&t, &u, 1e-12)?;
                    (serde_json::to_value(r)?, 0)
                }
                Model::Linear(l) => {
                    let r = mle_linear(&l, &u, &cfg)?;
                    let mut v = points_json(&r.solutions);
                    v["resonant"] = json!(r.resonant);
                    (v, 0)
                }
                _ => {
                    let spec = load_variety(model)?;
                    let sys = build_lagrange_system_any(&spec, &u, &mut seeded(seed))?.to_complex();
                    (points_json(&solve(&sys, &cfg)?), 0)
                }
            }
        }
        Command::Sectional { model } => {
            let rep = sectional_ml_degree(&load_variety(model)?, &cfg)?;
            let code = stable_code(rep.stable);
            let mut v = serde_json::to_value(&rep)?;
            v["formText"] = json!(rep.form.to_string());
            v["seed"] = json!(seed);
            (v, code)
        }
        Command::Bidegree { model } => {
            let rep = ml_bidegree(&load_variety(model)?, &cfg)?;
            let code = stable_code(rep.sectional.stable);
            let mut v = serde_json::to_value(&rep)?;
            v["bidegreeText"] = json!(rep.bidegree.to_string());
            v["seed"] = json!(seed);
            (v, code)
        }
        Command::CiFormula { n, degrees } => {
            let ds: Vec<u64> = degrees
                .split(',')
                .map(|s| s.trim().parse().with_context(|| format!("bad degree '{s}'")))
                .collect::<Result<_>>()?;
            let d = generic_ci_ml_degree(*n, &ds)?;
            (json!({ "n": n, "degrees": ds, "mlDegree": d.to_string() }), 0)
        }
        Command::SplitCheck { model, coord, trials } => {
            let rep = restriction_split_check(&load_variety(model)?, &cfg, *coord, *trials)?;
            let code = if !rep.holds {
                EXIT_FINDING
            } else {
                stable_code(rep.stable)
            };
            let mut v = serde_json::to_value(&rep)?;
            v["seed"] = json!(seed);
            (v, code)
        }
        Command::Matroid { model } => {
            let l = mlgeom_cli::input::load_linear(model)?;
            let rep = matroid_report(&l)?;
            let mut v = serde_json::to_value(&rep)?;
            v["bidegreeText"] = json!(rep.bidegree.to_string());
            (v, 0)
        }
        Command::ToricMle { a, c, u, tol } => {
            let t = toric_from(a, c)?;
            let r = birch_mle(&t, &parse_vector(u)?, *tol)?;
            (serde_json::to_value(r)?, 0)
        }
        Command::ToricMldeg { a, c, trials } => {
            let rep = toric_ml_degree(&toric_from(a, c)?, &cfg, *trials)?;
            let code = stable_code(rep.is_stable());
            let mut v = serde_json::to_value(&rep)?;
            v["seed"] = json!(seed);
            (v, code)
        }
        Command::ToricVolume { a } => {
            let m = if std::path::Path::new(a).exists() {
                int_matrix_from_json(&read_json(a)?)?
            } else {
                load_toric(a)?.a().to_vec()
            };
            (json!({ "normalizedVolume": normalized_volume(&m)? }), 0)
        }
        Command::HornMle { model_pos, u_pos, model, u } => {
            let (Some(name), Some(data)) = (model.as_ref().or(model_pos.as_ref()), u.as_ref().or(u_pos.as_ref())) else {
                bail!("horn-mle needs a model and a data vector");
            };
            let h = load_horn(name)?;
            (rationals(&horn_mle(&h, &parse_vector(data)?)?), 0)
        }
        Command::HornVerify { model_pos, model, trials } => {
            let Some(name) = model.as_ref().or(model_pos.as_ref()) else { bail!("horn-verify needs a model") };
            let rep = verify_ml_degree_one(&load_horn(name)?, *trials, &cfg)?;
            let code = if rep.ok { 0 } else { EXIT_FINDING };
            let mut v = serde_json::to_value(&rep)?;
            v["seed"] = json!(seed);
            (v, code)
        }
        Command::RankCritical { m, n, r, data, parameter, symmetric } => {
            let u = load_matrix(data)?;
            check_shape(&u, *m, *n)?;
            let res = if *symmetric {
                if m != n {
                    bail!("a symmetric model needs m = n");
                }
                symmetric_rank_critical_points(*n, *r, &u, &cfg)?
            } else if *parameter {
                rank_critical_points_parameter(*m, *n, *r, &u, &cfg)?
            } else {
                rank_critical_points(*m, *n, *r, &u, &cfg)?
            };
            let mut v = rank_json(&res);
            v["seed"] = json!(seed);
            (v, 0)
        }
        Command::Duality { m, n, r, data, tol } => {
            let u = load_matrix(data)?;
            check_shape(&u, *m, *n)?;
            if *r == 0 || *r > *m.min(n) {
                bail!("rank must lie in 1..=min(m, n)");
            }
            let dual = m + 1 - r;
            let ps = rank_critical_points(*m, *n, *r, &u, &cfg)?;
            let qs = if dual == *r { ps.clone() } else { rank_critical_points(*m, *n, dual, &u, &cfg)? };
            let rep = duality_pairing(&ps.points, &qs.points, &u, *tol)?;
            let code = if rep.perfect { 0 } else { EXIT_FINDING };
            let v = json!({
                "rank": r,
                "dualRank": dual,
                "counts": [ps.points.len(), qs.points.len()],
                "pairing": rep,
                "seed": seed,
            });
            (v, code)
        }
        Command::Em { data, rank, iters, tol } => {
            let u = to_f64(&load_matrix(data)?);
            let init = MixtureParams::random(u.len(), u[0].len(), *rank, seed);
            let res = em_mixture(&u, *rank, init, *iters, *tol)?;
            let mut v = serde_json::to_value(&res)?;
            v["seed"] = json!(seed);
            (v, 0)
        }
        Command::Supermodular { data } => {
            let v = read_json(data).or_else(|_| Ok::<_, anyhow::Error>(Value::Array(parse_vector(data)?.iter().map(rational_to_json).collect())))?;
            let arr = v.as_array().context("expected 8 entries")?;
            let p: Vec<f64> = arr
                .iter()
                .map(|x| Ok(rational_to_f64(&mlgeom::poly::rational_from_json(x)?)))
                .collect::<Result<_>>()?;
            let p: [f64; 8] = p.try_into().map_err(|_| anyhow::anyhow!("expected 8 entries"))?;
            if p.iter().any(|&x| x < 0.0) {
                bail!("entries must be nonnegative");
            }
            (json!({ "supermodular": supermodular_222(&p) }), 0)
        }
        Command::Reproduce { tier } => {
            let t = Tier::parse(tier).with_context(|| format!("unknown tier '{tier}'"))?;
            let out = harness::run(t, seed, |o| eprintln!("{o}"));
            let code = if out.iter().any(|o| o.status == Status::Fail) { EXIT_FINDING } else { 0 };
            (harness::to_json(&out), code)
        }
    })
}

fn check_shape(u: &[Vec<BigRational>], m: usize, n: usize) -> Result<()> {
    if u.len() != m || u[0].len() != n {
        bail!("data matrix is {}×{}, expected {m}×{n}", u.len(), u[0].len());
    }
    Ok(())
}

fn points_json(sol: &mlgeom::tracker::SolutionSet) -> Value {
    let pts: Vec<Value> = sol
        .distinct_p(SolutionClass::OffHRegular)
        .iter()
        .map(|p| {
            let q = p.normalized_p();
            json!({
                "re": q.iter().map(|z| z.re).collect::<Vec<_>>(),
                "im": q.iter().map(|z| z.im).collect::<Vec<_>>(),
                "real": p.is_real(1e-8),
            })
        })
        .collect();
    json!({ "count": pts.len(), "critical": pts, "solutions": sol.to_json() })
}
