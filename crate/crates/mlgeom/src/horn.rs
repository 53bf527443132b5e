//! Models of ML degree one through Horn uniformization: the MLE is an
//! alternating product of linear forms in the data.

use num::{BigRational, One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::critsys::{build_lagrange_system_any, rational_rank, VarietySpec};
use crate::error::{invalid, Error, Result};
use crate::poly::{rational_from_json, rational_to_f64, rational_to_json, QPoly};
use crate::rng::{child_seed, generic_data, seeded};
use crate::tracker::{multihom_path_count, solve, SolutionClass, StartKind, TrackerConfig};

/// `B` is `m×(n+1)`: row `j` holds the coefficients of the linear form
/// `ℓ_j(u) = Σ_i b_{ij} u_i` and column `k` the exponent vector `b_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HornModel {
    pub b: Vec<Vec<i64>>,
    pub c: Vec<BigRational>,
    pub implicit: Option<VarietySpec>,
}

impl HornModel {
    pub fn new(b: Vec<Vec<i64>>, c: Vec<BigRational>, implicit: Option<VarietySpec>) -> Result<Self> {
        let cols = c.len();
        if cols == 0 || b.is_empty() || b.iter().any(|r| r.len() != cols) {
            return invalid("B must have one column per coefficient");
        }
        if c.iter().any(Zero::is_zero) {
            return invalid("Horn coefficients must be nonzero");
        }
        if let Some(s) = &implicit {
            if s.n + 1 != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: s.n + 1 });
            }
        }
        Ok(HornModel { b, c, implicit })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Values of the linear forms at `u`.
    pub fn linear_forms(&self, u: &[BigRational]) -> Vec<BigRational> {
        self.b
            .iter()
            .map(|row| row.iter().zip(u).map(|(&b, x)| BigRational::from_integer(b.into()) * x).sum())
            .collect()
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let b = crate::toric::int_matrix_from_json(v.get("B").ok_or_else(|| Error::Parse("missing \"B\"".into()))?)?;
        let c = v
            .get("c")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"c\" array".into()))?
            .iter()
            .map(rational_from_json)
            .collect::<Result<Vec<_>>>()?;
        let implicit = match v.get("implicit") {
            None | Some(Value::Null) => None,
            Some(s) => Some(VarietySpec::from_json(s)?),
        };
        Self::new(b, c, implicit)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "B": self.b,
            "c": self.c.iter().map(rational_to_json).collect::<Vec<_>>(),
            "implicit": self.implicit.as_ref().map(VarietySpec::to_json),
        })
    }
}

/// `p̂_k = c_k ∏_j ℓ_j(u)^{b_{kj}}`, exactly.
pub fn horn_mle(model: &HornModel, u: &[BigRational]) -> Result<Vec<BigRational>> {
    if u.len() != model.len() {
        return Err(Error::DimensionMismatch { expected: model.len(), got: u.len() });
    }
    let forms = model.linear_forms(u);
    for (j, l) in forms.iter().enumerate() {
        if l.is_zero() && model.b[j].iter().any(|&e| e != 0) {
            return Err(Error::Resonance { index: j });
        }
    }
    Ok((0..model.len())
        .map(|k| {
            let mut v = model.c[k].clone();
            for (j, l) in forms.iter().enumerate() {
                let e = model.b[j][k];
                if e != 0 {
                    v *= num::traits::pow(l.clone(), e.unsigned_abs() as usize).pow(e.signum() as i32);
                }
            }
            v
        })
        .collect())
}

/// Read `(B, c)` off `Δ / (pivot_coeff · x^{pivot_exp}) = 1 − Σ c_k x^{b_k}`.
/// Columns follow the term order of `Δ` (descending exponents), skipping
/// the pivot.
pub fn parse_scaled_discriminant(delta: &QPoly, pivot_coeff: &BigRational, pivot_exp: &[u32]) -> Result<HornModel> {
    let m = delta.nvars();
    if pivot_exp.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: pivot_exp.len() });
    }
    if pivot_coeff.is_zero() {
        return invalid("zero pivot");
    }
    let constant = delta.coeff(pivot_exp) / pivot_coeff;
    if !constant.is_one() {
        return Err(Error::InvalidInput(format!("constant term after division is {constant}, not 1")));
    }
    let mut cols: Vec<Vec<i64>> = Vec::new();
    let mut c = Vec::new();
    let mut terms: Vec<_> = delta.terms().filter(|(e, _)| e.as_slice() != pivot_exp).collect();
    terms.sort_by(|a, b| b.0.cmp(a.0));
    for (e, coef) in terms {
        cols.push(e.iter().zip(pivot_exp).map(|(&a, &b)| a as i64 - b as i64).collect());
        c.push(-(coef / pivot_coeff));
    }
    if c.is_empty() {
        return invalid("no monomials besides the pivot");
    }
    let b: Vec<Vec<i64>> = (0..m).map(|j| cols.iter().map(|col| col[j]).collect()).collect();
    HornModel::new(b, c, None)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HornVerification {
    pub ok: bool,
    pub trials: usize,
    /// Data vector of the first failed check.
    pub witness: Option<Vec<String>>,
    pub failure: Option<String>,
    /// Off-H regular count from path tracking (first trial), when run.
    pub tracker_count: Option<usize>,
    pub tracker_max_deviation: Option<f64>,
}

/// Check that the Horn MLE sums to one, lies on the implicit model and is
/// a critical point there (exact rank test), for `trials` random positive
/// data vectors. On the first trial the critical equations are also
/// solved numerically when the path count stays below the cap; the
/// unique regular solution must match.
pub fn verify_ml_degree_one(model: &HornModel, trials: usize, cfg: &TrackerConfig) -> Result<HornVerification> {
    let mut out = HornVerification {
        ok: true,
        trials,
        witness: None,
        failure: None,
        tracker_count: None,
        tracker_max_deviation: None,
    };
    for t in 0..trials {
        let mut rng = seeded(child_seed(cfg.seed, 0x4e11 + t as u64));
        let u = generic_data(&mut rng, model.len());
        let fail = |out: &mut HornVerification, msg: String| {
            out.ok = false;
            out.witness = Some(u.iter().map(ToString::to_string).collect());
            out.failure = Some(msg);
        };
        let p = match horn_mle(model, &u) {
            Ok(p) => p,
            Err(e) => {
                fail(&mut out, e.to_string());
                break;
            }
        };
        let total: BigRational = p.iter().cloned().sum();
        if !total.is_one() {
            fail(&mut out, format!("coordinates sum to {total}"));
            break;
        }
        let Some(spec) = &model.implicit else { continue };
        if let Some(msg) = exact_criticality_failure(spec, &p, &u)? {
            fail(&mut out, msg);
            break;
        }
        if t == 0 {
            let (count, dev) = tracker_check(spec, &u, &p, cfg)?;
            out.tracker_count = count;
            out.tracker_max_deviation = dev;
            if count.is_some_and(|c| c != 1) || dev.is_some_and(|d| d > 1e-8) {
                fail(&mut out, format!("tracker found {count:?} critical points, deviation {dev:?}"));
                break;
            }
        }
    }
    Ok(out)
}

/// `None` if `p` lies on the model, is a smooth point of it, and `u`
/// lies in the span of `p` and `p ⋆ ∇g_j(p)`.
fn exact_criticality_failure(spec: &VarietySpec, p: &[BigRational], u: &[BigRational]) -> Result<Option<String>> {
    for (j, g) in spec.generators.iter().enumerate() {
        if !g.eval(p)?.is_zero() {
            return Ok(Some(format!("generator {j} does not vanish at the estimate")));
        }
    }
    if p.iter().any(|x| !x.is_positive()) {
        return Ok(Some("estimate is not positive".into()));
    }
    let grads: Vec<Vec<BigRational>> = spec
        .generators
        .iter()
        .map(|g| (0..p.len()).map(|i| g.diff(i).eval(p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    if rational_rank(grads.clone()) != spec.codim {
        return Ok(Some("estimate is a singular point of the model".into()));
    }
    let mut rows: Vec<Vec<BigRational>> = vec![p.to_vec()];
    rows.extend(grads.iter().map(|g| g.iter().zip(p).map(|(a, b)| a * b).collect()));
    let base = rational_rank(rows.clone());
    rows.push(u.to_vec());
    if rational_rank(rows) != base {
        return Ok(Some("data is not in the span of the estimate and its normal directions".into()));
    }
    Ok(None)
}

fn tracker_check(
    spec: &VarietySpec,
    u: &[BigRational],
    p: &[BigRational],
    cfg: &TrackerConfig,
) -> Result<(Option<usize>, Option<f64>)> {
    let mut rng = seeded(cfg.seed);
    let sys = build_lagrange_system_any(spec, u, &mut rng)?.to_complex();
    let paths = multihom_path_count(&sys);
    if paths > cfg.max_paths {
        return Ok((None, None));
    }
    let tc = TrackerConfig { start_kind: StartKind::Multihomogeneous, ..cfg.clone() };
    let sol = solve(&sys, &tc)?;
    let reg = sol.distinct_p(SolutionClass::OffHRegular);
    let want: Vec<f64> = p.iter().map(rational_to_f64).collect();
    let dev = reg
        .iter()
        .map(|pt| pt.normalized_p().iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    Ok((Some(reg.len()), Some(dev)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_text;
    use crate::rng::rational;

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| rational(x, 1)).collect()
    }

    #[test]
    fn hardy_weinberg_closed_form() {
        let m = HornModel::new(vec![vec![2, 1, 0], vec![0, 1, 2], vec![-2, -2, -2]], q(&[1, 2, 1]), None).unwrap();
        assert_eq!(horn_mle(&m, &q(&[1, 2, 1])).unwrap(), vec![rational(1, 4), rational(1, 2), rational(1, 4)]);
        assert!(matches!(horn_mle(&m, &q(&[0, 0, 0])), Err(Error::Resonance { .. })));
    }

    #[test]
    fn discriminant_parsing() {
        let delta = parse_text("27*p0^2*p3^2 - 18*p0*p1*p2*p3 + 4*p0*p2^3 + 4*p1^3*p3 - p1^2*p2^2", Some(4)).unwrap();
        let m = parse_scaled_discriminant(&delta, &rational(27, 1), &[2, 0, 0, 2]).unwrap();
        let mut cols: Vec<(Vec<i64>, BigRational)> =
            (0..4).map(|k| ((0..4).map(|j| m.b[j][k]).collect(), m.c[k].clone())).collect();
        cols.sort();
        let mut want = vec![
            (vec![-1, 1, 1, -1], rational(2, 3)),
            (vec![-2, 3, 0, -1], rational(-4, 27)),
            (vec![-1, 0, 3, -2], rational(-4, 27)),
            (vec![-2, 2, 2, -2], rational(1, 27)),
        ];
        want.sort();
        assert_eq!(cols, want);
        let one_minus_x = parse_text("1 - p0", Some(1)).unwrap();
        let m = parse_scaled_discriminant(&one_minus_x, &rational(1, 1), &[0]).unwrap();
        assert_eq!((m.b.clone(), m.c.clone()), (vec![vec![1]], q(&[1])));
        let bad = parse_text("2 - p0", Some(1)).unwrap();
        assert!(parse_scaled_discriminant(&bad, &rational(1, 1), &[0]).is_err());
    }
}
