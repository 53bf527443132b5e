//! Named models and their expected invariants.
//!
//! Expected values live in `fixtures/catalog.json`; each carries a
//! `source` of `"published"` (a literature value) or `"derived"` (computed
//! here by an independent route and frozen).

use std::sync::OnceLock;

use num::BigRational;
use serde_json::Value;

use crate::critsys::VarietySpec;
use crate::error::{Error, Result};
use crate::horn::HornModel;
use crate::linalg::nullspace;
use crate::linmatroid::LinearModel;
use crate::poly::{det, parse_text, QPoly, SparsePoly};
use crate::rng::{int_in, rational, seeded};
use crate::toric::ToricModel;

#[derive(Clone, Debug)]
pub enum Model {
    Variety(VarietySpec),
    PlaneCurve(QPoly),
    Toric(ToricModel),
    Horn(HornModel),
    Linear(LinearModel),
}

pub const VARIETIES: &[&str] = &[
    "grassmannian-2-4",
    "det-3x3",
    "sym-det-3x3",
    "secant-rnc4",
    "hardy-weinberg",
    "indep22",
    "twisted-cubic",
];
pub const PLANE_CURVES: &[&str] = &["nodal-cubic", "cuspidal-cubic"];
pub const TORIC: &[&str] = &["cubic-surface", "cubic-surface-special", "fourfold-plus", "fourfold-minus"];
pub const HORN: &[&str] = &["hardy-weinberg", "indep22", "chain222", "disc-cubic"];
pub const LINEAR: &[&str] = &["linear-2-plane"];

fn q(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| rational(x, 1)).collect()
}

fn spec(n: usize, codim: usize, gens: &[&str]) -> VarietySpec {
    VarietySpec::from_text(n, codim, gens).expect("catalog polynomial")
}

fn poly_matrix(n: usize, rows: &[&[&str]]) -> Vec<Vec<QPoly>> {
    rows.iter().map(|r| r.iter().map(|s| parse_text(s, Some(n)).expect("catalog entry")).collect()).collect()
}

/// The 3×3 symmetric matrix model, coordinates `p11 p12 p13 p22 p23 p33`,
/// matrix with `2p_ii` on the diagonal.
pub fn sym_det_3x3() -> VarietySpec {
    let m = poly_matrix(6, &[&["2*p0", "p1", "p2"], &["p1", "2*p3", "p4"], &["p2", "p4", "2*p5"]]);
    VarietySpec::new(5, 1, vec![det(&m)]).expect("nonzero determinant")
}

/// Hankel cubic: the secant variety of the rational normal quartic.
pub fn secant_rnc4() -> VarietySpec {
    let m = poly_matrix(5, &[&["12*p0", "3*p1", "2*p2"], &["3*p1", "2*p2", "3*p3"], &["2*p2", "3*p3", "12*p4"]]);
    VarietySpec::new(4, 1, vec![det(&m)]).expect("nonzero determinant")
}

/// The twisted cubic in `P^3` after a linear change of coordinates with
/// integer entries drawn from `seed`: the 2×2 minors of
/// `((x0, x1, x2), (x1, x2, x3))` with `x = M p`.
pub fn twisted_cubic(seed: u64) -> VarietySpec {
    let mut rng = seeded(seed);
    loop {
        let m: Vec<Vec<i64>> = (0..4).map(|_| (0..4).map(|_| int_in(&mut rng, -9, 9)).collect()).collect();
        let mq: Vec<Vec<BigRational>> = m.iter().map(|r| q(r)).collect();
        if !nullspace(&mq, 4).is_empty() {
            continue;
        }
        let x: Vec<QPoly> = mq.iter().map(|r| SparsePoly::linear(r, rational(0, 1))).collect();
        let minor = |a: usize, b: usize, c: usize, d: usize| &(&x[a] * &x[b]) - &(&x[c] * &x[d]);
        let gens = vec![minor(0, 2, 1, 1), minor(0, 3, 1, 2), minor(1, 3, 2, 2)];
        return VarietySpec::new(3, 2, gens).expect("twisted cubic");
    }
}

/// Default seed for the catalog twisted cubic.
pub const TWISTED_CUBIC_SEED: u64 = 13;

pub fn variety(name: &str) -> Result<VarietySpec> {
    Ok(match name {
        "grassmannian-2-4" => spec(5, 1, &["p0*p5 - p1*p4 + p2*p3"]),
        "det-3x3" => spec(8, 1, &["p0*p4*p8 - p0*p5*p7 - p1*p3*p8 + p1*p5*p6 + p2*p3*p7 - p2*p4*p6"]),
        "sym-det-3x3" => sym_det_3x3(),
        "secant-rnc4" => secant_rnc4(),
        "hardy-weinberg" => spec(2, 1, &["4*p0*p2 - p1^2"]),
        "indep22" => spec(3, 1, &["p0*p3 - p1*p2"]),
        "twisted-cubic" => twisted_cubic(TWISTED_CUBIC_SEED),
        _ => return Err(unknown(name)),
    })
}

/// Plane cubics with one singular point at `(2:3:5)`, built from lines
/// through that point.
pub fn plane_curve(name: &str) -> Result<QPoly> {
    let text = match name {
        // ℓ1ℓ2ℓ3 + ℓ4ℓ5ℓ6 with ℓ1, ℓ2, ℓ4, ℓ5 through the point
        "nodal-cubic" => "(3*p0 - 2*p1)*(5*p1 - 3*p2)*(p0 + 2*p1 + 3*p2) + (5*p0 - 2*p2)*(p0 + p1 - p2)*(4*p0 - p1 + 2*p2)",
        // ℓ1²ℓ3 + ℓ4³
        "cuspidal-cubic" => "(3*p0 - 2*p1)^2*(p0 + 2*p1 + 3*p2) + (5*p0 - 2*p2)^3",
        _ => return Err(unknown(name)),
    };
    parse_text(text, Some(3))
}

pub const CUBIC_SURFACE_A: [[i64; 4]; 3] = [[0, 3, 0, 1], [0, 0, 3, 1], [1, 1, 1, 1]];

/// Coordinates `p11 p22 p33 p12 p13 p23`; the kernel is spanned by
/// `(1, 1, 1, −1, −1, −1)`.
pub const FOURFOLD_A: [[i64; 6]; 5] = [
    [1, 0, 0, 1, 0, 0],
    [0, 1, 0, 1, 0, 0],
    [0, 0, 1, 1, 0, 0],
    [1, 0, 0, 0, 1, 0],
    [1, 1, 1, 1, 1, 1],
];

pub fn toric(name: &str) -> Result<ToricModel> {
    let cubic = || CUBIC_SURFACE_A.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    let four = || FOURFOLD_A.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    match name {
        "cubic-surface" => ToricModel::new(cubic(), q(&[1, 2, 3, 5])),
        "cubic-surface-special" => ToricModel::new(cubic(), q(&[1, 1, 1, -3])),
        // c = 1 gives p11p22p33 = p12p13p23; flipping the sign of p11
        // gives p11p22p33 + p12p13p23 = 0
        "fourfold-minus" => ToricModel::with_unit_coefficients(four()),
        "fourfold-plus" => ToricModel::new(four(), q(&[-1, 1, 1, 1, 1, 1])),
        _ => Err(unknown(name)),
    }
}

pub fn horn(name: &str) -> Result<HornModel> {
    match name {
        "hardy-weinberg" => {
            HornModel::new(vec![vec![2, 1, 0], vec![0, 1, 2], vec![-2, -2, -2]], q(&[1, 2, 1]), Some(variety("hardy-weinberg")?))
        }
        // u00 u01 u10 u11
        "indep22" => HornModel::new(
            vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1], vec![1, 0, 1, 0], vec![0, 1, 0, 1], vec![-2, -2, -2, -2]],
            q(&[4, 4, 4, 4]),
            Some(variety("indep22")?),
        ),
        "chain222" => chain222(),
        "disc-cubic" => HornModel::new(
            vec![vec![-1, -2, -1, -2], vec![1, 3, 0, 2], vec![1, 0, 3, 2], vec![-1, -1, -2, -2]],
            vec![rational(2, 3), rational(-4, 27), rational(-4, 27), rational(1, 27)],
            Some(spec(3, 2, &["9*p1*p2 - 8*p0*p3", "p0^2 - 12*(p0 + p1 + p2 + p3)*p3"])),
        ),
        _ => Err(unknown(name)),
    }
}

/// `X_1 ⊥ X_3 | X_2` for three binary variables, coordinate `4i + 2j + k`:
/// `p̂_ijk = u_ij+ u_+jk / (u_+j+ u_+++)`.
fn chain222() -> Result<HornModel> {
    let idx = |i: usize, j: usize, k: usize| 4 * i + 2 * j + k;
    let mut b = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            b.push((0..8).map(|c| i64::from(c / 4 == i && (c / 2) % 2 == j)).collect());
        }
    }
    for j in 0..2 {
        for k in 0..2 {
            b.push((0..8).map(|c| i64::from((c / 2) % 2 == j && c % 2 == k)).collect());
        }
    }
    for j in 0..2 {
        b.push((0..8).map(|c| -i64::from((c / 2) % 2 == j)).collect());
    }
    b.push(vec![-1; 8]);
    let implicit = VarietySpec::new(
        7,
        2,
        vec![
            parse_text(&format!("p{}*p{} - p{}*p{}", idx(0, 0, 0), idx(1, 0, 1), idx(0, 0, 1), idx(1, 0, 0)), Some(8))?,
            parse_text(&format!("p{}*p{} - p{}*p{}", idx(0, 1, 0), idx(1, 1, 1), idx(0, 1, 1), idx(1, 1, 0)), Some(8))?,
        ],
    )?;
    HornModel::new(b, q(&[1; 8]), Some(implicit))
}

pub fn linear(name: &str) -> Result<LinearModel> {
    match name {
        "linear-2-plane" => LinearModel::from_ints(&[&[1, 0, 0, 2, 5], &[0, 1, 0, 3, -1], &[0, 0, 1, -4, 7]]),
        _ => Err(unknown(name)),
    }
}

/// Resolve a model name across all families; variety names win over Horn
/// names, which share `hardy-weinberg` and `indep22`.
pub fn lookup(name: &str) -> Result<Model> {
    let name = name.strip_prefix("catalog:").unwrap_or(name);
    if VARIETIES.contains(&name) {
        return variety(name).map(Model::Variety);
    }
    if PLANE_CURVES.contains(&name) {
        return plane_curve(name).map(Model::PlaneCurve);
    }
    if TORIC.contains(&name) {
        return toric(name).map(Model::Toric);
    }
    if HORN.contains(&name) {
        return horn(name).map(Model::Horn);
    }
    if LINEAR.contains(&name) {
        return linear(name).map(Model::Linear);
    }
    Err(unknown(name))
}

fn unknown(name: &str) -> Error {
    Error::InvalidInput(format!("unknown catalog model {name:?}"))
}

/// The parsed fixture file.
pub fn fixtures() -> &'static Value {
    static F: OnceLock<Value> = OnceLock::new();
    F.get_or_init(|| serde_json::from_str(include_str!("../fixtures/catalog.json")).expect("valid fixture JSON"))
}

/// Expected value `key` of model `name`, without its source tag.
pub fn expected(name: &str, key: &str) -> Option<&'static Value> {
    fixtures().get(name)?.get(key)?.get("value")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::horn_mle;

    #[test]
    fn every_name_resolves() {
        for n in VARIETIES.iter().chain(PLANE_CURVES).chain(TORIC).chain(LINEAR) {
            lookup(n).unwrap();
        }
        for n in HORN {
            horn(n).unwrap();
        }
        assert!(lookup("catalog:grassmannian-2-4").is_ok());
        assert!(lookup("no-such-model").is_err());
    }

    #[test]
    fn fixture_values_are_tagged() {
        for (name, entry) in fixtures().as_object().unwrap() {
            for (key, v) in entry.as_object().unwrap() {
                let src = v.get("source").and_then(Value::as_str);
                assert!(matches!(src, Some("published" | "derived")), "{name}.{key} lacks a source");
                assert!(v.get("value").is_some(), "{name}.{key} lacks a value");
            }
        }
        assert_eq!(expected("grassmannian-2-4", "mlDegree"), Some(&Value::from(4)));
    }

    #[test]
    fn sym_det_expands() {
        let want = parse_text("8*p0*p3*p5 - 2*p0*p4^2 - 2*p1^2*p5 + 2*p1*p2*p4 - 2*p2^2*p3", Some(6)).unwrap();
        assert_eq!(sym_det_3x3().generators[0], want);
    }

    #[test]
    fn horn_closed_forms() {
        let ones = q(&[1; 8]);
        assert!(horn_mle(&horn("chain222").unwrap(), &ones).unwrap().iter().all(|x| *x == rational(1, 8)));
        let p = horn_mle(&horn("disc-cubic").unwrap(), &q(&[0, 0, 0, 1])).unwrap();
        assert_eq!(p, vec![rational(2, 3), rational(4, 27), rational(4, 27), rational(1, 27)]);
        let p = horn_mle(&horn("indep22").unwrap(), &q(&[1, 2, 3, 4])).unwrap();
        assert_eq!(p, vec![rational(3, 25), rational(9, 50), rational(7, 25), rational(21, 50)]);
    }
}
