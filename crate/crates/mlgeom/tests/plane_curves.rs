use mlgeom::critsys::VarietySpec;
use mlgeom::mldeg::{ml_degree, plane_curve_formula};
use mlgeom::poly::parse_text;
use mlgeom::tracker::TrackerConfig;

fn check(text: &str) {
    let f = parse_text(text, Some(3)).unwrap();
    let formula = plane_curve_formula(&f).unwrap().formula_ml_degree;
    let spec = VarietySpec::new(2, 1, vec![f]).unwrap();
    let tracked = ml_degree(&spec, &TrackerConfig::with_seed(5), 3).unwrap();
    assert_eq!(tracked.ml_degree as i64, formula, "{text}: per-trial {:?}", tracked.per_trial_counts);
}

#[test]
fn dense_curves() {
    check("3*p0^2 - 2*p0*p1 + 5*p1^2 + 7*p0*p2 - p1*p2 + 4*p2^2");
    check("p0^3 + 2*p1^3 - 3*p2^3 + 5*p0*p1*p2 - 4*p0^2*p1 + 7*p1^2*p2 - 6*p0*p2^2 + p0^2*p2 + 3*p1*p2^2 - 2*p0*p1^2");
}

#[test]
fn curves_through_special_points() {
    // through the coordinate point (0:0:1)
    check("3*p0^2 - 2*p0*p1 + 5*p1^2 + 7*p0*p2 - p1*p2");
    // tangent to p0 = 0
    check("p1^2 + 3*p0*p2 + 2*p0^2 - 5*p0*p1");
    // through (1:-1:0) on the line p0 + p1 + p2 = 0
    check("p0^2 + p0*p1 + 3*p2^2 - p1*p2 + 2*p0*p2");
}
