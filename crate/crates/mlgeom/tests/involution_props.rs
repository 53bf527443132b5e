use mlgeom::poly::BinaryForm;
use proptest::prelude::*;

/// Sectional degrees from a bidegree by the defining identity, with no
/// polynomial division: `S(p,u)·(u+p) = u·B(p,u+p) + p·B(p,0)` evaluated
/// at integer points, then solved for the coefficients of S.
fn s_oracle(b: &[i64]) -> Vec<i64> {
    let n = b.len() - 1;
    let bf = |p: f64, u: f64| b.iter().enumerate().map(|(i, &c)| c as f64 * p.powi((n - i) as i32) * u.powi(i as i32)).sum::<f64>();
    // S(1,u) at u = 1..=n+1, then interpolate
    let xs: Vec<f64> = (1..=n + 1).map(|k| k as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&u| (u * bf(1.0, u + 1.0) + bf(1.0, 0.0)) / (u + 1.0)).collect();
    let m = nalgebra::DMatrix::from_fn(n + 1, n + 1, |r, c| xs[r].powi(c as i32));
    let sol = m.lu().solve(&nalgebra::DVector::from_vec(ys)).unwrap();
    sol.iter().map(|x| x.round() as i64).collect()
}

proptest! {
    #[test]
    fn maps_are_mutually_inverse(c in prop::collection::vec(-40i64..=40, 1..=7)) {
        let b = BinaryForm::new(c);
        let s = b.s_from_b().unwrap();
        prop_assert_eq!(s.b_from_s().unwrap(), b.clone());
        let back = b.b_from_s().unwrap();
        prop_assert_eq!(back.s_from_b().unwrap(), b);
    }

    #[test]
    fn forward_map_matches_interpolation(c in prop::collection::vec(0i64..=20, 1..=6)) {
        let s = BinaryForm::new(c.clone()).s_from_b().unwrap();
        prop_assert_eq!(s.coeffs, s_oracle(&c));
    }
}
