use mlgeom::catalog;
use mlgeom::poly::rational_to_f64;
use mlgeom::rng::rational;
use mlgeom::toric::{birch_mle, normalized_volume, ToricModel};
use mlgeom::BigRational;
use proptest::prelude::*;

fn data(len: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec(1i64..=500, len).prop_map(|v| v.into_iter().map(|x| rational(x, 1)).collect())
}

fn margins(a: &[Vec<i64>], p: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(p).map(|(&x, y)| x as f64 * y).sum()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn birch_point_matches_sufficient_statistics(
        name in prop::sample::select(vec!["cubic-surface", "fourfold-minus", "fourfold-plus"]),
        u in data(6),
    ) {
        let t = catalog::toric(name).unwrap();
        prop_assume!(t.c().iter().all(|c| c > &rational(0, 1)));
        let u = &u[..t.len()];
        let r = birch_mle(&t, u, 1e-12).unwrap();
        let total: f64 = u.iter().map(rational_to_f64).sum();
        let uh: Vec<f64> = u.iter().map(|x| rational_to_f64(x) / total).collect();
        for (x, y) in margins(t.a(), &r.p).iter().zip(margins(t.a(), &uh)) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((r.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs().max(1.0)));
    }
}

#[test]
fn independence_has_a_closed_form() {
    let a = vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1], vec![1, 0, 1, 0], vec![0, 1, 0, 1]];
    let t = ToricModel::with_unit_coefficients(a).unwrap();
    let u = [3, 5, 7, 11].map(|x| rational(x, 1));
    let r = birch_mle(&t, &u, 1e-13).unwrap();
    let (n, rows, cols) = (26.0, [8.0, 18.0], [10.0, 16.0]);
    for i in 0..2 {
        for j in 0..2 {
            assert!((r.p[2 * i + j] - rows[i] * cols[j] / (n * n)).abs() < 1e-12);
        }
    }
}

#[test]
fn volumes_of_small_configurations() {
    // unit square: two unimodular triangles
    assert_eq!(normalized_volume(&[vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![1, 1, 1, 1]]).unwrap(), 2);
    // segment [0, 3] with only the endpoints and 1: lattice index does not matter
    assert_eq!(normalized_volume(&[vec![0, 1, 3], vec![1, 1, 1]]).unwrap(), 3);
    // points 0, 2, 4 generate 2Z; in that lattice the segment has length 2
    assert_eq!(normalized_volume(&[vec![0, 2, 4], vec![1, 1, 1]]).unwrap(), 2);
}
