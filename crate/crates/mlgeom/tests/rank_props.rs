use mlgeom::rankdual::{em_mixture, log_likelihood, supermodular_222, MixtureParams};
use proptest::prelude::*;

/// All 2×2 minors of every flattening and slice must be nonnegative after
/// some relabeling, written out with explicit index triples.
fn supermodular_brute(p: &[f64; 8]) -> bool {
    let slack = 1e-14 * p.iter().map(|x| x * x).sum::<f64>();
    for flips in 0..8 {
        let at = |i: usize, j: usize, k: usize| {
            let (i, j, k) = (i ^ (flips & 1), j ^ (flips >> 1 & 1), k ^ (flips >> 2 & 1));
            p[4 * i + 2 * j + k]
        };
        // x ∨ y and x ∧ y on {0,1}^3 for every incomparable pair
        let mut ok = true;
        for x in 0..8usize {
            for y in x + 1..8 {
                let (join, meet) = (x | y, x & y);
                if join == x || join == y {
                    continue;
                }
                let v = |z: usize| at(z >> 2 & 1, z >> 1 & 1, z & 1);
                if v(join) * v(meet) - v(x) * v(y) < -slack {
                    ok = false;
                }
            }
        }
        if ok {
            return true;
        }
    }
    false
}

fn tensor() -> impl Strategy<Value = [f64; 8]> {
    prop::array::uniform8(prop_oneof![1 => Just(0.0), 4 => 0.0f64..1.0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn supermodular_matches_lattice_definition(p in tensor()) {
        prop_assert_eq!(supermodular_222(&p), supermodular_brute(&p));
    }

    #[test]
    fn rank_one_tensors_are_supermodular(a in prop::array::uniform2(0.01f64..1.0), b in prop::array::uniform2(0.01f64..1.0), c in prop::array::uniform2(0.01f64..1.0)) {
        let mut p = [0.0; 8];
        for i in 0..2 { for j in 0..2 { for k in 0..2 {
            p[4 * i + 2 * j + k] = a[i] * b[j] * c[k];
        }}}
        prop_assert!(supermodular_222(&p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn em_never_decreases_the_likelihood(u in prop::collection::vec(prop::collection::vec(0u32..50, 4), 3), seed in any::<u64>(), r in 1usize..=3) {
        let u: Vec<Vec<f64>> = u.into_iter().map(|row| row.into_iter().map(f64::from).collect()).collect();
        prop_assume!(u.iter().flatten().sum::<f64>() > 0.0);
        let res = em_mixture(&u, r, MixtureParams::random(3, 4, r, seed), 60, 0.0).unwrap();
        for w in res.log_lik_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0));
        }
        prop_assert!((log_likelihood(&u, &res.p) - res.log_lik_trace[res.log_lik_trace.len() - 1]).abs() < 1e-9);
        let total: f64 = res.p.iter().flatten().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
