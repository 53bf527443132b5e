use mlgeom::catalog;
use mlgeom::horn::horn_mle;
use mlgeom::rng::rational;
use mlgeom::BigRational;
use num::{One, Zero};
use proptest::prelude::*;

fn data(len: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((1i64..=60, 1i64..=7), len).prop_map(|v| v.into_iter().map(|(a, b)| rational(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn catalog_mles_sum_to_one_and_lie_on_the_model(name in prop::sample::select(catalog::HORN.to_vec()), u in data(8)) {
        let model = catalog::horn(name).unwrap();
        let p = horn_mle(&model, &u[..model.len()]).unwrap();
        prop_assert!(p.iter().cloned().sum::<BigRational>().is_one());
        for g in &model.implicit.as_ref().unwrap().generators {
            prop_assert!(g.eval(&p).unwrap().is_zero());
        }
    }

    #[test]
    fn independence_matches_margins(u in data(4)) {
        let p = horn_mle(&catalog::horn("indep22").unwrap(), &u).unwrap();
        let n: BigRational = u.iter().cloned().sum();
        let rows = [&u[0] + &u[1], &u[2] + &u[3]];
        let cols = [&u[0] + &u[2], &u[1] + &u[3]];
        for i in 0..2 {
            for j in 0..2 {
                prop_assert_eq!(&p[2 * i + j], &(&rows[i] * &cols[j] / (&n * &n)));
            }
        }
    }
}

#[test]
fn vanishing_form_is_reported() {
    let model = catalog::horn("disc-cubic").unwrap();
    // ℓ_0 = −u0 − 2u1 − u2 − 2u3 never vanishes for positive data, but a
    // signed vector can hit it
    let u = [2, -1, 0, 0].map(|x| rational(x, 1));
    assert!(horn_mle(&model, &u).is_err());
}
