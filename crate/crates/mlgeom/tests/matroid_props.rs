use mlgeom::linmatroid::{broken_circuit_hvector, characteristic_polynomial, Matroid};
use mlgeom::rng::rational;
use num::BigInt;
use proptest::prelude::*;

/// Rank by fraction-free elimination over i128.
fn int_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            let (a, b) = (m[rank][c], m[i][c]);
            for k in 0..cols {
                m[i][k] = m[i][k] * a - m[rank][k] * b;
            }
            let g = m[i].iter().fold(0i128, |g, &x| num::integer::gcd(g, x));
            if g > 1 {
                m[i].iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    rank
}

/// Whitney's subset expansion `χ(q) = Σ_S (−1)^{|S|} q^{r − rk S}`.
fn whitney(vectors: &[Vec<i64>]) -> Vec<i64> {
    let n = vectors.len();
    let r = int_rank(vectors);
    let mut c = vec![0i64; r + 1];
    for mask in 0u32..1 << n {
        let sub: Vec<Vec<i64>> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| vectors[i].clone()).collect();
        let k = r - int_rank(&sub);
        c[k] += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
    }
    c
}

fn vectors() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (2usize..=3).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-3i64..=3, d), 3..=7))
}

fn matroid(v: &[Vec<i64>]) -> Matroid {
    Matroid::from_vectors(v.iter().map(|r| r.iter().map(|&x| rational(x, 1)).collect()).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn characteristic_polynomial_matches_subset_expansion(v in vectors()) {
        let m = matroid(&v);
        prop_assume!(m.loops().is_empty());
        let chi = characteristic_polynomial(&m).unwrap();
        let want: Vec<BigInt> = whitney(&v).into_iter().map(BigInt::from).collect();
        let mut got = chi.coeffs.clone();
        got.resize(want.len().max(got.len()), BigInt::from(0));
        let mut want = want;
        want.resize(got.len(), BigInt::from(0));
        prop_assert_eq!(got, want);
    }

    #[test]
    fn hvector_does_not_depend_on_the_order(v in vectors(), perm in Just((0..7).collect::<Vec<usize>>()).prop_shuffle()) {
        let m = matroid(&v);
        prop_assume!(m.rank() > 0 && m.loops().is_empty());
        let id: Vec<usize> = (0..v.len()).collect();
        let order: Vec<usize> = perm.into_iter().filter(|&i| i < v.len()).collect();
        prop_assert_eq!(broken_circuit_hvector(&m, &id).unwrap(), broken_circuit_hvector(&m, &order).unwrap());
    }

    #[test]
    fn characteristic_coefficients_alternate_and_are_log_concave(v in vectors()) {
        let m = matroid(&v);
        prop_assume!(m.loops().is_empty());
        let chi = characteristic_polynomial(&m).unwrap();
        let r = chi.coeffs.len() - 1;
        let w: Vec<BigInt> = chi.coeffs.iter().enumerate()
            .map(|(k, c)| if (r - k) % 2 == 0 { c.clone() } else { -c.clone() })
            .collect();
        prop_assert!(w.iter().all(|x| *x >= BigInt::from(0)));
        for k in 1..r {
            prop_assert!(&w[k] * &w[k] >= &w[k - 1] * &w[k + 1]);
        }
    }
}

#[test]
fn uniform_matroids() {
    // U(2,3): three lines through a point
    let m = Matroid::uniform(2, 3).unwrap();
    assert_eq!(characteristic_polynomial(&m).unwrap().coeffs, [2, -3, 1].map(BigInt::from));
    // U(3,6) has h = (1, 3, 6)
    let m = Matroid::uniform(3, 6).unwrap();
    assert_eq!(broken_circuit_hvector(&m, &[5, 2, 0, 4, 1, 3]).unwrap(), [1, 3, 6]);
}
