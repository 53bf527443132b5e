use mlgeom::rankdual::symmetric_rank_critical_points;
use mlgeom::rng::rational;
use mlgeom::tracker::TrackerConfig;
use mlgeom::BigRational;

fn matrix(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
    rows.iter().map(|r| r.iter().map(|&x| rational(x, 1)).collect()).collect()
}

#[test]
fn symmetric_counts() {
    let cfg = TrackerConfig::with_seed(3);
    let u3 = matrix(&[&[10, 9, 1], &[9, 21, 3], &[1, 3, 7]]);
    assert_eq!(symmetric_rank_critical_points(3, 1, &u3, &cfg).unwrap().points.len(), 1);
    let u4 = matrix(&[&[13, 4, 7, 2], &[4, 9, 5, 11], &[7, 5, 17, 3], &[2, 11, 3, 8]]);
    assert_eq!(symmetric_rank_critical_points(4, 3, &u4, &cfg).unwrap().points.len(), 37);
}
