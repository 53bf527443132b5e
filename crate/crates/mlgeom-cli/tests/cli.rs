use std::process::{Command, Output};

fn mlgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlgeom")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn horn_mle_by_name() {
    let out = mlgeom(&["horn-mle", "--model", "hardy-weinberg", "--u", "1,2,1"]);
    assert!(out.status.success());
    assert_eq!(json(&out), serde_json::json!(["1/4", "1/2", "1/4"]));
}

#[test]
fn unknown_model_is_an_input_error() {
    let out = mlgeom(&["horn-mle", "--model", "no-such-model", "--u", "1,2,1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-model"));
}

#[test]
fn malformed_json_is_an_input_error() {
    let path = std::env::temp_dir().join(format!("mlgeom-bad-{}.json", std::process::id()));
    std::fs::write(&path, "{ not json").unwrap();
    let out = mlgeom(&["mldegree", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn grassmannian_degree_is_deterministic() {
    let args = ["mldegree", "catalog:grassmannian-2-4", "--trials", "3", "--seed", "7"];
    let a = mlgeom(&args);
    let b = mlgeom(&args);
    assert!(a.status.success());
    assert_eq!(json(&a)["mlDegree"], 4);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn formulas_and_volumes() {
    assert_eq!(json(&mlgeom(&["ci-formula", "3", "2,2,2"]))["mlDegree"], "8");
    assert_eq!(json(&mlgeom(&["toric-volume", "cubic-surface"]))["normalizedVolume"], 3);
    let m = json(&mlgeom(&["matroid", "linear-2-plane"]));
    assert_eq!(m["hvector"], serde_json::json!([1, 3, 6]));
}

#[test]
fn toric_mle_from_files() {
    let dir = std::env::temp_dir();
    let a = dir.join(format!("mlgeom-a-{}.json", std::process::id()));
    let u = dir.join(format!("mlgeom-u-{}.json", std::process::id()));
    // independence model of a 2×2 table
    std::fs::write(&a, "[[1,1,0,0],[0,0,1,1],[1,0,1,0],[0,1,0,1]]").unwrap();
    std::fs::write(&u, "[1,2,3,4]").unwrap();
    let out = mlgeom(&["toric-mle", a.to_str().unwrap(), "ones", u.to_str().unwrap()]);
    std::fs::remove_file(&a).ok();
    std::fs::remove_file(&u).ok();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p: Vec<f64> = serde_json::from_value(json(&out)["p"].clone()).unwrap();
    let want = [12.0 / 100.0, 18.0 / 100.0, 28.0 / 100.0, 42.0 / 100.0];
    for (x, w) in p.iter().zip(want) {
        assert!((x - w).abs() < 1e-10);
    }
}

#[test]
fn supermodular_inline() {
    let yes = json(&mlgeom(&["supermodular", "1,1,1,1,1,1,1,1"]));
    assert_eq!(yes["supermodular"], true);
    let no = json(&mlgeom(&["supermodular", "0,1,1,0,1,0,0,1"]));
    assert_eq!(no["supermodular"], false);
}
