use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bartlett(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bartlett"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("launch bartlett")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn bergman_spectrum_limit() {
    let dir = tempfile::tempdir().unwrap();
    let o = bartlett(dir.path(), &["spectrum", "--kernel", "bergman", "--grid", "0:2:0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("parameter,density\n"));
    let j = read_json(&dir.path().join("spectrum.json"));
    let limit = j["classification"]["limit_estimate"].as_f64().unwrap();
    assert!((limit - (1.0 - std::f64::consts::FRAC_PI_4)).abs() < 1e-3);
    assert_eq!(j["classification"]["verdict"], "not_hyperuniform");
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["artifacts"], serde_json::json!(["spectrum.csv", "spectrum.json"]));
}

#[test]
fn ginibre_is_hyperuniform() {
    let dir = tempfile::tempdir().unwrap();
    let o = bartlett(dir.path(), &["spectrum", "--kernel", "ginibre", "--grid", "0,1"]);
    assert!(o.status.success());
    let j = read_json(&dir.path().join("spectrum.json"));
    assert_eq!(j["classification"]["verdict"], "hyperuniform");
}

#[test]
fn invalid_inputs_exit_2_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["spectrum", "--kernel", "poisson", "--grid", "1:2"][..],
        &["spectrum", "--kernel", "weyl-heisenberg", "--lambda-wh", "3.141592653589793"][..],
        &["spectrum", "--kernel", "poisson", "--space", "euclidean7"][..],
        &["heat", "--kernel", "bergman", "--taus", "1,2,80"][..],
        &["nv", "--process", "poisson", "--replicas", "1"][..],
        &["verify", "--suite", "12"][..],
    ] {
        let o = bartlett(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let e = read_json(&dir.path().join("error.json"));
        assert_eq!(e["error"]["kind"], "validation", "{args:?}");
    }
}

#[test]
fn complementary_mass_is_not_hyperuniform() {
    let dir = tempfile::tempdir().unwrap();
    let o = bartlett(dir.path(), &["heat", "--kernel", "ginibre", "--complementary", "0.4:1"]);
    assert_eq!(o.status.code(), Some(2), "complementary series only exists on the disk");
    let o = bartlett(dir.path(), &["heat", "--kernel", "poisson", "--complementary", "0.4:1"]);
    assert!(o.status.success());
    let j = read_json(&dir.path().join("heat.json"));
    assert_eq!(j["equivalence"]["heat_verdict"], "not_hyperuniform");
    assert_eq!(j["equivalence"]["spectral_verdict"], "not_hyperuniform");
}

#[test]
fn poisson_variance_is_volume() {
    let dir = tempfile::tempdir().unwrap();
    let o = bartlett(dir.path(), &["variance", "--kernel", "poisson", "--space", "euclidean2", "--params", "1,2"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("variance.csv")).unwrap();
    let v: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!((v[0] - std::f64::consts::PI).abs() < 1e-8);
    assert!((v[1] - 4.0 * std::f64::consts::PI).abs() < 1e-8);
}

#[test]
fn same_seed_same_bytes() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["nv", "--process", "poisson", "--radii", "0.5:1.5:0.5", "--replicas", "200", "--seed", "11"];
    assert!(bartlett(a.path(), &args).status.success());
    assert!(bartlett(b.path(), &args).status.success());
    let mut other = args;
    other[8] = "12";
    assert!(bartlett(c.path(), &other).status.success());
    let read = |d: &Path| fs::read(d.join("nv.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn sample_writes_points_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let o = bartlett(dir.path(), &["sample", "--process", "ginibre", "--n", "64", "--radius", "3", "--seed", "5", "--stream", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert!(csv.starts_with("x0,x1\n"));
    let j = read_json(&dir.path().join("points.json"));
    assert_eq!(j["count"].as_u64().unwrap() as usize, csv.lines().count() - 1);
    assert_eq!(j["provenance"]["seed"], 5);
    assert_eq!(j["provenance"]["stream_id"], 2);
}

#[test]
fn gaussian_panel_residuals_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = bartlett(dir.path(), &["gaussian", "--kernel", "synthetic", "--alpha", "4", "--replicas", "4000", "--seed", "3"]);
    assert!(o.status.success());
    let j = read_json(&dir.path().join("gaussian.json"));
    let res = j["characteristic_residuals"].as_array().unwrap();
    assert_eq!(res.len(), 5);
    assert!(res.iter().all(|r| r.as_f64().unwrap() < 0.05));
}

#[test]
fn verify_single_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = bartlett(dir.path(), &["verify", "--suite", "2"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("suite 2: pass"));
    let s = read_json(&dir.path().join("summary.json"));
    assert_eq!(s["pass"], true);
    assert_eq!(s["seed"], 7);
    assert!(dir.path().join("c2_functional_equation.csv").exists());
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bartlett"))
        .args(["spectrum", "--kernel", "poisson", "--grid", "0,1"])
        .env("BARTLETT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("spectrum.csv").exists());
}
