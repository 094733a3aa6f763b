use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PERTURBED: &str = r#"{"n":1,"terms":[{"exp":[1,0,0,0],"coeff":1.0},{"exp":[0,0,2,0],"coeff":-1.0},
{"exp":[0,0,0,2],"coeff":-1.0},{"exp":[0,1,1,0],"coeff":0.05}]}"#;

fn stadisc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stadisc")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&fs::read(dir.join(name)).unwrap()).unwrap()
}

fn quadric(dir: &Path) {
    let out = stadisc(dir, &["disc", "quadric", "--A", "identity", "--a", "0", "--v", "1", "--out", "d.json", "--surface-out", "q.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn quadric_disc_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    quadric(dir.path());
    let d = json(dir.path(), "d.json");
    assert_eq!(d["n"], 1);
    // a = 0, v = 1: f = (2 - 2 zeta, 1 - zeta)
    let f = &d["f_coeffs"];
    assert_eq!(f[0], serde_json::json!([[2.0, 0.0], [1.0, 0.0]]));
    assert_eq!(f[1], serde_json::json!([[-2.0, 0.0], [-1.0, 0.0]]));
    assert!(f.as_array().unwrap()[2..].iter().flat_map(|r| r.as_array().unwrap()).all(|c| c == &serde_json::json!([0.0, 0.0])));
    let m = json(dir.path(), "stadisc-disc-quadric.manifest.json");
    assert_eq!(m["exit_code"], 0);
    assert!(m["residuals"]["gluing"].as_f64().unwrap() < 1e-12);
}

#[test]
fn indices_of_quadric_disc() {
    let dir = tempfile::tempdir().unwrap();
    quadric(dir.path());
    let out = stadisc(dir.path(), &["indices", "--surface", "q.json", "--disc", "d.json", "--out", "i.json"]);
    assert_eq!(out.status.code(), Some(0));
    let i = json(dir.path(), "i.json");
    assert_eq!(i["maslov"], 4);
    assert!(i["min_condition"].as_f64().unwrap() >= 1.0);
    let m = json(dir.path(), "stadisc-indices.manifest.json");
    assert_eq!(m["inputs"].as_object().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(stadisc(dir.path(), &["disc", "quadric", "--v", "1"]).status.code(), Some(1));
    assert_eq!(stadisc(dir.path(), &["frobnicate"]).status.code(), Some(1));
    let out = stadisc(dir.path(), &["disc", "quadric", "--a", "1.5", "--v", "1", "--out", "d.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(dir.path(), "stadisc-disc-quadric.manifest.json")["exit_code"], 1);
    assert_eq!(stadisc(dir.path(), &["indices", "--surface", "missing.json", "--disc", "d.json"]).status.code(), Some(1));
}

#[test]
fn misaligned_map_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    quadric(dir.path());
    let shear = r#"{"n":1,"components":[[{"exp":[1,0],"coeff":[1,0]},{"exp":[0,1],"coeff":[1,0]}],[{"exp":[0,1],"coeff":[1,0]}]]}"#;
    fs::write(dir.path().join("shear.json"), shear).unwrap();
    let out = stadisc(dir.path(), &["jetdet", "--surface", "q.json", "--map", "shear.json", "--grid", "2", "--out", "jd.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let csv = fs::read_to_string(dir.path().join("jd.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.contains("not aligned"));
}

#[test]
fn solve_recovers_center_on_perturbed_surface() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.json"), PERTURBED).unwrap();
    let out = stadisc(dir.path(), &["disc", "solve", "--surface", "s.json", "--center", "2;1", "--out", "sd.json", "--report", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(dir.path(), "r.json");
    assert_eq!(r["converged"], true);
    assert!(r["boundary_residual"].as_f64().unwrap() <= 1e-10);
    let f0 = &json(dir.path(), "sd.json")["f_coeffs"][0];
    assert!((f0[0][0].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert!((f0[1][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn reruns_are_byte_identical_and_seeded() {
    let runs: Vec<_> = ["0", "0", "5"]
        .iter()
        .map(|seed| {
            let dir = tempfile::tempdir().unwrap();
            fs::write(dir.path().join("s.json"), PERTURBED).unwrap();
            let out = stadisc(dir.path(), &["disc", "scan", "--surface", "s.json", "--v", "1", "--count", "4", "--out", "scan.csv", "--seed", seed]);
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
            let csv = fs::read(dir.path().join("scan.csv")).unwrap();
            let manifest = fs::read(dir.path().join("stadisc-disc-scan.manifest.json")).unwrap();
            (csv, manifest, out.stdout)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_ne!(runs[0].0, runs[2].0);
}

#[test]
fn normalform_and_dilate_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.json"), PERTURBED).unwrap();
    let out = stadisc(dir.path(), &["normalform", "--rho", "s.json", "--point", "0.25;0.5", "--out", "nf.json", "--record", "rec.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(dir.path(), "rec.json")["pivot"], 0);
    let out = stadisc(dir.path(), &["dilate", "--surface", "nf.json", "--t", "0.5", "--out", "dl.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(dir.path(), "dl.json")["n"], 1);
    assert_eq!(stadisc(dir.path(), &["dilate", "--surface", "s.json", "--t", "2", "--out", "x.json"]).status.code(), Some(1));
}

#[test]
fn decay_slope_is_one() {
    let dir = tempfile::tempdir().unwrap();
    quadric(dir.path());
    let cubic = r#"{"n":1,"components":[[{"exp":[1,0],"coeff":[1,0]},{"exp":[0,3],"coeff":[1,0]}],[{"exp":[0,1],"coeff":[1,0]}]]}"#;
    fs::write(dir.path().join("m.json"), cubic).unwrap();
    let out = stadisc(dir.path(), &["decay", "--map", "m.json", "--disc", "d.json", "--out", "decay.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((summary["slope"].as_f64().unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn selftest_subset() {
    let dir = tempfile::tempdir().unwrap();
    let out = stadisc(dir.path(), &["selftest", "--only", "3,5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).matches("[PASS]").count(), 2);
    assert_eq!(stadisc(dir.path(), &["selftest", "--only", "99"]).status.code(), Some(1));
}
