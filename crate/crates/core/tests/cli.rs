use std::path::Path;
use std::process::{Command, Output};

fn gff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gff-disk")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = gff(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn basis_manifest_sizes() {
    let text = stdout(&["basis"]);
    assert_eq!(text.lines().count(), 1 + 1176);
    assert_eq!(text.lines().next(), Some("n,parity,k,zero,eigenvalue,norm_const"));

    let one = stdout(&["basis", "--n-max", "0", "--k-max", "1"]);
    let row: Vec<&str> = one.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..3], &["0", "cos", "1"]);
    let eig: f64 = row[4].parse().unwrap();
    assert!((eig - 5.783_185_962_946_784).abs() < 1e-12);

    let json: serde_json::Value = serde_json::from_str(&stdout(&["basis", "--n-max", "2", "--k-max", "2", "--format", "json"])).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 10);
}

#[test]
fn exit_codes() {
    assert_eq!(gff(&["basis", "--k-max", "0"]).status.code(), Some(2));
    assert_eq!(gff(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(gff(&["basis", "--quad-angular", "8"]).status.code(), Some(2));
    assert_eq!(gff(&["cov", "/nonexistent/queries.csv"]).status.code(), Some(3));
    assert_eq!(gff(&["basis", "--out", "/nonexistent/dir/out.csv"]).status.code(), Some(3));
    assert_eq!(gff(&["--help"]).status.code(), Some(0));
}

#[test]
fn cov_theorem1_row() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    std::fs::write(&q, "z1x,z1y,rho1,z2x,z2y,rho2\n-0.5,0,0.4,0.5,0,0.4\n0,0,0.5,0.1,0,0.5\n").unwrap();
    let q = q.to_str().unwrap();
    let text = stdout(&["cov", q]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z1x,z1y,rho1,z2x,z2y,rho2,regime,exact,closed,bound"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[6], "disjoint");
    let expect = -(0.8f64).ln();
    for col in [7, 8] {
        let v: f64 = row[col].parse().unwrap();
        assert!((v - expect).abs() < 1e-10, "{v}");
    }
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!((row[6], row[8]), ("overlapping", ""));

    let json: serde_json::Value = serde_json::from_str(&stdout(&["cov", q, "--format", "json"])).unwrap();
    assert!(json[1]["closed"].is_null());
    assert!((json[0]["closed"].as_f64().unwrap() - expect).abs() < 1e-10);
}

#[test]
fn brownian_is_reproducible() {
    let args = ["brownian", "--times", "1,2", "--seed", "7", "--n-max", "6", "--k-max", "6"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    assert_eq!(a.lines().count(), 2);
    assert!(a.starts_with("1.0000000000000000e0,"));
    let with_origin = stdout(&[&args[..], &["--origin"]].concat());
    assert_eq!(with_origin.lines().next(), Some("0.0000000000000000e0,0.0000000000000000e0"));
    assert_ne!(a, stdout(&["brownian", "--times", "1,2", "--seed", "8", "--n-max", "6", "--k-max", "6"]));
    assert_eq!(gff(&["brownian", "--times", "2,1"]).status.code(), Some(2));
}

#[test]
fn sample_and_grid_outputs() {
    let coeffs = stdout(&["sample", "--n-max", "1", "--k-max", "2", "--seed", "3"]);
    assert_eq!(coeffs.lines().count(), 1 + 6);
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["sample", "--n-max", "1", "--k-max", "2", "--seed", "3", "--format", "json"])).unwrap();
    assert_eq!(json["seed"], 3);
    let first: f64 = coeffs.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(json["coeffs"][0].as_f64().unwrap(), first);

    let grid = stdout(&["grid", "--resolution", "5", "--n-max", "2", "--k-max", "2"]);
    // interior lattice points of the 5×5 grid on [-1,1]²
    assert_eq!(grid.lines().count(), 1 + 9);
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["grid", "--resolution", "5", "--n-max", "2", "--k-max", "2", "--format", "json"])).unwrap();
    assert_eq!(json["values"].as_array().unwrap().len(), 25);
    assert_eq!(json["mask"][0], true);
    assert_eq!(json["mask"][12], false);
}

#[test]
fn config_file_precedence_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n_max": 1, "k_max": 1, "format": "json"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let json: serde_json::Value = serde_json::from_str(&stdout(&["basis", "--config", cfg])).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3);
    let csv = stdout(&["basis", "--config", cfg, "--format", "csv", "--k-max", "2"]);
    assert_eq!(csv.lines().count(), 1 + 6);

    let out = dir.path().join("basis.csv");
    let printed = stdout(&["basis", "--n-max", "1", "--k-max", "1", "--out", out.to_str().unwrap()]);
    assert!(printed.is_empty());
    assert_eq!(std::fs::read_to_string(Path::new(&out)).unwrap().lines().count(), 4);
}

#[test]
fn verify_deterministic_passes_at_defaults() {
    let out = gff(&["verify", "--suite", "deterministic"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,kind,value,reference,tolerance,passed,detail\n"));
    assert!(!text.contains(",false,"));
}

#[test]
fn verify_reports_failures_with_exit_one() {
    // an 8×8 basis carries too little of the variance for the truncation checks
    let out = gff(&["verify", "--suite", "deterministic", "--n-max", "8", "--k-max", "8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(report["summary"]["failed"].as_u64(), Some(failed.len() as u64));
    assert!(failed.iter().all(|n| n.starts_with("truncated variance fraction")));
}
