use std::process::{Command, Output};

use serde_json::Value;

fn s2s2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_s2s2")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows =
        r.records().map(|rec| rec.unwrap().iter().map(|f| f.parse::<f64>().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

#[test]
fn verify_mt_passes() {
    let o = s2s2(&["verify", "mt", "--t", "0.5", "--n", "50", "--seed", "7", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().unwrap();
    let k = checks.iter().find(|c| c["name"] == "gauss_kronecker").unwrap();
    assert!(k["max_residual"].as_f64().unwrap() < 1e-8);
    for c in checks {
        assert!(c["identity"].as_str().is_some_and(|s| !s.is_empty()));
        assert!(c["tolerance"].as_f64().unwrap() > 0.0);
        assert_eq!(c["n_points"], 50);
    }
}

#[test]
fn verify_accepts_negative_parameters() {
    let o = s2s2(&["verify", "mt", "--t", "-0.5", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("overall PASS"));
}

#[test]
fn verify_totally_geodesic_product() {
    let o = s2s2(&["verify", "s1rxs2", "--r", "1.0", "--n", "20", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "totally_geodesic").unwrap();
    assert_eq!(c["pass"], true);
    assert!(c["max_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn verify_guarded_families() {
    for fam in ["mab", "mhat"] {
        let o = s2s2(&["verify", fam, "--n", "30", "--seed", "1"]);
        assert_eq!(o.status.code(), Some(0), "{fam}: {}", stdout(&o));
    }
}

#[test]
fn out_of_range_parameter_is_a_domain_error() {
    let o = s2s2(&["verify", "mt", "--t", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t must lie in (−1,1)"));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["verify", "torus"][..],
        &["verify", "mt"][..],
        &["verify", "mab", "--t", "0.2"][..],
        &["sweep", "mhat"][..],
        &["verify", "mt", "--t", "0.1", "--n", "0"][..],
        &["flow", "mt", "--t", "0.1", "--s-max", "-1"][..],
    ] {
        assert_eq!(s2s2(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn check_failure_exits_with_one_and_still_reports() {
    let o = s2s2(&["verify", "mt", "--t", "0.5", "--n", "5", "--tol-scale", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL") && text.contains("overall FAIL"));
}

#[test]
fn json_floats_carry_seventeen_digits() {
    let o = s2s2(&["verify", "mt", "--t", "0.5", "--n", "3", "--format", "json"]);
    let text = stdout(&o);
    assert!(text.ends_with('\n'));
    assert!(text.contains("\"t\":5.0000000000000000e-1"));
    assert!(!text.contains("runtime_s"));
    let timed = stdout(&s2s2(&["verify", "mt", "--t", "0.5", "--n", "3", "--format", "json", "--timing"]));
    assert!(timed.contains("runtime_s"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["verify", "mt", "--t", "0.5", "--seed", "7", "--format", "json"];
    assert_eq!(s2s2(&args).stdout, s2s2(&args).stdout);
    let other = s2s2(&["verify", "mt", "--t", "0.5", "--seed", "8", "--format", "json"]);
    assert_ne!(s2s2(&args).stdout, other.stdout);
}

#[test]
fn verify_csv_lists_every_check() {
    let o = s2s2(&["verify", "mt", "--t", "0.2", "--n", "5", "--format", "csv"]);
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["check", "identity", "n_points", "max_residual", "tolerance", "failures", "pass"]
    );
    let names: Vec<String> = r.records().map(|x| x.unwrap()[0].to_string()).collect();
    assert!(names.contains(&"lambda_system".to_string()) && names.contains(&"codazzi".to_string()));
}

#[test]
fn sweep_mt_keeps_the_product_of_nonzero_curvatures() {
    let o = s2s2(&["sweep", "mt", "--from", "-0.9", "--to", "0.9", "--steps", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["param", "lambda1", "lambda2", "lambda3", "H", "rho", "K", "C", "focal_radius"]);
    assert_eq!(rows.len(), 10);
    for r in rows {
        assert!((r[1] * r[3] + 0.5).abs() < 1e-6, "{r:?}");
        assert!(r[2].abs() < 1e-6);
        assert!((r[8] - r[0].acos() / std::f64::consts::SQRT_2).abs() < 1e-4);
    }
}

#[test]
fn sweep_s1_mean_curvature_column() {
    let o = s2s2(&["sweep", "s1rxs2", "--from", "0.2", "--to", "1.0", "--steps", "9"]);
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 9);
    for r in rows {
        let expect = (1.0 - r[0] * r[0]).sqrt() / (3.0 * r[0]);
        assert!((r[4] - expect).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn sweep_single_step_gives_one_row() {
    let o = s2s2(&["sweep", "mt", "--from", "0.3", "--steps", "1"]);
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.3);
}

#[test]
fn sweep_writes_to_a_file_or_fails_with_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = s2s2(&["sweep", "mt", "--steps", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let (_, rows) = csv_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 3);

    let bad = dir.path().join("missing").join("sweep.csv");
    let o = s2s2(&["sweep", "mt", "--out", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot write"));
}

#[test]
fn flow_mt_parallels_have_constant_mean_curvature() {
    let o = s2s2(&["flow", "mt", "--t", "0.5", "--s-max", "0.9", "--s-steps", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["s", "H_flow", "detQ", "C", "H_std", "failures", "focal"]);
    let focal = 0.5f64.acos() / std::f64::consts::SQRT_2;
    let mut flagged = 0;
    for r in &rows {
        if r[0] < focal {
            assert!(r[4] < 1e-5, "{r:?}");
            assert!(r[2] > 0.0);
        }
        flagged += r[6] as usize;
    }
    assert_eq!(flagged, 1);
    let first = rows.iter().find(|r| r[6] == 1.0).unwrap();
    assert!(first[0] >= focal && first[0] - focal < 0.1);
}

#[test]
fn flow_s1_stays_in_the_family() {
    let o = s2s2(&["flow", "s1rxs2", "--r", "0.6", "--s-max", "0.5", "--s-steps", "6", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!((r["c"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
    assert!((v["focal_radius"].as_f64().unwrap() - 0.6f64.asin()).abs() < 1e-6);
}

#[test]
fn flow_at_zero_offset_is_a_single_identity_row() {
    let o = s2s2(&["flow", "mt", "--t", "0.5", "--s-max", "0"]);
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][2], 1.0);
}
