//! End-to-end tests of the `chancf` binary: output contracts, exit codes,
//! determinism and the run manifest.

use std::process::{Command, Output};

fn chancf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chancf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn expand_exact_terminating() {
    let o = chancf(&["expand", "--m", "2", "--x", "7/10", "--digits", "10"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("[0 1 2 1],true,4"), "{s}");
}

#[test]
fn expand_fixed_point() {
    let o = chancf(&["expand", "--m", "3", "--x", "0.5", "--digits", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("[0 0 0 0],false"));
}

#[test]
fn expand_out_of_domain_exits_2() {
    let o = chancf(&["expand", "--m", "2", "--x", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside"));
}

#[test]
fn usage_error_exits_2() {
    let o = chancf(&["expand", "--m", "2", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_deterministic() {
    let args = ["simulate", "--m", "2", "--samples", "50000", "--iters", "3", "--seed", "42"];
    let a = chancf(&args);
    let b = chancf(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn zeta_classical_value() {
    let o = chancf(&["zeta", "--classical", "--s", "0.5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let row = s.lines().nth(1).expect("data row");
    let value_re: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((value_re + 1.4603545).abs() < 1e-6, "{value_re}");
}

#[test]
fn zeta_complex_s_json() {
    let o = chancf(&["zeta", "--m", "2", "--s", "0.25+0.75i", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["function"], "Z_2");
    assert!(v["error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn kuzmin_coarse_grid_exits_3() {
    let o = chancf(&["kuzmin", "--m", "2", "--grid", "5", "--iters", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("grid") || err.contains("monotonic"), "{err}");
}

#[test]
fn kuzmin_omega_start_is_fixed() {
    let o = chancf(&["kuzmin", "--m", "2", "--grid", "2049", "--iters", "3", "--start", "omega"]);
    assert!(o.status.success());
    for line in stdout(&o).lines().skip(1).filter(|l| !l.starts_with('#')) {
        let sup: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(sup <= 2e-9, "{line}");
    }
}

#[test]
fn constants_flags_q_above_one() {
    let o = chancf(&["constants", "--m", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().collect();
    assert!(rows[0].starts_with("m,k_m,q_m,q_exceeds_one"));
    assert!(rows[1].starts_with("2,") && rows[1].contains(",false,"));
    assert!(rows[2].starts_with("3,") && rows[2].contains(",true,"));
    // growth column stays below its bound column
    let cols: Vec<&str> = rows[1].split(',').collect();
    let growth: f64 = cols[5].parse().unwrap();
    let bound: f64 = cols[6].parse().unwrap();
    assert!(growth <= bound);
    assert!((cols[2].parse::<f64>().unwrap() - 0.840761).abs() < 1e-5);
}

#[test]
fn fib_small_run() {
    let o = chancf(&["fib", "--m", "2", "--n", "2000", "--seeds", "2", "--seed", "7"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("seed_index,log_growth"));
    assert!(s.contains("# mean="));
}

#[test]
fn out_file_and_manifest() {
    let dir = std::env::temp_dir().join(format!("chancf-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("result.csv");
    let args = [
        "expand", "--m", "2", "--x", "3/8", "--digits", "6",
        "--out", out.to_str().unwrap(),
    ];
    let o = chancf(&args);
    assert!(o.status.success());
    let first = std::fs::read(&out).unwrap();
    assert!(!first.is_empty());
    let manifest_path = dir.join("result.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["command"], "expand");
    assert_eq!(manifest["args"]["x"], "3/8");
    assert!(manifest["version"].is_string());
    // replaying the manifest's parameters reproduces identical bytes
    let o2 = chancf(&args);
    assert!(o2.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn precision_env_var_respected() {
    let o = Command::new(env!("CARGO_BIN_EXE_chancf"))
        .args(["expand", "--m", "2", "--x", "0.37", "--digits", "8"])
        .env("CHAN_CF_PRECISION_BITS", "128")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("[1 1 1 2 1 1 1 44]"));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"precision_bits\": 128"), "{err}");
}
