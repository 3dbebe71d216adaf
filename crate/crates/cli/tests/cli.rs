//! End-to-end checks of the `fm` binary: exit codes, parameter echo, and
//! seed determinism.

use std::process::{Command, Output};

fn fm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn density_semicircle_table() {
    let out = fm(&[
        "density", "--theta", "0", "--tau", "0", "--t", "1", "--grid-n", "32",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("theta=0"));
    assert!(text.contains("y,density"));
    assert!(text.contains("# atoms=[]"));
    // 32 grid rows plus three header lines
    assert_eq!(text.lines().count(), 35);
}

#[test]
fn density_atom_case_reports_weight() {
    let out = fm(&[
        "density", "--theta", "2", "--tau", "0", "--s", "1", "--t", "2", "--x", "-0.5",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let atoms = doc["measure"]["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 1);
    assert!((atoms[0]["y"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!((atoms[0]["w"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((doc["meta"]["mass"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn density_out_of_support_exits_2() {
    let out = fm(&[
        "density", "--theta", "0", "--tau", "0", "--s", "1", "--t", "2", "--x", "9",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn invalid_params_exit_2() {
    let out = fm(&["density", "--theta", "0", "--tau", "-1", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = fm(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_is_deterministic_under_seed() {
    let args = [
        "sample", "--theta", "2", "--tau", "0", "--grid-T", "2", "--grid-n", "8",
        "--paths", "5", "--seed", "7",
    ];
    let a = fm(&args);
    let b = fm(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let mut changed = args;
    changed[11] = "8";
    let c = fm(&changed);
    assert_ne!(stdout(&a), stdout(&c));

    // atom flags appear for the free-Poisson-type parameters
    assert!(stdout(&a).lines().any(|l| l.ends_with(",1")));
}

#[test]
fn sample_accepts_explicit_grid() {
    let out = fm(&[
        "sample", "--theta", "0", "--tau", "1", "--grid", "0.25,0.5,1.0", "--paths", "2",
        "--seed", "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("0.25,"));
    // 2 paths x 4 rows + 2 path separators + 2 header lines
    assert_eq!(text.lines().count(), 12);

    let bad = fm(&["sample", "--theta", "0", "--tau", "0", "--grid", "1.0,oops"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sample_stats_reports_unit_variance() {
    let out = fm(&[
        "sample", "--theta", "0", "--tau", "0", "--grid-T", "1", "--grid-n", "4",
        "--paths", "2000", "--seed", "3", "--stats", "--out", "/tmp/fm_paths.csv",
    ]);
    assert!(out.status.success());
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string("/tmp/fm_paths.stats.json").unwrap())
            .unwrap();
    let last = stats["stats"].as_array().unwrap().last().unwrap().clone();
    assert!((last["t"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let var = last["variance"].as_f64().unwrap();
    assert!((var - 1.0).abs() < 0.1, "var(X_1) = {var}");
    let csv = std::fs::read_to_string("/tmp/fm_paths.csv").unwrap();
    assert!(csv.starts_with("# fm sample"));
    assert!(csv.contains("time,value,atom_flag"));
}

#[test]
fn verify_aw_passes_and_emits_report() {
    let out = fm(&["verify", "aw"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["pass"], serde_json::Value::Bool(true));
    let reports = doc["reports"].as_array().unwrap();
    assert!(reports.iter().all(|r| r["pass"].as_bool().unwrap()));
    assert!(reports[0]["cases"].as_u64().unwrap() >= 200);
}

#[test]
fn verify_martingale_with_z_override() {
    let out = fm(&[
        "verify", "martingale", "--theta", "1", "--tau", "0.5", "--z-re", "0.3", "--z-im",
        "0.1",
    ]);
    assert!(out.status.success());
}
