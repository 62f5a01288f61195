use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mech")).args(args).output().expect("binary runs")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn small_config() -> String {
    golden_dir().join("small.toml").to_string_lossy().into_owned()
}

/// Compares against a stored file; `UPDATE_GOLDEN=1` rewrites it instead.
fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "output drifted from {}", path.display());
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn compile_to(dir: &Path, bench: &str, extra: &[&str]) -> Output {
    let cfg = small_config();
    let out = dir.to_string_lossy();
    let mut args = vec!["compile", "--config", &cfg, "--bench", bench, "--out", &out];
    args.extend_from_slice(extra);
    mech(&args)
}

#[test]
fn compile_metrics_match_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = compile_to(dir.path(), "qaoa-6", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    check_golden("qaoa-6.metrics.json", &stdout(&o));
    let on_disk = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
    assert_eq!(on_disk, stdout(&o));
    check_golden("qaoa-6.compiled.txt", &std::fs::read_to_string(dir.path().join("compiled.txt")).unwrap());
}

#[test]
fn baseline_flag_drops_the_highway() {
    let dir = tempfile::tempdir().unwrap();
    let o = compile_to(dir.path(), "qaoa-6", &["--no-highway"]);
    assert!(o.status.success());
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(m["highway"], false);
    assert_eq!(m["n_meas"], 0);
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("compile.json")).unwrap()).unwrap();
    assert_eq!(side["shuttles"].as_array().unwrap().len(), 0);
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(compile_to(a.path(), "vqe-5", &[]).status.success());
    assert!(compile_to(b.path(), "vqe-5", &[]).status.success());
    for f in ["original.txt", "compiled.txt", "compile.json", "metrics.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn verify_passes_then_fails_on_tampering() {
    let dir = tempfile::tempdir().unwrap();
    assert!(compile_to(dir.path(), "bv-6", &[]).status.success());
    let d = dir.path().to_string_lossy().into_owned();
    let o = mech(&["verify", &d, "--trials", "3", "--branches", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["status"]["status"], "pass");

    let path = dir.path().join("compiled.txt");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("x q0\n");
    std::fs::write(&path, text).unwrap();
    let o = mech(&["verify", &d, "--trials", "3", "--branches", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_non_clifford_is_unverifiable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    let text = std::fs::read_to_string(small_config()).unwrap().replace("array_cols = 2", "array_cols = 3");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("art");
    let o = mech(&[
        "compile",
        "--config",
        &cfg.to_string_lossy(),
        "--bench",
        "qft-8",
        "--out",
        &out.to_string_lossy(),
    ]);
    assert!(o.status.success());
    let o = mech(&["verify", &out.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("unverifiable at this size"));
}

#[test]
fn sweep_csv_matches_golden() {
    let cfg = small_config();
    let o = mech(&["sweep", "--config", &cfg, "--axis", "meas_depth", "--values", "1,2,4", "--bench", "qft-5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    check_golden("qft-5.meas_depth.csv", &stdout(&o));
}

#[test]
fn worker_count_does_not_change_output() {
    let cfg = small_config();
    let args = ["bench", "--config", &cfg, "--benches", "qft-4,bv-5"];
    let one = Command::new(env!("CARGO_BIN_EXE_mech")).args(args).env("MECH_WORKERS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_mech")).args(args).env("MECH_WORKERS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(stdout(&one).lines().count(), 3);
}

#[test]
fn missing_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let text = std::fs::read_to_string(small_config()).unwrap().replace("ratio_meas = 2.2\n", "");
    std::fs::write(&cfg, text).unwrap();
    let o = mech(&["compile", "--config", &cfg.to_string_lossy(), "--bench", "bv-4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error_model.ratio_meas"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(mech(&["compile"]).status.code(), Some(1));
    assert_eq!(mech(&["sweep", "--config", "x", "--axis", "nope", "--values", "1", "--bench", "qft"]).status.code(), Some(1));
    assert_eq!(mech(&["--help"]).status.code(), Some(0));
}
