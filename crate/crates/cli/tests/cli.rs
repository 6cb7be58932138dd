use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_longwave"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn summary(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn passing_run_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kdv_plane_mode.toml");
    let o = run(&["kdv", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&o);
    assert_eq!(s["experiment"], "kdv");
    assert!(dir.path().join("kdv_summary.json").exists());
    assert!(dir.path().join("kdv_phase.csv").exists());
    let on_disk = std::fs::read(dir.path().join("kdv_summary.json")).unwrap();
    assert_eq!(on_disk, o.stdout);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS dispersion_phase_error"));
}

#[test]
fn failing_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("miura_d2_fail.toml");
    let o = run(&["miura", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&o)["assertions"][0]["pass"], false);
}

#[test]
fn overrides_reach_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("converge_gp.toml");
    let o = run(
        &["converge", "--config", cfg.to_str().unwrap(), "--eps", "0.2,0.1", "--n", "256", "--t-final", "0.1", "--serial"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&o);
    assert_eq!(s["config_echo"]["eps_list"], serde_json::json!([0.2, 0.1]));
    assert_eq!(s["config_echo"]["grid"]["n"], 256);
    assert_eq!(s["config_echo"]["time"]["t_final"], 0.1);
    assert!(dir.path().join("converge_eps0.2.csv").exists());
}

#[test]
fn config_errors_exit_two_with_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("converge_gp.toml");
    let o = run(&["converge", "--config", cfg.to_str().unwrap(), "--n", "500"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.n"));
    let o = run(&["converge", "--config", cfg.to_str().unwrap(), "--eps", "0.1,0.2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps_list"));
}

#[test]
fn subcommand_must_match_the_config_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("soliton.toml");
    let o = run(&["miura", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kind"));
}

#[test]
fn missing_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["kdv", "--config", "/nonexistent.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
