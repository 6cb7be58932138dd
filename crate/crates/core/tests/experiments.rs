use std::fs;
use std::path::PathBuf;

use longwave::experiment::{run_experiment, ExperimentConfig, ExperimentKind, RunOptions};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn parse(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text, None).unwrap()
}

const SMALL_CONVERGE: &str = r#"
    kind = "converge"
    eps_list = [0.2, 0.1]
    [grid]
    n = 256
    length = 40.0
    [time]
    t_final = 0.1
    outputs = 4
    [initial]
    profile = "sech2_bump"
    amplitude = 0.3
"#;

#[test]
fn shipped_configs_parse() {
    let mut seen = 0;
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("toml") {
            let text = fs::read_to_string(&path).unwrap();
            ExperimentConfig::from_toml_str(&text, None).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 6);
}

fn snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn serial_and_parallel_sweeps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse(SMALL_CONVERGE);
    cfg.output = Some(dir.path().to_path_buf());
    run_experiment(&cfg, RunOptions { parallel: false }).unwrap();
    let serial = snapshot(dir.path());
    for f in fs::read_dir(dir.path()).unwrap() {
        fs::remove_file(f.unwrap().path()).unwrap();
    }
    run_experiment(&cfg, RunOptions { parallel: true }).unwrap();
    let parallel = snapshot(dir.path());
    assert_eq!(serial.len(), 4, "summary, table and one series per eps");
    assert_eq!(serial, parallel);
}

#[test]
fn repeated_runs_give_identical_summaries() {
    let cfg = parse(SMALL_CONVERGE);
    let x = run_experiment(&cfg, RunOptions::default()).unwrap().summary.to_json().unwrap();
    let y = run_experiment(&cfg, RunOptions::default()).unwrap().summary.to_json().unwrap();
    assert_eq!(x, y);
}

#[test]
fn small_sweep_converges() {
    let s = run_experiment(&parse(SMALL_CONVERGE), RunOptions::default()).unwrap().summary;
    for name in ["run_completed", "sup_err_a_decreasing", "sup_err_phase_decreasing", "sup_w_decreasing", "chart_radius"] {
        let a = s.assertion(name).unwrap();
        assert!(a.pass, "{name}: {}", a.value);
    }
}

#[test]
fn summary_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse(SMALL_CONVERGE);
    cfg.output = Some(dir.path().to_path_buf());
    let out = run_experiment(&cfg, RunOptions::default()).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("converge_summary.json")).unwrap()).unwrap();
    let keys: Vec<&str> = json.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(keys, ["assertions", "config_echo", "experiment", "timings"]);
    for a in json["assertions"].as_array().unwrap() {
        let fields: Vec<&str> = a.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(fields, ["name", "pass", "threshold", "value"]);
    }
    assert_eq!(json["experiment"], "converge");
    assert_eq!(json["config_echo"]["eps_list"][1], 0.1);
    assert!(json["timings"]["micro_steps"].as_u64().unwrap() > 0);
    let csv = fs::read_to_string(dir.path().join("converge_eps0.1.csv")).unwrap();
    assert!(csv.starts_with("t,err_a,err_phase,w_l2,eps_phi_linf,h,proxy\n"));
    assert_eq!(csv.lines().count(), 1 + 5);
    assert!(out.files.iter().all(|f| f.exists()));
}

#[test]
fn linear_single_mode_is_exact() {
    let text = fs::read_to_string(configs_dir().join("kdv_plane_mode.toml")).unwrap();
    let mut cfg = ExperimentConfig::from_toml_str(&text, Some(ExperimentKind::Kdv)).unwrap();
    cfg.output = None;
    let s = run_experiment(&cfg, RunOptions::default()).unwrap().summary;
    assert!(s.all_pass());
    assert!(s.assertion("dispersion_phase_error").unwrap().value <= 1e-10);
}

#[test]
fn nonlinear_kdv_run_reports_conservation() {
    let cfg = parse(
        r#"
        kind = "kdv"
        [grid]
        n = 128
        length = 40.0
        [time]
        t_final = 1.0
        [initial]
        profile = "sech2_bump"
        amplitude = 0.3
    "#,
    );
    let s = run_experiment(&cfg, RunOptions::default()).unwrap().summary;
    assert!(s.all_pass(), "{:?}", s.assertions);
    assert!(s.assertion("h_relative_drift").is_some());
}

#[test]
fn miura_negative_control_fails() {
    let text = fs::read_to_string(configs_dir().join("miura_d2_fail.toml")).unwrap();
    let mut cfg = parse(&text);
    cfg.output = None;
    let s = run_experiment(&cfg, RunOptions::default()).unwrap().summary;
    assert!(!s.all_pass());
    assert!(s.assertion("miura_condition").unwrap().value > 1e-3);
}

#[test]
fn breakdown_is_recorded_not_raised() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse(
        r#"
        kind = "micro"
        eps = 0.2
        [grid]
        n = 256
        length = 40.0
        [time]
        t_final = 0.5
        dt = 0.05
        outputs = 5
        [initial]
        profile = "sech2_bump"
        amplitude = 0.3
    "#,
    );
    cfg.output = Some(dir.path().to_path_buf());
    let out = run_experiment(&cfg, RunOptions::default()).unwrap();
    assert!(!out.summary.assertion("run_completed").unwrap().pass);
    assert!(dir.path().join("micro_summary.json").exists());
    assert!(dir.path().join("micro.csv").exists());
}

#[test]
fn config_errors_name_the_field() {
    let bad = SMALL_CONVERGE.replace("[0.2, 0.1]", "[0.1, 0.1]");
    let err = ExperimentConfig::from_toml_str(&bad, None).unwrap_err().to_string();
    assert!(err.contains("eps_list"), "{err}");
    let bad = SMALL_CONVERGE.replace("length = 40.0", "length = 0.0");
    let err = ExperimentConfig::from_toml_str(&bad, None).unwrap_err().to_string();
    assert!(err.contains("grid.length"), "{err}");
    let bad = SMALL_CONVERGE.replace("[initial]", "[initial_data]");
    assert!(ExperimentConfig::from_toml_str(&bad, None).is_err());
}
