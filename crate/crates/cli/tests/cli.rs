//! End-to-end checks of the binary: exit codes, determinism, stage isolation.

use std::path::Path;
use std::process::{Command, Output};

const HYPERBOLIC_N4: &str = r#"
[model]
n = 4
m_bar = 0.0
p_bar = 0.0

[mesh]
cells = 192
grading = 1.01
r_list = [20.0, 40.0, 60.0]
"#;

const SPHERICAL_N4: &str = r#"
[model]
n = 4
m_bar = 1.0

[mesh]
cells = 192
grading = 1.01
r_list = [20.0, 40.0, 60.0]
"#;

fn jang_lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jang-lab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary spawns")
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixed_clock_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), HYPERBOLIC_N4);
    for out in ["a", "b"] {
        let o = jang_lab(&["pipeline", "--config", "run.toml", "--out", out, "--fixed-clock"], tmp.path());
        assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["report.json", "alpha.csv", "barriers.csv", "mass.csv", "jang.csv", "conformal.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn hyperbolic_pipeline_passes_all_checks() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), HYPERBOLIC_N4);
    let o = jang_lab(&["pipeline", "--config", "run.toml", "--out", "out", "--fixed-clock"], tmp.path());
    assert!(o.status.success());
    let report = read_json(&tmp.path().join("out/report.json"));
    let stages = &report["stages"];
    assert!(stages["mass"]["e"].as_f64().unwrap().abs() < 1e-8);
    assert!(stages["mass"]["e_adm_graph"].as_f64().unwrap().abs() < 1e-8);
    assert!(stages["conformal"]["a"].as_f64().unwrap().abs() < 1e-2);
    for check in stages["verify"].as_array().unwrap() {
        assert_eq!(check["pass"], true, "failing check: {check}");
    }
}

#[test]
fn mass_stage_matches_pipeline_fields() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), SPHERICAL_N4);
    let solo = jang_lab(&["mass", "--config", "run.toml", "--out", "solo", "--fixed-clock"], tmp.path());
    assert!(solo.status.success());
    let pipe = jang_lab(&["pipeline", "--config", "run.toml", "--out", "pipe", "--fixed-clock"], tmp.path());
    assert!(pipe.status.success());
    let solo = read_json(&tmp.path().join("solo/report.json"));
    let pipe = read_json(&tmp.path().join("pipe/report.json"));
    assert_eq!(solo["stages"]["mass"], pipe["stages"]["mass"]);
    assert!((solo["stages"]["mass"]["e"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn unsupported_dimension_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), &SPHERICAL_N4.replace("n = 4", "n = 3"));
    let o = jang_lab(&["mass", "--config", "run.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("4..=7"), "stderr: {err}");
}

#[test]
fn missing_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = jang_lab(&["alpha", "--config", "absent.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_stage_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), HYPERBOLIC_N4);
    let o = jang_lab(&["frobnicate", "--config", "run.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_cap_env_is_validated_and_result_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), SPHERICAL_N4);
    let bad = Command::new(env!("CARGO_BIN_EXE_jang-lab"))
        .args(["mass", "--config", "run.toml"])
        .env("JANGLAB_THREADS", "zero")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    for (cap, out) in [("1", "t1"), ("8", "t8")] {
        let o = Command::new(env!("CARGO_BIN_EXE_jang-lab"))
            .args(["mass", "--config", "run.toml", "--out", out, "--fixed-clock"])
            .env("JANGLAB_THREADS", cap)
            .current_dir(tmp.path())
            .output()
            .unwrap();
        assert!(o.status.success());
    }
    let a = std::fs::read(tmp.path().join("t1/mass.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("t8/mass.csv")).unwrap();
    assert_eq!(a, b, "sweep output depends on thread cap");
}

#[test]
fn zonal_table_model_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = String::from(
        r#"
[model]
n = 5
p_bar = 0.0

[model.m_zonal]
"#,
    );
    let pts = 96;
    let theta: Vec<String> =
        (0..=pts).map(|i| format!("{}", std::f64::consts::PI * i as f64 / pts as f64)).collect();
    let values: Vec<String> =
        (0..=pts).map(|i| format!("{}", 1.0 + 0.3 * (std::f64::consts::PI * i as f64 / pts as f64).cos())).collect();
    cfg.push_str(&format!("theta = [{}]\nvalues = [{}]\n", theta.join(", "), values.join(", ")));
    std::fs::write(tmp.path().join("run.toml"), cfg).unwrap();
    let o = jang_lab(&["alpha", "--config", "run.toml", "--out", "out", "--fixed-clock"], tmp.path());
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&tmp.path().join("out/report.json"));
    assert_eq!(report["model"]["zonal"], true);
    // cosθ averages to zero: the mean matches the constant-part closed form
    // -(n-1)(p̄ + (n-2)/2 m̄)/(n-3) = -3 for n = 5, m̄ = 1, p̄ = 0.
    let mean = report["stages"]["alpha"]["alpha_mean"].as_f64().unwrap();
    assert!((mean + 3.0).abs() < 1e-3, "alpha mean {mean}");
}
