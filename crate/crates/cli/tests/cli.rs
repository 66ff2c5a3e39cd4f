use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn betaplane(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betaplane"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const EVOLVE: &str = r#"{
  "profile": {"name": "sinus"},
  "physics": {"alpha": 1.0, "beta": 0.5},
  "numerics": {"n": 48, "dt": 0.01, "t_final": 1.0, "sample_stride": 10},
  "initial_data": {"kind": "sine_series", "coefficients": [1.0, 0.0, 0.3]}
}"#;

fn run_in(dir: &Path, sub: &str, config: &str) -> Output {
    betaplane(&[sub, "--config", config, "--out", dir.to_str().unwrap()])
}

#[test]
fn evolve_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run_in(a.path(), "evolve", EVOLVE).status.success());
    assert!(run_in(b.path(), "evolve", EVOLVE).status.success());
    for f in ["series.csv", "final_field.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let m: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    let n: serde_json::Value = serde_json::from_slice(&fs::read(b.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["content_hash"], n["content_hash"]);
    assert_eq!(m["grid"]["n"], 48);

    let series = fs::read_to_string(a.path().join("series.csv")).unwrap();
    let mut lines = series.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,enstrophy,v_norm,v2_norm,dpsi_y1_re"));
    // Sinus has critical points at both walls and in the centre.
    assert_eq!(header.matches("crit_").count(), 3);
    assert_eq!(lines.count(), 11);
}

#[test]
fn atlas_two_by_two_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"atlas": {"alpha_range": [0.5, 1.5], "beta_range": [-1.0, 1.0], "n_alpha": 2, "n_beta": 2, "n_grid": 32}}"#;
    let o = run_in(dir.path(), "atlas", cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("atlas.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "alpha,beta,tag,growth_rate");
    assert_eq!(rows.len(), 5);
    assert!(dir.path().join("atlas_summary.json").exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = EVOLVE.replace("\"sample_stride\"", "\"sample_strife\"");
    let o = run_in(dir.path(), "evolve", &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sample_strife"), "{}", stderr(&o));
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn unknown_scenario_lists_the_available_ones() {
    let dir = tempfile::tempdir().unwrap();
    let o = betaplane(&["verify", "no-such-thing", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("no-such-thing") && msg.contains("couette-transport") && msg.contains("limiting-absorption"));
}

#[test]
fn unstable_dt_reports_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = betaplane(&["evolve", "--config", EVOLVE, "--dt", "10", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stability bound"), "{}", stderr(&o));
}

#[test]
fn failed_run_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = EVOLVE.replace(
        r#"{"kind": "sine_series", "coefficients": [1.0, 0.0, 0.3]}"#,
        r#"{"kind": "file", "path": "/nonexistent/omega.csv"}"#,
    );
    let o = run_in(dir.path(), "evolve", &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn spectrum_and_bvp_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"profile": {"name": "sinus"}, "physics": {"alpha": 0.5, "beta": 0.0}, "numerics": {"n": 64}}"#;
    assert!(run_in(dir.path(), "spectrum", cfg).status.success());
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(doc["unstable"].as_array().unwrap().len(), 1);
    assert!(doc["growth_rate"].as_f64().unwrap() > 0.0);
    assert!(fs::read_to_string(dir.path().join("modes.csv")).unwrap().starts_with("y,psi0_re"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"profile": {"name": "couette"}, "physics": {"alpha": 1.0},
      "numerics": {"n": 48}, "initial_data": {"kind": "sine_mode", "k": 1},
      "bvp": {"c": [0.5, 0.0], "side": "minus"}}"#;
    let o = run_in(dir.path(), "bvp", cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["summary"]["method"], "limiting_absorption");
    assert_eq!(fs::read_to_string(dir.path().join("phi.csv")).unwrap().lines().count(), 50);
}

#[test]
fn verify_couette_transport_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = betaplane(&["verify", "couette-transport", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS [ 1] couette-transport"));
    let r: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("verify_couette-transport.json")).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
}
