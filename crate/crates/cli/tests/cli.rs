use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cloak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cloak")).args(args).output().expect("spawn cloak")
}

fn scenario(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cloak(&[]).status.code(), Some(2));
    assert_eq!(cloak(&["solve"]).status.code(), Some(2));
    assert_eq!(cloak(&["solve", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"cloak": {"kind": "C", "hue": 3}, "wave": {"l_e": 2.0, "incident_deg": [0]}}"#);
    let out = cloak(&["validate", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hue"));
    let sweep_short = cloak(&["sweep", "--config", &scenario("mie_hard_disk.json"), "--eps", "0.1,0.05"]);
    assert_eq!(sweep_short.status.code(), Some(2));
}

#[test]
fn validate_reports_pass_and_inadmissible_contents() {
    let out = cloak(&["validate", "--config", &scenario("c_cloak_axial.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["admissible"], true);
    assert_eq!(v["assumption"]["rows"].as_array().unwrap().len(), 3);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"cloak": {"kind": "C"}, "wave": {"l_e": 2.0, "incident_deg": [0]},
            "contents": {"obstacles": [{"kind": "hard", "shape": {"type": "disk", "center": [0, 0], "radius": 1.5}}]}}"#,
    );
    let out = cloak(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["admissible"], false);
    // Solving an inadmissible scenario is a run failure, not a usage error.
    assert_eq!(cloak(&["solve", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = cloak(&["solve", "--config", &scenario("mie_hard_disk.json"), "--out", out_dir.to_str().unwrap(), "--angles", "0,30", "--resolution", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out);
    assert_eq!(summary["incidents"].as_array().unwrap().len(), 2);
    assert!(summary["sup_norm"].as_f64().unwrap() > 0.5);
    let csv = fs::read_to_string(out_dir.join("farfield.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 100);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["name"], summary["name"]);
}

#[test]
fn sweep_of_fixed_obstacle_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = cloak(&[
        "sweep",
        "--config",
        &scenario("mie_hard_disk.json"),
        "--eps",
        "0.02,0.08,0.04",
        "--parallel",
        "2",
        "--resolution",
        "12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["eps"], serde_json::json!([0.08, 0.04, 0.02]));
    assert!(v["fit"]["slope"].as_f64().unwrap().abs() < 1e-9);
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn mie_prints_csv() {
    let out = cloak(&["mie", "--kind", "soft", "--angles", "0,90", "--dirs", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("incident_rad,angle_rad,re,im,abs,db"));
    assert_eq!(text.lines().count(), 17);
    assert_eq!(cloak(&["mie", "--kind", "squishy"]).status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let out = cloak(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["pass"], true);
}
