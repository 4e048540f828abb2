use std::path::PathBuf;

use cloak_core::harness::*;
use cloak_core::materials::{CloakKind, Space};

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn shipped() -> Vec<(String, String)> {
    let mut v: Vec<_> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn load(name: &str) -> ScenarioConfig {
    ScenarioConfig::from_json(&std::fs::read_to_string(scenario_dir().join(format!("{name}.json"))).unwrap()).unwrap()
}

#[test]
fn shipped_scenarios_are_canonical_and_admissible() {
    let all = shipped();
    assert!(all.len() >= 7);
    for (name, text) in all {
        let cfg = ScenarioConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(cfg.to_json(), text, "{name} is not in canonical form");
        cfg.build_physical().unwrap_or_else(|e| panic!("{name}: {e}"));
        plan(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn reciprocity_holds_for_shipped_scenarios() {
    for (name, text) in shipped() {
        let cfg = ScenarioConfig::from_json(&text).unwrap();
        let r = reciprocity_check(&cfg, 6).unwrap();
        assert!(r.relative <= 1e-2, "{name}: {r:?}");
    }
}

#[test]
fn free_space_run_and_outputs() {
    let mut cfg = load("free_space");
    cfg.outputs.field_dump = true;
    let out = run_scenario(&cfg).unwrap();
    assert!(out.summary.sup_norm <= 1e-6);
    assert_eq!(out.summary.space, Space::Physical);
    assert_eq!(out.patterns.len(), 2);
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &cfg, &out).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("farfield.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 100);
    assert!(csv.starts_with("incident_rad,angle_rad,re,im,abs,db"));
    let report: RunSummary = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report, out.summary);
    assert!(dir.path().join("scattered_1.cfld").exists());
}

#[test]
fn runs_are_deterministic() {
    let cfg = load("mie_hard_disk");
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    let diff = a.patterns[0].values.iter().zip(&b.patterns[0].values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(diff <= 1e-12, "{diff}");
}

#[test]
fn epsilon_independent_sweep_has_zero_slope() {
    let cfg = load("mie_hard_disk");
    let rep = convergence_sweep(&cfg, &[0.02, 0.08, 0.04], 2).unwrap();
    assert_eq!(rep.eps, vec![0.08, 0.04, 0.02]);
    let fit = rep.fit.unwrap();
    assert!(fit.slope.abs() < 1e-9, "{}", fit.slope);
    assert!(rep.excluded.is_empty());
}

#[test]
fn sweep_input_checks() {
    let cfg = load("mie_hard_disk");
    assert!(matches!(convergence_sweep(&cfg, &[0.1, 0.05], 1), Err(HarnessError::Config(_))));
    assert!(matches!(convergence_sweep(&cfg, &[0.1, 0.05, 0.05], 1), Err(HarnessError::Config(_))));
    assert!(matches!(convergence_sweep(&cfg, &[0.1, -0.05, 0.01], 1), Err(HarnessError::Config(_))));
}

#[test]
fn unresolvable_entries_are_excluded() {
    let cfg = load("full_cloak");
    // ε above r1 cannot be built; the rest still fit.
    let rep = convergence_sweep(&cfg, &[1.5, 0.08, 0.04, 0.02], 4).unwrap();
    assert_eq!(rep.excluded.len(), 1);
    assert_eq!(rep.excluded[0].eps, 1.5);
    assert_eq!(rep.eps, vec![0.08, 0.04, 0.02]);
    assert!(rep.fit.is_some());
    assert!(rep.warnings.iter().any(|w| w.contains("excluded")));
    assert!(rep.runs.iter().all(|r| r.space == Space::Virtual));
}

#[test]
fn virtual_and_physical_sweeps_agree() {
    let phys = load("c_cloak_physical");
    let mut virt = phys.clone();
    virt.grid.space = SpaceChoice::Virtual;
    virt.grid.ppw = 30.0;
    virt.grid.eps_cells = 32.0;
    let eps = [0.1, 0.08, 0.05];
    let a = convergence_sweep(&phys, &eps, 3).unwrap();
    let b = convergence_sweep(&virt, &eps, 3).unwrap();
    for (x, y) in a.sup_norms.iter().zip(&b.sup_norms) {
        assert!((x - y).abs() <= 0.05 * y, "{x} vs {y}");
    }
}

#[test]
fn aperture_scan_checks_and_restricts() {
    let cfg = load("bare_screen");
    assert!(aperture_scan(&cfg, &[95.0], &[]).is_err());
    assert!(aperture_scan(&cfg, &[5.0], &[-1.0]).is_err());
    let rep = aperture_scan(&cfg, &[0.0, 5.0, 90.0], &[10.0, 90.0]).unwrap();
    assert_eq!(rep.rows.len(), 3);
    // Grazing incidence on a screen scatters almost nothing.
    assert!(rep.rows[0].sup_norm_db < rep.rows[1].sup_norm_db - 20.0);
    for r in &rep.rows {
        assert!(r.restricted[0].sup_norm_db <= r.restricted[1].sup_norm_db + 1e-12);
        assert!((r.restricted[1].sup_norm_db - r.sup_norm_db).abs() < 1e-12);
    }
    assert_eq!(rep.rows.iter().filter(|r| r.ratio_to_sin.is_some()).count(), 1);
    assert!(rep.linearity_spread.is_none());
}

#[test]
fn auto_space_picks_virtual_for_thin_layers() {
    let mut cfg = load("c_cloak_physical");
    cfg.grid.space = SpaceChoice::Auto;
    assert_eq!(plan(&cfg).unwrap().space, Space::Virtual);
    cfg.grid.ppw = 400.0;
    assert_eq!(plan(&cfg).unwrap().space, Space::Physical);
    let mut none = load("mie_hard_disk");
    none.grid.space = SpaceChoice::Virtual;
    assert_eq!(none.cloak.kind, CloakKind::None);
    assert_eq!(plan(&none).unwrap().space, Space::Physical);
}
