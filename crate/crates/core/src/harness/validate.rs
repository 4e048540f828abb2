//! Pre-solve report: admissibility, the lossy-layer conditions and the grid plan.

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::run::plan;
use super::HarnessError;
use crate::materials::{validate_layer_conditions, AssumptionParams, AssumptionReport, Space};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub space: Space,
    pub delta: f64,
    pub min_spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub extraction_radius: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub name: String,
    pub admissible: bool,
    /// Why the scenario was rejected, when it was.
    pub admissibility_error: Option<String>,
    /// Layer conditions over the checked ε values; absent without a cloak.
    pub assumption: Option<AssumptionReport>,
    pub grid: Option<GridPlan>,
    pub pass: bool,
}

/// Checks `cfg` without solving. Layer conditions are evaluated at `eps_list`
/// (sorted into decreasing order) or, when empty, at ε, ε/2 and ε/4.
/// Malformed configurations are errors; inadmissible ones are a failed report.
pub fn validate_scenario(cfg: &ScenarioConfig, eps_list: &[f64]) -> Result<ValidationReport, HarnessError> {
    cfg.validate()?;
    let mut report = ValidationReport { name: cfg.name.clone(), admissible: false, admissibility_error: None, assumption: None, grid: None, pass: false };
    let scenario = match cfg.build_physical() {
        Ok(s) => s,
        Err(HarnessError::Admissibility(e)) => {
            report.admissibility_error = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.admissible = true;
    if let Some(info) = &scenario.cloak {
        let mut eps: Vec<f64> = if eps_list.is_empty() { [1.0, 0.5, 0.25].iter().map(|s| s * cfg.cloak.eps).collect() } else { eps_list.to_vec() };
        if eps.iter().any(|e| !(*e > 0.0)) {
            return Err(HarnessError::Config("ε values must be positive".into()));
        }
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();
        let params = AssumptionParams::defaults_for(&info.layer, &info.k_eps);
        report.assumption = Some(validate_layer_conditions(&info.layer, &info.k_eps, &params, &eps)?);
    }
    let p = plan(cfg)?;
    let g = &p.grid;
    report.grid = Some(GridPlan {
        space: p.space,
        delta: g.delta,
        min_spacing: g.min_spacing(),
        nx: g.nx,
        ny: g.ny,
        extraction_radius: p.extraction_radius,
        warnings: g.warnings(p.k),
    });
    report.pass = report.assumption.as_ref().map_or(true, |a| a.pass);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cloak_and_rejection() {
        let mut cfg = ScenarioConfig::from_json(r#"{"cloak": {"kind": "C", "eps": 0.05}, "wave": {"l_e": 2.0, "incident_deg": [0]}}"#).unwrap();
        let rep = validate_scenario(&cfg, &[]).unwrap();
        assert!(rep.admissible && rep.pass, "{rep:?}");
        assert_eq!(rep.assumption.as_ref().unwrap().rows.len(), 3);
        assert_eq!(rep.grid.as_ref().unwrap().space, Space::Virtual);

        cfg.contents.obstacles.push(super::super::ObstacleConfig {
            kind: super::super::ObstacleKindConfig::Soft,
            shape: super::super::ShapeConfig::Disk { center: [0.0, 0.0], radius: 1.5 },
        });
        let rep = validate_scenario(&cfg, &[]).unwrap();
        assert!(!rep.admissible && !rep.pass && rep.admissibility_error.is_some());
    }
}
