//! Scenario configuration, single runs, ε sweeps, aperture scans and the
//! no-PDE self test.

pub mod config;
pub mod run;
pub mod selftest;
pub mod sweep;
pub mod validate;

use thiserror::Error;

use crate::farfield::FarFieldError;
use crate::geometry::GeometryError;
use crate::materials::{AdmissibilityError, MaterialError};
use crate::solver::SolveError;

pub use config::{
    CloakConfig, ContentsConfig, GridConfig, LayerConfig, MediumConfig, ObstacleConfig, ObstacleKindConfig, OutputConfig, ScenarioConfig, ShapeConfig,
    SourceConfig, SpaceChoice, WaveConfig,
};
pub use run::{plan, reciprocity_check, refinement_zones, run_scenario, write_farfield_csv, write_run, Plan, ReciprocityReport, RunOutput, RunSummary};
pub use selftest::{run_selftest, Check, SelftestReport};
pub use sweep::{aperture_scan, convergence_sweep, fit_rate, ApertureReport, ApertureRow, ConvergenceReport, RateFit};
pub use validate::{validate_scenario, GridPlan, ValidationReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("rate fit: {0}")]
    Fit(String),
    #[error("inadmissible scenario: {0}")]
    Admissibility(#[from] AdmissibilityError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("solver: {0}")]
    Solve(#[from] SolveError),
    #[error("far field: {0}")]
    FarField(#[from] FarFieldError),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// JSON writes −∞ dB (a zero norm) as null; read it back.
pub(crate) mod db_serde {
    use serde::{Deserialize, Deserializer};

    pub fn one<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }

    pub fn many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(d)?.into_iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect())
    }
}
