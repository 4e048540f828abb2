//! Regularized approximate cloaks built by transformation optics, with a 2D
//! frequency-domain Helmholtz solver and far-field tooling to measure them.

pub mod farfield;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod materials;
pub mod solver;
pub mod transforms;

pub use farfield::{mie_farfield, DiskKind, FarFieldPattern};
pub use geometry::{AbcGeometry, GeometryKind, ShapeParams};
pub use harness::{
    aperture_scan, convergence_sweep, fit_rate, reciprocity_check, run_scenario, run_selftest, validate_scenario, write_farfield_csv, write_run,
    ApertureReport, ConvergenceReport, HarnessError, RateFit, RunOutput, RunSummary, ScenarioConfig, SelftestReport, ValidationReport,
};
pub use materials::{CloakKind, LayerVariant, Space};
