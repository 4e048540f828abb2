//! 2D frequency-domain Helmholtz solver.
//!
//! Flux-form finite differences on a cell-centred grid in computational
//! coordinates, scattered-field formulation with plane-wave incidence, PML
//! truncation and direct sparse LU. The discrete operator is
//! Σ_f a_f (u_N − u_P) + cross terms + Δ²k²q u_P, and the right-hand side is
//! Δ²(−h + div H) − (A − A₀)u^i with A₀ the background operator on the same
//! grid, so free space scatters exactly nothing.

mod assemble;
pub mod extract;
pub mod grid;
pub mod raster;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Point;
use crate::materials::MaterialError;

pub use assemble::{absorbed_power, assemble_and_solve, assemble_and_solve_with, DiscreteOperator};
pub use extract::{extract_circle, read_cfld, write_cfld, CfldHeader};
pub use grid::{Grid, GridSpec, PmlSpec};
pub use raster::{rasterize, CellStatus, HardTreatment, RasterOptions, Rasterized};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("linear solve failed: {reason} (residual {residual:e})")]
    LinearSolve { reason: String, residual: f64 },
    #[error("extraction: {0}")]
    Extraction(String),
    #[error("invalid incident wave: {0}")]
    InvalidWave(String),
    #[error("field dump: {0}")]
    Format(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// u^i(x) = e^{ik x·d}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    pub k: f64,
    pub d: [f64; 2],
}

impl IncidentWave {
    pub fn new(k: f64, d: [f64; 2]) -> Result<Self, SolveError> {
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if !(k > 0.0) || !k.is_finite() {
            return Err(SolveError::InvalidWave(format!("k = {k}")));
        }
        if (n - 1.0).abs() > 1e-9 {
            return Err(SolveError::InvalidWave(format!("|d| = {n}")));
        }
        Ok(Self { k, d })
    }

    /// Direction at `angle` radians from the x-axis.
    pub fn from_angle(k: f64, angle: f64) -> Result<Self, SolveError> {
        Self::new(k, [angle.cos(), angle.sin()])
    }

    pub fn value(&self, x: &Point<2>) -> Complex64 {
        Complex64::from_polar(1.0, self.k * (x[0] * self.d[0] + x[1] * self.d[1]))
    }

    pub fn gradient(&self, x: &Point<2>) -> [Complex64; 2] {
        let v = self.value(x) * Complex64::new(0.0, self.k);
        [v * self.d[0], v * self.d[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scattered,
    Total,
    Incident,
}

/// Cell-centred values on `grid`.
#[derive(Clone, Debug)]
pub struct DiscreteField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub kind: FieldKind,
    pub wave: IncidentWave,
    /// Radius of a centred disk holding every scatterer.
    pub scatterer_radius: Option<f64>,
}

impl DiscreteField {
    pub fn incident(grid: &Grid, wave: IncidentWave) -> Self {
        let values = (0..grid.ny).flat_map(|j| (0..grid.nx).map(move |i| (i, j))).map(|(i, j)| wave.value(&grid.cell_x(i, j))).collect();
        Self { grid: grid.clone(), values, kind: FieldKind::Incident, wave, scatterer_radius: None }
    }

    /// Total field from a scattered one (or itself when already total).
    pub fn total(&self) -> Self {
        match self.kind {
            FieldKind::Total => self.clone(),
            FieldKind::Incident => Self { kind: FieldKind::Total, ..self.clone() },
            FieldKind::Scattered => {
                let inc = Self::incident(&self.grid, self.wave);
                let values = self.values.iter().zip(&inc.values).map(|(s, i)| s + i).collect();
                Self { values, kind: FieldKind::Total, ..self.clone() }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest magnitude outside the PML.
    pub fn max_abs_interior(&self) -> f64 {
        let g = &self.grid;
        (0..g.ny)
            .flat_map(|j| (0..g.nx).map(move |i| (i, j)))
            .filter(|&(i, j)| !g.in_pml(i, j))
            .map(|(i, j)| self.values[g.idx(i, j)].norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub unknowns: usize,
    pub nonzeros: usize,
    pub warnings: Vec<String>,
    /// ‖Ax − b‖/‖b‖ per right-hand side.
    pub residuals: Vec<f64>,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub raster: RasterOptions,
    /// Relative residual above which the solve is reported as failed.
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { raster: RasterOptions::default(), residual_tol: 1e-8 }
    }
}
