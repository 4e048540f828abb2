//! Single runs: grid planning, the solve, far fields and output files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, SpaceChoice};
use super::HarnessError;
use crate::farfield::{equispaced_angles, kirchhoff_farfield, kirchhoff_farfield_at, sup_norm_db, FarFieldPattern};
use crate::geometry::{AbcGeometry, AxisBox, Component};
use crate::materials::{virtual_scenario, CloakKind, Scenario, Space};
use crate::solver::{assemble_and_solve_with, extract_circle, write_cfld, DiscreteField, Grid, GridSpec, IncidentWave, PmlSpec, RasterOptions, SolverOptions};
use crate::transforms::RefineZone;

/// Refinement zones around each ball component of `k_eps`: width 2.5·r over
/// every active axis at spacing r/`cells`, overlapping zones merged.
pub fn refinement_zones(k_eps: &AbcGeometry<2>, cells: f64) -> [Vec<RefineZone>; 2] {
    let mut zones: [Vec<RefineZone>; 2] = [Vec::new(), Vec::new()];
    for c in k_eps.components() {
        let Component::Ball(b) = c else { continue };
        for (l, z) in zones.iter_mut().enumerate() {
            if b.extrusion[l].is_none() {
                let half = 1.25 * b.r / b.w.entries()[l];
                z.push(RefineZone { lo: b.center[l] - half, hi: b.center[l] + half, h: b.r / cells });
            }
        }
    }
    for z in zones.iter_mut() {
        z.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<RefineZone> = Vec::new();
        for r in z.drain(..) {
            match merged.last_mut() {
                Some(last) if r.lo <= last.hi => {
                    last.hi = last.hi.max(r.hi);
                    last.h = last.h.min(r.h);
                }
                _ => merged.push(r),
            }
        }
        *z = merged;
    }
    zones
}

/// Scenario, grid and extraction circle for one configuration.
#[derive(Clone, Debug)]
pub struct Plan {
    pub scenario: Scenario<2>,
    pub space: Space,
    pub grid: Grid,
    pub k: f64,
    pub extraction_radius: f64,
}

pub fn plan(cfg: &ScenarioConfig) -> Result<Plan, HarnessError> {
    let physical = cfg.build_physical()?;
    let k = cfg.k();
    let delta = cfg.delta();
    let space = match cfg.grid.space {
        _ if cfg.cloak.kind == CloakKind::None => Space::Physical,
        SpaceChoice::Physical => Space::Physical,
        SpaceChoice::Virtual => Space::Virtual,
        SpaceChoice::Auto if cfg.cloak.eps < 4.0 * delta => Space::Virtual,
        SpaceChoice::Auto => Space::Physical,
    };
    let (scenario, zones) = match space {
        Space::Physical => (physical, [Vec::new(), Vec::new()]),
        Space::Virtual => {
            let v = virtual_scenario(&physical)?;
            let zones = match &v.cloak {
                Some(info) if cfg.cloak.eps / cfg.grid.eps_cells < delta => refinement_zones(&info.k_eps, cfg.grid.eps_cells),
                _ => [Vec::new(), Vec::new()],
            };
            (v, zones)
        }
    };
    let reach = scenario.scatterer_radius().unwrap_or(0.0);
    let extraction_radius = (reach + cfg.grid.margin_cells * delta).max(4.0 * delta);
    let half = extraction_radius + 4.0 * delta;
    let pml = cfg.grid.pml_cells.map_or_else(|| PmlSpec::one_wavelength(k, delta), PmlSpec::new);
    let spec = GridSpec { zones, ..GridSpec::uniform(AxisBox { lo: [-half; 2], hi: [half; 2] }, delta, pml) };
    let grid = Grid::new(&spec)?;
    Ok(Plan { scenario, space, grid, k, extraction_radius })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub delta: f64,
    pub min_spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub pml_cells: usize,
    pub stretched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidentSummary {
    pub angle_rad: f64,
    pub sup_norm: f64,
    #[serde(deserialize_with = "super::db_serde::one")]
    pub sup_norm_db: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub space: Space,
    pub k: f64,
    pub eps: f64,
    pub grid: GridSummary,
    pub extraction_radius: f64,
    pub unknowns: usize,
    pub nonzeros: usize,
    pub incidents: Vec<IncidentSummary>,
    /// Largest sup norm over the incident directions.
    pub sup_norm: f64,
    #[serde(deserialize_with = "super::db_serde::one")]
    pub sup_norm_db: f64,
    pub warnings: Vec<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub patterns: Vec<FarFieldPattern>,
    pub fields: Vec<DiscreteField>,
}

fn solver_options(cfg: &ScenarioConfig) -> SolverOptions {
    SolverOptions { raster: RasterOptions { subsamples: cfg.grid.subsamples, hard: cfg.grid.hard }, ..SolverOptions::default() }
}

fn waves(k: f64, degrees: &[f64]) -> Result<Vec<IncidentWave>, HarnessError> {
    Ok(degrees.iter().map(|a| IncidentWave::from_angle(k, a.to_radians())).collect::<Result<_, _>>()?)
}

/// Solves every incident direction with one factorization and transforms
/// each scattered field to `cfg.outputs.n_dirs` far-field directions.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    let t0 = Instant::now();
    let p = plan(cfg)?;
    let waves = waves(p.k, &cfg.wave.incident_deg)?;
    let (fields, report) = assemble_and_solve_with(&p.scenario, &waves, &p.grid, &solver_options(cfg))?;
    let mut patterns = Vec::with_capacity(fields.len());
    let mut incidents = Vec::with_capacity(fields.len());
    for ((f, w), res) in fields.iter().zip(&waves).zip(&report.residuals) {
        let s = extract_circle(f, w, p.extraction_radius, cfg.grid.circle_points)?;
        let ff = kirchhoff_farfield(&s, p.k, w.d, cfg.outputs.n_dirs)?;
        let (m, db) = sup_norm_db(&ff);
        incidents.push(IncidentSummary { angle_rad: w.d[1].atan2(w.d[0]), sup_norm: m, sup_norm_db: db, residual: *res });
        patterns.push(ff);
    }
    let sup = incidents.iter().map(|i| i.sup_norm).fold(0.0, f64::max);
    let g = &p.grid;
    let summary = RunSummary {
        name: cfg.name.clone(),
        space: p.space,
        k: p.k,
        eps: cfg.cloak.eps,
        grid: GridSummary { delta: g.delta, min_spacing: g.min_spacing(), nx: g.nx, ny: g.ny, pml_cells: g.pml.cells, stretched: !g.stretch.is_uniform() },
        extraction_radius: p.extraction_radius,
        unknowns: report.unknowns,
        nonzeros: report.nonzeros,
        incidents,
        sup_norm: sup,
        sup_norm_db: crate::farfield::amplitude_db(sup),
        warnings: report.warnings,
        seconds: t0.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { summary, patterns, fields })
}

/// `incident_rad,angle_rad,re,im,abs,db` rows for every pattern.
pub fn write_farfield_csv<W: Write>(patterns: &[FarFieldPattern], mut w: W) -> Result<(), HarnessError> {
    w.write_all(b"incident_rad,angle_rad,re,im,abs,db\n")?;
    for p in patterns {
        let inc = p.d[1].atan2(p.d[0]);
        let mut buf = Vec::new();
        p.write_csv(&mut buf)?;
        for line in String::from_utf8_lossy(&buf).lines().skip(1) {
            writeln!(w, "{inc},{line}")?;
        }
    }
    Ok(())
}

/// Writes farfield.csv, report.json and, when requested, `scattered_<i>.cfld`.
pub fn write_run(dir: &Path, cfg: &ScenarioConfig, out: &RunOutput) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_farfield_csv(&out.patterns, BufWriter::new(File::create(dir.join("farfield.csv"))?))?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&out.summary)? + "\n")?;
    if cfg.outputs.field_dump {
        for (i, f) in out.fields.iter().enumerate() {
            write_cfld(&dir.join(format!("scattered_{i}.cfld")), f)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReciprocityReport {
    pub directions: usize,
    /// max |u_∞(−d, −x̂) − u_∞(x̂, d)| over the direction grid.
    pub max_defect: f64,
    pub max_abs: f64,
    pub relative: f64,
}

/// Far fields on an n×n grid of equispaced incident and observation
/// directions (n even, so the set is closed under negation), compared with
/// their reciprocal partners.
pub fn reciprocity_check(cfg: &ScenarioConfig, n: usize) -> Result<ReciprocityReport, HarnessError> {
    if n < 2 || n % 2 != 0 {
        return Err(HarnessError::Config(format!("reciprocity needs an even direction count, got {n}")));
    }
    let p = plan(cfg)?;
    let angles = equispaced_angles(n);
    let waves: Vec<IncidentWave> = angles.iter().map(|&a| IncidentWave::from_angle(p.k, a)).collect::<Result<_, _>>()?;
    let (fields, _) = assemble_and_solve_with(&p.scenario, &waves, &p.grid, &solver_options(cfg))?;
    // m[i][j] = u_∞(x̂_i, d_j)
    let mut m = Vec::with_capacity(n);
    for (f, w) in fields.iter().zip(&waves) {
        let s = extract_circle(f, w, p.extraction_radius, cfg.grid.circle_points)?;
        m.push(kirchhoff_farfield_at(&s, p.k, w.d, &angles)?.values);
    }
    let h = n / 2;
    let (mut defect, mut max_abs) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let a = m[j][i];
            let b = m[(i + h) % n][(j + h) % n];
            defect = defect.max((a - b).norm());
            max_abs = max_abs.max(a.norm());
        }
    }
    let relative = if max_abs > 0.0 { defect / max_abs } else { defect };
    Ok(ReciprocityReport { directions: n, max_defect: defect, max_abs, relative })
}
