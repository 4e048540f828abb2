//! Matrix assembly, right-hand sides and the sparse direct solve.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use super::raster::{rasterize, CellStatus, Rasterized};
use super::{DiscreteField, FieldKind, Grid, IncidentWave, SolveError, SolveReport, SolverOptions};
use crate::materials::Scenario;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-wise sparse operator.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub rows: Vec<Vec<(usize, Complex64)>>,
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.rows.par_iter().map(|r| r.iter().map(|&(c, v)| v * x[c]).sum()).collect()
    }

    /// Largest |A_pq − A_qp| over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (p, row) in self.rows.iter().enumerate() {
            for &(q, v) in row {
                let w = self.rows[q].iter().find(|e| e.0 == p).map_or(ZERO, |e| e.1);
                worst = worst.max((v - w).norm());
            }
        }
        worst
    }
}

/// Signs (sx, sy) of cell (a, b) relative to corner (ci, cj).
fn corner_cells(ci: usize, cj: usize) -> [(isize, isize, f64, f64); 4] {
    let (i, j) = (ci as isize, cj as isize);
    [(i - 1, j - 1, -1.0, -1.0), (i, j - 1, 1.0, -1.0), (i - 1, j, -1.0, 1.0), (i, j, 1.0, 1.0)]
}

/// Entries of row P for a free cell, with per-entry coefficients taken from
/// `face_x`, `face_y`, `corner` and `mass`.
fn free_row(r: &Rasterized, i: usize, j: usize, face_x: &[Complex64], face_y: &[Complex64], cross: bool, mass: &[Complex64]) -> Vec<(usize, Complex64)> {
    let g = &r.grid;
    let (nx, ny) = (g.nx, g.ny);
    let p = g.idx(i, j);
    let mut row: Vec<(usize, Complex64)> = Vec::with_capacity(9);
    let mut add = |c: usize, v: Complex64| match row.iter_mut().find(|e| e.0 == c) {
        Some(e) => e.1 += v,
        None => row.push((c, v)),
    };
    add(p, mass[p]);
    let faces = [
        (face_x[r.x_face(i, j)], i.checked_sub(1).map(|a| g.idx(a, j))),
        (face_x[r.x_face(i + 1, j)], (i + 1 < nx).then(|| g.idx(i + 1, j))),
        (face_y[r.y_face(i, j)], j.checked_sub(1).map(|b| g.idx(i, b))),
        (face_y[r.y_face(i, j + 1)], (j + 1 < ny).then(|| g.idx(i, j + 1))),
    ];
    for (a, nb) in faces {
        if a == ZERO {
            continue;
        }
        add(p, -a);
        if let Some(q) = nb {
            add(q, a);
        }
    }
    if cross {
        for (ci, cj) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
            let c = r.cxy[r.corner(ci, cj)];
            if c == ZERO {
                continue;
            }
            let cells = corner_cells(ci, cj);
            let &(_, _, sxp, syp) = cells.iter().find(|e| e.0 == i as isize && e.1 == j as isize).expect("cell touches its corner");
            for (a, b, sx, sy) in cells {
                if a < 0 || b < 0 || a as usize >= nx || b as usize >= ny {
                    continue;
                }
                add(g.idx(a as usize, b as usize), -0.25 * c * (syp * sx + sxp * sy));
            }
        }
    }
    row
}

pub fn assemble_operator(r: &Rasterized) -> DiscreteOperator {
    let g = &r.grid;
    let rows = (0..g.n_cells())
        .into_par_iter()
        .map(|p| {
            let (i, j) = (p % g.nx, p / g.nx);
            match r.status[p] {
                CellStatus::Free => free_row(r, i, j, &r.ax, &r.ay, true, &r.mass),
                _ => vec![(p, ONE)],
            }
        })
        .collect();
    DiscreteOperator { rows }
}

/// Δ²(−h + div H) − (A − A₀)u^i on free cells, −u^i on soft cells, 0 on hard cells.
pub fn right_hand_side(r: &Rasterized, op: &DiscreteOperator, ui: &[Complex64]) -> Vec<Complex64> {
    let g = &r.grid;
    (0..g.n_cells())
        .into_par_iter()
        .map(|p| match r.status[p] {
            CellStatus::Hard => ZERO,
            CellStatus::Soft => -ui[p],
            CellStatus::Free => {
                let (i, j) = (p % g.nx, p / g.nx);
                let a0 = free_row(r, i, j, &r.ax0, &r.ay0, false, &r.mass0);
                let au: Complex64 = op.rows[p].iter().map(|&(c, v)| v * ui[c]).sum();
                let a0u: Complex64 = a0.iter().map(|&(c, v)| v * ui[c]).sum();
                r.source[p] - (au - a0u)
            }
        })
        .collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves for the scattered field of every wave (all sharing one k) with one factorization.
pub fn assemble_and_solve_with(
    scenario: &Scenario<2>,
    waves: &[IncidentWave],
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<(Vec<DiscreteField>, SolveReport), SolveError> {
    let Some(first) = waves.first() else { return Err(SolveError::InvalidWave("no incident waves".into())) };
    let k = first.k;
    if waves.iter().any(|w| (w.k - k).abs() > 1e-14 * k) {
        return Err(SolveError::InvalidWave("incident waves must share one wavenumber".into()));
    }
    if scenario.has_impedance() {
        return Err(SolveError::Unsupported("impedance obstacles".into()));
    }
    let t0 = Instant::now();
    let raster = rasterize(scenario, grid, k, &opts.raster)?;
    let op = assemble_operator(&raster);
    let n = op.len();
    let rhs: Vec<Vec<Complex64>> = waves
        .iter()
        .map(|w| {
            let ui = DiscreteField::incident(grid, *w).values;
            right_hand_side(&raster, &op, &ui)
        })
        .collect();
    let mut triplets = Vec::with_capacity(op.nonzeros());
    for (p, row) in op.rows.iter().enumerate() {
        for &(q, v) in row {
            triplets.push(Triplet::new(p, q, v));
        }
    }
    let assembly_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| SolveError::LinearSolve { reason: format!("{e:?}"), residual: f64::NAN })?;
    let lu = a.sp_lu().map_err(|e| SolveError::LinearSolve { reason: format!("{e:?}"), residual: f64::NAN })?;
    let b = Mat::<Complex64>::from_fn(n, waves.len(), |i, c| rhs[c][i]);
    let x = lu.solve(&b);
    let solve_seconds = t1.elapsed().as_secs_f64();

    let mut fields = Vec::with_capacity(waves.len());
    let mut residuals = Vec::with_capacity(waves.len());
    let reach = scenario.scatterer_radius();
    for (c, w) in waves.iter().enumerate() {
        let values: Vec<Complex64> = (0..n).map(|i| x[(i, c)]).collect();
        let ax = op.apply(&values);
        let diff: Vec<Complex64> = ax.iter().zip(&rhs[c]).map(|(a, b)| a - b).collect();
        let bn = norm(&rhs[c]);
        let res = if bn > 0.0 { norm(&diff) / bn } else { norm(&diff) };
        if !res.is_finite() || res > opts.residual_tol {
            return Err(SolveError::LinearSolve { reason: "residual above tolerance".into(), residual: res });
        }
        residuals.push(res);
        fields.push(DiscreteField { grid: grid.clone(), values, kind: FieldKind::Scattered, wave: *w, scatterer_radius: reach });
    }
    let report = SolveReport { unknowns: n, nonzeros: op.nonzeros(), warnings: grid.warnings(k), residuals, assembly_seconds, solve_seconds };
    Ok((fields, report))
}

pub fn assemble_and_solve(scenario: &Scenario<2>, wave: IncidentWave, grid: &Grid) -> Result<(DiscreteField, SolveReport), SolveError> {
    let (mut f, r) = assemble_and_solve_with(scenario, &[wave], grid, &SolverOptions::default())?;
    Ok((f.remove(0), r))
}

/// Im Σ q′|u|²Δ²V over non-PML cells with Im q′ > 0: the power absorbed by lossy media.
pub fn absorbed_power(r: &Rasterized, total: &DiscreteField) -> f64 {
    let g = &r.grid;
    let d2 = g.delta * g.delta;
    (0..g.ny)
        .flat_map(|j| (0..g.nx).map(move |i| (i, j)))
        .filter(|&(i, j)| !g.in_pml(i, j))
        .map(|(i, j)| {
            let p = g.idx(i, j);
            if r.q[p].im > 0.0 && r.status[p] == CellStatus::Free {
                r.q[p].im * total.values[p].norm_sqr() * d2 * r.volume[p]
            } else {
                0.0
            }
        })
        .sum()
}
