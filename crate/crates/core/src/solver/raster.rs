//! Sampling a scenario onto a grid: face coefficients, corner cross terms,
//! cell mass terms, obstacle masks and sources.
//!
//! Media are expressed in computational coordinates t = stretch(x), where
//! σ′ = DσD/det D and q′ = q/det D for the diagonal stretch Jacobian D. PML
//! factors multiply on top of that.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Grid, SolveError};
use crate::geometry::AxisBox;
use crate::linalg::Point;
use crate::materials::{MaterialField, MaterialSample, ObstacleKind, Scenario, Shape, SourceSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardTreatment {
    /// Faces are open in proportion to the part lying outside the obstacle,
    /// and cells keep the mass of their open part.
    #[default]
    CutCell,
    /// A cell is inside when its centre is; faces touching an inside cell close.
    Staircase,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterOptions {
    /// Samples per axis for averaging over a face, corner or cell.
    pub subsamples: usize,
    pub hard: HardTreatment,
}

impl Default for RasterOptions {
    fn default() -> Self {
        Self { subsamples: 2, hard: HardTreatment::CutCell }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Free,
    /// Inside a sound-hard obstacle; decoupled.
    Hard,
    /// Inside a sound-soft obstacle; u^s = −u^i.
    Soft,
}

/// Discrete coefficients. All face, corner and mass entries already carry the
/// PML factors and Δ² scaling, so row P of the operator reads
/// Σ_f a_f (u_N − u_P) + corner terms + mass_P u_P.
#[derive(Clone, Debug)]
pub struct Rasterized {
    pub k: f64,
    pub grid: Grid,
    /// x-faces, `(nx+1)·ny`, index `j(nx+1) + i` is the face left of cell (i, j).
    pub ax: Vec<Complex64>,
    /// y-faces, `nx·(ny+1)`, index `j·nx + i` is the face below cell (i, j).
    pub ay: Vec<Complex64>,
    /// σ′_xy at corners, `(nx+1)(ny+1)`, index `j(nx+1) + i` is the corner below-left of cell (i, j).
    pub cxy: Vec<Complex64>,
    /// Δ²k²q″V per cell.
    pub mass: Vec<Complex64>,
    /// Background counterparts (σ = I, q = 1, no obstacles, same stretch and PML).
    pub ax0: Vec<Complex64>,
    pub ay0: Vec<Complex64>,
    pub mass0: Vec<Complex64>,
    /// Cell average of q′ without PML factors.
    pub q: Vec<Complex64>,
    /// Open fraction of each x-face and y-face.
    pub open_x: Vec<f64>,
    pub open_y: Vec<f64>,
    /// Open volume fraction.
    pub volume: Vec<f64>,
    pub status: Vec<CellStatus>,
    /// Δ²(−h + div H) per cell, scaled like the operator rows.
    pub source: Vec<Complex64>,
}

impl Rasterized {
    pub fn x_face(&self, i: usize, j: usize) -> usize {
        j * (self.grid.nx + 1) + i
    }
    pub fn y_face(&self, i: usize, j: usize) -> usize {
        j * self.grid.nx + i
    }
    pub fn corner(&self, i: usize, j: usize) -> usize {
        j * (self.grid.nx + 1) + i
    }
}

/// Medium sample in computational coordinates: (σ′_xx, σ′_yy, σ′_xy, q′).
type CompSample = (f64, f64, f64, Complex64);

fn push_comp(m: &MaterialSample<2>, d: [f64; 2]) -> CompSample {
    let det = d[0] * d[1];
    (m.sigma[0][0] * d[0] / d[1], m.sigma[1][1] * d[1] / d[0], m.sigma[0][1], m.q / det)
}

struct Sampler<'a> {
    medium: MaterialField<2>,
    grid: &'a Grid,
}

impl Sampler<'_> {
    fn pair(&self, t: Point<2>) -> Result<(CompSample, CompSample), SolveError> {
        let x = self.grid.stretch.to_physical(&t);
        let d = self.grid.stretch.jacobian_diag(&x);
        let m = self.medium.sample(&x)?;
        Ok((push_comp(&m, d), push_comp(&MaterialSample::background(), d)))
    }
}

fn offsets(n: usize, delta: f64) -> Vec<f64> {
    (0..n).map(|a| ((a as f64 + 0.5) / n as f64 - 0.5) * delta).collect()
}

/// Harmonic mean along `normal` then arithmetic mean across, for the
/// diagonal entry `pick` of scenario and background.
fn face_average(s: &Sampler, centre: Point<2>, normal: usize, offs: &[f64], pick: fn(&CompSample) -> f64) -> Result<(f64, f64), SolveError> {
    let n = offs.len();
    let (mut acc, mut acc0) = (0.0, 0.0);
    for &b in offs {
        let (mut inv, mut inv0) = (0.0, 0.0);
        for &a in offs {
            let mut t = centre;
            t[normal] += a;
            t[1 - normal] += b;
            let (m, m0) = s.pair(t)?;
            inv += 1.0 / pick(&m);
            inv0 += 1.0 / pick(&m0);
        }
        acc += n as f64 / inv;
        acc0 += n as f64 / inv0;
    }
    Ok((acc / n as f64, acc0 / n as f64))
}

fn area_average(s: &Sampler, centre: Point<2>, offs: &[f64]) -> Result<(f64, Complex64, Complex64), SolveError> {
    let (mut xy, mut q, mut q0) = (0.0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for &a in offs {
        for &b in offs {
            let (m, m0) = s.pair([centre[0] + a, centre[1] + b])?;
            xy += m.2;
            q += m.3;
            q0 += m0.3;
        }
    }
    let w = (offs.len() * offs.len()) as f64;
    Ok((xy / w, q / w, q0 / w))
}

/// Blocked length, in computational units, of the segment running along
/// `axis` from `t0` to `t1` at fixed computational coordinate `t_other`.
fn blocked_length(grid: &Grid, shapes: &[&Shape<2>], axis: usize, t_other: f64, t0: f64, t1: f64) -> f64 {
    let other = 1 - axis;
    let st = &grid.stretch.axes;
    let x_other = st[other].inverse(t_other);
    let (x0, x1) = (st[axis].inverse(t0), st[axis].inverse(t1));
    let mut blocked = 0.0;
    for shape in shapes {
        let bb = shape.bounding_box();
        if x_other < bb.lo[other] || x_other > bb.hi[other] || x1 < bb.lo[axis] || x0 > bb.hi[axis] {
            continue;
        }
        let interval = match shape {
            Shape::Disk { center, radius } => {
                let d = x_other - center[other];
                let half = (radius * radius - d * d).max(0.0).sqrt();
                Some((center[axis] - half, center[axis] + half))
            }
            Shape::Box(b) => Some((b.lo[axis], b.hi[axis])),
            _ => None,
        };
        blocked += match interval {
            Some((lo, hi)) => {
                let (tl, th) = (st[axis].forward(lo).max(t0), st[axis].forward(hi).min(t1));
                (th - tl).max(0.0)
            }
            None => {
                let m = 32;
                let h = (t1 - t0) / m as f64;
                let inside = (0..m)
                    .filter(|&s| {
                        let mut t = [0.0; 2];
                        t[axis] = t0 + (s as f64 + 0.5) * h;
                        t[other] = t_other;
                        shape.contains(&grid.stretch.to_physical(&t))
                    })
                    .count();
                inside as f64 * h
            }
        };
    }
    blocked.min(t1 - t0)
}

fn box_touches(grid: &Grid, i: usize, j: usize, bb: &AxisBox<2>) -> bool {
    let d = grid.delta;
    let c = grid.cell_t(i, j);
    let lo = grid.stretch.to_physical(&[c[0] - d, c[1] - d]);
    let hi = grid.stretch.to_physical(&[c[0] + d, c[1] + d]);
    lo[0] <= bb.hi[0] && hi[0] >= bb.lo[0] && lo[1] <= bb.hi[1] && hi[1] >= bb.lo[1]
}

/// Screen covering as a grid-line index and the blocked fraction of each face on that line.
struct ScreenLine {
    axis: usize,
    line: usize,
    covered: Vec<f64>,
}

fn screen_lines(grid: &Grid, shapes: &[&Shape<2>]) -> Result<Vec<ScreenLine>, SolveError> {
    let mut out = Vec::new();
    for s in shapes {
        let Shape::Screen { normal_axis, offset, span } = s else { continue };
        let axis = *normal_axis;
        let along = 1 - axis;
        let line =
            grid.aligned_line(axis, *offset).ok_or_else(|| SolveError::InvalidGrid(format!("screen at x{axis} = {offset} does not lie on a grid line")))?;
        let st = &grid.stretch.axes[along];
        let (tl, th) = (st.forward(span.lo[along]), st.forward(span.hi[along]));
        let n = grid.dims()[along];
        let covered = (0..n)
            .map(|i| {
                let t0 = grid.origin[along] + i as f64 * grid.delta;
                ((th.min(t0 + grid.delta) - tl.max(t0)).max(0.0) / grid.delta).min(1.0)
            })
            .collect();
        out.push(ScreenLine { axis, line, covered });
    }
    Ok(out)
}

pub fn rasterize(scenario: &Scenario<2>, grid: &Grid, k: f64, opts: &RasterOptions) -> Result<Rasterized, SolveError> {
    let (nx, ny) = (grid.nx, grid.ny);
    let d = grid.delta;
    let n_sub = opts.subsamples.max(1);
    let offs = offsets(n_sub, d);
    let sampler = Sampler { medium: scenario.medium(), grid };
    let o = grid.origin;

    let mut hard: Vec<&Shape<2>> = Vec::new();
    let mut soft: Vec<&Shape<2>> = Vec::new();
    for ob in &scenario.obstacles {
        match ob.kind {
            ObstacleKind::SoundHard => hard.push(&ob.shape),
            ObstacleKind::SoundSoft if ob.shape.is_thin() => return Err(SolveError::Unsupported("sound-soft screens".into())),
            ObstacleKind::SoundSoft => soft.push(&ob.shape),
            ObstacleKind::Impedance(_) => return Err(SolveError::Unsupported("impedance obstacles".into())),
        }
    }
    let solid: Vec<&Shape<2>> = hard.iter().copied().filter(|s| !s.is_thin()).collect();
    let screens = screen_lines(grid, &hard)?;

    // Media, row by row.
    let rows: Vec<_> = (0..=ny)
        .into_par_iter()
        .map(|j| -> Result<_, SolveError> {
            let mut ax = Vec::new();
            let mut ax0 = Vec::new();
            let mut ay = Vec::with_capacity(nx);
            let mut ay0 = Vec::with_capacity(nx);
            let mut cxy = Vec::with_capacity(nx + 1);
            let mut mass = Vec::new();
            let mut mass0 = Vec::new();
            let mut q = Vec::new();
            let ty_line = o[1] + j as f64 * d;
            let ty_mid = ty_line + 0.5 * d;
            for i in 0..=nx {
                let tx_line = o[0] + i as f64 * d;
                let tx_mid = tx_line + 0.5 * d;
                let (c, _, _) = area_average(&sampler, [tx_line, ty_line], &offs)?;
                cxy.push(Complex64::new(c, 0.0));
                if j < ny {
                    let (a, a0) = face_average(&sampler, [tx_line, ty_mid], 0, &offs, |m| m.0)?;
                    let ratio = grid.pml_factor(1, ty_mid, k) / grid.pml_factor(0, tx_line, k);
                    ax.push(ratio * a);
                    ax0.push(ratio * a0);
                }
                if i < nx {
                    let (a, a0) = face_average(&sampler, [tx_mid, ty_line], 1, &offs, |m| m.1)?;
                    let ratio = grid.pml_factor(0, tx_mid, k) / grid.pml_factor(1, ty_line, k);
                    ay.push(ratio * a);
                    ay0.push(ratio * a0);
                    if j < ny {
                        let (_, qm, qm0) = area_average(&sampler, [tx_mid, ty_mid], &offs)?;
                        let s = grid.pml_factor(0, tx_mid, k) * grid.pml_factor(1, ty_mid, k) * (d * d * k * k);
                        mass.push(s * qm);
                        mass0.push(s * qm0);
                        q.push(qm);
                    }
                }
            }
            Ok((ax, ax0, ay, ay0, cxy, mass, mass0, q))
        })
        .collect::<Result<_, _>>()?;

    let mut r = Rasterized {
        k,
        grid: grid.clone(),
        ax: Vec::with_capacity((nx + 1) * ny),
        ay: Vec::with_capacity(nx * (ny + 1)),
        cxy: Vec::with_capacity((nx + 1) * (ny + 1)),
        mass: Vec::with_capacity(nx * ny),
        ax0: Vec::with_capacity((nx + 1) * ny),
        ay0: Vec::with_capacity(nx * (ny + 1)),
        mass0: Vec::with_capacity(nx * ny),
        q: Vec::with_capacity(nx * ny),
        open_x: vec![1.0; (nx + 1) * ny],
        open_y: vec![1.0; nx * (ny + 1)],
        volume: vec![1.0; nx * ny],
        status: vec![CellStatus::Free; nx * ny],
        source: vec![Complex64::new(0.0, 0.0); nx * ny],
    };
    for (ax, ax0, ay, ay0, cxy, mass, mass0, q) in rows {
        r.ax.extend(ax);
        r.ax0.extend(ax0);
        r.ay.extend(ay);
        r.ay0.extend(ay0);
        r.cxy.extend(cxy);
        r.mass.extend(mass);
        r.mass0.extend(mass0);
        r.q.extend(q);
    }

    // Obstacles.
    let near = |i: usize, j: usize, shapes: &[&Shape<2>]| shapes.iter().any(|s| box_touches(grid, i, j, &s.bounding_box()));
    for j in 0..ny {
        for i in 0..nx {
            let p = grid.idx(i, j);
            let x = grid.cell_x(i, j);
            if !soft.is_empty() && near(i, j, &soft) && soft.iter().any(|s| s.contains(&x)) {
                r.status[p] = CellStatus::Soft;
                continue;
            }
            if solid.is_empty() || !near(i, j, &solid) {
                continue;
            }
            match opts.hard {
                HardTreatment::Staircase => {
                    if solid.iter().any(|s| s.contains(&x)) {
                        r.status[p] = CellStatus::Hard;
                        r.volume[p] = 0.0;
                    }
                }
                HardTreatment::CutCell => {
                    let c = grid.cell_t(i, j);
                    let lines = 16;
                    let open: f64 = (0..lines)
                        .map(|s| {
                            let tx = c[0] + ((s as f64 + 0.5) / lines as f64 - 0.5) * d;
                            1.0 - blocked_length(grid, &solid, 1, tx, c[1] - 0.5 * d, c[1] + 0.5 * d) / d
                        })
                        .sum::<f64>()
                        / lines as f64;
                    r.volume[p] = open;
                    if open <= 1e-12 {
                        r.status[p] = CellStatus::Hard;
                    }
                }
            }
        }
    }

    // Face apertures.
    let hard_cell = |r: &Rasterized, i: isize, j: isize| {
        i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && r.status[grid.idx(i as usize, j as usize)] == CellStatus::Hard
    };
    for j in 0..ny {
        for i in 0..=nx {
            let f = r.x_face(i, j);
            let (ii, jj) = (i as isize, j as isize);
            let alpha = if hard_cell(&r, ii - 1, jj) || hard_cell(&r, ii, jj) {
                0.0
            } else if opts.hard == HardTreatment::CutCell && !solid.is_empty() && (near(i.min(nx - 1), j, &solid)) {
                let tx = o[0] + i as f64 * d;
                let ty0 = o[1] + j as f64 * d;
                1.0 - blocked_length(grid, &solid, 1, tx, ty0, ty0 + d) / d
            } else {
                1.0
            };
            r.open_x[f] = alpha;
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            let f = r.y_face(i, j);
            let (ii, jj) = (i as isize, j as isize);
            let alpha = if hard_cell(&r, ii, jj - 1) || hard_cell(&r, ii, jj) {
                0.0
            } else if opts.hard == HardTreatment::CutCell && !solid.is_empty() && near(i, j.min(ny - 1), &solid) {
                let ty = o[1] + j as f64 * d;
                let tx0 = o[0] + i as f64 * d;
                1.0 - blocked_length(grid, &solid, 0, ty, tx0, tx0 + d) / d
            } else {
                1.0
            };
            r.open_y[f] = alpha;
        }
    }
    for s in &screens {
        for (m, cov) in s.covered.iter().enumerate() {
            if *cov == 0.0 {
                continue;
            }
            // Faces on a line of constant x_axis are the faces normal to `axis`.
            if s.axis == 1 {
                let f = r.y_face(m, s.line);
                r.open_y[f] *= 1.0 - cov;
            } else {
                let f = r.x_face(s.line, m);
                r.open_x[f] *= 1.0 - cov;
            }
        }
    }

    for (a, o) in r.ax.iter_mut().zip(&r.open_x) {
        *a *= o;
    }
    for (a, o) in r.ay.iter_mut().zip(&r.open_y) {
        *a *= o;
    }
    // Mass of the open part; cross terms only between fully open cells.
    for p in 0..nx * ny {
        if r.volume[p] < 1.0 {
            r.mass[p] *= r.volume[p];
        }
    }
    for j in 0..=ny {
        for i in 0..=nx {
            let c = r.corner(i, j);
            if r.cxy[c] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let blocked = [(i.wrapping_sub(1), j.wrapping_sub(1)), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j)]
                .iter()
                .any(|&(a, b)| a < nx && b < ny && (r.status[grid.idx(a, b)] != CellStatus::Free || r.volume[grid.idx(a, b)] < 1.0));
            let on_screen = screens.iter().any(|s| {
                let (line, along) = if s.axis == 1 { (j, i) } else { (i, j) };
                line == s.line && ((along > 0 && s.covered[along - 1] > 0.0) || (along < s.covered.len() && s.covered[along] > 0.0))
            });
            if blocked || on_screen {
                r.cxy[c] = Complex64::new(0.0, 0.0);
            }
        }
    }

    if let Some(src) = &scenario.source {
        add_source(&mut r, src, &offs);
    }
    Ok(r)
}

fn add_source(r: &mut Rasterized, src: &SourceSpec<2>, offs: &[f64]) {
    let grid = r.grid.clone();
    let d = grid.delta;
    let w = (offs.len() * offs.len()) as f64;
    let phys = |t: Point<2>| {
        let x = grid.stretch.to_physical(&t);
        (x, grid.stretch.jacobian_diag(&x))
    };
    let bb = src.support;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if !box_touches(&grid, i, j, &bb) {
                continue;
            }
            let p = grid.idx(i, j);
            let c = grid.cell_t(i, j);
            let mut acc = Complex64::new(0.0, 0.0);
            if src.has_h() {
                let mut h = Complex64::new(0.0, 0.0);
                for &a in offs {
                    for &b in offs {
                        let (x, dj) = phys([c[0] + a, c[1] + b]);
                        h += src.h_at(&x) / (dj[0] * dj[1]);
                    }
                }
                acc -= h / w * (d * d * r.volume[p]);
            }
            if src.has_big_h() {
                // Normal component of DH/det D on each face, averaged along the face.
                let flux = |t: Point<2>, axis: usize| {
                    offs.iter()
                        .map(|&b| {
                            let mut s = t;
                            s[1 - axis] += b;
                            let (x, dj) = phys(s);
                            src.big_h_at(&x)[axis] / dj[1 - axis]
                        })
                        .sum::<Complex64>()
                        / offs.len() as f64
                };
                let (xl, xr) = (grid.origin[0] + i as f64 * d, grid.origin[0] + (i + 1) as f64 * d);
                let (yb, yt) = (grid.origin[1] + j as f64 * d, grid.origin[1] + (j + 1) as f64 * d);
                let al = r.open_x[r.x_face(i, j)];
                let ar = r.open_x[r.x_face(i + 1, j)];
                let ab = r.open_y[r.y_face(i, j)];
                let at = r.open_y[r.y_face(i, j + 1)];
                acc += d * (ar * flux([xr, c[1]], 0) - al * flux([xl, c[1]], 0) + at * flux([c[0], yt], 1) - ab * flux([c[0], yb], 1));
            }
            r.source[p] += acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AxisBox;
    use crate::materials::{MaterialField, ObstacleSpec};
    use crate::solver::PmlSpec;

    fn grid() -> Grid {
        Grid::uniform(AxisBox { lo: [-1.0, -1.0], hi: [1.0, 1.0] }, 0.1, PmlSpec::new(4)).unwrap()
    }

    fn interior_faces(r: &Rasterized) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = r.grid.pml.cells + 1;
        (p..r.grid.ny - p).flat_map(move |j| (p..r.grid.nx - p).map(move |i| (i, j)))
    }

    #[test]
    fn constant_medium_gives_constant_coefficients() {
        let m = MaterialField::constant([[2.0, 0.0], [0.0, 3.0]], Complex64::new(1.5, 0.2));
        let r = rasterize(&Scenario::uncloaked(m, Vec::new(), None), &grid(), 2.0, &RasterOptions::default()).unwrap();
        for (i, j) in interior_faces(&r) {
            assert!((r.ax[r.x_face(i, j)] - 2.0).norm() < 1e-14);
            assert!((r.ay[r.y_face(i, j)] - 3.0).norm() < 1e-14);
            assert!(r.cxy[r.corner(i, j)].norm() < 1e-14);
            assert!((r.q[r.grid.idx(i, j)] - Complex64::new(1.5, 0.2)).norm() < 1e-14);
        }
    }

    #[test]
    fn normal_coefficient_is_the_harmonic_mean_across_a_jump() {
        // σ = 1 for x < 0 and 4 for x > 0; x = 0 is a face line.
        let m = MaterialField::from_fn("jump", None, |x| {
            let s = if x[0] < 0.0 { 1.0 } else { 4.0 };
            Ok(MaterialSample { sigma: [[s, 0.0], [0.0, s]], q: Complex64::new(1.0, 0.0) })
        });
        let g = grid();
        let r = rasterize(&Scenario::uncloaked(m, Vec::new(), None), &g, 2.0, &RasterOptions::default()).unwrap();
        let i0 = g.aligned_line(0, 0.0).unwrap();
        let j = g.ny / 2;
        assert!((r.ax[r.x_face(i0, j)] - 1.6).norm() < 1e-12, "{}", r.ax[r.x_face(i0, j)]);
        // Tangential faces straddling the jump take the arithmetic mean.
        assert!((r.ay[r.y_face(i0, j)] - 4.0).norm() < 1e-12);
        assert!((r.ax[r.x_face(i0 - 1, j)] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn staircase_mask_closes_faces_touching_inside_cells() {
        let disk = Shape::Disk { center: [0.03, -0.02], radius: 0.45 };
        let sc = Scenario::uncloaked(MaterialField::background(), vec![ObstacleSpec::sound_hard(disk.clone())], None);
        let g = grid();
        let r = rasterize(&sc, &g, 2.0, &RasterOptions { hard: HardTreatment::Staircase, ..RasterOptions::default() }).unwrap();
        let inside = |i: usize, j: usize| disk.contains(&g.cell_x(i, j));
        let mut masked = 0;
        for (i, j) in interior_faces(&r) {
            assert_eq!(r.status[g.idx(i, j)] == CellStatus::Hard, inside(i, j));
            if inside(i, j) != inside(i - 1, j) || (inside(i, j) && inside(i - 1, j)) {
                assert_eq!(r.ax[r.x_face(i, j)], Complex64::new(0.0, 0.0));
                masked += 1;
            } else {
                assert!(r.ax[r.x_face(i, j)].norm() > 0.5);
            }
            if inside(i, j) || inside(i, j - 1) {
                assert_eq!(r.ay[r.y_face(i, j)], Complex64::new(0.0, 0.0));
            }
        }
        assert!(masked > 20);
    }

    #[test]
    fn cut_cells_open_in_proportion() {
        // Box edge x = 0.05 cuts the column of cells [0, 0.1] in half.
        let b = Shape::Box(AxisBox { lo: [-0.5, -0.5], hi: [0.05, 0.5] });
        let sc = Scenario::uncloaked(MaterialField::background(), vec![ObstacleSpec::sound_hard(b)], None);
        let g = grid();
        let r = rasterize(&sc, &g, 2.0, &RasterOptions::default()).unwrap();
        let i0 = g.aligned_line(0, 0.0).unwrap();
        let j = g.ny / 2;
        assert!((r.volume[g.idx(i0, j)] - 0.5).abs() < 1e-9);
        assert!((r.open_y[r.y_face(i0, j)] - 0.5).abs() < 1e-9);
        assert_eq!(r.open_x[r.x_face(i0, j)], 0.0);
        assert_eq!(r.status[g.idx(i0 - 1, j)], CellStatus::Hard);
    }

    #[test]
    fn misaligned_screen_rejected() {
        let span = AxisBox { lo: [-0.5, 0.03], hi: [0.5, 0.03] };
        let sc = Scenario::uncloaked(MaterialField::background(), vec![ObstacleSpec::sound_hard(Shape::Screen { normal_axis: 1, offset: 0.03, span })], None);
        assert!(rasterize(&sc, &grid(), 2.0, &RasterOptions::default()).is_err());
    }
}
