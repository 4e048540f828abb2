//! Cell-centred grids in computational coordinates with a PML frame.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SolveError;
use crate::geometry::AxisBox;
use crate::linalg::Point;
use crate::transforms::{AxisStretch, RefineZone, SeparableStretch};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmlSpec {
    pub cells: usize,
    /// Polynomial order of the absorption profile.
    pub order: u32,
    /// Target normal-incidence reflection.
    pub r0: f64,
}

impl PmlSpec {
    pub fn new(cells: usize) -> Self {
        Self { cells, order: 3, r0: 1e-8 }
    }

    /// At least one wavelength thick.
    pub fn one_wavelength(k: f64, delta: f64) -> Self {
        Self::new((2.0 * std::f64::consts::PI / k / delta - 1e-9).ceil() as usize)
    }
}

/// Everything needed to lay out a grid. The interior box is in physical
/// coordinates; the PML is added outside it. `anchor` lands on a cell corner,
/// so a screen through it lies along face lines.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub interior: AxisBox<2>,
    pub delta: f64,
    pub pml: PmlSpec,
    pub zones: [Vec<RefineZone>; 2],
    pub growth: f64,
    pub anchor: Point<2>,
}

impl GridSpec {
    pub fn uniform(interior: AxisBox<2>, delta: f64, pml: PmlSpec) -> Self {
        Self { interior, delta, pml, zones: [Vec::new(), Vec::new()], growth: 1.1, anchor: [0.0; 2] }
    }
}

/// Square cells of side Δ in computational coordinates t = stretch(x).
/// Cell (i, j) has centre `origin + ((i + ½)Δ, (j + ½)Δ)`; values are stored
/// row-major with index `j·nx + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub delta: f64,
    pub nx: usize,
    pub ny: usize,
    pub origin: Point<2>,
    pub pml: PmlSpec,
    pub stretch: SeparableStretch<2>,
}

impl Grid {
    pub fn new(spec: &GridSpec) -> Result<Self, SolveError> {
        let d = spec.delta;
        if !(d > 0.0) || spec.pml.cells == 0 || !(spec.pml.r0 > 0.0 && spec.pml.r0 < 1.0) {
            return Err(SolveError::InvalidGrid(format!("need Δ > 0, PML cells > 0 and 0 < R₀ < 1, got {spec:?}")));
        }
        let b = &spec.interior;
        if !(b.lo[0] < b.hi[0] && b.lo[1] < b.hi[1]) {
            return Err(SolveError::InvalidGrid(format!("empty interior {b:?}")));
        }
        let mut axes = Vec::with_capacity(2);
        let mut origin = [0.0; 2];
        let mut counts = [0usize; 2];
        for l in 0..2 {
            let st = if spec.zones[l].is_empty() {
                AxisStretch::uniform(d)
            } else {
                AxisStretch::new(d, &spec.zones[l], spec.growth).map_err(|e| SolveError::InvalidGrid(e.to_string()))?
            };
            let (t_lo, t_hi, t_a) = (st.forward(b.lo[l]), st.forward(b.hi[l]), st.forward(spec.anchor[l]));
            let n_lo = ((t_a - t_lo) / d - 1e-9).ceil() as i64;
            let n_hi = ((t_hi - t_a) / d - 1e-9).ceil() as i64;
            if n_lo + n_hi <= 0 {
                return Err(SolveError::InvalidGrid("interior has no cells".into()));
            }
            origin[l] = t_a - (n_lo + spec.pml.cells as i64) as f64 * d;
            counts[l] = (n_lo + n_hi) as usize + 2 * spec.pml.cells;
            axes.push(st);
        }
        let [ax, ay]: [AxisStretch; 2] = axes.try_into().expect("two axes");
        Ok(Self { delta: d, nx: counts[0], ny: counts[1], origin, pml: spec.pml, stretch: SeparableStretch { axes: [ax, ay] } })
    }

    pub fn uniform(interior: AxisBox<2>, delta: f64, pml: PmlSpec) -> Result<Self, SolveError> {
        Self::new(&GridSpec::uniform(interior, delta, pml))
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.nx, self.ny]
    }

    pub fn cell_t(&self, i: usize, j: usize) -> Point<2> {
        [self.origin[0] + (i as f64 + 0.5) * self.delta, self.origin[1] + (j as f64 + 0.5) * self.delta]
    }

    pub fn cell_x(&self, i: usize, j: usize) -> Point<2> {
        self.stretch.to_physical(&self.cell_t(i, j))
    }

    /// Computational coordinates of the interior (non-PML) box.
    pub fn interior_t(&self) -> [[f64; 2]; 2] {
        let p = self.pml.cells as f64 * self.delta;
        let n = [self.nx, self.ny];
        std::array::from_fn(|l| [self.origin[l] + p, self.origin[l] + n[l] as f64 * self.delta - p])
    }

    pub fn interior_physical(&self) -> AxisBox<2> {
        let t = self.interior_t();
        AxisBox { lo: self.stretch.to_physical(&[t[0][0], t[1][0]]), hi: self.stretch.to_physical(&[t[0][1], t[1][1]]) }
    }

    pub fn in_pml(&self, i: usize, j: usize) -> bool {
        let p = self.pml.cells;
        i < p || j < p || i >= self.nx - p || j >= self.ny - p
    }

    /// Stretch factor s(t) = 1 + iσ(t)/k along `axis`.
    pub fn pml_factor(&self, axis: usize, t: f64, k: f64) -> Complex64 {
        let [lo, hi] = self.interior_t()[axis];
        let depth = if t < lo {
            lo - t
        } else if t > hi {
            t - hi
        } else {
            return Complex64::new(1.0, 0.0);
        };
        let thick = self.pml.cells as f64 * self.delta;
        let m = self.pml.order as f64;
        let smax = (m + 1.0) * (1.0 / self.pml.r0).ln() / (2.0 * thick);
        Complex64::new(1.0, smax * (depth / thick).powf(m) / k)
    }

    /// Largest physical cell size (Δ away from refinement zones).
    pub fn max_spacing(&self) -> f64 {
        self.delta
    }

    pub fn min_spacing(&self) -> f64 {
        self.stretch.axes.iter().map(AxisStretch::min_spacing).fold(self.delta, f64::min)
    }

    /// Resolution and PML-thickness warnings for wavenumber `k`.
    pub fn warnings(&self, k: f64) -> Vec<String> {
        let lambda = 2.0 * std::f64::consts::PI / k;
        let mut w = Vec::new();
        if self.max_spacing() > lambda / 15.0 + 1e-12 {
            w.push(format!("under-resolved grid: Δ = {:.4} exceeds λ/15 = {:.4}", self.max_spacing(), lambda / 15.0));
        }
        if (self.pml.cells as f64) * self.delta < lambda - 1e-9 {
            w.push(format!("PML of {} cells is thinner than one wavelength", self.pml.cells));
        }
        if self.n_cells() > 2_000_000 {
            w.push(format!("{} unknowns exceeds the 2e6 budget", self.n_cells()));
        }
        w
    }

    /// Grid-line index whose computational coordinate equals stretch(x) along `axis`.
    pub fn aligned_line(&self, axis: usize, x: f64) -> Option<usize> {
        let t = self.stretch.axes[axis].forward(x);
        let s = (t - self.origin[axis]) / self.delta;
        let r = s.round();
        ((s - r).abs() <= 1e-7 && r >= 0.0).then_some(r as usize)
    }
}
