//! Impenetrable obstacles and surface impedance.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::MaterialError;
use crate::geometry::{AbcGeometry, AxisBox};
use crate::linalg::{self, Point};
use crate::transforms::PiecewiseMap;

pub type SurfaceFn<const N: usize> = Arc<dyn Fn(&Point<N>) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum ObstacleKind<const N: usize> {
    SoundSoft,
    SoundHard,
    /// Robin condition with impedance s (Re s ≤ 0, Im s ≥ 0).
    Impedance(SurfaceFn<N>),
}

impl<const N: usize> fmt::Debug for ObstacleKind<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SoundSoft => write!(f, "SoundSoft"),
            Self::SoundHard => write!(f, "SoundHard"),
            Self::Impedance(_) => write!(f, "Impedance"),
        }
    }
}

#[derive(Clone)]
pub enum Shape<const N: usize> {
    Disk {
        center: Point<N>,
        radius: f64,
    },
    /// Zero-thickness flat screen on `x[normal_axis] = offset`, spanning `span`
    /// in the remaining coordinates.
    Screen {
        normal_axis: usize,
        offset: f64,
        span: AxisBox<N>,
    },
    Box(AxisBox<N>),
    Region(AbcGeometry<N>),
    /// Points y with `base` containing `map⁻¹(y)`.
    Mapped {
        base: Arc<Shape<N>>,
        map: Arc<PiecewiseMap<N>>,
        bbox: AxisBox<N>,
    },
}

impl<const N: usize> fmt::Debug for Shape<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Disk { center, radius } => write!(f, "Disk({center:?}, {radius})"),
            Self::Screen { normal_axis, offset, span } => write!(f, "Screen(axis {normal_axis} = {offset}, {span:?})"),
            Self::Box(b) => write!(f, "Box({b:?})"),
            Self::Region(g) => write!(f, "Region({:?})", g.kind()),
            Self::Mapped { base, .. } => write!(f, "Mapped({base:?})"),
        }
    }
}

impl<const N: usize> Shape<N> {
    pub fn contains(&self, x: &Point<N>) -> bool {
        match self {
            Shape::Disk { center, radius } => linalg::norm2(&linalg::sub(x, center)) <= *radius,
            Shape::Screen { normal_axis, offset, span } => {
                (x[*normal_axis] - offset).abs() <= 1e-12 * (1.0 + offset.abs())
                    && (0..N).filter(|l| l != normal_axis).all(|l| x[l] >= span.lo[l] && x[l] <= span.hi[l])
            }
            Shape::Box(b) => b.contains(x),
            Shape::Region(g) => g.contains(x),
            Shape::Mapped { base, map, bbox } => bbox.contains(x) && map.eval_inverse(x).map(|p| base.contains(&p)).unwrap_or(false),
        }
    }

    pub fn is_thin(&self) -> bool {
        match self {
            Shape::Screen { .. } => true,
            Shape::Mapped { base, .. } => base.is_thin(),
            _ => false,
        }
    }

    pub fn bounding_box(&self) -> AxisBox<N> {
        match self {
            Shape::Disk { center, radius } => AxisBox { lo: center.map(|c| c - radius), hi: center.map(|c| c + radius) },
            Shape::Screen { normal_axis, offset, span } => {
                let mut b = *span;
                b.lo[*normal_axis] = *offset;
                b.hi[*normal_axis] = *offset;
                b
            }
            Shape::Box(b) => *b,
            Shape::Region(g) => g.bounding_box(),
            Shape::Mapped { bbox, .. } => *bbox,
        }
    }

    /// Image of the shape under `map`. Screens must stay flat and
    /// axis-aligned, which holds for the piecewise-affine interior pieces.
    pub fn mapped(&self, map: &Arc<PiecewiseMap<N>>) -> Result<Shape<N>, MaterialError> {
        match self {
            Shape::Screen { normal_axis, offset, span } => {
                let mut lo = span.lo;
                let mut hi = span.hi;
                lo[*normal_axis] = *offset;
                hi[*normal_axis] = *offset;
                let (ylo, yhi) = (map.eval(&lo)?, map.eval(&hi)?);
                let mid: Point<N> = std::array::from_fn(|l| 0.5 * (lo[l] + hi[l]));
                let ymid = map.eval(&mid)?;
                let scale = 1.0 + linalg::norm2(&ylo).max(linalg::norm2(&yhi));
                let affine = (0..N).all(|l| (ymid[l] - 0.5 * (ylo[l] + yhi[l])).abs() <= 1e-9 * scale);
                if !affine || (ylo[*normal_axis] - yhi[*normal_axis]).abs() > 1e-9 * scale {
                    return Err(MaterialError::NonAffinePatch(format!("screen {self:?} is not mapped to a flat screen")));
                }
                let span = AxisBox { lo: std::array::from_fn(|l| ylo[l].min(yhi[l])), hi: std::array::from_fn(|l| ylo[l].max(yhi[l])) };
                Ok(Shape::Screen { normal_axis: *normal_axis, offset: ylo[*normal_axis], span })
            }
            _ => {
                let bbox = super::image_box(map, &self.bounding_box())?;
                Ok(Shape::Mapped { base: Arc::new(self.clone()), map: map.clone(), bbox })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObstacleSpec<const N: usize> {
    pub kind: ObstacleKind<N>,
    pub shape: Shape<N>,
}

impl<const N: usize> ObstacleSpec<N> {
    pub fn sound_hard(shape: Shape<N>) -> Self {
        Self { kind: ObstacleKind::SoundHard, shape }
    }
    pub fn sound_soft(shape: Shape<N>) -> Self {
        Self { kind: ObstacleKind::SoundSoft, shape }
    }

    /// Samples the impedance sign conditions Re s ≤ 0, Im s ≥ 0.
    pub fn check_impedance(&self, points: &[Point<N>]) -> Result<(), MaterialError> {
        if let ObstacleKind::Impedance(s) = &self.kind {
            for x in points {
                let v = s(x);
                if v.re > 0.0 || v.im < 0.0 {
                    return Err(MaterialError::NotRegular { at: x.to_vec(), reason: format!("impedance {v} violates Re s ≤ 0, Im s ≥ 0") });
                }
            }
        }
        Ok(())
    }

    pub fn mapped(&self, map: &Arc<PiecewiseMap<N>>) -> Result<Self, MaterialError> {
        Ok(Self { kind: self.kind.clone(), shape: self.shape.mapped(map)? })
    }
}

/// Flat patch `origin + Σ u_i tangents[i]`, u ∈ [0,1]^{N−1}.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePatch<const N: usize> {
    pub origin: Point<N>,
    pub tangents: Vec<Point<N>>,
}

impl<const N: usize> SurfacePatch<N> {
    pub fn point(&self, u: &[f64]) -> Point<N> {
        let mut p = self.origin;
        for (t, ui) in self.tangents.iter().zip(u) {
            for l in 0..N {
                p[l] += ui * t[l];
            }
        }
        p
    }

    /// Square root of the Gram determinant of the tangents.
    pub fn measure(&self) -> f64 {
        let m = self.tangents.len();
        let mut g = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                g[i][j] = linalg::dot(&self.tangents[i], &self.tangents[j]);
            }
        }
        match m {
            0 => 1.0,
            1 => g[0][0].sqrt(),
            2 => (g[0][0] * g[1][1] - g[0][1] * g[1][0]).max(0.0).sqrt(),
            _ => f64::NAN,
        }
    }
}

/// F_*s = s / |det D_τF| on an affine patch. Returns the image patch and the
/// pushed impedance. The map must act affinely on the patch.
pub fn push_forward_impedance<const N: usize>(
    map: &Arc<PiecewiseMap<N>>,
    patch: &SurfacePatch<N>,
    s: SurfaceFn<N>,
) -> Result<(SurfacePatch<N>, SurfaceFn<N>), MaterialError> {
    let m = patch.tangents.len();
    if m + 1 != N {
        return Err(MaterialError::NonAffinePatch(format!("a surface in {N}D needs {} tangents, got {m}", N - 1)));
    }
    let o = map.eval(&patch.origin)?;
    let mut tangents = Vec::with_capacity(m);
    for i in 0..m {
        let mut u = vec![0.0; m];
        u[i] = 1.0;
        tangents.push(linalg::sub(&map.eval(&patch.point(&u))?, &o));
    }
    let image = SurfacePatch { origin: o, tangents };
    let scale = 1.0 + linalg::norm2(&o) + image.tangents.iter().map(linalg::norm2).sum::<f64>();
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut us = vec![vec![]];
    for _ in 0..m {
        us = us.into_iter().flat_map(|p: Vec<f64>| grid.iter().map(move |g| [p.clone(), vec![*g]].concat())).collect();
    }
    for u in &us {
        let y = map.eval(&patch.point(u))?;
        let expect = image.point(u);
        if (0..N).any(|l| (y[l] - expect[l]).abs() > 1e-9 * scale) {
            return Err(MaterialError::NonAffinePatch(format!("patch point {u:?} maps to {y:?}, affine guess {expect:?}")));
        }
    }
    let ratio = image.measure() / patch.measure();
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(MaterialError::NonAffinePatch(format!("degenerate tangential Jacobian {ratio}")));
    }
    let inv = map.clone();
    let pushed: SurfaceFn<N> = Arc::new(move |y| match inv.eval_inverse(y) {
        Ok(x) => s(&x) / ratio,
        Err(_) => Complex64::new(0.0, 0.0),
    });
    Ok((image, pushed))
}
