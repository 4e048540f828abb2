//! Blow-up coordinate maps with closed-form inverses and Jacobians.

mod stretch;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{
    weighted_norm_gradient, AbcGeometry, AxisBox, Component, GeometryError, GeometryKind, LpBallSpec, LpExponent, ShapeFamily, ShapeParams, WeightVector,
};
use crate::linalg::{self, Mat, Point};

pub use stretch::{AxisStretch, RefineZone, SeparableStretch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("point {0:?} is outside the map's domain")]
    OutsideDomain(Vec<f64>),
    #[error("point {0:?} is outside the map's image")]
    OutsideImage(Vec<f64>),
    #[error("invalid map parameters: {0}")]
    InvalidParameters(String),
    #[error("composition domain mismatch: {0}")]
    DomainMismatch(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A smooth invertible map with closed-form inverse and Jacobian.
pub trait SmoothMap<const N: usize>: Send + Sync + fmt::Debug {
    fn apply(&self, x: &Point<N>) -> Result<Point<N>, TransformError>;
    fn apply_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError>;
    fn jacobian(&self, x: &Point<N>) -> Result<Mat<N>, TransformError>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<const N: usize> SmoothMap<N> for Identity {
    fn apply(&self, x: &Point<N>) -> Result<Point<N>, TransformError> {
        Ok(*x)
    }
    fn apply_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError> {
        Ok(*y)
    }
    fn jacobian(&self, _x: &Point<N>) -> Result<Mat<N>, TransformError> {
        Ok(linalg::identity())
    }
}

/// `y_l = c_l + s·(x_l − c_l)` on the active axes, identity elsewhere.
#[derive(Clone, Copy, Debug)]
pub struct Dilation<const N: usize> {
    pub center: Point<N>,
    pub scale: f64,
    pub active: [bool; N],
}

impl<const N: usize> Dilation<N> {
    pub fn new(center: Point<N>, scale: f64, active: [bool; N]) -> Result<Self, TransformError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(TransformError::InvalidParameters(format!("dilation scale {scale}")));
        }
        Ok(Self { center, scale, active })
    }

    pub fn uniform(scale: f64) -> Result<Self, TransformError> {
        Self::new([0.0; N], scale, [true; N])
    }
}

impl<const N: usize> SmoothMap<N> for Dilation<N> {
    fn apply(&self, x: &Point<N>) -> Result<Point<N>, TransformError> {
        let mut y = *x;
        for l in 0..N {
            if self.active[l] {
                y[l] = self.center[l] + self.scale * (x[l] - self.center[l]);
            }
        }
        Ok(y)
    }
    fn apply_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError> {
        let mut x = *y;
        for l in 0..N {
            if self.active[l] {
                x[l] = self.center[l] + (y[l] - self.center[l]) / self.scale;
            }
        }
        Ok(x)
    }
    fn jacobian(&self, _x: &Point<N>) -> Result<Mat<N>, TransformError> {
        let mut d = [1.0; N];
        for l in 0..N {
            if self.active[l] {
                d[l] = self.scale;
            }
        }
        Ok(linalg::diag(d))
    }
}

/// Blow-up coefficients (A, B) for 0 < ε ≤ r1 < r2.
pub fn blowup_coefficients(r1: f64, r2: f64, eps: f64) -> Result<(f64, f64), TransformError> {
    if !(eps > 0.0 && eps <= r1 && r1 < r2 && r2.is_finite()) {
        return Err(TransformError::InvalidParameters(format!("need 0 < ε ≤ r1 < r2, got ε={eps}, r1={r1}, r2={r2}")));
    }
    Ok(((r1 - eps) * r2 / (r2 - eps), (r2 - r1) / (r2 - eps)))
}

/// `F(x) = c + (A + Bρ)(x − c)/ρ` with ρ the weighted l^p norm of `x − c`
/// over the active axes. Maps the ε-sphere to the r1-sphere and fixes the
/// r2-sphere.
#[derive(Clone, Copy, Debug)]
pub struct RadialBlowupMap<const N: usize> {
    pub w: WeightVector<N>,
    pub p: LpExponent,
    pub r1: f64,
    pub r2: f64,
    pub eps: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    pub center: Point<N>,
    pub active: [bool; N],
}

impl<const N: usize> RadialBlowupMap<N> {
    pub fn new(w: WeightVector<N>, p: LpExponent, r1: f64, r2: f64, eps: f64) -> Result<Self, TransformError> {
        Self::with_frame(w, p, r1, r2, eps, [0.0; N], [true; N])
    }

    pub fn with_frame(w: WeightVector<N>, p: LpExponent, r1: f64, r2: f64, eps: f64, center: Point<N>, active: [bool; N]) -> Result<Self, TransformError> {
        let (a_coef, b_coef) = blowup_coefficients(r1, r2, eps)?;
        Ok(Self { w, p, r1, r2, eps, a_coef, b_coef, center, active })
    }

    fn rho(&self, x: &Point<N>) -> f64 {
        let w = self.w.entries();
        self.p.combine((0..N).filter(|&l| self.active[l]).map(|l| w[l] * (x[l] - self.center[l])))
    }

    fn scale_along(&self, x: &Point<N>, s: f64) -> Point<N> {
        let mut y = *x;
        for l in 0..N {
            if self.active[l] {
                y[l] = self.center[l] + s * (x[l] - self.center[l]);
            }
        }
        y
    }
}

impl<const N: usize> SmoothMap<N> for RadialBlowupMap<N> {
    fn apply(&self, x: &Point<N>) -> Result<Point<N>, TransformError> {
        let rho = self.rho(x);
        if rho == 0.0 {
            return Err(TransformError::OutsideDomain(x.to_vec()));
        }
        Ok(self.scale_along(x, self.a_coef / rho + self.b_coef))
    }

    fn apply_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError> {
        let rho_y = self.rho(y);
        if rho_y < self.a_coef || rho_y == 0.0 {
            return Err(TransformError::OutsideImage(y.to_vec()));
        }
        let r = (rho_y - self.a_coef) / self.b_coef;
        Ok(self.scale_along(y, r / rho_y))
    }

    /// DF = s·I − (A/ρ²)(x − c)⊗∇ρ on the active block, s = A/ρ + B.
    fn jacobian(&self, x: &Point<N>) -> Result<Mat<N>, TransformError> {
        let rho = self.rho(x);
        if rho == 0.0 {
            return Err(TransformError::OutsideDomain(x.to_vec()));
        }
        let mut z = [0.0; N];
        for l in 0..N {
            z[l] = x[l] - self.center[l];
        }
        let g = weighted_norm_gradient(&z, self.w.entries(), self.p, &self.active);
        let s = self.a_coef / rho + self.b_coef;
        let mut j = linalg::identity::<N>();
        for i in 0..N {
            if !self.active[i] {
                continue;
            }
            for k in 0..N {
                if !self.active[k] {
                    continue;
                }
                j[i][k] = if i == k { s } else { 0.0 } - self.a_coef / (rho * rho) * z[i] * g[k];
            }
        }
        Ok(j)
    }
}

/// One-axis blow-up `x_k ↦ c + (A + B|x_k − c|)·sign(x_k − c)`, other coordinates
/// untouched. `half_widths` records the box cross-section it is used on.
#[derive(Clone, Copy, Debug)]
pub struct AxialBlowupMap<const N: usize> {
    pub axis: usize,
    pub a_coef: f64,
    pub b_coef: f64,
    pub weight: f64,
    pub offset: f64,
    pub half_widths: [Option<f64>; N],
}

impl<const N: usize> AxialBlowupMap<N> {
    pub fn new(axis: usize, weight: f64, r1: f64, r2: f64, eps: f64, half_widths: [Option<f64>; N]) -> Result<Self, TransformError> {
        if axis >= N {
            return Err(TransformError::InvalidParameters(format!("axis {axis} >= {N}")));
        }
        let (a_coef, b_coef) = blowup_coefficients(r1, r2, eps)?;
        Ok(Self { axis, a_coef, b_coef, weight, offset: 0.0, half_widths })
    }
}

impl<const N: usize> SmoothMap<N> for AxialBlowupMap<N> {
    fn apply(&self, x: &Point<N>) -> Result<Point<N>, TransformError> {
        let z = self.weight * (x[self.axis] - self.offset);
        if z == 0.0 {
            return Err(TransformError::OutsideDomain(x.to_vec()));
        }
        let mut y = *x;
        y[self.axis] = self.offset + (self.a_coef + self.b_coef * z.abs()) * z.signum() / self.weight;
        Ok(y)
    }
    fn apply_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError> {
        let z = self.weight * (y[self.axis] - self.offset);
        if z.abs() < self.a_coef || z == 0.0 {
            return Err(TransformError::OutsideImage(y.to_vec()));
        }
        let mut x = *y;
        x[self.axis] = self.offset + (z.abs() - self.a_coef) / self.b_coef * z.signum() / self.weight;
        Ok(x)
    }
    fn jacobian(&self, _x: &Point<N>) -> Result<Mat<N>, TransformError> {
        let mut j = linalg::identity::<N>();
        j[self.axis][self.axis] = self.b_coef;
        Ok(j)
    }
}

/// The inverse of a smooth map, as a smooth map.
#[derive(Clone, Debug)]
pub struct Inverted<const N: usize>(pub Arc<dyn SmoothMap<N>>);

impl<const N: usize> SmoothMap<N> for Inverted<N> {
    fn apply(&self, x: &Point<N>) -> Result<Point<N>, TransformError> {
        self.0.apply_inverse(x)
    }
    fn apply_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError> {
        self.0.apply(y)
    }
    fn jacobian(&self, x: &Point<N>) -> Result<Mat<N>, TransformError> {
        let pre = self.0.apply_inverse(x)?;
        let j = self.0.jacobian(&pre)?;
        linalg::inverse(&j).ok_or_else(|| TransformError::OutsideImage(x.to_vec()))
    }
}

pub type Region<const N: usize> = Arc<dyn Fn(&Point<N>) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct Piece<const N: usize> {
    pub name: String,
    pub domain: Region<N>,
    pub image: Region<N>,
    pub map: Arc<dyn SmoothMap<N>>,
}

impl<const N: usize> fmt::Debug for Piece<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Piece").field("name", &self.name).field("map", &self.map).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapLabel {
    FullCloak,
    AbcC,
    AbcD,
    AbcE,
    Custom(String),
}

/// What happens to points matched by no piece.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Outside<const N: usize> {
    Identity,
    /// Points outside every piece are rejected; the boxes bound domain and image.
    Reject {
        domain: AxisBox<N>,
        image: AxisBox<N>,
    },
}

/// Pieces are tried in order; the first whose predicate matches wins. That
/// order is the interface tie-break (shell pieces precede interior pieces).
#[derive(Clone, Debug)]
pub struct PiecewiseMap<const N: usize> {
    label: MapLabel,
    pieces: Vec<Piece<N>>,
    outside: Outside<N>,
    extent: Option<AxisBox<N>>,
}

impl<const N: usize> PiecewiseMap<N> {
    pub fn new(label: MapLabel, pieces: Vec<Piece<N>>, outside: Outside<N>) -> Self {
        Self { label, pieces, outside, extent: None }
    }

    /// Declares a box outside of which the map is the identity.
    pub fn with_extent(mut self, extent: AxisBox<N>) -> Self {
        self.extent = Some(extent);
        self
    }

    pub fn extent(&self) -> Option<&AxisBox<N>> {
        self.extent.as_ref()
    }

    pub fn identity() -> Self {
        Self::new(MapLabel::Custom("identity".into()), Vec::new(), Outside::Identity)
    }

    /// A single smooth map applied everywhere.
    pub fn global(name: &str, map: Arc<dyn SmoothMap<N>>) -> Self {
        let all: Region<N> = Arc::new(|_| true);
        let piece = Piece { name: name.to_string(), domain: all.clone(), image: all, map };
        Self::new(MapLabel::Custom(name.to_string()), vec![piece], Outside::Identity)
    }

    pub fn label(&self) -> &MapLabel {
        &self.label
    }
    pub fn pieces(&self) -> &[Piece<N>] {
        &self.pieces
    }
    pub fn outside(&self) -> &Outside<N> {
        &self.outside
    }

    /// Index of the piece containing `x`, `None` for the outside region.
    pub fn locate(&self, x: &Point<N>) -> Option<usize> {
        self.pieces.iter().position(|p| (p.domain)(x))
    }

    pub fn locate_image(&self, y: &Point<N>) -> Option<usize> {
        self.pieces.iter().position(|p| (p.image)(y))
    }

    pub fn eval(&self, x: &Point<N>) -> Result<Point<N>, TransformError> {
        match self.locate(x) {
            Some(i) => self.pieces[i].map.apply(x),
            None => match self.outside {
                Outside::Identity => Ok(*x),
                Outside::Reject { .. } => Err(TransformError::OutsideDomain(x.to_vec())),
            },
        }
    }

    pub fn eval_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError> {
        match self.locate_image(y) {
            Some(i) => self.pieces[i].map.apply_inverse(y),
            None => match self.outside {
                Outside::Identity => Ok(*y),
                Outside::Reject { .. } => Err(TransformError::OutsideImage(y.to_vec())),
            },
        }
    }

    pub fn jacobian(&self, x: &Point<N>) -> Result<Mat<N>, TransformError> {
        match self.locate(x) {
            Some(i) => self.pieces[i].map.jacobian(x),
            None => match self.outside {
                Outside::Identity => Ok(linalg::identity()),
                Outside::Reject { .. } => Err(TransformError::OutsideDomain(x.to_vec())),
            },
        }
    }

    /// Jacobian at the preimage of `y`, together with that preimage.
    pub fn jacobian_at_image(&self, y: &Point<N>) -> Result<(Point<N>, Mat<N>), TransformError> {
        match self.locate_image(y) {
            Some(i) => {
                let piece = &self.pieces[i];
                let x = piece.map.apply_inverse(y)?;
                Ok((x, piece.map.jacobian(&x)?))
            }
            None => match self.outside {
                Outside::Identity => Ok((*y, linalg::identity())),
                Outside::Reject { .. } => Err(TransformError::OutsideImage(y.to_vec())),
            },
        }
    }

    pub fn inverse(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                name: format!("inverse {}", p.name),
                domain: p.image.clone(),
                image: p.domain.clone(),
                map: Arc::new(Inverted(p.map.clone())) as Arc<dyn SmoothMap<N>>,
            })
            .collect();
        let outside = match self.outside {
            Outside::Identity => Outside::Identity,
            Outside::Reject { domain, image } => Outside::Reject { domain: image, image: domain },
        };
        let mut inv = Self::new(MapLabel::Custom(format!("inverse of {:?}", self.label)), pieces, outside);
        inv.extent = self.extent;
        inv
    }
}

#[derive(Debug)]
struct Composed<const N: usize> {
    outer: PiecewiseMap<N>,
    inner: PiecewiseMap<N>,
}

impl<const N: usize> SmoothMap<N> for Composed<N> {
    fn apply(&self, x: &Point<N>) -> Result<Point<N>, TransformError> {
        self.outer.eval(&self.inner.eval(x)?)
    }
    fn apply_inverse(&self, y: &Point<N>) -> Result<Point<N>, TransformError> {
        self.inner.eval_inverse(&self.outer.eval_inverse(y)?)
    }
    fn jacobian(&self, x: &Point<N>) -> Result<Mat<N>, TransformError> {
        let mid = self.inner.eval(x)?;
        Ok(linalg::mat_mul(&self.outer.jacobian(&mid)?, &self.inner.jacobian(x)?))
    }
}

fn box_within<const N: usize>(inner: &AxisBox<N>, outer: &AxisBox<N>) -> bool {
    (0..N).all(|l| inner.lo[l] >= outer.lo[l] && inner.hi[l] <= outer.hi[l])
}

/// `outer ∘ inner`.
pub fn compose<const N: usize>(outer: &PiecewiseMap<N>, inner: &PiecewiseMap<N>) -> Result<PiecewiseMap<N>, TransformError> {
    if let Outside::Reject { domain: od, .. } = outer.outside {
        match inner.outside {
            Outside::Reject { image: ii, .. } if box_within(&ii, &od) => {}
            Outside::Reject { .. } => return Err(TransformError::DomainMismatch("inner image is not inside the outer domain".into())),
            Outside::Identity => return Err(TransformError::DomainMismatch("inner map is defined everywhere but the outer map is bounded".into())),
        }
    }
    let outside = match (inner.outside, outer.outside) {
        (Outside::Identity, Outside::Identity) => Outside::Identity,
        (Outside::Reject { domain, .. }, Outside::Reject { image, .. }) => Outside::Reject { domain, image },
        (Outside::Reject { domain, image }, Outside::Identity) => Outside::Reject { domain, image },
        (Outside::Identity, Outside::Reject { .. }) => unreachable!("rejected above"),
    };
    let comp = Arc::new(Composed { outer: outer.clone(), inner: inner.clone() });
    let (ci, co) = (comp.clone(), comp.clone());
    let domain: Region<N> = Arc::new(move |x| ci.apply(x).is_ok());
    let image: Region<N> = Arc::new(move |y| co.apply_inverse(y).is_ok());
    let piece = Piece { name: "composition".into(), domain, image, map: comp };
    Ok(PiecewiseMap::new(MapLabel::Custom(format!("{:?} ∘ {:?}", outer.label, inner.label)), vec![piece], outside))
}

/// Blow-up map for an assembled region. `outer` is the geometry with thickness
/// r2; each of its components contributes a shell piece on ε ≤ ρ ≤ r2 and an
/// interior dilation by r1/ε on ρ < ε. Identity outside.
pub fn build_abc_map<const N: usize>(outer: &AbcGeometry<N>, r1: f64, eps: f64) -> Result<PiecewiseMap<N>, TransformError> {
    let r2 = outer.r();
    blowup_coefficients(r1, r2, eps)?;
    let label = match outer.kind() {
        GeometryKind::C => MapLabel::AbcC,
        GeometryKind::D => MapLabel::AbcD,
        GeometryKind::E => MapLabel::AbcE,
        GeometryKind::PointNbhd => MapLabel::FullCloak,
        GeometryKind::Box => {
            return Err(TransformError::InvalidParameters("a box region has no blow-up map".into()));
        }
    };
    let mut shells = Vec::new();
    let mut interiors = Vec::new();
    for (idx, comp) in outer.components().iter().enumerate() {
        let Component::Ball(ball) = comp else {
            return Err(TransformError::InvalidParameters("box components cannot be blown up".into()));
        };
        let ball: LpBallSpec<N> = ball.clone();
        let active = ball.active();
        let shell_map: Arc<dyn SmoothMap<N>> = if ball.active_count() == 1 {
            let axis = active.iter().position(|&a| a).unwrap_or(0);
            let mut m = AxialBlowupMap::new(axis, ball.w.entries()[axis], r1, r2, eps, ball.extrusion)?;
            m.offset = ball.center[axis];
            Arc::new(m)
        } else {
            Arc::new(RadialBlowupMap::with_frame(ball.w, ball.p, r1, r2, eps, ball.center, active)?)
        };
        let (b1, b2, b3, b4) = (ball.clone(), ball.clone(), ball.clone(), ball.clone());
        shells.push(Piece {
            name: format!("shell {idx}"),
            domain: Arc::new(move |x| {
                b1.slab_contains(x) && {
                    let rho = b1.radial(x);
                    rho >= eps && rho <= r2
                }
            }),
            image: Arc::new(move |y| {
                b2.slab_contains(y) && {
                    let rho = b2.radial(y);
                    rho >= r1 && rho <= r2
                }
            }),
            map: shell_map,
        });
        interiors.push(Piece {
            name: format!("interior {idx}"),
            domain: Arc::new(move |x| b3.slab_contains(x) && b3.radial(x) < eps),
            image: Arc::new(move |y| b4.slab_contains(y) && b4.radial(y) < r1),
            map: Arc::new(Dilation::new(ball.center, r1 / eps, active)?),
        });
    }
    shells.extend(interiors);
    Ok(PiecewiseMap::new(label, shells, Outside::Identity).with_extent(outer.bounding_box()))
}

/// Convenience wrapper building the geometry family member with thickness r2.
pub fn build_abc_map_for<const N: usize>(kind: GeometryKind, shape: &ShapeParams, r1: f64, r2: f64, eps: f64) -> Result<PiecewiseMap<N>, TransformError>
where
    AbcGeometry<N>: ShapeFamily,
{
    let outer = AbcGeometry::<N>::family(kind, shape, r2)?;
    build_abc_map(&outer, r1, eps)
}

/// Central-difference Jacobian of any point map.
pub fn finite_difference_jacobian<const N: usize>(
    f: impl Fn(&Point<N>) -> Result<Point<N>, TransformError>,
    x: &Point<N>,
    h: f64,
) -> Result<Mat<N>, TransformError> {
    let mut j = [[0.0; N]; N];
    for k in 0..N {
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        let (fp, fm) = (f(&xp)?, f(&xm)?);
        for i in 0..N {
            j[i][k] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial(eps: f64) -> RadialBlowupMap<2> {
        RadialBlowupMap::new(WeightVector::uniform(), LpExponent::Two, 1.0, 2.0, eps).unwrap()
    }

    #[test]
    fn degenerate_radial_map_is_identity() {
        let m = radial(1.0);
        assert_eq!((m.a_coef, m.b_coef), (0.0, 1.0));
        let y = m.apply(&[0.3, -1.7]).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-15 && (y[1] + 1.7).abs() < 1e-15);
    }

    #[test]
    fn radial_map_examples() {
        let m = radial(0.01);
        assert!((m.a_coef - 0.994_974_874_371_859_3).abs() < 1e-12);
        assert!((m.b_coef - 0.502_512_562_814_070_4).abs() < 1e-12);
        let y = m.apply(&[2.0, 0.0]).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-15 && y[1] == 0.0);
        let y = m.apply(&[0.01, 0.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14);
        let x = m.apply_inverse(&[1.0, 0.0]).unwrap();
        assert!((x[0] - 0.01).abs() < 1e-14);
    }

    #[test]
    fn radial_jacobian_in_polar_frame() {
        let m = radial(0.01);
        let j = m.jacobian(&[1.5, 0.0]).unwrap();
        assert!((j[0][0] - m.b_coef).abs() < 1e-12);
        assert!((j[1][1] - (m.a_coef + m.b_coef * 1.5) / 1.5).abs() < 1e-12);
        assert!((j[1][1] - 1.1657).abs() < 5e-4);
        let fd = finite_difference_jacobian(|x| m.apply(x), &[1.5, 0.0], 1e-6).unwrap();
        assert!(linalg::max_abs_diff(&fd, &j) < 1e-8);
    }

    #[test]
    fn uniform_dilation_jacobian() {
        let d = Dilation::<2>::uniform(100.0).unwrap();
        let j = d.jacobian(&[0.0, 0.0]).unwrap();
        assert_eq!(j, [[100.0, 0.0], [0.0, 100.0]]);
        assert_eq!(linalg::det(&j), 1e4);
    }

    #[test]
    fn capsule_map_examples() {
        let shape = ShapeParams::default();
        let m = build_abc_map_for::<2>(GeometryKind::C, &shape, 1.0, 2.0, 0.01).unwrap();
        let y = m.eval(&[-1.005, 0.0]).unwrap();
        assert!((y[0] + 1.5).abs() < 1e-12 && y[1] == 0.0);
        let x = m.eval_inverse(&[-1.5, 0.0]).unwrap();
        assert!((x[0] + 1.005).abs() < 1e-12);
        let id = m.eval(&[5.0, 5.0]).unwrap();
        assert_eq!(id, [5.0, 5.0]);
        assert_eq!(m.eval_inverse(&[5.0, 5.0]).unwrap(), [5.0, 5.0]);
    }

    #[test]
    fn capsule_map_with_eps_equal_r1_is_identity() {
        let m = build_abc_map_for::<2>(GeometryKind::C, &ShapeParams::default(), 1.0, 2.0, 1.0).unwrap();
        for x in [[0.3, 0.2], [-1.7, 0.9], [2.5, -0.3], [0.0, 1.9]] {
            let y = m.eval(&x).unwrap();
            assert!((y[0] - x[0]).abs() < 1e-14 && (y[1] - x[1]).abs() < 1e-14, "{x:?} -> {y:?}");
        }
    }

    #[test]
    fn cushion_interior_example() {
        let m = build_abc_map_for::<3>(GeometryKind::E, &ShapeParams::default(), 1.0, 2.0, 0.01).unwrap();
        let y = m.eval(&[0.0, 0.0, 0.01]).unwrap();
        assert!(y[0] == 0.0 && y[1] == 0.0 && (y[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(build_abc_map_for::<2>(GeometryKind::C, &ShapeParams::default(), 1.0, 0.5, 0.01).is_err());
        assert!(build_abc_map_for::<2>(GeometryKind::C, &ShapeParams::default(), 1.0, 2.0, 1.5).is_err());
        assert!(build_abc_map_for::<2>(GeometryKind::C, &ShapeParams::default(), 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn compose_checks_domains() {
        let bx = AxisBox::new([-1.0, -1.0], [1.0, 1.0]).unwrap();
        let big = AxisBox::new([-3.0, -3.0], [3.0, 3.0]).unwrap();
        let bounded = PiecewiseMap::new(
            MapLabel::Custom("b".into()),
            PiecewiseMap::global("id", Arc::new(Identity)).pieces().to_vec(),
            Outside::Reject { domain: bx, image: bx },
        );
        let wide = PiecewiseMap::new(MapLabel::Custom("w".into()), Vec::new(), Outside::Reject { domain: big, image: big });
        assert!(compose(&bounded, &wide).is_err());
        assert!(compose(&bounded, &PiecewiseMap::identity()).is_err());
        assert!(compose(&wide, &bounded).is_ok());
    }

    #[test]
    fn rejected_outside_domain() {
        let bx = AxisBox::new([-1.0, -1.0], [1.0, 1.0]).unwrap();
        let inside: Region<2> = Arc::new(move |x| bx.contains(x));
        let piece = Piece { name: "id".into(), domain: inside.clone(), image: inside, map: Arc::new(Identity) };
        let m = PiecewiseMap::new(MapLabel::Custom("box".into()), vec![piece], Outside::Reject { domain: bx, image: bx });
        assert!(m.eval(&[0.5, 0.5]).is_ok());
        assert!(matches!(m.eval(&[2.0, 0.0]), Err(TransformError::OutsideDomain(_))));
        assert!(matches!(m.eval_inverse(&[2.0, 0.0]), Err(TransformError::OutsideImage(_))));
    }
}
