//! Weighted l^p norms, semi-ball components and the assembled ABC regions.
//!
//! Every region here is closed. A component is an l^p ball over a subset of
//! "active" axes, optionally cut by halfspaces through its center and extruded
//! along the remaining axes. The C, D and E regions are unions of such pieces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: point has {point} entries, weight has {weight}")]
    DimensionMismatch { point: usize, weight: usize },
    #[error("weight entry {index} = {value} is outside (0, 1]")]
    BadWeight { index: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("region distance is not defined for {0:?} geometries")]
    UnsupportedKind(GeometryKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpExponent {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl LpExponent {
    /// Norm of an iterator of already weighted entries.
    pub fn combine(self, vals: impl Iterator<Item = f64>) -> f64 {
        match self {
            LpExponent::One => vals.map(f64::abs).sum(),
            LpExponent::Two => vals.map(|v| v * v).sum::<f64>().sqrt(),
            LpExponent::Inf => vals.fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LpExponent::One => "1",
            LpExponent::Two => "2",
            LpExponent::Inf => "inf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightVector<const N: usize>([f64; N]);

impl<const N: usize> WeightVector<N> {
    pub fn new(entries: [f64; N]) -> Result<Self, GeometryError> {
        for (index, &value) in entries.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(GeometryError::BadWeight { index, value });
            }
        }
        Ok(Self(entries))
    }

    pub fn uniform() -> Self {
        Self([1.0; N])
    }

    pub fn entries(&self) -> &[f64; N] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl<const N: usize> Default for WeightVector<N> {
    fn default() -> Self {
        Self::uniform()
    }
}

/// |x|_{w,p} on slices of equal length.
pub fn weighted_norm(x: &[f64], w: &[f64], p: LpExponent) -> Result<f64, GeometryError> {
    if x.len() != w.len() {
        return Err(GeometryError::DimensionMismatch { point: x.len(), weight: w.len() });
    }
    Ok(p.combine(x.iter().zip(w).map(|(a, b)| a * b)))
}

/// Gradient of |x|_{w,p} where it is differentiable. On ridges of the p = 1 and
/// p = ∞ norms a one-sided choice is made (first maximal entry, sign(0) = +1).
pub fn weighted_norm_gradient<const N: usize>(x: &Point<N>, w: &[f64; N], p: LpExponent, active: &[bool; N]) -> Point<N> {
    let mut g = [0.0; N];
    let sgn = |v: f64| if v < 0.0 { -1.0 } else { 1.0 };
    match p {
        LpExponent::One => {
            for l in 0..N {
                if active[l] {
                    g[l] = w[l] * sgn(x[l]);
                }
            }
        }
        LpExponent::Two => {
            let rho = LpExponent::Two.combine((0..N).filter(|&l| active[l]).map(|l| w[l] * x[l]));
            if rho > 0.0 {
                for l in 0..N {
                    if active[l] {
                        g[l] = w[l] * w[l] * x[l] / rho;
                    }
                }
            }
        }
        LpExponent::Inf => {
            let mut best = None;
            let mut bv = -1.0;
            for l in 0..N {
                if active[l] && (w[l] * x[l]).abs() > bv {
                    bv = (w[l] * x[l]).abs();
                    best = Some(l);
                }
            }
            if let Some(l) = best {
                g[l] = w[l] * sgn(x[l]);
            }
        }
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Closed halfspace `sign·(x_axis − center_axis) ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halfspace {
    pub axis: usize,
    pub side: Side,
}

/// A (semi-)ball of the weighted l^p norm over its active axes, extruded with
/// half-width `extrusion[l]` along each inactive axis `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpBallSpec<const N: usize> {
    pub w: WeightVector<N>,
    pub p: LpExponent,
    pub r: f64,
    pub center: Point<N>,
    pub halfspaces: Vec<Halfspace>,
    pub extrusion: [Option<f64>; N],
}

impl<const N: usize> LpBallSpec<N> {
    pub fn new(w: WeightVector<N>, p: LpExponent, r: f64, center: Point<N>) -> Result<Self, GeometryError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(GeometryError::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        Ok(Self { w, p, r, center, halfspaces: Vec::new(), extrusion: [None; N] })
    }

    pub fn with_halfspace(mut self, axis: usize, side: Side) -> Result<Self, GeometryError> {
        if axis >= N {
            return Err(GeometryError::InvalidParameter(format!("halfspace axis {axis} >= {N}")));
        }
        self.halfspaces.push(Halfspace { axis, side });
        Ok(self)
    }

    pub fn extruded(mut self, axis: usize, half_width: f64) -> Result<Self, GeometryError> {
        if axis >= N || !(half_width > 0.0) {
            return Err(GeometryError::InvalidParameter(format!("bad extrusion axis {axis} half-width {half_width}")));
        }
        self.extrusion[axis] = Some(half_width);
        Ok(self)
    }

    pub fn active(&self) -> [bool; N] {
        let mut a = [false; N];
        for l in 0..N {
            a[l] = self.extrusion[l].is_none();
        }
        a
    }

    pub fn active_count(&self) -> usize {
        self.extrusion.iter().filter(|e| e.is_none()).count()
    }

    /// Weighted norm of `x − center` over the active axes.
    pub fn radial(&self, x: &Point<N>) -> f64 {
        let w = self.w.entries();
        self.p.combine((0..N).filter(|&l| self.extrusion[l].is_none()).map(|l| w[l] * (x[l] - self.center[l])))
    }

    pub fn radial_gradient(&self, x: &Point<N>) -> Point<N> {
        let mut z = [0.0; N];
        for l in 0..N {
            z[l] = x[l] - self.center[l];
        }
        weighted_norm_gradient(&z, self.w.entries(), self.p, &self.active())
    }

    /// Halfspace and extrusion constraints only, with an absolute slack.
    pub fn slab_contains_tol(&self, x: &Point<N>, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.side.sign() * (x[h.axis] - self.center[h.axis]) >= -tol)
            && (0..N).all(|l| match self.extrusion[l] {
                Some(hw) => (x[l] - self.center[l]).abs() <= hw + tol,
                None => true,
            })
    }

    pub fn slab_contains(&self, x: &Point<N>) -> bool {
        self.slab_contains_tol(x, 0.0)
    }

    pub fn contains(&self, x: &Point<N>) -> bool {
        self.slab_contains(x) && self.radial(x) <= self.r
    }

    pub fn with_radius(&self, r: f64) -> Self {
        Self { r, ..self.clone() }
    }
}

/// Closed axis-aligned box; degenerate extents are allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBox<const N: usize> {
    pub lo: Point<N>,
    pub hi: Point<N>,
}

impl<const N: usize> AxisBox<N> {
    pub fn new(lo: Point<N>, hi: Point<N>) -> Result<Self, GeometryError> {
        if (0..N).any(|l| !(lo[l] <= hi[l])) {
            return Err(GeometryError::InvalidParameter("box lower corner exceeds upper corner".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: &Point<N>) -> bool {
        (0..N).all(|l| x[l] >= self.lo[l] && x[l] <= self.hi[l])
    }

    /// Componentwise excess of `x` beyond the box.
    pub fn excess(&self, x: &Point<N>) -> Point<N> {
        let mut e = [0.0; N];
        for l in 0..N {
            e[l] = if x[l] < self.lo[l] {
                x[l] - self.lo[l]
            } else if x[l] > self.hi[l] {
                x[l] - self.hi[l]
            } else {
                0.0
            };
        }
        e
    }

    pub fn euclidean_distance(&self, x: &Point<N>) -> f64 {
        self.excess(x).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        for l in 0..N {
            out.lo[l] = out.lo[l].min(other.lo[l]);
            out.hi[l] = out.hi[l].max(other.hi[l]);
        }
        out
    }

    pub fn inflate(&self, m: f64) -> Self {
        let mut out = *self;
        for l in 0..N {
            out.lo[l] -= m;
            out.hi[l] += m;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Component<const N: usize> {
    Ball(LpBallSpec<N>),
    Box(AxisBox<N>),
}

impl<const N: usize> Component<N> {
    pub fn contains(&self, x: &Point<N>) -> bool {
        match self {
            Component::Ball(b) => b.contains(x),
            Component::Box(b) => b.contains(x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryKind {
    C,
    D,
    E,
    Box,
    PointNbhd,
}

/// An assembled region. `r` is the thickness parameter; `a`, `b` the core half
/// lengths (zero where unused).
#[derive(Clone, Debug, PartialEq)]
pub struct AbcGeometry<const N: usize> {
    kind: GeometryKind,
    components: Vec<Component<N>>,
    r: f64,
    a: f64,
    b: f64,
    p: LpExponent,
    p_right: LpExponent,
    w: WeightVector<N>,
    center: Point<N>,
}

fn check_positive(name: &str, v: f64) -> Result<(), GeometryError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl AbcGeometry<2> {
    /// The 2D region C: left cap (exponent `p`), middle box, right cap (`p_right`).
    pub fn capsule(w: WeightVector<2>, p: LpExponent, p_right: LpExponent, r: f64, a: f64) -> Result<Self, GeometryError> {
        check_positive("r", r)?;
        check_positive("a", a)?;
        let left = LpBallSpec::new(w, p, r, [-a, 0.0])?.with_halfspace(0, Side::Minus)?;
        let mid = LpBallSpec::new(w, p, r, [0.0, 0.0])?.extruded(0, a)?;
        let right = LpBallSpec::new(w, p_right, r, [a, 0.0])?.with_halfspace(0, Side::Plus)?;
        Ok(Self {
            kind: GeometryKind::C,
            components: vec![Component::Ball(left), Component::Ball(mid), Component::Ball(right)],
            r,
            a,
            b: 0.0,
            p,
            p_right,
            w,
            center: [0.0; 2],
        })
    }
}

impl AbcGeometry<3> {
    /// The slender 3D region D. Mixed cap exponents are not supported because
    /// the middle cross-section would not match the caps.
    pub fn slender(w: WeightVector<3>, p: LpExponent, r: f64, a: f64) -> Result<Self, GeometryError> {
        check_positive("r", r)?;
        check_positive("a", a)?;
        let left = LpBallSpec::new(w, p, r, [-a, 0.0, 0.0])?.with_halfspace(0, Side::Minus)?;
        let mid = LpBallSpec::new(w, p, r, [0.0; 3])?.extruded(0, a)?;
        let right = LpBallSpec::new(w, p, r, [a, 0.0, 0.0])?.with_halfspace(0, Side::Plus)?;
        Ok(Self {
            kind: GeometryKind::D,
            components: vec![Component::Ball(left), Component::Ball(mid), Component::Ball(right)],
            r,
            a,
            b: 0.0,
            p,
            p_right: p,
            w,
            center: [0.0; 3],
        })
    }

    /// The nine-component cushion E around the rectangle [−a,a]×[−b,b]×{0}.
    pub fn cushion(p: LpExponent, r: f64, a: f64, b: f64) -> Result<Self, GeometryError> {
        check_positive("r", r)?;
        check_positive("a", a)?;
        check_positive("b", b)?;
        let w = WeightVector::uniform();
        let mut comps = vec![Component::Ball(LpBallSpec::new(w, p, r, [0.0; 3])?.extruded(0, a)?.extruded(1, b)?)];
        for side in [Side::Plus, Side::Minus] {
            let s = side.sign();
            comps.push(Component::Ball(LpBallSpec::new(w, p, r, [s * a, 0.0, 0.0])?.with_halfspace(0, side)?.extruded(1, b)?));
        }
        for side in [Side::Plus, Side::Minus] {
            let s = side.sign();
            comps.push(Component::Ball(LpBallSpec::new(w, p, r, [0.0, s * b, 0.0])?.with_halfspace(1, side)?.extruded(0, a)?));
        }
        for side1 in [Side::Plus, Side::Minus] {
            for side2 in [Side::Plus, Side::Minus] {
                let c = [side1.sign() * a, side2.sign() * b, 0.0];
                comps.push(Component::Ball(LpBallSpec::new(w, p, r, c)?.with_halfspace(0, side1)?.with_halfspace(1, side2)?));
            }
        }
        Ok(Self { kind: GeometryKind::E, components: comps, r, a, b, p, p_right: p, w, center: [0.0; 3] })
    }
}

impl<const N: usize> AbcGeometry<N> {
    /// Weighted l^p ball of radius `r` around `center` (the full-cloak region).
    pub fn point_ball(w: WeightVector<N>, p: LpExponent, r: f64, center: Point<N>) -> Result<Self, GeometryError> {
        check_positive("r", r)?;
        Ok(Self {
            kind: GeometryKind::PointNbhd,
            components: vec![Component::Ball(LpBallSpec::new(w, p, r, center)?)],
            r,
            a: 0.0,
            b: 0.0,
            p,
            p_right: p,
            w,
            center,
        })
    }

    pub fn rectangle(bx: AxisBox<N>) -> Self {
        Self {
            kind: GeometryKind::Box,
            components: vec![Component::Box(bx)],
            r: 0.0,
            a: 0.0,
            b: 0.0,
            p: LpExponent::Inf,
            p_right: LpExponent::Inf,
            w: WeightVector::uniform(),
            center: [0.0; N],
        }
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }
    pub fn components(&self) -> &[Component<N>] {
        &self.components
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn p(&self) -> LpExponent {
        self.p
    }
    pub fn p_right(&self) -> LpExponent {
        self.p_right
    }
    pub fn weights(&self) -> &WeightVector<N> {
        &self.w
    }
    pub fn center(&self) -> &Point<N> {
        &self.center
    }

    /// Same geometry with a different thickness parameter.
    pub fn with_radius(&self, r: f64) -> Result<Self, GeometryError> {
        if self.kind == GeometryKind::Box {
            return Ok(self.clone());
        }
        check_positive("r", r)?;
        let mut g = self.clone();
        g.r = r;
        for c in g.components.iter_mut() {
            if let Component::Ball(b) = c {
                b.r = r;
            }
        }
        Ok(g)
    }

    pub fn contains(&self, x: &Point<N>) -> bool {
        self.components.iter().any(|c| c.contains(x))
    }

    /// The degenerate core the region shrinks to as r → 0.
    pub fn core(&self) -> Result<AxisBox<N>, GeometryError> {
        let mut lo = self.center;
        let mut hi = self.center;
        match self.kind {
            GeometryKind::C | GeometryKind::D => {
                lo[0] = -self.a;
                hi[0] = self.a;
            }
            GeometryKind::E => {
                lo[0] = -self.a;
                hi[0] = self.a;
                lo[1] = -self.b;
                hi[1] = self.b;
            }
            GeometryKind::PointNbhd => {}
            GeometryKind::Box => return Err(GeometryError::UnsupportedKind(self.kind)),
        }
        Ok(AxisBox { lo, hi })
    }

    fn exponent_at(&self, x: &Point<N>) -> LpExponent {
        if self.kind == GeometryKind::C && x[0] > self.a {
            self.p_right
        } else {
            self.p
        }
    }

    /// d̃: weighted l^p norm of the excess of `x` over the core. Its sublevel
    /// set at level r is exactly the geometry with thickness r.
    pub fn region_distance(&self, x: &Point<N>) -> Result<f64, GeometryError> {
        let e = self.core()?.excess(x);
        Ok(self.exponent_at(x).combine((0..N).map(|l| self.w.entries()[l] * e[l])))
    }

    /// Analytic gradient of `region_distance` (zero on the core).
    pub fn region_distance_gradient(&self, x: &Point<N>) -> Result<Point<N>, GeometryError> {
        let core = self.core()?;
        let e = core.excess(x);
        let mut active = [false; N];
        for l in 0..N {
            active[l] = e[l] != 0.0;
        }
        Ok(weighted_norm_gradient(&e, self.w.entries(), self.exponent_at(x), &active))
    }

    /// Constants (lo, hi) with lo·dist(x, core) ≤ d̃(x) ≤ hi·dist(x, core).
    pub fn equivalence_constants(&self) -> (f64, f64) {
        let wmin = self.w.min();
        let sqrt_n = (N as f64).sqrt();
        let ps = [self.p, self.p_right];
        let lo = if ps.contains(&LpExponent::Inf) { wmin / sqrt_n } else { wmin };
        let hi = if ps.contains(&LpExponent::One) { sqrt_n } else { 1.0 };
        (lo, hi)
    }

    /// Bounding box of the region.
    pub fn bounding_box(&self) -> AxisBox<N> {
        let mut bb: Option<AxisBox<N>> = None;
        for c in &self.components {
            let b = match c {
                Component::Box(b) => *b,
                Component::Ball(s) => {
                    let mut lo = s.center;
                    let mut hi = s.center;
                    for l in 0..N {
                        let half = s.extrusion[l].unwrap_or(s.r / s.w.entries()[l]);
                        let mut l_lo = s.center[l] - half;
                        let mut l_hi = s.center[l] + half;
                        for h in &s.halfspaces {
                            if h.axis == l {
                                match h.side {
                                    Side::Plus => l_lo = s.center[l],
                                    Side::Minus => l_hi = s.center[l],
                                }
                            }
                        }
                        lo[l] = l_lo;
                        hi[l] = l_hi;
                    }
                    AxisBox { lo, hi }
                }
            };
            bb = Some(match bb {
                Some(acc) => acc.union(&b),
                None => b,
            });
        }
        bb.unwrap_or(AxisBox { lo: [0.0; N], hi: [0.0; N] })
    }

    /// Largest distance from the origin of any point of the region.
    pub fn bounding_radius(&self) -> f64 {
        let bb = self.bounding_box();
        if self.kind == GeometryKind::Box || self.p == LpExponent::Inf || self.p_right == LpExponent::Inf {
            return corner_radius(&bb);
        }
        // l^1 and l^2 caps are inside the Euclidean ball about their center, so
        // the farthest point is a cap tip or an extrusion corner.
        let mut best: f64 = 0.0;
        for c in &self.components {
            if let Component::Ball(s) = c {
                let c_norm = s.center.iter().map(|v| v * v).sum::<f64>().sqrt();
                let wmin = (0..N).filter(|&l| s.extrusion[l].is_none()).map(|l| s.w.entries()[l]).fold(1.0, f64::min);
                let ext: f64 = (0..N).filter_map(|l| s.extrusion[l]).map(|h| h * h).sum();
                best = best.max(((c_norm + s.r / wmin).powi(2) + ext).sqrt());
            }
        }
        best.min(corner_radius(&bb))
    }
}

fn corner_radius<const N: usize>(bb: &AxisBox<N>) -> f64 {
    (0..N).map(|l| bb.lo[l].abs().max(bb.hi[l].abs()).powi(2)).sum::<f64>().sqrt()
}

/// Shape parameters shared by the C, D, E and point families; `r` is supplied
/// separately so the same description yields K_ε, K_{r1} and K_{r2}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeParams {
    #[serde(default = "default_half")]
    pub a: f64,
    #[serde(default = "default_half")]
    pub b: f64,
    #[serde(default = "default_p")]
    pub p: LpExponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_right: Option<LpExponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
}

fn default_half() -> f64 {
    1.0
}
fn default_p() -> LpExponent {
    LpExponent::Two
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, p: LpExponent::Two, p_right: None, w: None }
    }
}

impl ShapeParams {
    pub fn weights<const N: usize>(&self) -> Result<WeightVector<N>, GeometryError> {
        match &self.w {
            None => Ok(WeightVector::uniform()),
            Some(v) => {
                let arr: [f64; N] = v.as_slice().try_into().map_err(|_| GeometryError::DimensionMismatch { point: N, weight: v.len() })?;
                WeightVector::new(arr)
            }
        }
    }
}

/// Builds the member of a shape family with thickness `r`.
pub trait ShapeFamily: Sized {
    fn family(kind: GeometryKind, shape: &ShapeParams, r: f64) -> Result<Self, GeometryError>;
}

impl ShapeFamily for AbcGeometry<2> {
    fn family(kind: GeometryKind, shape: &ShapeParams, r: f64) -> Result<Self, GeometryError> {
        let w = shape.weights::<2>()?;
        match kind {
            GeometryKind::C => Self::capsule(w, shape.p, shape.p_right.unwrap_or(shape.p), r, shape.a),
            GeometryKind::PointNbhd => Self::point_ball(w, shape.p, r, [0.0; 2]),
            other => Err(GeometryError::InvalidParameter(format!("{other:?} is not a 2D shape family"))),
        }
    }
}

impl ShapeFamily for AbcGeometry<3> {
    fn family(kind: GeometryKind, shape: &ShapeParams, r: f64) -> Result<Self, GeometryError> {
        let w = shape.weights::<3>()?;
        if shape.p_right.is_some_and(|pr| pr != shape.p) {
            return Err(GeometryError::InvalidParameter("mixed cap exponents are only supported in 2D".into()));
        }
        match kind {
            GeometryKind::D => Self::slender(w, shape.p, r, shape.a),
            GeometryKind::E => {
                if w != WeightVector::uniform() {
                    return Err(GeometryError::InvalidParameter("the E cushion uses unit weights".into()));
                }
                Self::cushion(shape.p, r, shape.a, shape.b)
            }
            GeometryKind::PointNbhd => Self::point_ball(w, shape.p, r, [0.0; 3]),
            other => Err(GeometryError::InvalidParameter(format!("{other:?} is not a 3D shape family"))),
        }
    }
}

/// Observation/incidence aperture {θ : |ν·θ| ≤ τ}.
#[derive(Clone, Debug, PartialEq)]
pub struct ApertureSpec {
    normal: Vec<f64>,
    tau: f64,
}

impl ApertureSpec {
    pub fn new(normal: Vec<f64>, tau: f64) -> Result<Self, GeometryError> {
        let n = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(GeometryError::InvalidParameter(format!("aperture normal has norm {n}")));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(GeometryError::InvalidParameter(format!("tau = {tau} outside [0, 1]")));
        }
        Ok(Self { normal, tau })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
}

pub fn in_aperture(d: &[f64], ap: &ApertureSpec) -> bool {
    let dot: f64 = d.iter().zip(&ap.normal).map(|(a, b)| a * b).sum();
    dot.abs() <= ap.tau
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capsule(r: f64) -> AbcGeometry<2> {
        AbcGeometry::capsule(WeightVector::uniform(), LpExponent::Two, LpExponent::Two, r, 1.0).unwrap()
    }

    #[test]
    fn weighted_norm_examples() {
        assert_eq!(weighted_norm(&[3.0, 4.0], &[1.0, 1.0], LpExponent::Two).unwrap(), 5.0);
        assert_eq!(weighted_norm(&[1.0, 1.0], &[1.0, 1.0], LpExponent::Inf).unwrap(), 1.0);
        assert_eq!(weighted_norm(&[2.0, 3.0], &[0.5, 1.0], LpExponent::One).unwrap(), 4.0);
        assert!(matches!(weighted_norm(&[1.0, 2.0, 3.0], &[1.0, 1.0], LpExponent::Two), Err(GeometryError::DimensionMismatch { .. })));
    }

    #[test]
    fn weights_are_validated() {
        assert!(WeightVector::new([0.0, 1.0]).is_err());
        assert!(WeightVector::new([1.5, 1.0]).is_err());
        assert!(WeightVector::new([0.2, 1.0]).is_ok());
    }

    #[test]
    fn capsule_membership() {
        let g = capsule(1.0);
        assert!(g.contains(&[0.0, 0.0]));
        assert!(!g.contains(&[2.5, 0.0]));
        assert!(g.contains(&[2.0, 0.0]));
        assert!(g.contains(&[-1.5, 0.8]));
        assert!(!g.contains(&[-1.8, 0.8]));
    }

    #[test]
    fn cushion_corner_membership() {
        let g = AbcGeometry::cushion(LpExponent::Two, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(g.components().len(), 9);
        assert!(g.contains(&[1.5, 1.5, 0.0]));
        assert!(!g.contains(&[1.8, 1.8, 0.0]));
    }

    #[test]
    fn region_distance_examples() {
        let g = capsule(0.5);
        assert!((g.region_distance(&[0.0, 0.3]).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(g.region_distance(&[1.0, 0.0]).unwrap(), 0.0);
        let e = AbcGeometry::cushion(LpExponent::Two, 0.5, 1.0, 1.0).unwrap();
        assert!((e.region_distance(&[2.0, 2.0, 0.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let bx = AbcGeometry::rectangle(AxisBox::new([0.0, 0.0], [1.0, 1.0]).unwrap());
        assert!(bx.region_distance(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn nail_uses_right_exponent() {
        let g = AbcGeometry::capsule(WeightVector::uniform(), LpExponent::Inf, LpExponent::One, 1.0, 1.0).unwrap();
        // l^1 right cap: |x1 - 1| + |x2| <= 1
        assert!(g.contains(&[1.5, 0.5]));
        assert!(!g.contains(&[1.6, 0.5]));
        // l^inf left cap is a square
        assert!(g.contains(&[-1.9, 0.9]));
        assert!((g.region_distance(&[1.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn aperture_examples() {
        let ap = ApertureSpec::new(vec![0.0, 1.0], 0.1).unwrap();
        assert!(in_aperture(&[1.0, 0.0], &ap));
        assert!(!in_aperture(&[0.0, 1.0], &ap));
        let t = 5f64.to_radians();
        assert!(in_aperture(&[t.cos(), t.sin()], &ap));
        assert!(ApertureSpec::new(vec![0.0, 2.0], 0.1).is_err());
        assert!(ApertureSpec::new(vec![0.0, 1.0], 1.1).is_err());
    }

    #[test]
    fn bounding_radius_of_capsule() {
        let g = capsule(2.0);
        assert!((g.bounding_radius() - 3.0).abs() < 1e-12);
        let bb = g.bounding_box();
        assert_eq!(bb.lo, [-3.0, -2.0]);
        assert_eq!(bb.hi, [3.0, 2.0]);
    }
}
