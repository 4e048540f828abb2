//! Media, sources and obstacles, their push-forward under coordinate maps,
//! lossy layers, scenario assembly and the assumption validators.
//!
//! Fields are closures over analytic formulas. Rasterization happens later in
//! the solver, so an ε sweep never re-tabulates anything.

pub mod assumption;
pub mod lossy;
pub mod obstacle;
pub mod scenario;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{AxisBox, GeometryError};
use crate::linalg::{self, Mat, Point};
use crate::transforms::{PiecewiseMap, Region, TransformError};

pub use assumption::{validate_layer_conditions, AssumptionParams, AssumptionReport, EpsilonRow, Modulus};
pub use lossy::{build_lossy_layer, Coef, LayerVariant, LossyLayerSpec};
pub use obstacle::{push_forward_impedance, ObstacleKind, ObstacleSpec, Shape, SurfaceFn, SurfacePatch};
pub use scenario::{
    assemble_physical_scenario, pull_back, virtual_scenario, AdmissibilityError, CloakInfo, CloakKind, CloakParams, CloakedContents, Layer, Scenario, Space,
};

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("singular Jacobian at {at:?} (det = {det})")]
    SingularJacobian { at: Vec<f64>, det: f64 },
    #[error("medium not regular at {at:?}: {reason}")]
    NotRegular { at: Vec<f64>, reason: String },
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error("surface patch is not mapped affinely: {0}")]
    NonAffinePatch(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// σ and q at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialSample<const N: usize> {
    pub sigma: Mat<N>,
    pub q: Complex64,
}

impl<const N: usize> MaterialSample<N> {
    pub fn background() -> Self {
        Self { sigma: linalg::identity(), q: Complex64::new(1.0, 0.0) }
    }

    pub fn is_background(&self, tol: f64) -> bool {
        linalg::max_abs_diff(&self.sigma, &linalg::identity()) <= tol && (self.q - 1.0).norm() <= tol
    }

    /// Largest entrywise difference in σ and q.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.sigma, &other.sigma).max((self.q - other.q).norm())
    }
}

pub type MediumFn<const N: usize> = Arc<dyn Fn(&Point<N>) -> Result<MaterialSample<N>, MaterialError> + Send + Sync>;

/// A medium given by a closure. Outside `support` (when present) the medium is
/// the background σ = I, q = 1 and the closure is not called.
#[derive(Clone)]
pub struct MaterialField<const N: usize> {
    name: String,
    eval: MediumFn<N>,
    support: Option<AxisBox<N>>,
}

impl<const N: usize> fmt::Debug for MaterialField<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MaterialField").field("name", &self.name).field("support", &self.support).finish()
    }
}

impl<const N: usize> MaterialField<N> {
    pub fn background() -> Self {
        Self::from_fn("background", Some(AxisBox { lo: [0.0; N], hi: [0.0; N] }), |_| Ok(MaterialSample::background()))
    }

    pub fn constant(sigma: Mat<N>, q: Complex64) -> Self {
        Self::from_fn("constant", None, move |_| Ok(MaterialSample { sigma, q }))
    }

    pub fn from_fn(name: &str, support: Option<AxisBox<N>>, f: impl Fn(&Point<N>) -> Result<MaterialSample<N>, MaterialError> + Send + Sync + 'static) -> Self {
        Self { name: name.to_string(), eval: Arc::new(f), support }
    }

    /// `inner` on `region`, background elsewhere.
    pub fn restricted(name: &str, inner: MaterialField<N>, region: Region<N>, support: AxisBox<N>) -> Self {
        Self::from_fn(name, Some(support), move |x| if region(x) { inner.sample(x) } else { Ok(MaterialSample::background()) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> Option<&AxisBox<N>> {
        self.support.as_ref()
    }

    pub fn sample(&self, x: &Point<N>) -> Result<MaterialSample<N>, MaterialError> {
        match &self.support {
            Some(s) if !s.contains(x) => Ok(MaterialSample::background()),
            _ => (self.eval)(x),
        }
    }

    /// Checks the regular conditions λ|ξ|² ≤ σξ·ξ ≤ λ⁻¹|ξ|², Re q ≥ λ, Im q ≥ 0
    /// and symmetry of σ at the given points.
    pub fn check_regular(&self, points: &[Point<N>], lambda: f64) -> Result<(), MaterialError> {
        for x in points {
            let m = self.sample(x)?;
            check_sample_regular(x, &m, lambda)?;
        }
        Ok(())
    }
}

pub(crate) fn check_sample_regular<const N: usize>(x: &Point<N>, m: &MaterialSample<N>, lambda: f64) -> Result<(), MaterialError> {
    let fail = |reason: String| Err(MaterialError::NotRegular { at: x.to_vec(), reason });
    let scale = m.sigma.iter().flatten().fold(1.0_f64, |a, v| a.max(v.abs()));
    if !linalg::is_symmetric(&m.sigma, 1e-12 * scale) {
        return fail("σ is not symmetric".into());
    }
    let ev = linalg::sym_eigenvalues(&m.sigma);
    if ev[0] < lambda || ev[N - 1] > 1.0 / lambda {
        return fail(format!("σ eigenvalues {ev:?} outside [{lambda}, {}]", 1.0 / lambda));
    }
    if m.q.re < lambda {
        return fail(format!("Re q = {} < {lambda}", m.q.re));
    }
    if m.q.im < 0.0 {
        return fail(format!("Im q = {} < 0", m.q.im));
    }
    Ok(())
}

/// Box containing the image of `b` under `map`. Maps with a declared extent
/// send it into itself; global maps here are axis-monotone, so the corners
/// bound the image.
pub fn image_box<const N: usize>(map: &PiecewiseMap<N>, b: &AxisBox<N>) -> Result<AxisBox<N>, TransformError> {
    if let Some(e) = map.extent() {
        return Ok(b.union(e));
    }
    let mut lo = [f64::INFINITY; N];
    let mut hi = [f64::NEG_INFINITY; N];
    for mask in 0..(1usize << N) {
        let c: Point<N> = std::array::from_fn(|l| if mask >> l & 1 == 1 { b.hi[l] } else { b.lo[l] });
        let y = map.eval(&c)?;
        for l in 0..N {
            lo[l] = lo[l].min(y[l]);
            hi[l] = hi[l].max(y[l]);
        }
    }
    Ok(AxisBox { lo, hi })
}

fn jacobian_det_checked<const N: usize>(y: &Point<N>, j: &Mat<N>) -> Result<f64, MaterialError> {
    let det = linalg::det(j);
    if !(det.abs() > 1e-300) || !det.is_finite() {
        return Err(MaterialError::SingularJacobian { at: y.to_vec(), det });
    }
    Ok(det.abs())
}

/// F_*σ = DF σ DFᵀ / |det DF|, F_*q = q / |det DF|, evaluated at y = F(x).
pub fn push_forward_sample<const N: usize>(j: &Mat<N>, det: f64, m: &MaterialSample<N>) -> MaterialSample<N> {
    MaterialSample { sigma: linalg::scale_mat(&linalg::congruence(j, &m.sigma), 1.0 / det), q: m.q / det }
}

pub fn push_forward_medium<const N: usize>(map: &PiecewiseMap<N>, mat: &MaterialField<N>) -> Result<MaterialField<N>, MaterialError> {
    // Pushed background is not background where the map moves points, so a
    // bounded support survives only for maps with a declared extent.
    let support = match (mat.support(), map.extent()) {
        (Some(s), Some(e)) => Some(s.union(e)),
        _ => None,
    };
    let map = map.clone();
    let inner = mat.clone();
    Ok(MaterialField::from_fn(&format!("pushed {}", mat.name()), support, move |y| {
        let (x, j) = map.jacobian_at_image(y)?;
        let det = jacobian_det_checked(y, &j)?;
        Ok(push_forward_sample(&j, det, &inner.sample(&x)?))
    }))
}

pub type ScalarFn<const N: usize> = Arc<dyn Fn(&Point<N>) -> Complex64 + Send + Sync>;
pub type VectorFn<const N: usize> = Arc<dyn Fn(&Point<N>) -> [Complex64; N] + Send + Sync>;

/// Source pair (h, H) entering as −h + div H. Both vanish off `region`.
#[derive(Clone)]
pub struct SourceSpec<const N: usize> {
    pub h: Option<ScalarFn<N>>,
    pub big_h: Option<VectorFn<N>>,
    pub region: Region<N>,
    pub support: AxisBox<N>,
}

impl<const N: usize> fmt::Debug for SourceSpec<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceSpec").field("has_h", &self.h.is_some()).field("has_big_h", &self.big_h.is_some()).field("support", &self.support).finish()
    }
}

impl<const N: usize> SourceSpec<N> {
    pub fn has_h(&self) -> bool {
        self.h.is_some()
    }
    pub fn has_big_h(&self) -> bool {
        self.big_h.is_some()
    }

    pub fn in_support(&self, x: &Point<N>) -> bool {
        self.support.contains(x) && (self.region)(x)
    }

    pub fn h_at(&self, x: &Point<N>) -> Complex64 {
        match &self.h {
            Some(h) if self.in_support(x) => h(x),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn big_h_at(&self, x: &Point<N>) -> [Complex64; N] {
        match &self.big_h {
            Some(hh) if self.in_support(x) => hh(x),
            _ => [Complex64::new(0.0, 0.0); N],
        }
    }
}

/// F_*h = h / |det DF|, F_*H = DF H / |det DF|.
pub fn push_forward_source<const N: usize>(map: &PiecewiseMap<N>, src: &SourceSpec<N>) -> Result<SourceSpec<N>, MaterialError> {
    let support = image_box(map, &src.support)?;
    let region: Region<N> = {
        let (map, src) = (map.clone(), src.clone());
        Arc::new(move |y| map.eval_inverse(y).map(|x| src.in_support(&x)).unwrap_or(false))
    };
    let h = src.h.as_ref().map(|h| {
        let (map, h) = (map.clone(), h.clone());
        Arc::new(move |y: &Point<N>| match map.jacobian_at_image(y) {
            Ok((x, j)) => h(&x) / linalg::det(&j).abs(),
            Err(_) => Complex64::new(0.0, 0.0),
        }) as ScalarFn<N>
    });
    let big_h = src.big_h.as_ref().map(|hh| {
        let (map, hh) = (map.clone(), hh.clone());
        Arc::new(move |y: &Point<N>| match map.jacobian_at_image(y) {
            Ok((x, j)) => {
                let v = hh(&x);
                let det = linalg::det(&j).abs();
                std::array::from_fn(|r| (0..N).map(|c| v[c] * j[r][c]).sum::<Complex64>() / det)
            }
            Err(_) => [Complex64::new(0.0, 0.0); N],
        }) as VectorFn<N>
    });
    Ok(SourceSpec { h, big_h, region, support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LpExponent, WeightVector};
    use crate::transforms::{Dilation, RadialBlowupMap, SmoothMap};

    fn radial_map() -> PiecewiseMap<2> {
        let m = RadialBlowupMap::new(WeightVector::uniform(), LpExponent::Two, 1.0, 2.0, 0.01).unwrap();
        PiecewiseMap::global("radial", Arc::new(m))
    }

    #[test]
    fn identity_push_forward_is_noop() {
        let mat = MaterialField::<2>::from_fn("m", None, |x| Ok(MaterialSample { sigma: [[2.0 + x[0], 0.3], [0.3, 1.5]], q: Complex64::new(1.2, x[1].abs()) }));
        let pushed = push_forward_medium(&PiecewiseMap::identity(), &mat).unwrap();
        for x in [[0.1, 0.2], [-1.0, 3.0]] {
            assert_eq!(pushed.sample(&x).unwrap(), mat.sample(&x).unwrap());
        }
    }

    #[test]
    fn radial_push_at_outer_radius() {
        let map = radial_map();
        let pushed = push_forward_medium(&map, &MaterialField::background()).unwrap();
        let b = 1.0 / 1.99;
        // Just inside the outer radius along the x-axis the polar frame is the
        // coordinate frame.
        let m = pushed.sample(&[2.0 - 1e-9, 0.0]).unwrap();
        assert!((m.sigma[0][0] - b).abs() < 1e-6, "{:?}", m.sigma);
        assert!((m.sigma[1][1] - 1.0 / b).abs() < 1e-6);
        assert!(m.sigma[0][1].abs() < 1e-9);
        assert!((m.q.re - 1.0 / b).abs() < 1e-6);
        // Same numbers from a finite-difference Jacobian.
        let x = [2.0 - 1e-9, 0.0];
        let fd = crate::transforms::finite_difference_jacobian(|p| map.eval(p), &x, 1e-6).unwrap();
        let det = linalg::det(&fd);
        let s = push_forward_sample(&fd, det, &MaterialSample::background());
        assert!((s.sigma[0][0] - m.sigma[0][0]).abs() < 1e-5);
        assert!((s.sigma[1][1] - m.sigma[1][1]).abs() < 1e-5);
    }

    #[test]
    fn pushed_sigma_stays_spd() {
        let map = radial_map();
        let pushed = push_forward_medium(&map, &MaterialField::background()).unwrap();
        for i in 0..200 {
            let t = i as f64 * 0.0314;
            let r = 1.0 + 0.99 * (i as f64 / 200.0);
            let m = pushed.sample(&[r * t.cos(), r * t.sin()]).unwrap();
            assert!(linalg::is_symmetric(&m.sigma, 1e-12));
            assert!(linalg::sym_eigenvalues(&m.sigma)[0] > 0.0);
        }
    }

    #[test]
    fn dilation_scales_sources() {
        let eps = 0.01;
        let map = PiecewiseMap::global("dilation", Arc::new(Dilation::<2>::uniform(1.0 / eps).unwrap()));
        let src = SourceSpec::<2> {
            h: Some(Arc::new(|x| Complex64::new(1.0 + x[0], 0.5))),
            big_h: Some(Arc::new(|x| [Complex64::new(x[1], 0.0), Complex64::new(0.0, 2.0)])),
            region: Arc::new(|_| true),
            support: AxisBox { lo: [-0.01, -0.01], hi: [0.01, 0.01] },
        };
        let pushed = push_forward_source(&map, &src).unwrap();
        let y = [0.4, -0.7];
        let x = [0.004, -0.007];
        assert!((pushed.h_at(&y) - src.h_at(&x) * eps * eps).norm() < 1e-15);
        let hh = pushed.big_h_at(&y);
        let h0 = src.big_h_at(&x);
        for l in 0..2 {
            assert!((hh[l] - h0[l] * eps).norm() < 1e-15);
        }
        assert!((pushed.support.hi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regularity_check_flags_bad_media() {
        let good = MaterialField::<2>::constant(linalg::identity(), Complex64::new(1.0, 0.1));
        assert!(good.check_regular(&[[0.0, 0.0]], 0.5).is_ok());
        let lossy_neg = MaterialField::<2>::constant(linalg::identity(), Complex64::new(1.0, -0.1));
        assert!(lossy_neg.check_regular(&[[0.0, 0.0]], 0.5).is_err());
        let soft = MaterialField::<2>::constant(linalg::diag([1e-3, 1.0]), Complex64::new(1.0, 0.0));
        assert!(soft.check_regular(&[[0.0, 0.0]], 0.5).is_err());
    }

    #[test]
    fn singular_jacobian_is_reported() {
        #[derive(Debug)]
        struct Flatten;
        impl SmoothMap<2> for Flatten {
            fn apply(&self, x: &Point<2>) -> Result<Point<2>, TransformError> {
                Ok(*x)
            }
            fn apply_inverse(&self, y: &Point<2>) -> Result<Point<2>, TransformError> {
                Ok(*y)
            }
            fn jacobian(&self, _: &Point<2>) -> Result<Mat<2>, TransformError> {
                Ok([[1.0, 0.0], [0.0, 0.0]])
            }
        }
        let map = PiecewiseMap::global("flat", Arc::new(Flatten));
        let pushed = push_forward_medium(&map, &MaterialField::constant(linalg::identity(), Complex64::new(1.0, 0.0))).unwrap();
        assert!(matches!(pushed.sample(&[0.3, 0.4]), Err(MaterialError::SingularJacobian { .. })));
    }
}
