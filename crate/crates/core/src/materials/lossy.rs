//! Absorbing layers on K_ε \ K_{ε/2}.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MaterialError, MaterialField, MaterialSample};
use crate::geometry::{AbcGeometry, GeometryKind};
use crate::linalg::{self, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerVariant {
    /// σ = c₁ε²I, q = (c₂ + ic₃)ε^{1−N}.
    FullCloak,
    /// σ = c₁ along the core, c₂ε² across it; q = (c₃ + ic₄)ε^{−1/2}.
    CLayer,
    /// σ = c₁ε²I, q = (c₂ + ic₃)ε^{−1/2}.
    DLayer,
    ELayer,
    /// Isotropic σ = c₁ε²I, q = (c₂ + ic₃)ε^{−1/2} on any geometry.
    Isotropic,
    Custom,
}

#[derive(Clone)]
pub enum Coef<const N: usize> {
    Const(f64),
    Field(Arc<dyn Fn(&Point<N>) -> f64 + Send + Sync>),
}

impl<const N: usize> Coef<N> {
    pub fn at(&self, x: &Point<N>) -> f64 {
        match self {
            Coef::Const(v) => *v,
            Coef::Field(f) => f(x),
        }
    }
}

impl<const N: usize> fmt::Debug for Coef<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef::Const(v) => write!(f, "{v}"),
            Coef::Field(_) => write!(f, "<field>"),
        }
    }
}

pub type CustomLayerFn<const N: usize> = Arc<dyn Fn(&Point<N>, f64) -> MaterialSample<N> + Send + Sync>;

#[derive(Clone)]
pub struct LossyLayerSpec<const N: usize> {
    pub variant: LayerVariant,
    pub c: [Coef<N>; 4],
    pub lambda0: f64,
    pub big_lambda0: f64,
    pub eps: f64,
    /// Formula for `LayerVariant::Custom`, called with (x, ε).
    pub custom: Option<CustomLayerFn<N>>,
}

impl<const N: usize> fmt::Debug for LossyLayerSpec<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LossyLayerSpec")
            .field("variant", &self.variant)
            .field("c", &self.c)
            .field("lambda0", &self.lambda0)
            .field("big_lambda0", &self.big_lambda0)
            .field("eps", &self.eps)
            .finish()
    }
}

impl<const N: usize> LossyLayerSpec<N> {
    /// Constant coefficients; λ₀ and Λ₀ are their min and max.
    pub fn constant(variant: LayerVariant, c: [f64; 4], eps: f64) -> Self {
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(0.0, f64::max);
        Self { variant, c: c.map(Coef::Const), lambda0: lo, big_lambda0: hi, eps, custom: None }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    /// Number of coefficients the variant uses.
    pub fn coefficient_count(&self) -> usize {
        match self.variant {
            LayerVariant::CLayer => 4,
            LayerVariant::Custom => 0,
            _ => 3,
        }
    }

    /// λ₀ ≤ c_l(x) ≤ Λ₀ at the sample points.
    pub fn check_bounds(&self, points: &[Point<N>]) -> Result<(), MaterialError> {
        if !(self.lambda0 > 0.0) || self.big_lambda0 < self.lambda0 {
            return Err(MaterialError::InvalidLayer(format!("bounds {} ≤ {} are not positive and ordered", self.lambda0, self.big_lambda0)));
        }
        for x in points {
            for (l, c) in self.c.iter().enumerate().take(self.coefficient_count()) {
                let v = c.at(x);
                if v < self.lambda0 || v > self.big_lambda0 {
                    return Err(MaterialError::InvalidLayer(format!("c{} = {v} at {x:?} outside [{}, {}]", l + 1, self.lambda0, self.big_lambda0)));
                }
            }
        }
        Ok(())
    }

    /// The layer formula at x, given the unit normal to the core there.
    pub fn formula(&self, x: &Point<N>, normal: &Point<N>) -> MaterialSample<N> {
        let eps = self.eps;
        let c = |l: usize| self.c[l].at(x);
        match self.variant {
            LayerVariant::FullCloak => {
                MaterialSample { sigma: linalg::scale_mat(&linalg::identity(), c(0) * eps * eps), q: Complex64::new(c(1), c(2)) * eps.powi(1 - N as i32) }
            }
            LayerVariant::CLayer => {
                let nn = linalg::outer(normal, normal);
                let tt = linalg::add_mat(&linalg::identity(), &linalg::scale_mat(&nn, -1.0));
                MaterialSample {
                    sigma: linalg::add_mat(&linalg::scale_mat(&tt, c(0)), &linalg::scale_mat(&nn, c(1) * eps * eps)),
                    q: Complex64::new(c(2), c(3)) / eps.sqrt(),
                }
            }
            LayerVariant::DLayer | LayerVariant::ELayer | LayerVariant::Isotropic => {
                MaterialSample { sigma: linalg::scale_mat(&linalg::identity(), c(0) * eps * eps), q: Complex64::new(c(1), c(2)) / eps.sqrt() }
            }
            LayerVariant::Custom => match &self.custom {
                Some(f) => f(x, eps),
                None => MaterialSample::background(),
            },
        }
    }
}

fn variant_fits(variant: LayerVariant, kind: GeometryKind, n: usize) -> bool {
    match variant {
        LayerVariant::FullCloak => kind == GeometryKind::PointNbhd,
        LayerVariant::CLayer => kind == GeometryKind::C && n == 2,
        LayerVariant::DLayer => kind == GeometryKind::D,
        LayerVariant::ELayer => kind == GeometryKind::E,
        LayerVariant::Isotropic | LayerVariant::Custom => kind != GeometryKind::Box,
    }
}

/// The layer on K_ε \ K_{ε/2}, background elsewhere. `geom` must be K_ε.
pub fn build_lossy_layer<const N: usize>(spec: &LossyLayerSpec<N>, geom: &AbcGeometry<N>) -> Result<MaterialField<N>, MaterialError> {
    if !variant_fits(spec.variant, geom.kind(), N) {
        return Err(MaterialError::InvalidLayer(format!("{:?} layer does not fit a {:?} geometry in {N}D", spec.variant, geom.kind())));
    }
    if (geom.r() - spec.eps).abs() > 1e-12 * spec.eps {
        return Err(MaterialError::InvalidLayer(format!("layer ε = {} but geometry thickness is {}", spec.eps, geom.r())));
    }
    if spec.variant == LayerVariant::Custom && spec.custom.is_none() {
        return Err(MaterialError::InvalidLayer("custom layer without a formula".into()));
    }
    let eps = spec.eps;
    let g = geom.clone();
    let s = spec.clone();
    Ok(MaterialField::from_fn(&format!("{:?} layer", spec.variant), Some(geom.bounding_box()), move |x| {
        let d = g.region_distance(x)?;
        if d < 0.5 * eps || d > eps {
            return Ok(MaterialSample::background());
        }
        let grad = g.region_distance_gradient(x)?;
        let norm = linalg::norm2(&grad);
        let normal = if norm > 0.0 { grad.map(|v| v / norm) } else { [0.0; N] };
        Ok(s.formula(x, &normal))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LpExponent, WeightVector};

    fn capsule(eps: f64) -> AbcGeometry<2> {
        AbcGeometry::capsule(WeightVector::uniform(), LpExponent::Two, LpExponent::Two, eps, 1.0).unwrap()
    }

    #[test]
    fn full_cloak_values() {
        let eps = 0.1;
        let geom = AbcGeometry::<2>::point_ball(WeightVector::uniform(), LpExponent::Two, eps, [0.0; 2]).unwrap();
        let layer = build_lossy_layer(&LossyLayerSpec::constant(LayerVariant::FullCloak, [1.0; 4], eps), &geom).unwrap();
        let m = layer.sample(&[0.07, 0.0]).unwrap();
        assert!((m.sigma[0][0] - 0.01).abs() < 1e-15 && (m.sigma[1][1] - 0.01).abs() < 1e-15);
        assert!((m.q - Complex64::new(10.0, 10.0)).norm() < 1e-12);
        assert!(layer.sample(&[0.02, 0.0]).unwrap().is_background(0.0));
        assert!(layer.sample(&[0.2, 0.0]).unwrap().is_background(0.0));
    }

    #[test]
    fn c_layer_on_flat_part() {
        let eps = 0.01;
        let layer = build_lossy_layer(&LossyLayerSpec::constant(LayerVariant::CLayer, [1.0; 4], eps), &capsule(eps)).unwrap();
        let m = layer.sample(&[0.3, 0.008]).unwrap();
        assert!((m.sigma[0][0] - 1.0).abs() < 1e-14);
        assert!((m.sigma[1][1] - 1e-4).abs() < 1e-16);
        assert!(m.sigma[0][1].abs() < 1e-16);
        assert!((m.q - Complex64::new(10.0, 10.0)).norm() < 1e-12);
    }

    #[test]
    fn isotropic_variant() {
        let eps = 0.04;
        let layer = build_lossy_layer(&LossyLayerSpec::constant(LayerVariant::Isotropic, [1.0; 4], eps), &capsule(eps)).unwrap();
        let m = layer.sample(&[-1.03, 0.0]).unwrap();
        assert!((m.sigma[0][0] - 0.0016).abs() < 1e-15 && (m.sigma[1][1] - 0.0016).abs() < 1e-15);
        assert!((m.q - Complex64::new(5.0, 5.0)).norm() < 1e-12);
    }

    #[test]
    fn mismatches_are_rejected() {
        let eps = 0.01;
        let c = capsule(eps);
        assert!(build_lossy_layer(&LossyLayerSpec::constant(LayerVariant::FullCloak, [1.0; 4], eps), &c).is_err());
        assert!(build_lossy_layer(&LossyLayerSpec::constant(LayerVariant::CLayer, [1.0; 4], 0.02), &c).is_err());
        let spec = LossyLayerSpec::<2> {
            c: [Coef::Const(1.0), Coef::Const(3.0), Coef::Const(1.0), Coef::Const(1.0)],
            lambda0: 0.5,
            big_lambda0: 2.0,
            ..LossyLayerSpec::constant(LayerVariant::CLayer, [1.0; 4], eps)
        };
        assert!(spec.check_bounds(&[[0.0, 0.0]]).is_err());
    }
}
