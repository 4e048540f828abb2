//! Cloak assembly in physical space and its pull-back to virtual space.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lossy::{build_lossy_layer, LossyLayerSpec};
use super::obstacle::{ObstacleKind, ObstacleSpec, Shape};
use super::{check_sample_regular, image_box, push_forward_medium, push_forward_source, MaterialError, MaterialField, MaterialSample, SourceSpec};
use crate::geometry::{AbcGeometry, AxisBox, GeometryKind, ShapeFamily, ShapeParams};
use crate::linalg::{self, Point};
use crate::transforms::{build_abc_map, PiecewiseMap, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CloakKind {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "full")]
    Full,
    C,
    D,
    E,
}

impl CloakKind {
    pub fn geometry_kind(self) -> Option<GeometryKind> {
        match self {
            CloakKind::None => None,
            CloakKind::Full => Some(GeometryKind::PointNbhd),
            CloakKind::C => Some(GeometryKind::C),
            CloakKind::D => Some(GeometryKind::D),
            CloakKind::E => Some(GeometryKind::E),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloakParams {
    pub kind: CloakKind,
    #[serde(default)]
    pub shape: ShapeParams,
    pub r1: f64,
    pub r2: f64,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Physical,
    Virtual,
}

/// What sits inside the cloaked region Σ, in physical coordinates.
#[derive(Clone, Debug)]
pub struct CloakedContents<const N: usize> {
    pub medium: MaterialField<N>,
    pub obstacles: Vec<ObstacleSpec<N>>,
    pub source: Option<SourceSpec<N>>,
    /// Absorption floor required where h ≠ 0; defaults to the layer's λ₀.
    pub lambda0: Option<f64>,
}

impl<const N: usize> Default for CloakedContents<N> {
    fn default() -> Self {
        Self { medium: MaterialField::background(), obstacles: Vec::new(), source: None, lambda0: None }
    }
}

/// A medium restricted to `region`. The first layer containing a point wins.
#[derive(Clone)]
pub struct Layer<const N: usize> {
    pub name: String,
    pub region: Region<N>,
    pub field: MaterialField<N>,
    pub bbox: Option<AxisBox<N>>,
}

impl<const N: usize> fmt::Debug for Layer<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Layer").field("name", &self.name).field("bbox", &self.bbox).finish()
    }
}

impl<const N: usize> Layer<N> {
    pub fn contains(&self, x: &Point<N>) -> bool {
        self.bbox.is_none_or(|b| b.contains(x)) && (self.region)(x)
    }
}

#[derive(Clone, Debug)]
pub struct CloakInfo<const N: usize> {
    pub params: CloakParams,
    pub map: Arc<PiecewiseMap<N>>,
    pub layer: LossyLayerSpec<N>,
    /// K_{r2}, K_{r1}, K_{r1/2} (physical) and K_ε, K_{ε/2} (virtual).
    pub outer: AbcGeometry<N>,
    pub inner: AbcGeometry<N>,
    pub sigma_region: AbcGeometry<N>,
    pub k_eps: AbcGeometry<N>,
    pub k_half: AbcGeometry<N>,
}

#[derive(Clone, Debug)]
pub struct Scenario<const N: usize> {
    pub space: Space,
    pub kind: CloakKind,
    pub layers: Vec<Layer<N>>,
    pub obstacles: Vec<ObstacleSpec<N>>,
    pub source: Option<SourceSpec<N>>,
    pub cloak: Option<CloakInfo<N>>,
}

impl<const N: usize> Scenario<N> {
    /// A scenario without a cloak: `medium` everywhere, background outside its support.
    pub fn uncloaked(medium: MaterialField<N>, obstacles: Vec<ObstacleSpec<N>>, source: Option<SourceSpec<N>>) -> Self {
        let bbox = medium.support().copied();
        let layer = Layer { name: "medium".into(), region: Arc::new(|_| true), field: medium, bbox };
        Self { space: Space::Physical, kind: CloakKind::None, layers: vec![layer], obstacles, source, cloak: None }
    }

    pub fn free_space() -> Self {
        Self::uncloaked(MaterialField::background(), Vec::new(), None)
    }

    pub fn sample(&self, x: &Point<N>) -> Result<MaterialSample<N>, MaterialError> {
        match self.layers.iter().find(|l| l.contains(x)) {
            Some(l) => l.field.sample(x),
            None => Ok(MaterialSample::background()),
        }
    }

    /// All layers combined into one field.
    pub fn medium(&self) -> MaterialField<N> {
        let mut support: Option<AxisBox<N>> = None;
        let mut bounded = true;
        for l in &self.layers {
            match (l.bbox, l.field.support()) {
                (Some(b), _) | (None, Some(&b)) => support = Some(support.map_or(b, |s| s.union(&b))),
                (None, None) => bounded = false,
            }
        }
        let me = self.clone();
        MaterialField::from_fn("scenario", if bounded { support } else { None }, move |x| me.sample(x))
    }

    /// Box containing everything that scatters, if bounded.
    pub fn scatterer_box(&self) -> Option<AxisBox<N>> {
        let mut acc: Option<AxisBox<N>> = None;
        let mut add = |b: AxisBox<N>| acc = Some(acc.map_or(b, |a| a.union(&b)));
        for l in &self.layers {
            match (l.bbox, l.field.support()) {
                (Some(b), _) | (None, Some(&b)) => {
                    if b.lo != b.hi {
                        add(b)
                    }
                }
                (None, None) => return None,
            }
        }
        for o in &self.obstacles {
            add(o.shape.bounding_box());
        }
        if let Some(s) = &self.source {
            add(s.support);
        }
        acc
    }

    /// Radius about the origin of a disk holding every scatterer: exact for
    /// disk obstacles, sampled on a 161-point-per-axis grid otherwise.
    pub fn scatterer_radius(&self) -> Option<f64> {
        let corner_reach = |b: &AxisBox<N>| {
            (0..1usize << N).map(|m| (0..N).map(|l| if m >> l & 1 == 1 { b.hi[l] } else { b.lo[l] }).map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max)
        };
        let sampled = |b: &AxisBox<N>, inside: &dyn Fn(&Point<N>) -> bool| {
            let n = 161;
            let h = (0..N).map(|l| (b.hi[l] - b.lo[l]) / (n - 1) as f64).fold(0.0, f64::max);
            let r = box_grid(b, n).iter().filter(|x| inside(x)).map(linalg::norm2).fold(0.0, f64::max);
            (r + h * (N as f64).sqrt()).min(corner_reach(b))
        };
        let mut reach: f64 = 0.0;
        for l in &self.layers {
            let b = match (l.bbox, l.field.support()) {
                (Some(b), _) | (None, Some(&b)) => b,
                (None, None) => return None,
            };
            if b.lo == b.hi {
                continue;
            }
            reach = reach.max(sampled(&b, &|x| l.contains(x) && l.field.sample(x).map(|m| !m.is_background(1e-12)).unwrap_or(true)));
        }
        for o in &self.obstacles {
            reach = reach.max(match &o.shape {
                Shape::Disk { center, radius } => linalg::norm2(center) + radius,
                sh if sh.is_thin() => corner_reach(&sh.bounding_box()),
                sh => sampled(&sh.bounding_box(), &|x| sh.contains(x)),
            });
        }
        if let Some(s) = &self.source {
            reach = reach.max(corner_reach(&s.support));
        }
        Some(reach)
    }

    pub fn has_impedance(&self) -> bool {
        self.obstacles.iter().any(|o| matches!(o.kind, ObstacleKind::Impedance(_)))
    }
}

#[derive(Debug, Error)]
pub enum AdmissibilityError {
    #[error("clause i: {0} must lie inside the cloaked region")]
    ContentsOutside(String),
    #[error("clause iii: a source h without H needs Im q ≥ {floor}, found {im_q} at {at:?}")]
    SourceWithoutAbsorption { at: Vec<f64>, im_q: f64, floor: f64 },
    #[error("clause iv: {reason} at {at:?}")]
    MixedSourceBounds { at: Vec<f64>, reason: String },
    #[error("cloak parameters: {0}")]
    Parameters(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
}

impl AdmissibilityError {
    /// The admissibility clause that failed, when one applies.
    pub fn clause(&self) -> Option<&'static str> {
        match self {
            Self::ContentsOutside(_) => Some("i"),
            Self::SourceWithoutAbsorption { .. } => Some("iii"),
            Self::MixedSourceBounds { .. } => Some("iv"),
            _ => None,
        }
    }
}

/// Grid of points in `b`, `n` per axis.
pub(crate) fn box_grid<const N: usize>(b: &AxisBox<N>, n: usize) -> Vec<Point<N>> {
    let total = n.pow(N as u32);
    (0..total)
        .map(|mut idx| {
            std::array::from_fn(|l| {
                let i = idx % n;
                idx /= n;
                if n == 1 {
                    0.5 * (b.lo[l] + b.hi[l])
                } else {
                    b.lo[l] + (b.hi[l] - b.lo[l]) * i as f64 / (n - 1) as f64
                }
            })
        })
        .collect()
}

fn shape_samples<const N: usize>(shape: &Shape<N>) -> Vec<Point<N>> {
    let pts = box_grid(&shape.bounding_box(), 33);
    if shape.is_thin() {
        return pts;
    }
    pts.into_iter().filter(|x| shape.contains(x)).collect()
}

/// Assembles the physical cloak around `contents`: pushed (I, 1) on the
/// outer shell, pushed lossy layer on K_{r1} \ K_{r1/2}, contents inside
/// Σ = K_{r1/2}, background outside.
pub fn assemble_physical_scenario<const N: usize>(
    params: &CloakParams,
    layer: &LossyLayerSpec<N>,
    contents: CloakedContents<N>,
) -> Result<Scenario<N>, AdmissibilityError>
where
    AbcGeometry<N>: ShapeFamily,
{
    let Some(gkind) = params.kind.geometry_kind() else {
        return Ok(Scenario::uncloaked(contents.medium, contents.obstacles, contents.source));
    };
    if !(0.0 < params.eps && params.eps <= params.r1 && params.r1 < params.r2) {
        return Err(AdmissibilityError::Parameters(format!("need 0 < ε ≤ r1 < r2, got ε={}, r1={}, r2={}", params.eps, params.r1, params.r2)));
    }
    if (layer.eps - params.eps).abs() > 1e-12 * params.eps {
        return Err(AdmissibilityError::Parameters(format!("layer ε {} differs from cloak ε {}", layer.eps, params.eps)));
    }
    let fam = |r: f64| AbcGeometry::<N>::family(gkind, &params.shape, r).map_err(MaterialError::from);
    let outer = fam(params.r2)?;
    let inner = fam(params.r1)?;
    let sigma_region = fam(0.5 * params.r1)?;
    let k_eps = fam(params.eps)?;
    let k_half = fam(0.5 * params.eps)?;
    let map = Arc::new(build_abc_map(&outer, params.r1, params.eps).map_err(MaterialError::from)?);

    for (i, o) in contents.obstacles.iter().enumerate() {
        if let Some(x) = shape_samples(&o.shape).into_iter().find(|x| !sigma_region.contains(x)) {
            return Err(AdmissibilityError::ContentsOutside(format!("obstacle {i} ({:?}) at {x:?}", o.shape)));
        }
    }
    let floor = contents.lambda0.unwrap_or(layer.lambda0);
    if let Some(src) = &contents.source {
        let pts: Vec<Point<N>> = box_grid(&src.support, 33).into_iter().filter(|x| src.in_support(x)).collect();
        if let Some(x) = pts.iter().find(|x| !sigma_region.contains(x)) {
            return Err(AdmissibilityError::ContentsOutside(format!("source support at {x:?}")));
        }
        if src.has_h() && !src.has_big_h() {
            for x in pts.iter().filter(|x| src.h_at(x).norm() > 0.0) {
                let im = contents.medium.sample(x)?.q.im;
                if im < floor {
                    return Err(AdmissibilityError::SourceWithoutAbsorption { at: x.to_vec(), im_q: im, floor });
                }
            }
        }
        if src.has_h() && src.has_big_h() {
            let hi = contents.lambda0.map_or(layer.big_lambda0, |_| f64::INFINITY).max(floor);
            for x in box_grid(&sigma_region.bounding_box(), 33).iter().filter(|x| sigma_region.contains(x)) {
                let q = contents.medium.sample(x)?.q;
                if q.im < floor || q.re < floor || q.im > hi || q.re > hi {
                    return Err(AdmissibilityError::MixedSourceBounds { at: x.to_vec(), reason: format!("q = {q} outside [{floor}, {hi}]") });
                }
            }
            for x in pts.iter().filter(|x| src.big_h_at(x).iter().any(|v| v.norm() > 0.0)) {
                let ev = linalg::sym_eigenvalues(&contents.medium.sample(x)?.sigma);
                if ev[0] < floor {
                    return Err(AdmissibilityError::MixedSourceBounds { at: x.to_vec(), reason: format!("σ eigenvalue {} < {floor}", ev[0]) });
                }
            }
        }
    }
    for x in box_grid(&sigma_region.bounding_box(), 17).iter().filter(|x| sigma_region.contains(x)) {
        if contents.obstacles.iter().any(|o| o.shape.contains(x)) {
            continue;
        }
        check_sample_regular(x, &contents.medium.sample(x)?, 1e-12)?;
    }

    let lossy_virtual = build_lossy_layer(layer, &k_eps)?;
    let region = |g: &AbcGeometry<N>| -> Region<N> {
        let g = g.clone();
        Arc::new(move |x| g.contains(x))
    };
    let layers = vec![
        Layer { name: "contents".into(), region: region(&sigma_region), field: contents.medium.clone(), bbox: Some(sigma_region.bounding_box()) },
        Layer { name: "lossy".into(), region: region(&inner), field: push_forward_medium(&map, &lossy_virtual)?, bbox: Some(inner.bounding_box()) },
        Layer {
            name: "cloak".into(),
            region: region(&outer),
            field: push_forward_medium(&map, &MaterialField::constant(linalg::identity(), MaterialSample::<N>::background().q))?,
            bbox: Some(outer.bounding_box()),
        },
    ];
    Ok(Scenario {
        space: Space::Physical,
        kind: params.kind,
        layers,
        obstacles: contents.obstacles,
        source: contents.source,
        cloak: Some(CloakInfo { params: params.clone(), map, layer: layer.clone(), outer, inner, sigma_region, k_eps, k_half }),
    })
}

/// Virtual scenario: the pull-back of `s`, with the outer shell checked to be
/// background on a sample grid and then dropped.
pub fn virtual_scenario<const N: usize>(s: &Scenario<N>) -> Result<Scenario<N>, MaterialError> {
    let mut v = pull_back(s)?;
    let Some(info) = &v.cloak else { return Ok(v) };
    if let Some(pos) = v.layers.iter().position(|l| l.name == "cloak") {
        let shell = &v.layers[pos];
        let outer = &info.outer;
        for x in box_grid(&outer.bounding_box(), 41).iter().filter(|x| outer.contains(x) && !info.k_eps.contains(x)) {
            if shell.contains(x) {
                let m = shell.field.sample(x)?;
                if !m.is_background(1e-10) {
                    return Err(MaterialError::NotRegular { at: x.to_vec(), reason: format!("pulled-back shell is not background: {m:?}") });
                }
            }
        }
        v.layers.remove(pos);
    }
    Ok(v)
}

/// Pulls every layer, obstacle and source back through the cloak map.
pub fn pull_back<const N: usize>(s: &Scenario<N>) -> Result<Scenario<N>, MaterialError> {
    let Some(info) = &s.cloak else {
        return Ok(Scenario { space: Space::Virtual, ..s.clone() });
    };
    if s.space == Space::Virtual {
        return Ok(s.clone());
    }
    let inv = Arc::new(info.map.inverse());
    let mut layers = Vec::with_capacity(s.layers.len());
    for l in &s.layers {
        let (map, region) = (info.map.clone(), l.region.clone());
        let bbox = match l.name.as_str() {
            "contents" => Some(info.k_half.bounding_box()),
            "lossy" => Some(info.k_eps.bounding_box()),
            _ => match l.bbox {
                Some(b) => Some(image_box(&inv, &b)?),
                None => None,
            },
        };
        layers.push(Layer {
            name: l.name.clone(),
            region: Arc::new(move |x| map.eval(x).map(|y| region(&y)).unwrap_or(false)),
            field: push_forward_medium(&inv, &l.field)?,
            bbox,
        });
    }
    let obstacles = s.obstacles.iter().map(|o| o.mapped(&inv)).collect::<Result<Vec<_>, _>>()?;
    let source = match &s.source {
        Some(src) => Some(push_forward_source(&inv, src)?),
        None => None,
    };
    Ok(Scenario { space: Space::Virtual, kind: s.kind, layers, obstacles, source, cloak: s.cloak.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::LayerVariant;
    use num_complex::Complex64;

    fn c_params(eps: f64) -> CloakParams {
        CloakParams { kind: CloakKind::C, shape: ShapeParams::default(), r1: 1.0, r2: 2.0, eps }
    }

    fn full_params(eps: f64) -> CloakParams {
        CloakParams { kind: CloakKind::Full, shape: ShapeParams::default(), r1: 1.0, r2: 2.0, eps }
    }

    #[test]
    fn empty_full_cloak_is_valid() {
        let p = full_params(0.04);
        let s = assemble_physical_scenario::<2>(&p, &LossyLayerSpec::constant(LayerVariant::FullCloak, [1.0; 4], 0.04), CloakedContents::default()).unwrap();
        assert_eq!(s.layers.len(), 3);
        // Outside the cloak the medium is background.
        assert!(s.sample(&[2.5, 0.0]).unwrap().is_background(0.0));
        // In the shell it is anisotropic.
        let m = s.sample(&[1.5, 0.0]).unwrap();
        assert!(m.sigma[1][1] > 1.0 && m.sigma[0][0] < 1.0);
    }

    #[test]
    fn hard_disk_in_c_cloak() {
        let p = c_params(0.01);
        let contents = CloakedContents::<2> { obstacles: vec![ObstacleSpec::sound_hard(Shape::Disk { center: [0.0; 2], radius: 0.2 })], ..Default::default() };
        let s = assemble_physical_scenario(&p, &LossyLayerSpec::constant(LayerVariant::CLayer, [1.0; 4], 0.01), contents).unwrap();
        let v = virtual_scenario(&s).unwrap();
        // The virtual obstacle is the preimage of the disk.
        assert!(v.obstacles[0].shape.contains(&[0.0, 0.0019]));
        assert!(!v.obstacles[0].shape.contains(&[0.0, 0.0021]));
        assert!(v.obstacles[0].shape.contains(&[0.19, 0.0]));
    }

    #[test]
    fn oversized_obstacle_is_rejected() {
        let p = c_params(0.01);
        let contents = CloakedContents::<2> { obstacles: vec![ObstacleSpec::sound_hard(Shape::Disk { center: [0.0; 2], radius: 0.7 })], ..Default::default() };
        let err = assemble_physical_scenario(&p, &LossyLayerSpec::constant(LayerVariant::CLayer, [1.0; 4], 0.01), contents).unwrap_err();
        assert_eq!(err.clause(), Some("i"));
    }

    #[test]
    fn source_without_absorption_is_rejected() {
        let p = c_params(0.01);
        let src = SourceSpec::<2> {
            h: Some(Arc::new(|_| Complex64::new(1.0, 0.0))),
            big_h: None,
            region: Arc::new(|x| linalg::norm2(x) <= 0.1),
            support: AxisBox { lo: [-0.1, -0.1], hi: [0.1, 0.1] },
        };
        let contents = CloakedContents::<2> { source: Some(src.clone()), ..Default::default() };
        let layer = LossyLayerSpec::constant(LayerVariant::CLayer, [1.0; 4], 0.01);
        let err = assemble_physical_scenario(&p, &layer, contents).unwrap_err();
        assert_eq!(err.clause(), Some("iii"));
        let lossy = MaterialField::constant(linalg::identity(), Complex64::new(1.0, 1.0));
        let ok = CloakedContents::<2> { source: Some(src), medium: lossy, ..Default::default() };
        assert!(assemble_physical_scenario(&p, &layer, ok).is_ok());
    }

    #[test]
    fn virtual_shell_is_background() {
        let p = full_params(0.04);
        let s = assemble_physical_scenario::<2>(&p, &LossyLayerSpec::constant(LayerVariant::FullCloak, [1.0; 4], 0.04), CloakedContents::default()).unwrap();
        let v = pull_back(&s).unwrap();
        for i in 0..100 {
            let t = i as f64 * 0.0628;
            let r = 0.05 + 1.9 * i as f64 / 100.0;
            let m = v.sample(&[r * t.cos(), r * t.sin()]).unwrap();
            assert!(m.is_background(1e-10), "{r} {m:?}");
        }
        // The lossy layer comes back to its virtual formula.
        let m = v.sample(&[0.03, 0.0]).unwrap();
        assert!((m.sigma[0][0] - 0.0016).abs() < 1e-12);
        assert!((m.q - Complex64::new(25.0, 25.0)).norm() < 1e-9);
        let v = virtual_scenario(&s).unwrap();
        assert_eq!(v.layers.len(), 2);
        let b = v.scatterer_box().unwrap();
        assert!(b.hi[0] <= 0.04 + 1e-12);
    }
}
