//! Scenario configuration: one JSON document, angles in degrees.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::{AxisBox, ShapeParams};
use crate::materials::{
    assemble_physical_scenario, CloakKind, CloakParams, CloakedContents, LayerVariant, LossyLayerSpec, MaterialField, MaterialSample, ObstacleSpec, Scenario,
    Shape, SourceSpec,
};
use crate::solver::HardTreatment;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub cloak: CloakConfig,
    #[serde(default)]
    pub layer: LayerConfig,
    pub wave: WaveConfig,
    #[serde(default)]
    pub contents: ContentsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloakConfig {
    pub kind: CloakKind,
    #[serde(default)]
    pub shape: ShapeParams,
    #[serde(default = "one")]
    pub r1: f64,
    #[serde(default = "two")]
    pub r2: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Sweeps set the shape parameter a to ε as well.
    #[serde(default)]
    pub a_tracks_eps: bool,
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_eps() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    /// Defaults to the variant matching the cloak kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<LayerVariant>,
    #[serde(default = "unit_c")]
    pub c: [f64; 4],
}

fn unit_c() -> [f64; 4] {
    [1.0; 4]
}

impl Default for LayerConfig {
    fn default() -> Self {
        Self { variant: None, c: unit_c() }
    }
}

/// Exactly one of `k` and `l_e` (wavelength, k = 2π/l_e).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_e: Option<f64>,
    /// Incident directions in degrees from the x-axis.
    pub incident_deg: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum ShapeConfig {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Box {
        lo: [f64; 2],
        hi: [f64; 2],
    },
    /// Flat screen on x[normal_axis] = offset, spanning [lo, hi] along the other axis.
    Screen {
        normal_axis: usize,
        offset: f64,
        lo: f64,
        hi: f64,
    },
}

impl ShapeConfig {
    pub fn to_shape(&self) -> Result<Shape<2>, HarnessError> {
        Ok(match *self {
            ShapeConfig::Disk { center, radius } => {
                if !(radius > 0.0) {
                    return Err(HarnessError::Config(format!("disk radius {radius} must be positive")));
                }
                Shape::Disk { center, radius }
            }
            ShapeConfig::Box { lo, hi } => Shape::Box(AxisBox::new(lo, hi).map_err(|e| HarnessError::Config(e.to_string()))?),
            ShapeConfig::Screen { normal_axis, offset, lo, hi } => {
                if normal_axis > 1 || !(lo < hi) {
                    return Err(HarnessError::Config(format!("screen needs normal_axis in {{0, 1}} and lo < hi, got {normal_axis}, [{lo}, {hi}]")));
                }
                let t = 1 - normal_axis;
                let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
                a[normal_axis] = offset;
                b[normal_axis] = offset;
                a[t] = lo;
                b[t] = hi;
                Shape::Screen { normal_axis, offset, span: AxisBox { lo: a, hi: b } }
            }
        })
    }

    fn region(&self) -> Result<(AxisBox<2>, Arc<dyn Fn(&[f64; 2]) -> bool + Send + Sync>), HarnessError> {
        let s = self.to_shape()?;
        if s.is_thin() {
            return Err(HarnessError::Config("media and sources need a region with interior".into()));
        }
        let bbox = s.bounding_box();
        Ok((bbox, Arc::new(move |x| s.contains(x))))
    }
}

/// Constant medium on a disk or box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub region: ShapeConfig,
    pub sigma: [[f64; 2]; 2],
    /// [Re q, Im q].
    pub q: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKindConfig {
    Hard,
    Soft,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub kind: ObstacleKindConfig,
    pub shape: ShapeConfig,
}

/// Constant h and/or H on a region; complex values as [re, im].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub region: ShapeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_h: Option<[[f64; 2]; 2]>,
}

/// For a cloak these sit inside the cloaked region; without one they are the
/// whole scene.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentsConfig {
    #[serde(default)]
    pub media: Vec<MediumConfig>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceChoice {
    /// Virtual when ε is below four cells, physical otherwise.
    #[default]
    Auto,
    Physical,
    Virtual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points per wavelength: Δ = λ/ppw.
    #[serde(default = "default_ppw")]
    pub ppw: f64,
    /// Defaults to one wavelength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pml_cells: Option<usize>,
    #[serde(default)]
    pub space: SpaceChoice,
    /// Cells per ε in the refined zones of a virtual grid.
    #[serde(default = "default_eps_cells")]
    pub eps_cells: f64,
    /// Gap in cells between the scatterer and the extraction circle.
    #[serde(default = "default_margin")]
    pub margin_cells: f64,
    #[serde(default = "default_subsamples")]
    pub subsamples: usize,
    #[serde(default)]
    pub hard: HardTreatment,
    #[serde(default = "default_circle_points")]
    pub circle_points: usize,
}

fn default_ppw() -> f64 {
    30.0
}
fn default_eps_cells() -> f64 {
    16.0
}
fn default_margin() -> f64 {
    3.0
}
fn default_subsamples() -> usize {
    2
}
fn default_circle_points() -> usize {
    512
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            ppw: default_ppw(),
            pml_cells: None,
            space: SpaceChoice::Auto,
            eps_cells: default_eps_cells(),
            margin_cells: default_margin(),
            subsamples: default_subsamples(),
            hard: HardTreatment::CutCell,
            circle_points: default_circle_points(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dirs")]
    pub n_dirs: usize,
    /// Write scattered fields as `.cfld` dumps.
    #[serde(default)]
    pub field_dump: bool,
}

fn default_dirs() -> usize {
    100
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { n_dirs: default_dirs(), field_dump: false }
    }
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical form: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn k(&self) -> f64 {
        match (self.wave.k, self.wave.l_e) {
            (Some(k), _) => k,
            (None, Some(l)) => 2.0 * PI / l,
            (None, None) => f64::NAN,
        }
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k()
    }

    /// Δ = λ/ppw.
    pub fn delta(&self) -> f64 {
        self.wavelength() / self.grid.ppw
    }

    pub fn layer_variant(&self) -> LayerVariant {
        self.layer.variant.unwrap_or(match self.cloak.kind {
            CloakKind::Full => LayerVariant::FullCloak,
            CloakKind::D => LayerVariant::DLayer,
            CloakKind::E => LayerVariant::ELayer,
            CloakKind::C | CloakKind::None => LayerVariant::CLayer,
        })
    }

    /// Copy with ε replaced (and a, when it tracks ε).
    pub fn with_eps(&self, eps: f64) -> Self {
        let mut c = self.clone();
        c.cloak.eps = eps;
        if c.cloak.a_tracks_eps {
            c.cloak.shape.a = eps;
        }
        c
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        match (self.wave.k, self.wave.l_e) {
            (Some(k), None) if k > 0.0 && k.is_finite() => {}
            (None, Some(l)) if l > 0.0 && l.is_finite() => {}
            _ => return bad("wave needs exactly one positive k or l_e".into()),
        }
        if self.wave.incident_deg.is_empty() || self.wave.incident_deg.iter().any(|a| !a.is_finite()) {
            return bad("incident_deg needs at least one finite angle".into());
        }
        if !(self.grid.ppw >= 4.0) || !(self.grid.eps_cells >= 1.0) || !(self.grid.margin_cells >= 2.0) {
            return bad("grid needs ppw ≥ 4, eps_cells ≥ 1 and margin_cells ≥ 2".into());
        }
        if self.grid.subsamples == 0 || self.grid.circle_points < 16 || self.outputs.n_dirs == 0 {
            return bad("subsamples, circle_points ≥ 16 and n_dirs must be positive".into());
        }
        if self.layer_variant() == LayerVariant::Custom {
            return bad("the custom layer variant has no configuration form".into());
        }
        if self.cloak.kind != CloakKind::None {
            let c = &self.cloak;
            if !(0.0 < c.eps && c.eps <= c.r1 && c.r1 < c.r2) {
                return bad(format!("need 0 < ε ≤ r1 < r2, got ε={}, r1={}, r2={}", c.eps, c.r1, c.r2));
            }
            if !matches!(c.kind, CloakKind::Full | CloakKind::C) {
                return bad(format!("{:?} cloaks are three-dimensional; the solver is 2D", c.kind));
            }
        }
        if self.layer.c.iter().any(|v| !(*v > 0.0)) {
            return bad("layer constants must be positive".into());
        }
        for m in &self.contents.media {
            m.region.region()?;
        }
        for o in &self.contents.obstacles {
            o.shape.to_shape()?;
        }
        if let Some(s) = &self.contents.source {
            s.region.region()?;
            if s.h.is_none() && s.big_h.is_none() {
                return bad("a source needs h or big_h".into());
            }
        }
        Ok(())
    }

    pub fn cloak_params(&self) -> CloakParams {
        CloakParams { kind: self.cloak.kind, shape: self.cloak.shape.clone(), r1: self.cloak.r1, r2: self.cloak.r2, eps: self.cloak.eps }
    }

    fn contents(&self) -> Result<CloakedContents<2>, HarnessError> {
        let patches = self
            .contents
            .media
            .iter()
            .map(|m| {
                let (bbox, region) = m.region.region()?;
                Ok((bbox, region, MaterialSample { sigma: m.sigma, q: complex(m.q) }))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let medium = match patches.split_first() {
            None => MaterialField::background(),
            Some((first, rest)) => {
                let support = rest.iter().fold(first.0, |b, p| b.union(&p.0));
                MaterialField::from_fn("contents", Some(support), move |x| {
                    Ok(patches.iter().find(|p| p.0.contains(x) && (p.1)(x)).map_or(MaterialSample::background(), |p| p.2))
                })
            }
        };
        let obstacles = self
            .contents
            .obstacles
            .iter()
            .map(|o| {
                let shape = o.shape.to_shape()?;
                Ok(match o.kind {
                    ObstacleKindConfig::Hard => ObstacleSpec::sound_hard(shape),
                    ObstacleKindConfig::Soft => ObstacleSpec::sound_soft(shape),
                })
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let source = match &self.contents.source {
            None => None,
            Some(s) => {
                let (support, region) = s.region.region()?;
                let h = s.h.map(|v| {
                    let v = complex(v);
                    Arc::new(move |_: &[f64; 2]| v) as crate::materials::ScalarFn<2>
                });
                let big_h = s.big_h.map(|v| {
                    let v = [complex(v[0]), complex(v[1])];
                    Arc::new(move |_: &[f64; 2]| v) as crate::materials::VectorFn<2>
                });
                Some(SourceSpec { h, big_h, region, support })
            }
        };
        Ok(CloakedContents { medium, obstacles, source, lambda0: self.contents.lambda0 })
    }

    /// The scenario in physical space, checked for admissibility.
    pub fn build_physical(&self) -> Result<Scenario<2>, HarnessError> {
        self.validate()?;
        let layer = LossyLayerSpec::constant(self.layer_variant(), self.layer.c, self.cloak.eps);
        Ok(assemble_physical_scenario(&self.cloak_params(), &layer, self.contents()?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"cloak": {"kind": "C"}, "wave": {"l_e": 2.0, "incident_deg": [0, 5.5]}}"#;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = ScenarioConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.cloak.r2, 2.0);
        assert_eq!(cfg.layer_variant(), LayerVariant::CLayer);
        assert!((cfg.k() - PI).abs() < 1e-15);
        let text = cfg.to_json();
        let again = ScenarioConfig::from_json(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_json(), text);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_waves() {
        let extra = MINIMAL.replace("\"kind\": \"C\"", "\"kind\": \"C\", \"colour\": 1");
        assert!(ScenarioConfig::from_json(&extra).is_err());
        let both = MINIMAL.replace("\"l_e\": 2.0", "\"l_e\": 2.0, \"k\": 3.0");
        assert!(matches!(ScenarioConfig::from_json(&both), Err(HarnessError::Config(_))));
    }

    #[test]
    fn contents_outside_sigma_are_inadmissible() {
        let mut cfg = ScenarioConfig::from_json(MINIMAL).unwrap();
        cfg.contents.obstacles.push(ObstacleConfig { kind: ObstacleKindConfig::Hard, shape: ShapeConfig::Disk { center: [0.0, 0.0], radius: 1.5 } });
        assert!(matches!(cfg.build_physical(), Err(HarnessError::Admissibility(_))));
        cfg.contents.obstacles[0].shape = ShapeConfig::Disk { center: [0.0, 0.0], radius: 0.2 };
        assert!(cfg.build_physical().is_ok());
    }
}
