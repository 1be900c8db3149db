//! Pipeline configuration with per-dataset presets, loadable from TOML or
//! JSON.
//!
//! A file names a preset and overrides individual keys; keys it leaves out
//! take the preset's values.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, IoContext, Result};
use crate::fusion::DEFAULT_MIN_AREA;
use crate::lifting::{ThresholdMode, DEFAULT_MIN_SHARED};
use crate::masks::Modality;
use crate::postprocess::{default_lambda_grid, HoleMode};
use crate::render::camera::SUPPORTED_VIEW_COUNTS;
use crate::sdf::SdfParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Human-evaluation settings; also the fallback for unknown datasets.
    #[default]
    General,
    Coseg,
    /// Fixed ratio prefix, smoothing weight searched per mesh.
    Princeton,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::General, Preset::Coseg, Preset::Princeton];

    pub fn name(self) -> &'static str {
        match self {
            Preset::General => "general",
            Preset::Coseg => "coseg",
            Preset::Princeton => "princeton",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected general, coseg or princeton)"))
    }
}

/// Smoothing-weight search towards a target part count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LambdaSearch {
    /// Candidate weights, tried in ascending order.
    pub grid: Vec<f64>,
    /// Accepted distance from the target part count.
    pub margin: usize,
}

impl Default for LambdaSearch {
    fn default() -> Self {
        LambdaSearch {
            grid: default_lambda_grid(),
            margin: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub preset: Preset,
    pub n_views: usize,
    /// Square render size in pixels.
    pub resolution: u32,
    /// Vertical field of view in degrees.
    pub fov_degrees: f64,
    pub modalities: Vec<Modality>,
    /// Forwarded to the external mask generator.
    pub sam_iou_threshold: f64,
    /// Fused regions smaller than this many pixels are absorbed.
    pub min_mask_area: usize,
    /// Region pairs must share more than this many faces to be compared.
    pub min_shared_faces: usize,
    pub threshold: ThresholdMode,
    pub leiden_resolution: f64,
    /// Unlabeled components with at least this fraction of the faces
    /// become parts of their own.
    pub hole_fraction: f64,
    pub fill_iterations: usize,
    pub hole_mode: HoleMode,
    pub lambda: f64,
    /// When set, `lambda` is replaced by a search towards the target part
    /// count supplied with each mesh.
    pub lambda_search: Option<LambdaSearch>,
    pub sdf: SdfParams,
    pub baseline_k: usize,
    pub baseline_lambda: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            preset: Preset::General,
            n_views: 12,
            resolution: 1024,
            fov_degrees: 60.0,
            modalities: vec![Modality::Normal, Modality::SdfScalar],
            sam_iou_threshold: 0.5,
            min_mask_area: DEFAULT_MIN_AREA,
            min_shared_faces: DEFAULT_MIN_SHARED,
            threshold: ThresholdMode::Dynamic(0.125),
            leiden_resolution: 0.0,
            hole_fraction: 0.025,
            fill_iterations: 64,
            hole_mode: HoleMode::Promote,
            lambda: 6.0,
            lambda_search: None,
            sdf: SdfParams::default(),
            baseline_k: 5,
            baseline_lambda: 15.0,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    /// Defaults with the preset's overrides applied.
    pub fn preset(preset: Preset) -> Self {
        let base = PipelineConfig {
            preset,
            ..Default::default()
        };
        match preset {
            Preset::General => base,
            Preset::Coseg => PipelineConfig {
                threshold: ThresholdMode::Dynamic(0.05),
                baseline_k: 3,
                ..base
            },
            Preset::Princeton => PipelineConfig {
                threshold: ThresholdMode::Dynamic(0.35),
                lambda_search: Some(LambdaSearch::default()),
                ..base
            },
        }
    }

    /// Reads a `.toml` or `.json` file (by extension; other extensions are
    /// tried as TOML).
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_value(Self::read_value(path)?)
    }

    /// Config from an optional file with `key=value` overrides on top. Each
    /// value is TOML (`n_views=42`, `threshold={fixed=0.3}`); overrides may
    /// switch the preset.
    pub fn resolve(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match file {
            Some(path) => match Self::read_value(path)? {
                Value::Object(t) => t,
                _ => return Err(Error::InvalidConfig("configuration must be a table".into())),
            },
            None => serde_json::Map::new(),
        };
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("override `{item}` is not key=value")))?;
            let doc = format!("v = {}", value.trim());
            let parsed: Value = toml::from_str::<Value>(&doc)
                .or_else(|_| toml::from_str::<Value>(&format!("v = {:?}", value.trim())))
                .map_err(|e| Error::InvalidConfig(format!("override `{item}`: {e}")))?;
            table.insert(key.trim().to_string(), parsed["v"].clone());
        }
        Self::from_value(Value::Object(table))
    }

    fn read_value(path: &Path) -> Result<Value> {
        let text = fs::read_to_string(path).at(path)?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Ok(serde_json::from_str(&text)?)
        } else {
            toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: Value = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Self::from_value(value)
    }

    /// Overlays `overrides` (a JSON object) on the preset it names.
    pub fn from_value(overrides: Value) -> Result<Self> {
        let Value::Object(overrides) = overrides else {
            return Err(Error::InvalidConfig("configuration must be a table".into()));
        };
        let preset = match overrides.get("preset") {
            Some(p) => serde_json::from_value(p.clone())?,
            None => Preset::General,
        };
        let mut merged = serde_json::to_value(Self::preset(preset))?;
        let table = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in overrides {
            table.insert(k, v);
        }
        let cfg: PipelineConfig = serde_json::from_value(merged).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !SUPPORTED_VIEW_COUNTS.contains(&self.n_views) {
            return Err(Error::UnsupportedViewCount(self.n_views));
        }
        if self.resolution == 0 {
            return bad("resolution must be positive".into());
        }
        if !(self.fov_degrees > 0.0 && self.fov_degrees < 180.0) {
            return bad(format!("fov_degrees {} outside (0, 180)", self.fov_degrees));
        }
        if self.modalities.is_empty() {
            return bad("at least one modality is required".into());
        }
        let mut sorted = self.modalities.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.modalities.len() {
            return bad("modalities are listed more than once".into());
        }
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} {v} outside [0, 1]")))
            }
        };
        unit("sam_iou_threshold", self.sam_iou_threshold)?;
        unit("hole_fraction", self.hole_fraction)?;
        match self.threshold {
            ThresholdMode::Dynamic(p) => unit("dynamic threshold fraction", p)?,
            ThresholdMode::Fixed(t) => unit("fixed threshold", t)?,
        }
        if !(self.leiden_resolution >= 0.0) {
            return bad("leiden_resolution must be non-negative".into());
        }
        for (name, v) in [("lambda", self.lambda), ("baseline_lambda", self.baseline_lambda)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a non-negative number"));
            }
        }
        if let Some(search) = &self.lambda_search {
            if search.grid.is_empty() || search.grid.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
                return bad("lambda_search.grid must hold non-negative numbers".into());
            }
            if search.grid.windows(2).any(|w| w[0] >= w[1]) {
                return bad("lambda_search.grid must be strictly ascending".into());
            }
        }
        if self.baseline_k == 0 {
            return bad("baseline_k must be at least 1".into());
        }
        let s = &self.sdf;
        if s.rays_per_face == 0 || !(s.cone_half_angle > 0.0 && s.cone_half_angle < std::f64::consts::FRAC_PI_2) {
            return bad("sdf needs rays_per_face ≥ 1 and a cone half-angle in (0, π/2)".into());
        }
        unit("sdf.min_hit_rate", s.min_hit_rate)?;
        if !(s.alpha > 0.0) {
            return bad("sdf.alpha must be positive".into());
        }
        Ok(())
    }

    pub fn fov_radians(&self) -> f64 {
        self.fov_degrees.to_radians()
    }
}
