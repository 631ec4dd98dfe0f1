//! Pipeline hyperparameters and their on-disk `key = value` form.
//!
//! The file format is TOML restricted to one table per stage:
//!
//! ```text
//! [filter]
//! sigma_s = 10.0
//! sigma_c = 5.0
//! mu = 5.0
//!
//! [variance]
//! mu = 0.001
//! window = 8
//! ```
//!
//! Missing keys take their defaults, unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classes::default_foreground_classes;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilateralConfig {
    pub sigma_s: f64,
    pub sigma_c: f64,
    /// Weight of the color term relative to the semantic term.
    pub mu: f64,
    /// Window radius in pixels; `None` means `ceil(2 * sigma_s)`.
    pub window_radius: Option<usize>,
}

impl Default for BilateralConfig {
    fn default() -> Self {
        Self {
            sigma_s: 10.0,
            sigma_c: 5.0,
            mu: 5.0,
            window_radius: None,
        }
    }
}

impl BilateralConfig {
    pub fn radius(&self) -> usize {
        self.window_radius
            .unwrap_or_else(|| (2.0 * self.sigma_s).ceil() as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceConfig {
    /// Threshold on the variance of max-normalized depth.
    pub mu: f64,
    /// Side length of the square test window.
    pub window: usize,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        Self {
            mu: 0.001,
            window: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub steps: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Depth is clamped to at least this value (meters) after every step.
    pub depth_floor: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 5.0,
            steps: 1000,
            learning_rate: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            depth_floor: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// Image pixels per lattice cell along each axis.
    pub grid_downsample: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { grid_downsample: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    pub samples_per_pixel: u32,
    pub max_bounces: u32,
    pub ambient_radiance: [f64; 3],
    pub exposure: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            samples_per_pixel: 16,
            max_bounces: 2,
            ambient_radiance: [1e-3; 3],
            exposure: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Shot-noise coefficient (variance per unit signal).
    pub beta1: f64,
    /// Read-noise variance.
    pub beta2: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            beta1: 0.01,
            beta2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    /// Semantic train IDs treated as foreground.
    pub foreground_classes: Vec<u8>,
    /// Multiplier converting input depth units to meters.
    pub depth_scale: f64,
    /// Accepted deviation of input normal lengths from 1 before renormalization.
    pub normal_tolerance: f64,
    /// Working resolution; 0 keeps the input resolution.
    pub working_width: usize,
    pub working_height: usize,
    pub rng_seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            foreground_classes: default_foreground_classes(),
            depth_scale: 1.0,
            normal_tolerance: 1e-3,
            working_width: 0,
            working_height: 0,
            rng_seed: 0,
        }
    }
}

/// Every hyperparameter of the pipeline.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub scene: SceneConfig,
    pub filter: BilateralConfig,
    pub variance: VarianceConfig,
    pub refine: RefineConfig,
    pub mesh: MeshConfig,
    pub render: RenderConfig,
    pub noise: NoiseConfig,
}

/// Named hyperparameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Loss weights (1, 1, 5).
    Default,
    /// Loss weights (1, 5, 1), the grid-search result favouring continuity.
    ContinuityWeighted,
}

impl Profile {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Profile::Default),
            "continuity-weighted" => Ok(Profile::ContinuityWeighted),
            other => Err(Error::Config(format!("unknown profile '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Default => "default",
            Profile::ContinuityWeighted => "continuity-weighted",
        }
    }
}

impl PipelineConfig {
    pub fn from_profile(profile: Profile) -> Self {
        let mut cfg = Self::default();
        if profile == Profile::ContinuityWeighted {
            cfg.refine.lambda1 = 1.0;
            cfg.refine.lambda2 = 5.0;
            cfg.refine.lambda3 = 1.0;
        }
        cfg
    }

    pub fn is_foreground(&self, label: u8) -> bool {
        self.scene.foreground_classes.contains(&label)
    }

    /// Lookup table over all 256 label values.
    pub fn foreground_table(&self) -> [bool; 256] {
        let mut t = [false; 256];
        for &c in &self.scene.foreground_classes {
            t[c as usize] = true;
        }
        t
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("filter.sigma_s", self.filter.sigma_s),
            ("filter.sigma_c", self.filter.sigma_c),
            ("filter.mu", self.filter.mu),
            ("variance.mu", self.variance.mu),
            ("refine.lambda1", self.refine.lambda1),
            ("refine.lambda2", self.refine.lambda2),
            ("refine.lambda3", self.refine.lambda3),
            ("refine.learning_rate", self.refine.learning_rate),
            ("noise.beta1", self.noise.beta1),
            ("noise.beta2", self.noise.beta2),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.filter.sigma_s == 0.0 || self.filter.sigma_c == 0.0 {
            return Err(Error::Config("filter sigmas must be positive".into()));
        }
        if self.variance.window == 0 {
            return Err(Error::Config("variance.window must be >= 1".into()));
        }
        if !(self.refine.adam_beta1 >= 0.0 && self.refine.adam_beta1 < 1.0)
            || !(self.refine.adam_beta2 >= 0.0 && self.refine.adam_beta2 < 1.0)
        {
            return Err(Error::Config("adam betas must lie in [0, 1)".into()));
        }
        if !(self.refine.adam_epsilon > 0.0 && self.refine.depth_floor > 0.0) {
            return Err(Error::Config("adam_epsilon and depth_floor must be positive".into()));
        }
        if self.mesh.grid_downsample == 0 {
            return Err(Error::Config("mesh.grid_downsample must be >= 1".into()));
        }
        if self.render.samples_per_pixel == 0 {
            return Err(Error::Config("render.samples_per_pixel must be >= 1".into()));
        }
        if self.render.ambient_radiance.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::Config("render.ambient_radiance must be >= 0".into()));
        }
        if !(self.render.exposure > 0.0) {
            return Err(Error::Config("render.exposure must be positive".into()));
        }
        if !(self.scene.depth_scale > 0.0) {
            return Err(Error::Config("scene.depth_scale must be positive".into()));
        }
        Ok(())
    }

    /// Checks that the lattice downsample divides the working resolution.
    pub fn validate_resolution(&self, width: usize, height: usize) -> Result<()> {
        let k = self.mesh.grid_downsample;
        if !width.is_multiple_of(k) || !height.is_multiple_of(k) {
            return Err(Error::Config(format!(
                "grid_downsample {k} does not divide working resolution {width}x{height}"
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies a partial config on top of `self`: keys present in `text`
    /// replace the current values, everything else is kept.
    pub fn overlay(&self, text: &str) -> Result<Self> {
        let patch: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        self.overlay_table(&patch)
    }

    pub fn overlay_table(&self, patch: &toml::Table) -> Result<Self> {
        let mut base = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, patch);
        let cfg: Self = toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

fn merge(base: &mut toml::Table, patch: &toml::Table) {
    for (k, v) in patch {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(p)) => merge(b, p),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}
