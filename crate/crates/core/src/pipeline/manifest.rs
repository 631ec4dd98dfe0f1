//! Job manifests: which files to read, which camera, which stages to run.
//!
//! ```toml
//! [inputs]
//! rgb = "rgb.png"
//! depth = "depth.pfm"        # or a 16-bit PNG scaled by scene.depth_scale
//! normal = "normal.pfm"
//! semantic = "semantic.png"
//! light_mask = "lights.png"  # optional, together with light_sidecar
//! light_sidecar = "lights.toml"
//!
//! [camera]
//! fov = 1.0                  # horizontal, radians; or fx/fy/cx/cy in input pixels
//!
//! [job]
//! output_dir = "out"
//! profile = "default"
//! stages = "all"             # or a stage name: everything up to and including it
//! seeds = [0, 1, 2]          # one night image per seed
//! config_file = "cfg.toml"   # optional
//!
//! [config]                   # optional inline overrides, same layout as the config file
//! refine.steps = 200
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::CameraModel;
use crate::config::{PipelineConfig, Profile};
use crate::error::{Error, Result};

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Filter,
    Refine,
    Mesh,
    Relight,
    Postprocess,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Filter, Stage::Refine, Stage::Mesh, Stage::Relight, Stage::Postprocess];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Filter => "filter",
            Stage::Refine => "refine",
            Stage::Mesh => "mesh",
            Stage::Relight => "relight",
            Stage::Postprocess => "postprocess",
        }
    }

    pub fn parse(s: &str) -> Result<Stage> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage '{s}'")))
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a stage selection: `all`, a single stage (meaning every stage up
/// to it), or a comma list that must itself be such a prefix.
pub fn parse_stages(selection: &str) -> Result<Vec<Stage>> {
    let selection = selection.trim();
    if selection == "all" {
        return Ok(Stage::ALL.to_vec());
    }
    let named: Vec<Stage> = selection.split(',').map(|s| Stage::parse(s.trim())).collect::<Result<_>>()?;
    if named.len() == 1 {
        return Ok(Stage::ALL.into_iter().filter(|s| *s <= named[0]).collect());
    }
    let mut sorted = named.clone();
    sorted.sort();
    sorted.dedup();
    if sorted[..] != Stage::ALL[..sorted.len()] {
        return Err(Error::Config(format!(
            "stage selection '{selection}' is not a prefix of filter,refine,mesh,relight,postprocess"
        )));
    }
    Ok(sorted)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub rgb: PathBuf,
    pub depth: PathBuf,
    pub normal: PathBuf,
    pub semantic: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light_mask: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light_sidecar: Option<PathBuf>,
}

/// Either a horizontal field of view or full intrinsics, at input resolution.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cy: Option<f64>,
}

impl CameraSpec {
    pub fn camera(&self, width: usize, height: usize) -> Result<CameraModel> {
        match (self.fov, self.fx, self.fy, self.cx, self.cy) {
            (Some(fov), None, None, None, None) => CameraModel::from_fov(width, height, fov),
            (None, Some(fx), Some(fy), Some(cx), Some(cy)) => CameraModel::from_intrinsics(fx, fy, cx, cy, width, height),
            _ => Err(Error::Camera("give either camera.fov or all of fx, fy, cx, cy".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobSpec {
    pub output_dir: PathBuf,
    pub profile: String,
    pub stages: String,
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_file: Option<PathBuf>,
}

impl Default for JobSpec {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            profile: "default".into(),
            stages: "all".into(),
            seeds: vec![0],
            config_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobManifest {
    pub inputs: InputPaths,
    #[serde(default)]
    pub camera: CameraSpec,
    #[serde(default)]
    pub job: JobSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<toml::Table>,
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl JobManifest {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text).map_err(|e| Error::Config(format!("manifest: {e}")))?;
        if m.inputs.light_mask.is_some() != m.inputs.light_sidecar.is_some() {
            return Err(Error::Config("light_mask and light_sidecar must be given together".into()));
        }
        if m.job.seeds.is_empty() {
            return Err(Error::Config("job.seeds must not be empty".into()));
        }
        parse_stages(&m.job.stages)?;
        Profile::parse(&m.job.profile)?;
        Ok(m)
    }

    /// Reads a manifest and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::from_toml_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.rebase(base);
        Ok(m)
    }

    pub fn rebase(&mut self, base: &Path) {
        let i = &mut self.inputs;
        for p in [&mut i.rgb, &mut i.depth, &mut i.normal, &mut i.semantic] {
            rebase(base, p);
        }
        for p in [&mut i.light_mask, &mut i.light_sidecar].into_iter().flatten() {
            rebase(base, p);
        }
        rebase(base, &mut self.job.output_dir);
        if let Some(p) = &mut self.job.config_file {
            rebase(base, p);
        }
    }

    pub fn stages(&self) -> Result<Vec<Stage>> {
        parse_stages(&self.job.stages)
    }

    /// Profile, then the config file, then the inline `[config]` table.
    pub fn resolve_config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::from_profile(Profile::parse(&self.job.profile)?);
        if let Some(path) = &self.job.config_file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg = cfg.overlay(&text).map_err(|e| Error::format(path, e.to_string()))?;
        }
        if let Some(t) = &self.config {
            cfg = cfg.overlay_table(t)?;
        }
        Ok(cfg)
    }

    /// The same job with every setting spelled out: feeding this back in
    /// reproduces the run.
    pub fn echo(&self, cfg: &PipelineConfig) -> Result<JobManifest> {
        let mut m = self.clone();
        m.job.config_file = None;
        m.job.stages = self.stages()?.iter().map(|s| s.name()).collect::<Vec<_>>().join(",");
        m.config = Some(toml::Table::try_from(cfg).map_err(|e| Error::Config(e.to_string()))?);
        Ok(m)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}
