//! Annotated light sources and their sidecar file.
//!
//! The sidecar is TOML: an optional top-level `default_p`, then one
//! `[[light]]` table per instance:
//!
//! ```toml
//! default_p = 0.5
//!
//! [[light]]
//! instance_id = 3
//! class = "street_light_HT"
//! group_id = 1          # optional
//! p = 0.8               # optional, falls back to default_p
//! chromaticity = [1.5, 0.25]
//! strength = 0.2
//! ```
//!
//! Records whose class is a group class describe the group named by their
//! `group_id`; their `p` is the group's activation probability.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classes::LightClass;
use crate::error::{Error, Result};
use crate::grid::{InstanceGrid, PixelGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct LightInstance {
    pub instance_id: u32,
    pub class: LightClass,
    /// Binary mask at working resolution; `None` for group records.
    pub mask: Option<PixelGrid<u8>>,
    pub group_id: Option<u32>,
    /// `(r/g, b/g)`.
    pub chromaticity: [f64; 2],
    pub strength: f64,
    pub activation_p: f64,
}

impl LightInstance {
    /// Linear RGB radiance `s (r/g, 1, b/g)`.
    pub fn radiance(&self) -> [f64; 3] {
        [
            self.strength * self.chromaticity[0],
            self.strength,
            self.strength * self.chromaticity[1],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.instance_id;
        if !(0.0..=1.0).contains(&self.activation_p) {
            return Err(Error::Light(format!("instance {id}: p = {} outside [0, 1]", self.activation_p)));
        }
        if !self.chromaticity.iter().all(|&c| c > 0.0 && c.is_finite()) {
            return Err(Error::Light(format!(
                "instance {id}: chromaticity {:?} must be positive",
                self.chromaticity
            )));
        }
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(Error::Light(format!("instance {id}: strength {} must be >= 0", self.strength)));
        }
        if self.class.is_group() && self.group_id.is_none() {
            return Err(Error::Light(format!("instance {id}: group class {} needs a group_id", self.class)));
        }
        Ok(())
    }
}

/// Mean color of a light sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightMeasurement {
    pub chromaticity: [f64; 2],
    pub strength: f64,
}

/// Chromaticity `(r/g, b/g)` and strength `g` from the channel means of a
/// linear RGB sample, optionally restricted to a mask.
pub fn measure_light_sample(rgb: &PixelGrid, mask: Option<&PixelGrid<u8>>) -> Result<LightMeasurement> {
    rgb.check_channels(3, "light sample")?;
    if let Some(m) = mask {
        rgb.check_same_size(m, "light sample mask")?;
    }
    let mut sum = [0.0; 3];
    let mut n = 0usize;
    for (i, px) in rgb.data().chunks_exact(3).enumerate() {
        if mask.is_some_and(|m| m.data()[i] == 0) {
            continue;
        }
        for k in 0..3 {
            sum[k] += px[k];
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::DegenerateSample);
    }
    let mean = sum.map(|s| s / n as f64);
    if !(mean[1] > 0.0) {
        return Err(Error::DegenerateSample);
    }
    Ok(LightMeasurement {
        chromaticity: [mean[0] / mean[1], mean[2] / mean[1]],
        strength: mean[1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    instance_id: u32,
    class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    chromaticity: [f64; 2],
    strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    #[serde(default = "default_p")]
    default_p: f64,
    #[serde(default)]
    light: Vec<Record>,
}

fn default_p() -> f64 {
    0.5
}

/// Parses sidecar records; masks are attached separately with [`attach_masks`].
pub fn parse_sidecar(text: &str) -> Result<Vec<LightInstance>> {
    let sc: Sidecar = toml::from_str(text).map_err(|e| Error::Light(format!("sidecar: {e}")))?;
    if !(0.0..=1.0).contains(&sc.default_p) {
        return Err(Error::Light(format!("default_p {} outside [0, 1]", sc.default_p)));
    }
    let mut out = Vec::with_capacity(sc.light.len());
    for r in sc.light {
        let class: LightClass = r
            .class
            .parse()
            .map_err(|_| Error::Light(format!("instance {}: unknown class '{}'", r.instance_id, r.class)))?;
        let l = LightInstance {
            instance_id: r.instance_id,
            class,
            mask: None,
            group_id: r.group_id,
            chromaticity: r.chromaticity,
            strength: r.strength,
            activation_p: r.p.unwrap_or(sc.default_p),
        };
        l.validate()?;
        if out.iter().any(|o: &LightInstance| o.instance_id == l.instance_id) {
            return Err(Error::Light(format!("duplicate instance_id {}", l.instance_id)));
        }
        out.push(l);
    }
    Ok(out)
}

pub fn sidecar_string(lights: &[LightInstance]) -> String {
    let sc = Sidecar {
        default_p: default_p(),
        light: lights
            .iter()
            .map(|l| Record {
                instance_id: l.instance_id,
                class: l.class.name().to_string(),
                group_id: l.group_id,
                p: Some(l.activation_p),
                chromaticity: l.chromaticity,
                strength: l.strength,
            })
            .collect(),
    };
    toml::to_string(&sc).expect("sidecar serializes")
}

pub fn read_sidecar(path: &Path) -> Result<Vec<LightInstance>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sidecar(&text).map_err(|e| match e {
        Error::Light(m) => Error::Light(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_sidecar(lights: &[LightInstance], path: &Path) -> Result<()> {
    fs::write(path, sidecar_string(lights)).map_err(|e| Error::io(path, e))
}

/// Fills each non-group instance's mask from an instance-id raster.
pub fn attach_masks(lights: &mut [LightInstance], instances: &InstanceGrid) -> Result<()> {
    instances.check_channels(1, "instance mask")?;
    for l in lights.iter_mut() {
        if l.class.is_group() {
            l.mask = None;
            continue;
        }
        let id = l.instance_id;
        if id == 0 || id > u16::MAX as u32 {
            return Err(Error::Light(format!("instance_id {id} cannot appear in a 16-bit mask")));
        }
        l.mask = Some(instances.map(|v| (v as u32 == id) as u8));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
default_p = 0.25

[[light]]
instance_id = 1
class = "street_light_HT"
group_id = 7
chromaticity = [1.5, 0.25]
strength = 0.2

[[light]]
instance_id = 2
class = "car_group"
group_id = 7
p = 0.9
chromaticity = [1.0, 1.0]
strength = 0.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let lights = parse_sidecar(SAMPLE).unwrap();
        assert_eq!(lights.len(), 2);
        assert_eq!(lights[0].activation_p, 0.25);
        assert_eq!(lights[0].class, LightClass::StreetLightHt);
        assert!(lights[1].class.is_group());
        assert_eq!(lights[0].radiance(), [0.30000000000000004, 0.2, 0.05]);
        let again = parse_sidecar(&sidecar_string(&lights)).unwrap();
        assert_eq!(again, lights);
    }

    #[test]
    fn rejects_bad_records() {
        assert!(parse_sidecar("[[light]]\ninstance_id = 1\nclass = \"lamp\"\nchromaticity = [1, 1]\nstrength = 1\n").is_err());
        assert!(parse_sidecar("[[light]]\ninstance_id = 1\nclass = \"window_building\"\np = 1.5\nchromaticity = [1, 1]\nstrength = 1\n").is_err());
        assert!(parse_sidecar("[[light]]\ninstance_id = 1\nclass = \"window_building\"\nchromaticity = [0, 1]\nstrength = 1\n").is_err());
        assert!(parse_sidecar("[[light]]\ninstance_id = 1\nclass = \"window_building\"\nchromaticity = [1, 1]\nstrength = -1\n").is_err());
    }

    #[test]
    fn measurement_examples() {
        let gray = PixelGrid::filled(4, 4, 3, 0.2);
        let m = measure_light_sample(&gray, None).unwrap();
        assert_eq!(m.chromaticity, [1.0, 1.0]);
        assert!((m.strength - 0.2).abs() < 1e-15);

        let sodium = PixelGrid::from_fn_n::<3>(2, 2, |_, _| [0.30, 0.20, 0.05]);
        let m = measure_light_sample(&sodium, None).unwrap();
        assert!((m.chromaticity[0] - 1.5).abs() < 1e-15 && (m.chromaticity[1] - 0.25).abs() < 1e-15);

        let scaled = sodium.map(|v| v * 3.0);
        let k = measure_light_sample(&scaled, None).unwrap();
        assert!((k.chromaticity[0] - m.chromaticity[0]).abs() < 1e-15);
        assert!((k.strength - 3.0 * m.strength).abs() < 1e-15);

        let black = PixelGrid::filled(2, 2, 3, 0.0);
        assert!(matches!(measure_light_sample(&black, None), Err(Error::DegenerateSample)));
    }

    #[test]
    fn masks_from_instance_raster() {
        let mut lights = parse_sidecar(SAMPLE).unwrap();
        let inst = PixelGrid::from_fn(3, 2, |r, c| if r == 0 && c > 0 { 1u16 } else { 0 });
        attach_masks(&mut lights, &inst).unwrap();
        assert_eq!(lights[0].mask.as_ref().unwrap().data(), &[0, 1, 1, 0, 0, 0]);
        assert!(lights[1].mask.is_none());
    }
}
