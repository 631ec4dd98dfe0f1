//! Synthetic scenes with analytically known geometry, used as fixtures.

use std::fs;
use std::path::{Path, PathBuf};

use super::manifest::{CameraSpec, InputPaths, JobManifest, JobSpec};
use crate::camera::CameraModel;
use crate::classes::{label, LightClass};
use crate::error::{Error, Result};
use crate::grid::{InstanceGrid, LabelGrid, PixelGrid};
use crate::io::{write_pfm, write_png_gray16, write_png_gray8, write_png_rgb8};
use crate::refine::normal_from_depth;
use crate::relight::{write_sidecar, LightInstance};
use crate::rng::KeyedRng;

/// Horizontal field of view of every synthetic camera.
pub const SYNTH_FOV: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    /// Surface whose depth slopes have the constant value `slope` along x:
    /// `z = z0 exp(slope (u - cx) / fx)`.
    Plane { slope: f64 },
    /// Car in the left half at `STEP_NEAR`, building in the right half at `STEP_FAR`.
    Step,
    /// Road, building wall and a box-shaped car carrying a grouped pair of lights.
    CarOnRoad,
}

impl SynthKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Plane { .. } => "plane",
            SynthKind::Step => "step",
            SynthKind::CarOnRoad => "car-on-road",
        }
    }
}

pub const PLANE_Z0: f64 = 5.0;
pub const STEP_NEAR: f64 = 4.0;
pub const STEP_FAR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    /// sRGB in [0, 1].
    pub rgb: PixelGrid,
    pub depth: PixelGrid,
    pub normal: PixelGrid,
    pub semantic: LabelGrid,
    pub camera: CameraModel,
    pub instances: InstanceGrid,
    pub lights: Vec<LightInstance>,
}

fn jitter(rng: &mut KeyedRng, base: [f64; 3], amp: f64) -> [f64; 3] {
    base.map(|b| (b + amp * (rng.uniform() - 0.5)).clamp(0.0, 1.0))
}

/// Width and height must be positive multiples of 8.
pub fn synth_scene(kind: SynthKind, width: usize, height: usize, seed: u64) -> Result<SynthScene> {
    if width == 0 || height == 0 || !width.is_multiple_of(8) || !height.is_multiple_of(8) {
        return Err(Error::Config(format!("synthetic size {width}x{height} must be positive multiples of 8")));
    }
    let camera = CameraModel::from_fov(width, height, SYNTH_FOV)?;
    let mut rng = KeyedRng::new(seed, &[0x5a]);
    let none = PixelGrid::filled(width, height, 1, 0u16);
    match kind {
        SynthKind::Plane { slope } => {
            let (fx, cx) = (camera.fx(), camera.cx());
            let depth = PixelGrid::from_fn(width, height, |_, c| PLANE_Z0 * (slope * (c as f64 + 0.5 - cx) / fx).exp());
            let s = (1.0 + slope * slope).sqrt();
            let normal = PixelGrid::from_fn_n::<3>(width, height, |_, _| [-slope / s, 0.0, 1.0 / s]);
            let rgb = PixelGrid::from_fn_n::<3>(width, height, |_, _| jitter(&mut rng, [0.55, 0.5, 0.45], 0.1));
            Ok(SynthScene {
                rgb,
                depth,
                normal,
                semantic: PixelGrid::filled(width, height, 1, label::BUILDING),
                camera,
                instances: none,
                lights: Vec::new(),
            })
        }
        SynthKind::Step => {
            let half = width / 2;
            let depth = PixelGrid::from_fn(width, height, |_, c| if c < half { STEP_NEAR } else { STEP_FAR });
            let semantic = PixelGrid::from_fn(width, height, |_, c| if c < half { label::CAR } else { label::BUILDING });
            let rgb = PixelGrid::from_fn_n::<3>(width, height, |_, c| {
                let base = if c < half { [0.7, 0.15, 0.1] } else { [0.6, 0.58, 0.5] };
                jitter(&mut rng, base, 0.06)
            });
            Ok(SynthScene {
                rgb,
                depth,
                normal: PixelGrid::from_fn_n::<3>(width, height, |_, _| [0.0, 0.0, 1.0]),
                semantic,
                camera,
                instances: none,
                lights: Vec::new(),
            })
        }
        SynthKind::CarOnRoad => car_on_road(camera, &mut rng),
    }
}

fn snap4(x: f64) -> usize {
    ((x / 4.0).round() as usize) * 4
}

fn car_on_road(camera: CameraModel, rng: &mut KeyedRng) -> Result<SynthScene> {
    const CAM_HEIGHT: f64 = 1.5;
    const WALL: f64 = 30.0;
    const CAR_Z: f64 = 5.0;
    const CAR_TOP: f64 = 0.3;
    const CAR_HALF_WIDTH: f64 = 0.9;
    let (w, h) = (camera.width(), camera.height());
    let (fx, fy, cx, cy) = (camera.fx(), camera.fy(), camera.cx(), camera.cy());

    let car_rows = (
        (cy + CAR_TOP * fy / CAR_Z).ceil() as usize,
        ((cy + CAM_HEIGHT * fy / CAR_Z).floor() as usize).min(h),
    );
    let car_cols = (
        (cx - CAR_HALF_WIDTH * fx / CAR_Z).ceil() as usize,
        ((cx + CAR_HALF_WIDTH * fx / CAR_Z).floor() as usize).min(w),
    );
    let in_car = |r: usize, c: usize| (car_rows.0..car_rows.1).contains(&r) && (car_cols.0..car_cols.1).contains(&c);

    let mut depth = PixelGrid::filled(w, h, 1, WALL);
    let mut semantic = PixelGrid::filled(w, h, 1, label::BUILDING);
    for r in 0..h {
        let y = r as f64 + 0.5 - cy;
        for c in 0..w {
            if in_car(r, c) {
                depth.set(r, c, CAR_Z);
                semantic.set(r, c, label::CAR);
            } else if y > 0.0 && CAM_HEIGHT * fy / y < WALL {
                depth.set(r, c, CAM_HEIGHT * fy / y);
                semantic.set(r, c, label::ROAD);
            }
        }
    }
    let normal = normal_from_depth(&depth, &camera);

    // two 8x8 headlights on the lower car front, plus a lit window on the wall
    let lamp_row = snap4(car_rows.1 as f64 - 10.0).max(car_rows.0);
    let left = snap4(car_cols.0 as f64 + 2.0);
    let right = snap4(car_cols.1 as f64 - 10.0);
    let window_row = snap4(cy * 0.4);
    let window_col = snap4(w as f64 * 0.15);
    let mut instances = PixelGrid::filled(w, h, 1, 0u16);
    let mut paint = |id: u16, r0: usize, c0: usize| {
        for r in r0..(r0 + 8).min(h) {
            for c in c0..(c0 + 8).min(w) {
                instances.set(r, c, id);
            }
        }
    };
    paint(1, lamp_row, left);
    paint(2, lamp_row, right);
    paint(4, window_row, window_col);

    let rgb = PixelGrid::from_fn_n::<3>(w, h, |r, c| {
        let base = match (instances.get(r, c), semantic.get(r, c)) {
            (1 | 2, _) => [0.9, 0.88, 0.8],
            (4, _) => [0.35, 0.4, 0.45],
            (_, label::CAR) => [0.7, 0.12, 0.1],
            (_, label::ROAD) => [0.3, 0.3, 0.32],
            _ => [0.62, 0.57, 0.48],
        };
        jitter(rng, base, 0.04)
    });

    let headlight = |id| LightInstance {
        instance_id: id,
        class: LightClass::ParkedFront,
        mask: None,
        group_id: Some(1),
        chromaticity: [1.0, 0.9],
        strength: 4.0,
        activation_p: 0.5,
    };
    let lights = vec![
        headlight(1),
        headlight(2),
        LightInstance {
            instance_id: 3,
            class: LightClass::CarGroup,
            mask: None,
            group_id: Some(1),
            chromaticity: [1.0, 1.0],
            strength: 0.0,
            activation_p: 0.5,
        },
        LightInstance {
            instance_id: 4,
            class: LightClass::WindowBuilding,
            mask: None,
            group_id: None,
            chromaticity: [1.4, 0.5],
            strength: 2.0,
            activation_p: 0.5,
        },
    ];
    let mut lights = lights;
    crate::relight::attach_masks(&mut lights, &instances)?;
    Ok(SynthScene { rgb, depth, normal, semantic, camera, instances, lights })
}

/// Writes the scene's input files and a manifest into `dir`; returns the
/// manifest path.
pub fn write_synth_scene(scene: &SynthScene, dir: &Path, seeds: &[u64]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rgb8 = scene.rgb.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8);
    write_png_rgb8(&rgb8, &dir.join("rgb.png"))?;
    write_pfm(&scene.depth, &dir.join("depth.pfm"))?;
    write_pfm(&scene.normal, &dir.join("normal.pfm"))?;
    write_png_gray8(&scene.semantic, &dir.join("semantic.png"))?;
    let (light_mask, light_sidecar) = if scene.lights.is_empty() {
        (None, None)
    } else {
        write_png_gray16(&scene.instances, &dir.join("lights.png"))?;
        write_sidecar(&scene.lights, &dir.join("lights.toml"))?;
        (Some("lights.png".into()), Some("lights.toml".into()))
    };
    let manifest = JobManifest {
        inputs: InputPaths {
            rgb: "rgb.png".into(),
            depth: "depth.pfm".into(),
            normal: "normal.pfm".into(),
            semantic: "semantic.png".into(),
            light_mask,
            light_sidecar,
        },
        camera: CameraSpec { fov: Some(scene.camera.theta_f()), ..Default::default() },
        job: JobSpec { seeds: seeds.to_vec(), ..Default::default() },
        config: None,
    };
    let path = dir.join("manifest.toml");
    fs::write(&path, manifest.to_toml_string()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
