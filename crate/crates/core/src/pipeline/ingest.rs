//! Reading and validating the input files of a job.

use std::path::Path;

use super::manifest::JobManifest;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::grid::PixelGrid;
use crate::io::{read_pfm, read_png_gray16, read_png_gray8, read_png_rgb_unit};
use crate::relight::{attach_masks, read_sidecar, LightInstance};
use crate::validate::{validate_inputs, InputBundle};

/// Validated inputs at working resolution.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub bundle: InputBundle,
    pub lights: Vec<LightInstance>,
}

fn is_png(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Io { .. } | Error::Format { .. } => e,
        other => Error::format(path, other.to_string()),
    }
}

/// Depth from PFM, or from a 16-bit PNG; either way multiplied by
/// `scene.depth_scale`.
pub fn read_depth(path: &Path, cfg: &PipelineConfig) -> Result<PixelGrid> {
    let raw = if is_png(path) {
        read_png_gray16(path)?.map(|v| v as f64)
    } else {
        read_pfm(path)?
    };
    raw.check_channels(1, "depth map").map_err(|e| with_path(path, e))?;
    let s = cfg.scene.depth_scale;
    Ok(raw.map(|d| d * s))
}

fn renormalize(normal: &mut PixelGrid) {
    for n in normal.data_mut().chunks_exact_mut(3) {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len > 0.0 {
            n.iter_mut().for_each(|v| *v /= len);
        }
    }
}

pub fn ingest(manifest: &JobManifest, cfg: &PipelineConfig) -> Result<Ingested> {
    let inp = &manifest.inputs;
    let rgb = read_png_rgb_unit(&inp.rgb)?;
    let depth = read_depth(&inp.depth, cfg)?;
    let normal = read_pfm(&inp.normal)?;
    normal.check_channels(3, "normal map").map_err(|e| with_path(&inp.normal, e))?;
    let semantic = read_png_gray8(&inp.semantic)?;
    let (w0, h0) = (rgb.width(), rgb.height());
    for (p, w, h) in [
        (&inp.depth, depth.width(), depth.height()),
        (&inp.normal, normal.width(), normal.height()),
        (&inp.semantic, semantic.width(), semantic.height()),
    ] {
        if (w, h) != (w0, h0) {
            return Err(with_path(
                p,
                Error::DimensionMismatch { what: "input raster".into(), got_w: w, got_h: h, want_w: w0, want_h: h0 },
            ));
        }
    }
    let camera = manifest.camera.camera(w0, h0)?;
    let native = validate_inputs(rgb, depth, normal, semantic, camera, cfg.scene.normal_tolerance)
        .map_err(|e| match e {
            Error::NonPositiveDepth { .. } => with_path(&inp.depth, e),
            Error::NonUnitNormal { .. } => with_path(&inp.normal, e),
            Error::UnknownClass { .. } => with_path(&inp.semantic, e),
            other => other,
        })?;

    let (w, h) = match (cfg.scene.working_width, cfg.scene.working_height) {
        (0, 0) => (w0, h0),
        (0, h) => ((w0 * h + h0 / 2) / h0, h),
        (w, 0) => (w, (h0 * w + w0 / 2) / w0),
        (w, h) => (w, h),
    };
    cfg.validate_resolution(w, h)?;
    let bundle = if (w, h) == (w0, h0) {
        native
    } else {
        let mut normal = native.normal.resize_bilinear(w, h);
        renormalize(&mut normal);
        validate_inputs(
            native.rgb.resize_bilinear(w, h),
            native.depth.resize_bilinear(w, h),
            normal,
            native.semantic.resize_nearest(w, h),
            native.camera.rescaled(w, h),
            cfg.scene.normal_tolerance,
        )?
    };

    let mut lights = Vec::new();
    if let (Some(mask_path), Some(side_path)) = (&inp.light_mask, &inp.light_sidecar) {
        lights = read_sidecar(side_path)?;
        let masks = read_png_gray16(mask_path)?;
        if (masks.width(), masks.height()) != (w0, h0) {
            return Err(with_path(
                mask_path,
                Error::DimensionMismatch {
                    what: "light mask".into(),
                    got_w: masks.width(),
                    got_h: masks.height(),
                    want_w: w0,
                    want_h: h0,
                },
            ));
        }
        let masks = if (w, h) == (w0, h0) { masks } else { masks.resize_nearest(w, h) };
        attach_masks(&mut lights, &masks).map_err(|e| with_path(side_path, e))?;
    }
    Ok(Ingested { bundle, lights })
}
