//! Turning active light instances into emissive mesh faces.

use super::activation::ActivationDraw;
use super::lights::LightInstance;
use crate::error::{Error, Result};
use crate::mesh::{source_pixel, MeshSheet, SceneMesh, VertexOrigin};

/// Pixel a scene vertex stands for: its lattice slot's source pixel, or its
/// projection for vertices without one.
fn vertex_pixel(mesh: &SceneMesh, sheet: &MeshSheet, v: usize) -> Option<(usize, usize)> {
    match mesh.origin[v] {
        VertexOrigin::Grid { row, col } | VertexOrigin::Inserted { row, col } => {
            Some(source_pixel(row, col, sheet.downsample()))
        }
        VertexOrigin::Free => {
            let cam = sheet.camera();
            let (u, vv) = cam.project(mesh.vertices[v]);
            let (c, r) = (u.floor(), vv.floor());
            (c >= 0.0 && r >= 0.0 && (c as usize) < cam.width() && (r as usize) < cam.height())
                .then_some((r as usize, c as usize))
        }
    }
}

/// A face emits when at least two of its vertices fall inside one active
/// instance's mask; the lowest instance id wins overlaps.
pub fn assign_emitters(sheet: &MeshSheet, lights: &[LightInstance], draw: &ActivationDraw) -> Result<SceneMesh> {
    let mut mesh = SceneMesh::from_sheet(sheet);
    let cam = sheet.camera();
    let mut active: Vec<&LightInstance> = lights
        .iter()
        .filter(|l| !l.class.is_group() && l.mask.is_some() && draw.is_active(l.instance_id))
        .collect();
    active.sort_by_key(|l| l.instance_id);
    for l in &active {
        let m = l.mask.as_ref().expect("filtered");
        if m.width() != cam.width() || m.height() != cam.height() {
            return Err(Error::DimensionMismatch {
                what: format!("mask of light instance {}", l.instance_id),
                got_w: m.width(),
                got_h: m.height(),
                want_w: cam.width(),
                want_h: cam.height(),
            });
        }
    }
    if active.is_empty() {
        return Ok(mesh);
    }
    let pixels: Vec<Option<(usize, usize)>> = (0..mesh.vertex_count()).map(|v| vertex_pixel(&mesh, sheet, v)).collect();
    for (f, face) in mesh.faces.iter().enumerate() {
        for l in &active {
            let m = l.mask.as_ref().expect("filtered");
            let inside = face
                .iter()
                .filter(|&&v| pixels[v].is_some_and(|(r, c)| m.get(r, c) != 0))
                .count();
            if inside >= 2 {
                mesh.emission[f] = Some(l.radiance());
                break;
            }
        }
    }
    Ok(mesh)
}
