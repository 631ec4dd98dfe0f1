//! Scene mesh reconstruction: lattice warping, spurious-face deletion and
//! completion, plus OBJ/PLY export.

mod audit;
mod complete;
mod obj;
mod ply;
mod regions;
mod sheet;

pub use audit::{audit_completion, edge_stats, AuditReport, EdgeStats};
pub use complete::{complete_background, complete_foreground, CompletionReport};
pub use obj::{obj_string, parse_obj, read_obj, write_obj};
pub use ply::{decode_ply, encode_ply, read_ply, write_ply};
pub use regions::{expand_uncertain_region, CompletionRegion, RegionKind};
pub use sheet::{
    build_mesh, cell_triangles, delete_uncertain_faces, source_pixel, GridOffsets, MeshSheet, SheetVertex,
    SlotState,
};

use crate::color::srgb_to_linear;
use crate::error::{Error, Result};

/// Where a scene vertex came from on the mesh sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOrigin {
    Grid { row: usize, col: usize },
    Inserted { row: usize, col: usize },
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Linear RGB albedo.
    pub albedo: [f64; 3],
    /// Carried through but unused by the Lambertian shader.
    pub roughness: f64,
}

/// Render-ready triangle mesh in camera space.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneMesh {
    pub vertices: Vec<[f64; 3]>,
    pub origin: Vec<VertexOrigin>,
    pub faces: Vec<[usize; 3]>,
    /// Linear RGB.
    pub vertex_color: Vec<[f64; 3]>,
    pub material: Vec<Material>,
    /// Per-face emitted radiance.
    pub emission: Vec<Option<[f64; 3]>>,
}

impl SceneMesh {
    /// Collects the live vertices and current faces of a sheet. Albedo is the
    /// linearized vertex color.
    pub fn from_sheet(sheet: &MeshSheet) -> SceneMesh {
        let mut remap = vec![usize::MAX; sheet.slot_count()];
        let mut mesh = SceneMesh {
            vertices: Vec::new(),
            origin: Vec::new(),
            faces: Vec::with_capacity(sheet.faces().len()),
            vertex_color: Vec::new(),
            material: Vec::new(),
            emission: vec![None; sheet.faces().len()],
        };
        for s in 0..sheet.slot_count() {
            let state = sheet.state(s);
            if !state.is_live() {
                continue;
            }
            let (row, col) = sheet.slot_coords(s);
            let v = sheet.vertex(s);
            let linear = v.color.map(srgb_to_linear);
            remap[s] = mesh.vertices.len();
            mesh.vertices.push(v.position);
            mesh.origin.push(if state == SlotState::Inserted {
                VertexOrigin::Inserted { row, col }
            } else {
                VertexOrigin::Grid { row, col }
            });
            mesh.vertex_color.push(linear);
            mesh.material.push(Material { albedo: linear, roughness: 1.0 });
        }
        for f in sheet.faces() {
            mesh.faces.push(f.map(|v| remap[v]));
        }
        mesh
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn emissive_count(&self) -> usize {
        self.emission.iter().filter(|e| e.is_some()).count()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.origin.len() != n || self.vertex_color.len() != n || self.material.len() != n {
            return Err(Error::Mesh("per-vertex attribute count differs from vertex count".into()));
        }
        if self.emission.len() != self.faces.len() {
            return Err(Error::Mesh("emission count differs from face count".into()));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if !(v[2] > 0.0) || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Mesh(format!("vertex {i} has depth {} (must be positive)", v[2])));
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&x| x >= n) {
                return Err(Error::Mesh(format!("face {i} indexes past {n} vertices")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Mesh(format!("face {i} is degenerate")));
            }
        }
        Ok(())
    }
}
