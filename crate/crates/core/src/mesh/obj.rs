//! ASCII OBJ with per-vertex colors (`v x y z r g b`).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Material, SceneMesh, VertexOrigin};
use crate::error::{Error, Result};

fn texcoord(o: VertexOrigin, rows: usize, cols: usize) -> (f64, f64) {
    match o {
        VertexOrigin::Grid { row, col } | VertexOrigin::Inserted { row, col } => (
            col as f64 / (cols.max(2) - 1) as f64,
            1.0 - row as f64 / (rows.max(2) - 1) as f64,
        ),
        VertexOrigin::Free => (0.0, 0.0),
    }
}

/// Serializes the mesh; texture coordinates map the lattice onto [0, 1]².
pub fn obj_string(mesh: &SceneMesh) -> String {
    let (mut rows, mut cols) = (0, 0);
    for o in &mesh.origin {
        if let VertexOrigin::Grid { row, col } | VertexOrigin::Inserted { row, col } = *o {
            rows = rows.max(row + 1);
            cols = cols.max(col + 1);
        }
    }
    let mut s = String::with_capacity(mesh.vertices.len() * 64 + mesh.faces.len() * 24);
    let _ = writeln!(s, "# {} vertices, {} faces", mesh.vertices.len(), mesh.faces.len());
    for (v, c) in mesh.vertices.iter().zip(&mesh.vertex_color) {
        let _ = writeln!(s, "v {} {} {} {} {} {}", v[0], v[1], v[2], c[0], c[1], c[2]);
    }
    for o in &mesh.origin {
        let (u, v) = texcoord(*o, rows, cols);
        let _ = writeln!(s, "vt {u} {v}");
    }
    for f in &mesh.faces {
        let (a, b, c) = (f[0] + 1, f[1] + 1, f[2] + 1);
        let _ = writeln!(s, "f {a}/{a} {b}/{b} {c}/{c}");
    }
    s
}

pub fn write_obj(mesh: &SceneMesh, path: &Path) -> Result<()> {
    fs::write(path, obj_string(mesh)).map_err(|e| Error::io(path, e))
}

/// Parses positions, colors and faces. Vertices without colors get mid gray;
/// polygons are fanned into triangles.
pub fn parse_obj(text: &str, path: &Path) -> Result<SceneMesh> {
    let mut mesh = SceneMesh {
        vertices: Vec::new(),
        origin: Vec::new(),
        faces: Vec::new(),
        vertex_color: Vec::new(),
        material: Vec::new(),
        emission: Vec::new(),
    };
    for (lineno, line) in text.lines().enumerate() {
        let bad = |what: &str| Error::format(path, format!("line {}: {what}", lineno + 1));
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let nums: Vec<f64> = it
                    .map(|t| t.parse::<f64>().map_err(|_| bad("bad number")))
                    .collect::<Result<_>>()?;
                let (pos, col) = match nums.len() {
                    3 => ([nums[0], nums[1], nums[2]], [0.5; 3]),
                    6 => ([nums[0], nums[1], nums[2]], [nums[3], nums[4], nums[5]]),
                    _ => return Err(bad("vertex needs 3 or 6 numbers")),
                };
                mesh.vertices.push(pos);
                mesh.vertex_color.push(col);
                mesh.material.push(Material { albedo: col, roughness: 1.0 });
                mesh.origin.push(VertexOrigin::Free);
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| bad("bad face index"))?;
                        let n = mesh.vertices.len() as i64;
                        let abs = if i < 0 { n + i } else { i - 1 };
                        if abs < 0 || abs >= n {
                            return Err(bad("face index out of range"));
                        }
                        Ok(abs as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(bad("face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    mesh.faces.push([idx[0], idx[k], idx[k + 1]]);
                    mesh.emission.push(None);
                }
            }
            _ => {}
        }
    }
    Ok(mesh)
}

pub fn read_obj(path: &Path) -> Result<SceneMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text, path)
}
