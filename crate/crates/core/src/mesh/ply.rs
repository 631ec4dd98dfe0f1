//! Binary little-endian PLY carrying every [`SceneMesh`] attribute.
//!
//! Besides the usual `x y z` and 8-bit `red green blue` (sRGB, for viewers),
//! vertices store the exact linear color, material and lattice origin; faces
//! store an emission flag and radiance.

use std::fs;
use std::path::Path;

use super::{Material, SceneMesh, VertexOrigin};
use crate::color::linear_to_srgb;
use crate::error::{Error, Result};

const VERTEX_PROPS: &[(&str, &str)] = &[
    ("double", "x"),
    ("double", "y"),
    ("double", "z"),
    ("uchar", "red"),
    ("uchar", "green"),
    ("uchar", "blue"),
    ("double", "color_r"),
    ("double", "color_g"),
    ("double", "color_b"),
    ("double", "albedo_r"),
    ("double", "albedo_g"),
    ("double", "albedo_b"),
    ("double", "roughness"),
    ("uchar", "origin"),
    ("int", "grid_row"),
    ("int", "grid_col"),
];

const FACE_PROPS: &[(&str, &str)] = &[
    ("uchar", "emissive"),
    ("double", "emit_r"),
    ("double", "emit_g"),
    ("double", "emit_b"),
];

fn header(nv: usize, nf: usize) -> String {
    let mut h = String::from("ply\nformat binary_little_endian 1.0\n");
    h += &format!("element vertex {nv}\n");
    for (t, n) in VERTEX_PROPS {
        h += &format!("property {t} {n}\n");
    }
    h += &format!("element face {nf}\n");
    h += "property list uchar int vertex_indices\n";
    for (t, n) in FACE_PROPS {
        h += &format!("property {t} {n}\n");
    }
    h += "end_header\n";
    h
}

pub fn encode_ply(mesh: &SceneMesh) -> Vec<u8> {
    let mut out = header(mesh.vertices.len(), mesh.faces.len()).into_bytes();
    for i in 0..mesh.vertices.len() {
        for x in mesh.vertices[i] {
            out.extend(x.to_le_bytes());
        }
        let c = mesh.vertex_color[i];
        for x in c {
            out.push((linear_to_srgb(x.clamp(0.0, 1.0)) * 255.0).round() as u8);
        }
        for x in c {
            out.extend(x.to_le_bytes());
        }
        let m = mesh.material[i];
        for x in m.albedo {
            out.extend(x.to_le_bytes());
        }
        out.extend(m.roughness.to_le_bytes());
        let (kind, row, col) = match mesh.origin[i] {
            VertexOrigin::Free => (0u8, -1i32, -1i32),
            VertexOrigin::Grid { row, col } => (1, row as i32, col as i32),
            VertexOrigin::Inserted { row, col } => (2, row as i32, col as i32),
        };
        out.push(kind);
        out.extend(row.to_le_bytes());
        out.extend(col.to_le_bytes());
    }
    for (f, e) in mesh.faces.iter().zip(&mesh.emission) {
        out.push(3);
        for &v in f {
            out.extend((v as i32).to_le_bytes());
        }
        out.push(e.is_some() as u8);
        for x in e.unwrap_or([0.0; 3]) {
            out.extend(x.to_le_bytes());
        }
    }
    out
}

pub fn write_ply(mesh: &SceneMesh, path: &Path) -> Result<()> {
    fs::write(path, encode_ply(mesh)).map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let s = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::format(self.path, "truncated PLY body"))?;
        self.pos = end;
        Ok(s.try_into().expect("slice length"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn f64x3(&mut self) -> Result<[f64; 3]> {
        Ok([self.f64()?, self.f64()?, self.f64()?])
    }
}

/// Reads the layout written by [`encode_ply`].
pub fn decode_ply(bytes: &[u8], path: &Path) -> Result<SceneMesh> {
    const END: &[u8] = b"end_header\n";
    let hend = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| Error::format(path, "missing end_header"))?
        + END.len();
    let text = std::str::from_utf8(&bytes[..hend]).map_err(|_| Error::format(path, "header is not UTF-8"))?;
    let mut lines = text.lines();
    if lines.next() != Some("ply") {
        return Err(Error::format(path, "not a PLY file"));
    }
    let (mut nv, mut nf) = (None, None);
    for l in text.lines() {
        if let Some(rest) = l.strip_prefix("format ") {
            if !rest.starts_with("binary_little_endian") {
                return Err(Error::format(path, format!("unsupported PLY format '{rest}'")));
            }
        } else if let Some(n) = l.strip_prefix("element vertex ") {
            nv = n.trim().parse::<usize>().ok();
        } else if let Some(n) = l.strip_prefix("element face ") {
            nf = n.trim().parse::<usize>().ok();
        }
    }
    let (nv, nf) = match (nv, nf) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::format(path, "missing vertex/face element counts")),
    };
    if text != header(nv, nf) {
        return Err(Error::format(path, "PLY property layout is not the one this reader expects"));
    }

    let mut c = Cursor { buf: bytes, pos: hend, path };
    let mut mesh = SceneMesh {
        vertices: Vec::with_capacity(nv),
        origin: Vec::with_capacity(nv),
        faces: Vec::with_capacity(nf),
        vertex_color: Vec::with_capacity(nv),
        material: Vec::with_capacity(nv),
        emission: Vec::with_capacity(nf),
    };
    for _ in 0..nv {
        mesh.vertices.push(c.f64x3()?);
        c.take::<3>()?;
        mesh.vertex_color.push(c.f64x3()?);
        let albedo = c.f64x3()?;
        let roughness = c.f64()?;
        mesh.material.push(Material { albedo, roughness });
        let kind = c.u8()?;
        let (row, col) = (c.i32()?, c.i32()?);
        mesh.origin.push(match kind {
            0 => VertexOrigin::Free,
            1 | 2 if row >= 0 && col >= 0 => {
                let (row, col) = (row as usize, col as usize);
                if kind == 1 {
                    VertexOrigin::Grid { row, col }
                } else {
                    VertexOrigin::Inserted { row, col }
                }
            }
            _ => return Err(Error::format(path, format!("bad vertex origin tag {kind}"))),
        });
    }
    for i in 0..nf {
        if c.u8()? != 3 {
            return Err(Error::format(path, format!("face {i} is not a triangle")));
        }
        let mut f = [0usize; 3];
        for v in &mut f {
            let x = c.i32()?;
            if x < 0 || x as usize >= nv {
                return Err(Error::format(path, format!("face {i} index {x} out of range")));
            }
            *v = x as usize;
        }
        mesh.faces.push(f);
        let emissive = c.u8()? != 0;
        let e = c.f64x3()?;
        mesh.emission.push(emissive.then_some(e));
    }
    if c.pos != bytes.len() {
        return Err(Error::format(path, "trailing bytes after PLY body"));
    }
    Ok(mesh)
}

pub fn read_ply(path: &Path) -> Result<SceneMesh> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_ply(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_shape() {
        let h = header(2, 1);
        assert!(h.starts_with("ply\nformat binary_little_endian 1.0\nelement vertex 2\n"));
        assert!(h.ends_with("end_header\n"));
    }

    #[test]
    fn truncated_body() {
        let m = SceneMesh {
            vertices: vec![[0.0, 0.0, 1.0]; 3],
            origin: vec![VertexOrigin::Grid { row: 0, col: 1 }; 3],
            faces: vec![[0, 1, 2]],
            vertex_color: vec![[0.25; 3]; 3],
            material: vec![Material { albedo: [0.25; 3], roughness: 1.0 }; 3],
            emission: vec![Some([1.0, 2.0, 3.0])],
        };
        let bytes = encode_ply(&m);
        assert_eq!(decode_ply(&bytes, Path::new("m.ply")).unwrap(), m);
        let e = decode_ply(&bytes[..bytes.len() - 1], Path::new("m.ply")).unwrap_err();
        assert!(e.to_string().contains("truncated"));
    }
}
