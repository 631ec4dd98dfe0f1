//! Portable float map: `Pf` (gray) or `PF` (RGB), rows stored bottom-up.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::PixelGrid;

const PNG_MAGIC: &[u8] = b"\x89PNG";

/// Little-endian, scale -1.
pub fn encode_pfm(grid: &PixelGrid) -> Result<Vec<u8>> {
    let tag = match grid.channels() {
        1 => "Pf",
        3 => "PF",
        n => {
            return Err(Error::ChannelMismatch {
                what: "PFM raster".into(),
                expected: 3,
                got: n,
            })
        }
    };
    let (w, h, ch) = (grid.width(), grid.height(), grid.channels());
    let mut out = format!("{tag}\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * ch * 4);
    for r in (0..h).rev() {
        for &x in &grid.data()[r * w * ch..(r + 1) * w * ch] {
            out.extend((x as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn write_pfm(grid: &PixelGrid, path: &Path) -> Result<()> {
    let bytes = encode_pfm(grid)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return None;
    }
    std::str::from_utf8(&bytes[start..*pos]).ok()
}

pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<PixelGrid> {
    if bytes.starts_with(PNG_MAGIC) {
        return Err(Error::format(path, "format mismatch: PNG data where PFM was expected"));
    }
    let mut pos = 0;
    let channels = match token(bytes, &mut pos) {
        Some("Pf") => 1,
        Some("PF") => 3,
        _ => return Err(Error::format(path, "format mismatch: missing Pf/PF header")),
    };
    let mut num = |what: &str| -> Result<&str> {
        token(bytes, &mut pos).ok_or_else(|| Error::format(path, format!("missing {what} in PFM header")))
    };
    let w: usize = num("width")?.parse().map_err(|_| Error::format(path, "bad PFM width"))?;
    let h: usize = num("height")?.parse().map_err(|_| Error::format(path, "bad PFM height"))?;
    let scale: f64 = num("scale")?.parse().map_err(|_| Error::format(path, "bad PFM scale"))?;
    if scale > 0.0 {
        return Err(Error::format(path, "unsupported endianness: big-endian PFM"));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format(path, "bad PFM scale"));
    }
    // exactly one whitespace byte ends the header
    pos += 1;
    let need = w * h * channels * 4;
    let body = bytes
        .get(pos..)
        .filter(|b| b.len() == need)
        .ok_or_else(|| Error::format(path, format!("PFM body is not {need} bytes")))?;
    let mut data = vec![0.0; w * h * channels];
    let row_len = w * channels;
    for (i, chunk) in body.chunks_exact(4).enumerate() {
        let (file_row, k) = (i / row_len, i % row_len);
        let r = h - 1 - file_row;
        data[r * row_len + k] = f32::from_le_bytes(chunk.try_into().expect("4 bytes")) as f64;
    }
    PixelGrid::new(w, h, channels, data)
}

pub fn read_pfm(path: &Path) -> Result<PixelGrid> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes, path)
}
