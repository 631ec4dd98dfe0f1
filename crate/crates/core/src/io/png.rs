//! 8-bit RGB, 8-bit gray and 16-bit gray PNG through the `png` crate.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::grid::PixelGrid;

struct Decoded {
    width: usize,
    height: usize,
    color: ColorType,
    depth: BitDepth,
    bytes: Vec<u8>,
}

fn decode(path: &Path) -> Result<Decoded> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, format!("format mismatch: not a readable PNG ({e})")))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "PNG too large"))?;
    let mut bytes = vec![0; size];
    let info = reader
        .next_frame(&mut bytes)
        .map_err(|e| Error::format(path, format!("corrupt PNG: {e}")))?;
    bytes.truncate(info.buffer_size());
    Ok(Decoded {
        width: info.width as usize,
        height: info.height as usize,
        color: info.color_type,
        depth: info.bit_depth,
        bytes,
    })
}

/// Reads any 8-bit PNG as RGB; gray is replicated and alpha dropped.
pub fn read_png_rgb8(path: &Path) -> Result<PixelGrid<u8>> {
    let d = decode(path)?;
    if d.depth != BitDepth::Eight {
        return Err(Error::format(path, format!("expected 8-bit RGB PNG, got {:?}-bit", d.depth)));
    }
    let step = match d.color {
        ColorType::Rgb => 3,
        ColorType::Rgba => 4,
        ColorType::Grayscale => 1,
        ColorType::GrayscaleAlpha => 2,
        ColorType::Indexed => unreachable!("expanded"),
    };
    let mut data = Vec::with_capacity(d.width * d.height * 3);
    for px in d.bytes.chunks_exact(step) {
        if step >= 3 {
            data.extend_from_slice(&px[..3]);
        } else {
            data.extend([px[0]; 3]);
        }
    }
    PixelGrid::new(d.width, d.height, 3, data)
}

/// RGB PNG scaled to [0, 1].
pub fn read_png_rgb_unit(path: &Path) -> Result<PixelGrid> {
    Ok(read_png_rgb8(path)?.map(|v| v as f64 / 255.0))
}

pub fn read_png_gray8(path: &Path) -> Result<PixelGrid<u8>> {
    let d = decode(path)?;
    if d.color != ColorType::Grayscale || d.depth != BitDepth::Eight {
        return Err(Error::format(
            path,
            format!("format mismatch: expected 8-bit single-channel PNG, got {:?} {:?}-bit", d.color, d.depth),
        ));
    }
    PixelGrid::new(d.width, d.height, 1, d.bytes)
}

/// Reads a single-channel PNG as 16-bit; 8-bit files are widened.
pub fn read_png_gray16(path: &Path) -> Result<PixelGrid<u16>> {
    let d = decode(path)?;
    if d.color != ColorType::Grayscale {
        return Err(Error::format(
            path,
            format!("format mismatch: expected single-channel PNG, got {:?}", d.color),
        ));
    }
    let data: Vec<u16> = match d.depth {
        BitDepth::Sixteen => d.bytes.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect(),
        BitDepth::Eight => d.bytes.iter().map(|&b| b as u16).collect(),
        other => return Err(Error::format(path, format!("unsupported bit depth {other:?}"))),
    };
    PixelGrid::new(d.width, d.height, 1, data)
}

fn encode(path: &Path, w: usize, h: usize, color: ColorType, depth: BitDepth, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    enc.set_color(color);
    enc.set_depth(depth);
    let werr = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    };
    let mut writer = enc.write_header().map_err(werr)?;
    writer.write_image_data(bytes).map_err(werr)?;
    writer.finish().map_err(werr)
}

pub fn write_png_rgb8(grid: &PixelGrid<u8>, path: &Path) -> Result<()> {
    grid.check_channels(3, "rgb PNG")?;
    encode(path, grid.width(), grid.height(), ColorType::Rgb, BitDepth::Eight, grid.data())
}

pub fn write_png_gray8(grid: &PixelGrid<u8>, path: &Path) -> Result<()> {
    grid.check_channels(1, "gray PNG")?;
    encode(path, grid.width(), grid.height(), ColorType::Grayscale, BitDepth::Eight, grid.data())
}

pub fn write_png_gray16(grid: &PixelGrid<u16>, path: &Path) -> Result<()> {
    grid.check_channels(1, "16-bit PNG")?;
    let bytes: Vec<u8> = grid.data().iter().flat_map(|v| v.to_be_bytes()).collect();
    encode(path, grid.width(), grid.height(), ColorType::Grayscale, BitDepth::Sixteen, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let rgb = PixelGrid::from_fn_n::<3>(5, 3, |r, c| [r as u8, c as u8, 200]);
        let p = dir.path().join("a.png");
        write_png_rgb8(&rgb, &p).unwrap();
        assert_eq!(read_png_rgb8(&p).unwrap(), rgb);

        let g = PixelGrid::from_fn(4, 2, |r, c| (r * 300 + c * 7000) as u16);
        let p = dir.path().join("b.png");
        write_png_gray16(&g, &p).unwrap();
        assert_eq!(read_png_gray16(&p).unwrap(), g);
        assert!(read_png_gray8(&p).is_err());

        let l = PixelGrid::from_fn(3, 3, |r, c| (r + c) as u8);
        let p = dir.path().join("c.png");
        write_png_gray8(&l, &p).unwrap();
        assert_eq!(read_png_gray8(&p).unwrap(), l);
        assert_eq!(read_png_gray16(&p).unwrap(), l.map(|v| v as u16));
        assert_eq!(read_png_rgb8(&p).unwrap().pixel(2, 2), &[4, 4, 4]);
    }

    #[test]
    fn non_png_is_format_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.png");
        std::fs::write(&p, b"Pf\n1 1\n-1\n\0\0\0\0").unwrap();
        let e = read_png_rgb8(&p).unwrap_err();
        assert!(e.to_string().contains("format mismatch"));
    }
}
