//! Raster file formats.

mod pfm;
mod png;

pub use self::pfm::{decode_pfm, encode_pfm, read_pfm, write_pfm};
pub use self::png::{
    read_png_gray16, read_png_gray8, read_png_rgb8, read_png_rgb_unit, write_png_gray16, write_png_gray8,
    write_png_rgb8,
};
