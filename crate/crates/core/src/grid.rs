//! Row-major rasters shared by every stage of the pipeline.

use crate::error::{Error, Result};

/// A `width x height` raster with `channels` interleaved values per pixel.
///
/// Floating point grids (`PixelGrid<f64>`) carry depth, normals, colors and
/// losses. Integer grids carry semantic labels (`u8`), instance masks (`u16`)
/// and binary maps.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid<T = f64> {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<T>,
}

/// Semantic class IDs, one per pixel.
pub type LabelGrid = PixelGrid<u8>;

/// Light-source instance IDs, one per pixel, 0 meaning "no instance".
pub type InstanceGrid = PixelGrid<u16>;

impl<T: Copy> PixelGrid<T> {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if !(1..=4).contains(&channels) {
            return Err(Error::ChannelMismatch {
                what: "pixel grid".into(),
                expected: 4,
                got: channels,
            });
        }
        if data.len() != width * height * channels {
            return Err(Error::Config(format!(
                "grid data length {} does not match {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: T) -> Self {
        assert!((1..=4).contains(&channels), "channels must be 1..=4");
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    /// Builds a single-channel grid by evaluating `f(row, col)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            data,
        }
    }

    /// Builds a grid with `N` channels by evaluating `f(row, col)`.
    pub fn from_fn_n<const N: usize>(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [T; N],
    ) -> Self {
        assert!((1..=4).contains(&N), "channels must be 1..=4");
        let mut data = Vec::with_capacity(width * height * N);
        for r in 0..height {
            for c in 0..width {
                data.extend_from_slice(&f(r, c));
            }
        }
        Self {
            width,
            height,
            channels: N,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        (row * self.width + col) * self.channels
    }

    /// First channel at `(row, col)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[self.index(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        let i = self.index(row, col);
        self.data[i] = value;
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> &[T] {
        let i = self.index(row, col);
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, row: usize, col: usize) -> &mut [T] {
        let i = self.index(row, col);
        let ch = self.channels;
        &mut self.data[i..i + ch]
    }

    #[inline]
    pub fn same_size<U: Copy>(&self, other: &PixelGrid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Fails with a [`Error::DimensionMismatch`] unless `other` shares this grid's size.
    pub fn check_same_size<U: Copy>(&self, other: &PixelGrid<U>, what: &str) -> Result<()> {
        if self.same_size(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what: what.to_string(),
                got_w: other.width,
                got_h: other.height,
                want_w: self.width,
                want_h: self.height,
            })
        }
    }

    pub fn check_channels(&self, expected: usize, what: &str) -> Result<()> {
        if self.channels == expected {
            Ok(())
        } else {
            Err(Error::ChannelMismatch {
                what: what.to_string(),
                expected,
                got: self.channels,
            })
        }
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> PixelGrid<U> {
        PixelGrid {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl PixelGrid<f64> {
    /// 3-vector at `(row, col)`; the grid must have 3 channels.
    #[inline]
    pub fn vec3(&self, row: usize, col: usize) -> [f64; 3] {
        let i = self.index(row, col);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centers at integers).
    pub fn sample_bilinear(&self, row: f64, col: f64, out: &mut [f64]) {
        let r = row.clamp(0.0, (self.height - 1) as f64);
        let c = col.clamp(0.0, (self.width - 1) as f64);
        let r0 = r.floor() as usize;
        let c0 = c.floor() as usize;
        let r1 = (r0 + 1).min(self.height - 1);
        let c1 = (c0 + 1).min(self.width - 1);
        let fr = r - r0 as f64;
        let fc = c - c0 as f64;
        for (ch, o) in out.iter_mut().enumerate().take(self.channels) {
            let a = self.data[self.index(r0, c0) + ch];
            let b = self.data[self.index(r0, c1) + ch];
            let d = self.data[self.index(r1, c0) + ch];
            let e = self.data[self.index(r1, c1) + ch];
            let top = a + (b - a) * fc;
            let bot = d + (e - d) * fc;
            *o = top + (bot - top) * fr;
        }
    }

    /// Bilinear resize to `width x height`, aligning pixel centers.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Self {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let sy = self.height as f64 / height as f64;
        let sx = self.width as f64 / width as f64;
        let ch = self.channels;
        let mut data = vec![0.0; width * height * ch];
        for r in 0..height {
            let src_r = (r as f64 + 0.5) * sy - 0.5;
            for c in 0..width {
                let src_c = (c as f64 + 0.5) * sx - 0.5;
                let i = (r * width + c) * ch;
                self.sample_bilinear(src_r, src_c, &mut data[i..i + ch]);
            }
        }
        Self {
            width,
            height,
            channels: ch,
            data,
        }
    }
}

impl<T: Copy> PixelGrid<T> {
    /// Nearest-neighbour resize, used for labels and instance masks.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Self {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let ch = self.channels;
        let mut data = Vec::with_capacity(width * height * ch);
        for r in 0..height {
            let sr = (((r as f64 + 0.5) * self.height as f64 / height as f64) as usize)
                .min(self.height - 1);
            for c in 0..width {
                let sc = (((c as f64 + 0.5) * self.width as f64 / width as f64) as usize)
                    .min(self.width - 1);
                data.extend_from_slice(self.pixel(sr, sc));
            }
        }
        Self {
            width,
            height,
            channels: ch,
            data,
        }
    }
}
