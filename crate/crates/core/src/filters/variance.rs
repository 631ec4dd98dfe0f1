//! Dual-reference variance filter.
//!
//! An `l x l` window anchored at its top-left pixel is alerted when the
//! population variance of max-normalized depth inside it exceeds `mu` and it
//! holds at least two distinct semantic classes, one of them foreground.
//! Every pixel of an alerted window is marked uncertain.

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::grid::{LabelGrid, PixelGrid};

/// Binary per-pixel uncertainty map (1 = uncertain).
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainMap(PixelGrid<u8>);

impl UncertainMap {
    pub fn new(grid: PixelGrid<u8>) -> Result<Self> {
        grid.check_channels(1, "uncertainty map")?;
        if grid.data().iter().any(|&v| v > 1) {
            return Err(Error::Config("uncertainty map values must be 0 or 1".into()));
        }
        Ok(Self(grid))
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self(PixelGrid::filled(width, height, 1, 0))
    }

    pub fn ones(width: usize, height: usize) -> Self {
        Self(PixelGrid::filled(width, height, 1, 1))
    }

    #[inline]
    pub fn is_set(&self, row: usize, col: usize) -> bool {
        self.0.get(row, col) != 0
    }

    pub fn set(&mut self, row: usize, col: usize, on: bool) {
        self.0.set(row, col, on as u8);
    }

    pub fn grid(&self) -> &PixelGrid<u8> {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn count(&self) -> usize {
        self.0.data().iter().filter(|&&v| v != 0).count()
    }

    /// Uncertainty as a float mask, as consumed by the continuity loss.
    pub fn as_f64(&self) -> PixelGrid {
        self.0.map(|v| v as f64)
    }
}

pub fn flag_uncertain_regions(
    depth: &PixelGrid,
    semantic: &LabelGrid,
    cfg: &PipelineConfig,
) -> Result<UncertainMap> {
    depth.check_channels(1, "depth map")?;
    depth.check_same_size(semantic, "semantic map")?;
    let l = cfg.variance.window;
    let (w, h) = (depth.width(), depth.height());
    if l == 0 || l > w.min(h) {
        return Err(Error::Config(format!(
            "variance window {l} does not fit a {w}x{h} image"
        )));
    }
    let mu = cfg.variance.mu;
    let fg = cfg.foreground_table();

    let (_, max) = depth.min_max();
    if !(max > 0.0 && max.is_finite()) {
        return Err(Error::Config("depth maximum must be positive and finite".into()));
    }
    let norm: Vec<f64> = depth.data().iter().map(|&d| d / max).collect();
    let labels = semantic.data();
    let n = (l * l) as f64;

    let anchors_w = w - l + 1;
    let anchors_h = h - l + 1;
    let alerted: Vec<bool> = (0..anchors_h)
        .into_par_iter()
        .flat_map_iter(|r0| {
            let norm = &norm;
            (0..anchors_w).map(move |c0| {
                let first = labels[r0 * w + c0];
                let mut mixed = false;
                let mut has_fg = false;
                for r in r0..r0 + l {
                    for &lab in &labels[r * w + c0..r * w + c0 + l] {
                        mixed |= lab != first;
                        has_fg |= fg[lab as usize];
                    }
                }
                if !(mixed && has_fg) {
                    return false;
                }
                let mut sum = 0.0;
                for r in r0..r0 + l {
                    sum += norm[r * w + c0..r * w + c0 + l].iter().sum::<f64>();
                }
                let mean = sum / n;
                let mut ss = 0.0;
                for r in r0..r0 + l {
                    ss += norm[r * w + c0..r * w + c0 + l]
                        .iter()
                        .map(|&v| (v - mean) * (v - mean))
                        .sum::<f64>();
                }
                ss / n > mu
            })
        })
        .collect();

    // A pixel is marked iff some alerted anchor lies in [p - l + 1, p] on both axes;
    // count anchors with a 2D prefix sum.
    let mut prefix = vec![0u32; (anchors_h + 1) * (anchors_w + 1)];
    let pw = anchors_w + 1;
    for r in 0..anchors_h {
        for c in 0..anchors_w {
            prefix[(r + 1) * pw + c + 1] = alerted[r * anchors_w + c] as u32
                + prefix[r * pw + c + 1]
                + prefix[(r + 1) * pw + c]
                - prefix[r * pw + c];
        }
    }
    let mut out = PixelGrid::filled(w, h, 1, 0u8);
    for r in 0..h {
        let ar0 = r.saturating_sub(l - 1);
        let ar1 = r.min(anchors_h - 1);
        for c in 0..w {
            let ac0 = c.saturating_sub(l - 1);
            let ac1 = c.min(anchors_w - 1);
            let count = prefix[(ar1 + 1) * pw + ac1 + 1] + prefix[ar0 * pw + ac0]
                - prefix[ar0 * pw + ac1 + 1]
                - prefix[(ar1 + 1) * pw + ac0];
            if count > 0 {
                out.set(r, c, 1);
            }
        }
    }
    Ok(UncertainMap(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::label;

    fn cfg(l: usize, mu: f64) -> PipelineConfig {
        let mut c = PipelineConfig::default();
        c.variance.window = l;
        c.variance.mu = mu;
        c
    }

    #[test]
    fn uniform_input_is_clear() {
        let d = PixelGrid::filled(16, 16, 1, 3.0);
        let s = PixelGrid::filled(16, 16, 1, label::CAR);
        let u = flag_uncertain_regions(&d, &s, &cfg(8, 0.001)).unwrap();
        assert_eq!(u.count(), 0);
    }

    #[test]
    fn half_and_half_car_on_road_is_alerted() {
        // Normalized depth 0 / 1 halves have population variance 0.25.
        let d = PixelGrid::from_fn(8, 8, |_, c| if c < 4 { 1e-9 } else { 1.0 });
        let s = PixelGrid::from_fn(8, 8, |_, c| if c < 4 { label::ROAD } else { label::CAR });
        let u = flag_uncertain_regions(&d, &s, &cfg(8, 0.001)).unwrap();
        assert_eq!(u.count(), 64);
    }

    #[test]
    fn background_boundary_is_not_alerted() {
        let d = PixelGrid::from_fn(12, 12, |_, c| if c < 6 { 2.0 } else { 9.0 });
        let s = PixelGrid::from_fn(12, 12, |_, c| if c < 6 { label::ROAD } else { label::SIDEWALK });
        let u = flag_uncertain_regions(&d, &s, &cfg(8, 0.001)).unwrap();
        assert_eq!(u.count(), 0);
    }

    #[test]
    fn window_larger_than_image_is_config_error() {
        let d = PixelGrid::filled(6, 10, 1, 1.0);
        let s = PixelGrid::filled(6, 10, 1, 0u8);
        assert!(matches!(
            flag_uncertain_regions(&d, &s, &cfg(7, 0.001)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn step_marks_band_around_boundary() {
        let d = PixelGrid::from_fn(24, 16, |_, c| if c < 12 { 3.0 } else { 10.0 });
        let s = PixelGrid::from_fn(24, 16, |_, c| if c < 12 { label::CAR } else { label::BUILDING });
        let u = flag_uncertain_regions(&d, &s, &cfg(4, 0.001)).unwrap();
        for r in 0..16 {
            for c in 0..24 {
                // windows straddling columns 11|12 are anchored at 9..=11
                assert_eq!(u.is_set(r, c), (9..=14).contains(&c), "({r},{c})");
            }
        }
    }
}
