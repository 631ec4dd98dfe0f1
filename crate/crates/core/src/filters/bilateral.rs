//! Dual-reference cross-bilateral filter.
//!
//! Each output depth is a normalized weighted average over a square window:
//!
//! ```text
//! w(p, q) = Gs(|q - p|) * ( [h(q) == h(p)] + mu * Gc(|J(q) - J(p)|) )
//! d(p)    = sum_q w(p, q) d_in(q) / sum_q w(p, q)
//! ```
//!
//! `h` is the semantic label and `J` the CIELAB image. Gaussians are
//! unnormalized (`exp(-x^2 / 2 sigma^2)`), so the q = p term always
//! contributes `1 + mu > 0` and the denominator never vanishes.

use rayon::prelude::*;

use crate::config::BilateralConfig;
use crate::error::{Error, Result};
use crate::grid::{LabelGrid, PixelGrid};

pub fn cross_bilateral_filter(
    depth: &PixelGrid,
    lab: &PixelGrid,
    semantic: &LabelGrid,
    cfg: &BilateralConfig,
) -> Result<PixelGrid> {
    depth.check_channels(1, "depth map")?;
    lab.check_channels(3, "CIELAB image")?;
    depth.check_same_size(lab, "CIELAB image")?;
    depth.check_same_size(semantic, "semantic map")?;
    if !(cfg.sigma_s > 0.0 && cfg.sigma_c > 0.0 && cfg.mu >= 0.0) {
        return Err(Error::Config("bilateral sigmas must be positive and mu >= 0".into()));
    }

    let (w, h) = (depth.width(), depth.height());
    let radius = cfg.radius() as isize;
    let side = (2 * radius + 1) as usize;
    let inv_2s2 = 1.0 / (2.0 * cfg.sigma_s * cfg.sigma_s);
    let inv_2c2 = 1.0 / (2.0 * cfg.sigma_c * cfg.sigma_c);

    let mut spatial = vec![0.0; side * side];
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let d2 = (dx * dx + dy * dy) as f64;
            spatial[((dy + radius) as usize) * side + (dx + radius) as usize] = (-d2 * inv_2s2).exp();
        }
    }

    let d_in = depth.data();
    let j = lab.data();
    let labels = semantic.data();
    let mut out = vec![0.0; w * h];

    out.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
        let r0 = (r as isize - radius).max(0) as usize;
        let r1 = ((r as isize + radius) as usize).min(h - 1);
        for (c, o) in row.iter_mut().enumerate() {
            let c0 = (c as isize - radius).max(0) as usize;
            let c1 = ((c as isize + radius) as usize).min(w - 1);
            let p = r * w + c;
            let hp = labels[p];
            let jp = &j[3 * p..3 * p + 3];
            let mut num = 0.0;
            let mut den = 0.0;
            for qr in r0..=r1 {
                let krow = (qr as isize - r as isize + radius) as usize * side;
                for qc in c0..=c1 {
                    let q = qr * w + qc;
                    let ws = spatial[krow + (qc as isize - c as isize + radius) as usize];
                    let jq = &j[3 * q..3 * q + 3];
                    let dl = jq[0] - jp[0];
                    let da = jq[1] - jp[1];
                    let db = jq[2] - jp[2];
                    let wc = (-(dl * dl + da * da + db * db) * inv_2c2).exp();
                    let same = if labels[q] == hp { 1.0 } else { 0.0 };
                    let wt = ws * (same + cfg.mu * wc);
                    num += wt * d_in[q];
                    den += wt;
                }
            }
            *o = num / den;
        }
    });

    PixelGrid::new(w, h, 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::KeyedRng;

    fn cfg(sigma_s: f64, sigma_c: f64, mu: f64) -> BilateralConfig {
        BilateralConfig {
            sigma_s,
            sigma_c,
            mu,
            window_radius: None,
        }
    }

    /// Literal evaluation of the weighted average, no precomputed tables.
    fn oracle(depth: &PixelGrid, lab: &PixelGrid, sem: &LabelGrid, c: &BilateralConfig, r: usize, col: usize) -> f64 {
        let rad = c.radius() as i64;
        let (mut num, mut den) = (0.0, 0.0);
        for qr in 0..depth.height() as i64 {
            for qc in 0..depth.width() as i64 {
                if (qr - r as i64).abs() > rad || (qc - col as i64).abs() > rad {
                    continue;
                }
                let ds = (((qr - r as i64).pow(2) + (qc - col as i64).pow(2)) as f64).sqrt();
                let gs = (-(ds * ds) / (2.0 * c.sigma_s * c.sigma_s)).exp();
                let a = lab.vec3(qr as usize, qc as usize);
                let b = lab.vec3(r, col);
                let dc = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                let gc = (-(dc * dc) / (2.0 * c.sigma_c * c.sigma_c)).exp();
                let delta = (sem.get(qr as usize, qc as usize) == sem.get(r, col)) as u8 as f64;
                let wgt = gs * (delta + c.mu * gc);
                num += wgt * depth.get(qr as usize, qc as usize);
                den += wgt;
            }
        }
        num / den
    }

    #[test]
    fn constant_depth_is_fixed_point() {
        let mut rng = KeyedRng::new(1, &[]);
        let d = PixelGrid::filled(12, 9, 1, 2.0);
        let lab = PixelGrid::from_fn_n(12, 9, |_, _| [rng.uniform() * 100.0, rng.uniform() * 50.0, 0.0]);
        let sem = PixelGrid::from_fn(12, 9, |r, c| ((r + c) % 3) as u8);
        let out = cross_bilateral_filter(&d, &lab, &sem, &cfg(2.0, 5.0, 5.0)).unwrap();
        assert!(out.data().iter().all(|&v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn zero_mu_is_class_masked_gaussian() {
        let mut rng = KeyedRng::new(2, &[]);
        let (w, h) = (10, 8);
        let d = PixelGrid::from_fn(w, h, |_, _| 1.0 + rng.uniform());
        let lab = PixelGrid::filled(w, h, 3, 50.0);
        let sem = PixelGrid::from_fn(w, h, |r, c| (r * 3 + c > 12) as u8);
        let c = cfg(1.5, 5.0, 0.0);
        let out = cross_bilateral_filter(&d, &lab, &sem, &c).unwrap();
        let rad = c.radius() as i64;
        for r in 0..h {
            for col in 0..w {
                let (mut num, mut den) = (0.0, 0.0);
                for qr in 0..h {
                    for qc in 0..w {
                        let (dy, dx) = (qr as i64 - r as i64, qc as i64 - col as i64);
                        if dy.abs() > rad || dx.abs() > rad || sem.get(qr, qc) != sem.get(r, col) {
                            continue;
                        }
                        let g = (-((dx * dx + dy * dy) as f64) / (2.0 * 1.5 * 1.5)).exp();
                        num += g * d.get(qr, qc);
                        den += g;
                    }
                }
                let want = num / den;
                assert!((out.get(r, col) - want).abs() <= 1e-12 * want.abs());
            }
        }
    }

    #[test]
    fn step_boundary_center_matches_oracle() {
        // 5x5, classes split at column 2/3, depth 1.0 left and 3.0 right.
        let d = PixelGrid::from_fn(5, 5, |_, c| if c < 3 { 1.0 } else { 3.0 });
        let sem = PixelGrid::from_fn(5, 5, |_, c| if c < 3 { 0u8 } else { 1u8 });
        let lab = PixelGrid::from_fn_n(5, 5, |_, c| if c < 3 { [40.0, 10.0, 5.0] } else { [70.0, -5.0, 20.0] });
        let c = cfg(1.0, 5.0, 5.0);
        let out = cross_bilateral_filter(&d, &lab, &sem, &c).unwrap();
        let want = oracle(&d, &lab, &sem, &c, 2, 2);
        assert!((out.get(2, 2) - want).abs() <= 1e-12 * want);
        assert!(out.get(2, 2) > 1.0 && out.get(2, 2) < 3.0);
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let d = PixelGrid::filled(4, 4, 1, 1.0);
        let lab = PixelGrid::filled(4, 3, 3, 1.0);
        let sem = PixelGrid::filled(4, 4, 1, 0u8);
        assert!(cross_bilateral_filter(&d, &lab, &sem, &cfg(1.0, 1.0, 1.0)).is_err());
    }
}
