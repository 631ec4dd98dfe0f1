//! Refinement losses and their exact gradient with respect to depth.
//!
//! Normal and continuity terms are means over interior pixels (those with a
//! full central-difference stencil); the depth term is a mean over all
//! pixels. The gradient back-propagates through the stencils, the `fx / d`
//! pixel-to-camera scaling (including its dependence on `d`) and the
//! normalization of the implied normal.

use rayon::prelude::*;

use crate::camera::CameraModel;
use crate::config::RefineConfig;
use crate::error::Result;
use crate::filters::UncertainMap;
use crate::grid::PixelGrid;

use super::geometry::slope_normal;

/// Per-term loss values and their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub normal_loss: f64,
    pub continuity_loss: f64,
    pub depth_loss: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub normal: f64,
    pub continuity: f64,
    pub depth: f64,
}

impl From<&RefineConfig> for LossWeights {
    fn from(c: &RefineConfig) -> Self {
        Self {
            normal: c.lambda1,
            continuity: c.lambda2,
            depth: c.lambda3,
        }
    }
}

impl LossWeights {
    pub fn combine(&self, normal: f64, continuity: f64, depth: f64) -> LossBreakdown {
        LossBreakdown {
            normal_loss: normal,
            continuity_loss: continuity,
            depth_loss: depth,
            total: self.normal * normal + self.continuity * continuity + self.depth * depth,
        }
    }
}

/// Everything the objective needs besides the depth being optimized.
#[derive(Debug, Clone, Copy)]
pub struct RefineInputs<'a> {
    pub camera: &'a CameraModel,
    /// Unit reference normals, 3 channels.
    pub normal_ref: &'a PixelGrid,
    /// Initial depth estimate the result should stay close to.
    pub depth_est: &'a PixelGrid,
    pub uncertain: &'a UncertainMap,
}

impl RefineInputs<'_> {
    pub(crate) fn check(&self, depth: &PixelGrid) -> Result<()> {
        depth.check_channels(1, "depth map")?;
        self.normal_ref.check_channels(3, "reference normals")?;
        depth.check_same_size(self.normal_ref, "reference normals")?;
        depth.check_same_size(self.depth_est, "estimated depth")?;
        depth.check_same_size(self.uncertain.grid(), "uncertainty map")?;
        Ok(())
    }
}

/// Evaluates losses, optionally with the gradient.
pub(crate) struct Objective<'a> {
    width: usize,
    height: usize,
    fx: f64,
    fy: f64,
    normal_ref: &'a [f64],
    depth_est: &'a [f64],
    keep: Vec<f64>,
    weights: LossWeights,
}

#[derive(Default, Clone, Copy)]
struct RowSums {
    normal: f64,
    continuity: f64,
    depth: f64,
}

impl<'a> Objective<'a> {
    pub(crate) fn new(inputs: &RefineInputs<'a>, weights: LossWeights) -> Self {
        Self {
            width: inputs.depth_est.width(),
            height: inputs.depth_est.height(),
            fx: inputs.camera.fx(),
            fy: inputs.camera.fy(),
            normal_ref: inputs.normal_ref.data(),
            depth_est: inputs.depth_est.data(),
            keep: inputs
                .uncertain
                .grid()
                .data()
                .iter()
                .map(|&u| 1.0 - u as f64)
                .collect(),
            weights,
        }
    }

    fn interior_count(&self) -> usize {
        if self.width < 3 || self.height < 3 {
            0
        } else {
            (self.width - 2) * (self.height - 2)
        }
    }

    /// Returns the loss breakdown; fills `grad` with dL/dd when given.
    pub(crate) fn evaluate(&self, depth: &[f64], grad: Option<&mut [f64]>) -> LossBreakdown {
        let (w, h) = (self.width, self.height);
        let n_all = (w * h) as f64;
        let n_int = self.interior_count();
        let inv_int = if n_int > 0 { 1.0 / n_int as f64 } else { 0.0 };
        let wn = self.weights.normal * inv_int;
        let wc = self.weights.continuity * inv_int;
        let want_grad = grad.is_some();

        // Per-pixel adjoint coefficients for the gather pass:
        // a = dL/dp * fx/(2d), b = dL/dq * fy/(2d), s = -(dL/dp p + dL/dq q)/d.
        let mut coef_a = vec![0.0; if want_grad { w * h } else { 0 }];
        let mut coef_b = vec![0.0; coef_a.len()];
        let mut coef_s = vec![0.0; coef_a.len()];

        let row_sums: Vec<RowSums> = if want_grad {
            coef_a
                .par_chunks_mut(w)
                .zip(coef_b.par_chunks_mut(w))
                .zip(coef_s.par_chunks_mut(w))
                .enumerate()
                .map(|(r, ((a, b), s))| self.row_terms(depth, r, Some((a, b, s)), wn, wc))
                .collect()
        } else {
            (0..h)
                .into_par_iter()
                .map(|r| self.row_terms(depth, r, None, wn, wc))
                .collect()
        };

        let mut sums = RowSums::default();
        for rs in &row_sums {
            sums.normal += rs.normal;
            sums.continuity += rs.continuity;
            sums.depth += rs.depth;
        }
        let breakdown = self.weights.combine(
            sums.normal * inv_int,
            sums.continuity * inv_int,
            sums.depth / n_all,
        );

        if let Some(grad) = grad {
            let wd = 2.0 * self.weights.depth / n_all;
            grad.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
                for (c, g) in row.iter_mut().enumerate() {
                    let i = r * w + c;
                    let mut v = coef_s[i] + wd * (depth[i] - self.depth_est[i]);
                    if c > 0 {
                        v += coef_a[i - 1];
                    }
                    if c + 1 < w {
                        v -= coef_a[i + 1];
                    }
                    if r > 0 {
                        v += coef_b[i - w];
                    }
                    if r + 1 < h {
                        v -= coef_b[i + w];
                    }
                    *g = v;
                }
            });
        }
        breakdown
    }

    fn row_terms(
        &self,
        depth: &[f64],
        r: usize,
        mut coefs: Option<(&mut [f64], &mut [f64], &mut [f64])>,
        wn: f64,
        wc: f64,
    ) -> RowSums {
        let w = self.width;
        let mut sums = RowSums::default();
        for c in 0..w {
            let i = r * w + c;
            let e = depth[i] - self.depth_est[i];
            sums.depth += e * e;
        }
        if r == 0 || r + 1 >= self.height || w < 3 {
            return sums;
        }
        for c in 1..w - 1 {
            let i = r * w + c;
            let d = depth[i];
            let p = self.fx * (depth[i + 1] - depth[i - 1]) / (2.0 * d);
            let q = self.fy * (depth[i + w] - depth[i - w]) / (2.0 * d);
            let nr = &self.normal_ref[3 * i..3 * i + 3];

            let n = slope_normal(p, q);
            let e = [n[0] - nr[0], n[1] - nr[1], n[2] - nr[2]];
            sums.normal += e[0] * e[0] + e[1] * e[1] + e[2] * e[2];

            let keep = self.keep[i];
            let ca = nr[0] + p * nr[2];
            let cb = nr[1] + q * nr[2];
            sums.continuity += (ca * ca + cb * cb) * keep;

            if let Some((a, b, s)) = coefs.as_mut() {
                let inv_s = n[2];
                let inv_s3 = inv_s * inv_s * inv_s;
                // d n / d p and d n / d q for n = (-p, -q, 1) / sqrt(1 + p^2 + q^2)
                let dn_dp = [-inv_s + p * p * inv_s3, p * q * inv_s3, -p * inv_s3];
                let dn_dq = [p * q * inv_s3, -inv_s + q * q * inv_s3, -q * inv_s3];
                let dl_dp = wn * 2.0 * (e[0] * dn_dp[0] + e[1] * dn_dp[1] + e[2] * dn_dp[2])
                    + wc * 2.0 * ca * nr[2] * keep;
                let dl_dq = wn * 2.0 * (e[0] * dn_dq[0] + e[1] * dn_dq[1] + e[2] * dn_dq[2])
                    + wc * 2.0 * cb * nr[2] * keep;
                a[c] = dl_dp * self.fx / (2.0 * d);
                b[c] = dl_dq * self.fy / (2.0 * d);
                s[c] = -(dl_dp * p + dl_dq * q) / d;
            }
        }
        sums
    }
}

fn unweighted<'a>(inputs: &RefineInputs<'a>) -> Objective<'a> {
    Objective::new(
        inputs,
        LossWeights {
            normal: 1.0,
            continuity: 1.0,
            depth: 1.0,
        },
    )
}

/// Mean squared distance between implied and reference normals (interior pixels).
pub fn normal_loss(depth: &PixelGrid, cam: &CameraModel, normal_ref: &PixelGrid) -> Result<f64> {
    let u = UncertainMap::zeros(depth.width(), depth.height());
    let inputs = RefineInputs {
        camera: cam,
        normal_ref,
        depth_est: depth,
        uncertain: &u,
    };
    inputs.check(depth)?;
    Ok(unweighted(&inputs).evaluate(depth.data(), None).normal_loss)
}

/// Mean of `((1,0,dz/dx).N)^2 + ((0,1,dz/dy).N)^2` over certain interior pixels.
pub fn continuity_loss(
    depth: &PixelGrid,
    cam: &CameraModel,
    normal_ref: &PixelGrid,
    uncertain: &UncertainMap,
) -> Result<f64> {
    let inputs = RefineInputs {
        camera: cam,
        normal_ref,
        depth_est: depth,
        uncertain,
    };
    inputs.check(depth)?;
    Ok(unweighted(&inputs).evaluate(depth.data(), None).continuity_loss)
}

/// Mean squared per-pixel depth change.
pub fn depth_loss(depth: &PixelGrid, depth_est: &PixelGrid) -> Result<f64> {
    depth.check_same_size(depth_est, "estimated depth")?;
    let n = depth.len() as f64;
    Ok(depth
        .data()
        .iter()
        .zip(depth_est.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

pub fn total_loss(depth: &PixelGrid, inputs: &RefineInputs, weights: LossWeights) -> Result<LossBreakdown> {
    inputs.check(depth)?;
    Ok(Objective::new(inputs, weights).evaluate(depth.data(), None))
}

/// Exact gradient of [`total_loss`] with respect to every depth pixel.
pub fn loss_gradient(depth: &PixelGrid, inputs: &RefineInputs, weights: LossWeights) -> Result<PixelGrid> {
    inputs.check(depth)?;
    let mut grad = vec![0.0; depth.len()];
    Objective::new(inputs, weights).evaluate(depth.data(), Some(&mut grad));
    PixelGrid::new(depth.width(), depth.height(), 1, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::KeyedRng;

    fn cam(n: usize) -> CameraModel {
        CameraModel::from_fov(n, n, 1.0).unwrap()
    }

    fn up(n: usize) -> PixelGrid {
        PixelGrid::from_fn_n(n, n, |_, _| [0.0, 0.0, 1.0])
    }

    /// z = z0 exp(a (u - cx)/fx): implied slope dz/dx is exactly `a` up to
    /// central-difference truncation.
    fn model_plane(cam: &CameraModel, a: f64) -> PixelGrid {
        PixelGrid::from_fn(cam.width(), cam.height(), |_, c| {
            5.0 * (a * (c as f64 - cam.cx()) / cam.fx()).exp()
        })
    }

    #[test]
    fn matching_normals_give_zero_loss() {
        let cam = cam(12);
        let d = model_plane(&cam, 0.3);
        let nref = crate::refine::normal_from_depth(&d, &cam);
        assert_eq!(normal_loss(&d, &cam, &nref).unwrap(), 0.0);
    }

    #[test]
    fn tilted_plane_against_up_normals() {
        let cam = cam(32);
        let d = model_plane(&cam, 0.5);
        let l = normal_loss(&d, &cam, &up(32)).unwrap();
        // central differences of exp(a u / fx) give slope fx sinh(a / fx)
        let p = cam.fx() * (0.5 / cam.fx()).sinh();
        let s = (1.0 + p * p).sqrt();
        let want = (p / s).powi(2) + (1.0 / s - 1.0).powi(2);
        assert!((want - 0.2111).abs() < 1e-4);
        assert!((l - want).abs() < 1e-12, "{l} vs {want}");
    }

    #[test]
    fn flipping_a_reference_normal_increases_loss() {
        let cam = cam(10);
        let d = model_plane(&cam, 0.2);
        let mut nref = up(10);
        let before = normal_loss(&d, &cam, &nref).unwrap();
        for v in nref.pixel_mut(4, 4) {
            *v = -*v;
        }
        assert!(normal_loss(&d, &cam, &nref).unwrap() > before);
    }

    #[test]
    fn continuity_cases() {
        let cam = cam(16);
        let flat = PixelGrid::filled(16, 16, 1, 3.0);
        let zeros = UncertainMap::zeros(16, 16);
        assert_eq!(continuity_loss(&flat, &cam, &up(16), &zeros).unwrap(), 0.0);

        let tilted = model_plane(&cam, 0.4);
        let ones = UncertainMap::ones(16, 16);
        assert_eq!(continuity_loss(&tilted, &cam, &up(16), &ones).unwrap(), 0.0);

        // pixel-loop oracle: with N = (0,0,1) each interior term is (dz/dx)^2 + (dz/dy)^2
        let (gx, gy) = crate::refine::depth_gradients(&tilted, &cam);
        let mut sum = 0.0;
        for r in 1..15 {
            for c in 1..15 {
                sum += gx.get(r, c).powi(2) + gy.get(r, c).powi(2);
            }
        }
        let want = sum / 196.0;
        let got = continuity_loss(&tilted, &cam, &up(16), &zeros).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        assert!((got - 0.16).abs() < 1e-4);
    }

    #[test]
    fn depth_loss_cases() {
        let a = PixelGrid::from_fn(5, 4, |r, c| 1.0 + (r * 5 + c) as f64 * 0.1);
        assert_eq!(depth_loss(&a, &a).unwrap(), 0.0);
        let b = a.map(|v| v + 0.1);
        assert!((depth_loss(&b, &a).unwrap() - 0.01).abs() < 1e-15);
        let mut rng = KeyedRng::new(4, &[]);
        let mut c = a.clone();
        c.data_mut().iter_mut().for_each(|v| *v += rng.uniform() - 0.5);
        let mut s = 0.0;
        for r in 0..4 {
            for k in 0..5 {
                s += (c.get(r, k) - a.get(r, k)).powi(2);
            }
        }
        assert!((depth_loss(&c, &a).unwrap() - s / 20.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_totals() {
        let w = LossWeights { normal: 1.0, continuity: 1.0, depth: 5.0 };
        assert!((w.combine(0.2, 0.1, 0.04).total - 0.5).abs() < 1e-15);
        let w = LossWeights { normal: 1.0, continuity: 5.0, depth: 1.0 };
        assert!((w.combine(0.2, 0.1, 0.04).total - 0.74).abs() < 1e-15);
        assert_eq!(w.combine(0.0, 0.0, 0.0).total, 0.0);
    }

    #[test]
    fn depth_only_gradient() {
        let cam = cam(6);
        let est = PixelGrid::from_fn(6, 6, |r, c| 2.0 + 0.1 * (r + c) as f64);
        let d = est.map(|v| v * 1.05);
        let u = UncertainMap::zeros(6, 6);
        let nref = up(6);
        let inputs = RefineInputs { camera: &cam, normal_ref: &nref, depth_est: &est, uncertain: &u };
        let w = LossWeights { normal: 0.0, continuity: 0.0, depth: 3.0 };
        let g = loss_gradient(&d, &inputs, w).unwrap();
        for i in 0..36 {
            let want = 2.0 * 3.0 * (d.data()[i] - est.data()[i]) / 36.0;
            assert!((g.data()[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_loss_has_zero_gradient() {
        let cam = cam(8);
        let d = PixelGrid::filled(8, 8, 1, 4.0);
        let u = UncertainMap::zeros(8, 8);
        let nref = up(8);
        let inputs = RefineInputs { camera: &cam, normal_ref: &nref, depth_est: &d, uncertain: &u };
        let w = LossWeights { normal: 1.0, continuity: 1.0, depth: 5.0 };
        assert_eq!(total_loss(&d, &inputs, w).unwrap().total, 0.0);
        assert!(loss_gradient(&d, &inputs, w).unwrap().data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn resolution_mismatch_is_error() {
        let cam = cam(8);
        let d = PixelGrid::filled(8, 8, 1, 4.0);
        assert!(normal_loss(&d, &cam, &up(7)).is_err());
        assert!(depth_loss(&d, &PixelGrid::filled(8, 7, 1, 4.0)).is_err());
    }
}
