use crate::camera::CameraModel;
use crate::grid::PixelGrid;

/// Pixel-space derivative along one axis: central inside, one-sided at the
/// borders, zero when the axis has a single sample.
#[inline]
fn axis_diff(get: impl Fn(usize) -> f64, i: usize, n: usize) -> f64 {
    if n < 2 {
        0.0
    } else if i == 0 {
        get(1) - get(0)
    } else if i == n - 1 {
        get(n - 1) - get(n - 2)
    } else {
        0.5 * (get(i + 1) - get(i - 1))
    }
}

/// Camera-space depth slopes `(dz/dx, dz/dy)`.
///
/// Pixel derivatives are converted with `du/dx = fx / d` and `dv/dy = fy / d`,
/// evaluated at the local depth.
pub fn depth_gradients(depth: &PixelGrid, cam: &CameraModel) -> (PixelGrid, PixelGrid) {
    let (w, h) = (depth.width(), depth.height());
    let mut gx = PixelGrid::filled(w, h, 1, 0.0);
    let mut gy = PixelGrid::filled(w, h, 1, 0.0);
    for r in 0..h {
        for c in 0..w {
            let d = depth.get(r, c);
            let du = axis_diff(|k| depth.get(r, k), c, w);
            let dv = axis_diff(|k| depth.get(k, c), r, h);
            gx.set(r, c, du * cam.fx() / d);
            gy.set(r, c, dv * cam.fy() / d);
        }
    }
    (gx, gy)
}

/// Unit normal of the slopes `(p, q)`: `(-p, -q, 1) / |(-p, -q, 1)|`.
#[inline]
pub(crate) fn slope_normal(p: f64, q: f64) -> [f64; 3] {
    let s = (1.0 + p * p + q * q).sqrt();
    [-p / s, -q / s, 1.0 / s]
}

/// Per-pixel unit normals implied by depth. The z component is always positive.
pub fn normal_from_depth(depth: &PixelGrid, cam: &CameraModel) -> PixelGrid {
    let (gx, gy) = depth_gradients(depth, cam);
    PixelGrid::from_fn_n(depth.width(), depth.height(), |r, c| {
        slope_normal(gx.get(r, c), gy.get(r, c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_depth_has_zero_gradient() {
        let cam = CameraModel::from_fov(9, 7, 1.0).unwrap();
        let (gx, gy) = depth_gradients(&PixelGrid::filled(9, 7, 1, 3.0), &cam);
        assert!(gx.data().iter().chain(gy.data()).all(|&v| v == 0.0));
        let n = normal_from_depth(&PixelGrid::filled(9, 7, 1, 3.0), &cam);
        assert!(n.data().chunks(3).all(|v| v == [0.0, 0.0, 1.0]));
    }

    #[test]
    fn linear_field_gradient() {
        let cam = CameraModel::from_intrinsics(100.0, 100.0, 5.0, 5.0, 10, 10).unwrap();
        let d = PixelGrid::from_fn(10, 10, |_, c| 5.0 + 0.01 * c as f64);
        let (gx, gy) = depth_gradients(&d, &cam);
        for r in 0..10 {
            for c in 0..10 {
                let want = 0.01 * 100.0 / d.get(r, c);
                assert!((gx.get(r, c) - want).abs() < 1e-12);
                assert_eq!(gy.get(r, c), 0.0);
            }
        }
    }

    #[test]
    fn single_pixel_is_flat() {
        let cam = CameraModel::from_fov(1, 1, 1.0).unwrap();
        let (gx, gy) = depth_gradients(&PixelGrid::filled(1, 1, 1, 2.0), &cam);
        assert_eq!((gx.get(0, 0), gy.get(0, 0)), (0.0, 0.0));
    }

    /// Depth whose slopes under `du/dx = fx/d` are the constants (a, b):
    /// z = z0 * exp(a (u - cx) / fx + b (v - cy) / fy).
    fn model_plane(cam: &CameraModel, a: f64, b: f64) -> PixelGrid {
        PixelGrid::from_fn(cam.width(), cam.height(), |r, c| {
            4.0 * (a * (c as f64 - cam.cx()) / cam.fx() + b * (r as f64 - cam.cy()) / cam.fy()).exp()
        })
    }

    #[test]
    fn tilted_plane_normals() {
        let cam = CameraModel::from_fov(32, 32, 1.0).unwrap();
        for (a, b, want) in [
            (0.5, 0.0, [-0.5 / 1.25f64.sqrt(), 0.0, 1.0 / 1.25f64.sqrt()]),
            (0.0, 1.0, [0.0, -1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]),
        ] {
            let n = normal_from_depth(&model_plane(&cam, a, b), &cam);
            for r in 1..31 {
                for c in 1..31 {
                    let v = n.vec3(r, c);
                    for k in 0..3 {
                        assert!((v[k] - want[k]).abs() < 1e-3, "({r},{c}) {v:?}");
                    }
                }
            }
        }
        assert!((-0.5 / 1.25f64.sqrt() - -0.4472).abs() < 1e-4);
    }
}
