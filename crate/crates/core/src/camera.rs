//! Pinhole camera intrinsics.

use crate::error::{Error, Result};

/// Pinhole camera looking along +z with image rows growing along +y.
///
/// Intrinsics are the single source of truth; the field of view is derived
/// from them so the two can never drift apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
}

impl CameraModel {
    pub fn from_intrinsics(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::Camera(format!("focal lengths must be positive, got {fx}, {fy}")));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::Camera("principal point must be finite".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::Camera("image size must be nonzero".into()));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Square-pixel camera with horizontal field of view `theta_f` (radians),
    /// principal point at the image center.
    pub fn from_fov(width: usize, height: usize, theta_f: f64) -> Result<Self> {
        if !(theta_f > 0.0 && theta_f < std::f64::consts::PI) {
            return Err(Error::Camera(format!("field of view {theta_f} outside (0, pi)")));
        }
        let fx = (width as f64 / 2.0) / (theta_f / 2.0).tan();
        Self::from_intrinsics(fx, fx, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    #[inline]
    pub fn fx(&self) -> f64 {
        self.fx
    }
    #[inline]
    pub fn fy(&self) -> f64 {
        self.fy
    }
    #[inline]
    pub fn cx(&self) -> f64 {
        self.cx
    }
    #[inline]
    pub fn cy(&self) -> f64 {
        self.cy
    }
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }
    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Horizontal field of view in radians.
    pub fn theta_f(&self) -> f64 {
        2.0 * ((self.width as f64 / 2.0) / self.fx).atan()
    }

    /// Vertical field of view in radians.
    pub fn theta_f_y(&self) -> f64 {
        2.0 * ((self.height as f64 / 2.0) / self.fy).atan()
    }

    /// `tan(theta/2)` along x and y.
    pub fn half_tan(&self) -> (f64, f64) {
        (
            (self.width as f64 / 2.0) / self.fx,
            (self.height as f64 / 2.0) / self.fy,
        )
    }

    /// The same camera at another resolution (intrinsics scale with the image).
    pub fn rescaled(&self, width: usize, height: usize) -> Self {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        Self {
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: self.cx * sx,
            cy: self.cy * sy,
            width,
            height,
        }
    }

    /// Continuous pixel coordinates `(u, v)` of a camera-space point.
    #[inline]
    pub fn project(&self, p: [f64; 3]) -> (f64, f64) {
        (self.fx * p[0] / p[2] + self.cx, self.fy * p[1] / p[2] + self.cy)
    }

    /// Unnormalized ray direction through continuous pixel coordinates.
    #[inline]
    pub fn ray_dir(&self, u: f64, v: f64) -> [f64; 3] {
        [(u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0]
    }
}
