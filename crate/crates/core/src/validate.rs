//! Co-registration and value checks for the per-image inputs.

use crate::camera::CameraModel;
use crate::classes::is_known_label;
use crate::error::{Error, Result};
use crate::grid::{LabelGrid, PixelGrid};

/// The validated per-image inputs every stage works from.
#[derive(Debug, Clone)]
pub struct InputBundle {
    /// sRGB in [0, 1], 3 channels.
    pub rgb: PixelGrid,
    /// Depth in meters, strictly positive.
    pub depth: PixelGrid,
    /// Unit camera-space normals, 3 channels.
    pub normal: PixelGrid,
    pub semantic: LabelGrid,
    pub camera: CameraModel,
}

impl InputBundle {
    pub fn width(&self) -> usize {
        self.depth.width()
    }

    pub fn height(&self) -> usize {
        self.depth.height()
    }
}

/// Checks the four rasters against each other and the camera.
///
/// Normals whose length is within `normal_tolerance` of 1 are renormalized
/// to unit length; anything further off is rejected.
pub fn validate_inputs(
    rgb: PixelGrid,
    depth: PixelGrid,
    mut normal: PixelGrid,
    semantic: LabelGrid,
    camera: CameraModel,
    normal_tolerance: f64,
) -> Result<InputBundle> {
    rgb.check_channels(3, "rgb image")?;
    depth.check_channels(1, "depth map")?;
    normal.check_channels(3, "normal map")?;
    semantic.check_channels(1, "semantic map")?;
    depth.check_same_size(&rgb, "rgb image")?;
    depth.check_same_size(&normal, "normal map")?;
    depth.check_same_size(&semantic, "semantic map")?;
    if camera.width() != depth.width() || camera.height() != depth.height() {
        return Err(Error::DimensionMismatch {
            what: "camera".into(),
            got_w: camera.width(),
            got_h: camera.height(),
            want_w: depth.width(),
            want_h: depth.height(),
        });
    }

    for r in 0..depth.height() {
        for c in 0..depth.width() {
            let d = depth.get(r, c);
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::NonPositiveDepth { row: r, col: c, value: d });
            }
            let id = semantic.get(r, c);
            if !is_known_label(id) {
                return Err(Error::UnknownClass { row: r, col: c, id: id as u32 });
            }
            let n = normal.pixel_mut(r, c);
            let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if !((norm - 1.0).abs() <= normal_tolerance) {
                return Err(Error::NonUnitNormal { row: r, col: c, norm });
            }
            for v in n.iter_mut() {
                *v /= norm;
            }
        }
    }

    Ok(InputBundle {
        rgb,
        depth,
        normal,
        semantic,
        camera,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(n: usize) -> (PixelGrid, PixelGrid, PixelGrid, LabelGrid, CameraModel) {
        (
            PixelGrid::filled(n, n, 3, 0.5),
            PixelGrid::filled(n, n, 1, 4.0),
            PixelGrid::from_fn_n(n, n, |_, _| [0.0, 0.0, 1.0]),
            PixelGrid::filled(n, n, 1, 0u8),
            CameraModel::from_fov(n, n, 1.0).unwrap(),
        )
    }

    #[test]
    fn accepts_consistent_grids() {
        let (rgb, d, nrm, s, cam) = fixture(64);
        let b = validate_inputs(rgb, d, nrm, s, cam, 1e-6).unwrap();
        assert_eq!(b.width(), 64);
    }

    #[test]
    fn zero_depth_names_pixel() {
        let (rgb, mut d, nrm, s, cam) = fixture(16);
        d.set(3, 7, 0.0);
        match validate_inputs(rgb, d, nrm, s, cam, 1e-6) {
            Err(Error::NonPositiveDepth { row: 3, col: 7, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_unit_normal_rejected() {
        let (rgb, d, mut nrm, s, cam) = fixture(8);
        nrm.pixel_mut(2, 2).copy_from_slice(&[0.0, 0.0, 2.0]);
        let err = validate_inputs(rgb, d, nrm, s, cam, 1e-6).unwrap_err();
        assert!(err.to_string().contains("non-unit normal"), "{err}");
    }

    #[test]
    fn unknown_class_and_size_mismatch() {
        let (rgb, d, nrm, mut s, cam) = fixture(8);
        s.set(1, 2, 42);
        assert!(matches!(
            validate_inputs(rgb.clone(), d.clone(), nrm.clone(), s, cam, 1e-6),
            Err(Error::UnknownClass { row: 1, col: 2, id: 42 })
        ));
        let small = PixelGrid::filled(4, 8, 1, 0u8);
        assert!(matches!(
            validate_inputs(rgb, d, nrm, small, cam, 1e-6),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
