//! sRGB transfer curve and CIELAB conversion (D65 white).

use crate::error::Result;
use crate::grid::PixelGrid;

/// Linear sRGB -> XYZ, D65.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

/// Reference white: the image of linear (1,1,1), so white maps to a = b = 0 exactly.
fn white() -> [f64; 3] {
    let m = RGB_TO_XYZ;
    [
        m[0][0] + m[0][1] + m[0][2],
        m[1][0] + m[1][1] + m[1][2],
        m[2][0] + m[2][1] + m[2][2],
    ]
}

#[inline]
pub fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
pub fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.003_130_8 {
        c * 12.92
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

#[inline]
fn lab_f_inv(f: f64) -> f64 {
    let t = f * f * f;
    if t > EPSILON {
        t
    } else {
        (116.0 * f - 16.0) / KAPPA
    }
}

/// Converts one normalized sRGB triple (components in [0,1]) to CIELAB.
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let wp = white();
    let mut xyz = [0.0; 3];
    for (k, row) in RGB_TO_XYZ.iter().enumerate() {
        xyz[k] = (row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2]) / wp[k];
    }
    let [fx, fy, fz] = xyz.map(lab_f);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Inverse of [`srgb_to_lab`].
pub fn lab_to_srgb(lab: [f64; 3]) -> [f64; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let wp = white();
    let xyz = [
        lab_f_inv(fx) * wp[0],
        lab_f_inv(fy) * wp[1],
        lab_f_inv(fz) * wp[2],
    ];
    let inv = invert3(RGB_TO_XYZ);
    let mut rgb = [0.0; 3];
    for (k, row) in inv.iter().enumerate() {
        rgb[k] = linear_to_srgb(row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2]);
    }
    rgb
}

fn invert3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let inv_det = 1.0 / det;
    [
        [
            c00 * inv_det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det,
        ],
        [
            c01 * inv_det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det,
        ],
        [
            c02 * inv_det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det,
        ],
    ]
}

/// Converts a 3-channel sRGB grid to CIELAB.
///
/// Values are taken as normalized [0,1] unless any exceeds 1, in which case
/// the grid is read as 8-bit (0..=255).
pub fn rgb_to_cielab(rgb: &PixelGrid) -> Result<PixelGrid> {
    rgb.check_channels(3, "rgb image")?;
    let scale = if rgb.data().iter().any(|&v| v > 1.0) {
        1.0 / 255.0
    } else {
        1.0
    };
    let mut out = rgb.clone();
    for px in out.data_mut().chunks_exact_mut(3) {
        let lab = srgb_to_lab([px[0] * scale, px[1] * scale, px[2] * scale]);
        px.copy_from_slice(&lab);
    }
    Ok(out)
}

/// Converts an 8-bit sRGB buffer to a normalized [0,1] float grid.
pub fn rgb8_to_unit(rgb: &PixelGrid<u8>) -> PixelGrid {
    rgb.map(|v| v as f64 / 255.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab8(r: u8, g: u8, b: u8) -> [f64; 3] {
        srgb_to_lab([r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0])
    }

    #[test]
    fn black_is_origin() {
        let lab = lab8(0, 0, 0);
        assert_eq!(lab, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn white_is_l100() {
        let lab = lab8(255, 255, 255);
        assert!((lab[0] - 100.0).abs() < 1e-9);
        assert!(lab[1].abs() < 0.5 && lab[2].abs() < 0.5);
    }

    #[test]
    fn mid_gray_regression() {
        // Scalar evaluation of the sRGB -> linear -> Lab chain for 119/255.
        let lab = lab8(119, 119, 119);
        assert!((lab[0] - 50.034_438_792_538_225).abs() < 1e-9, "{}", lab[0]);
        assert!(lab[1].abs() < 1e-9 && lab[2].abs() < 1e-9);
    }

    #[test]
    fn gray_ramp_round_trips_within_one_step() {
        for v in 0..=255u8 {
            let back = lab_to_srgb(lab8(v, v, v));
            for c in back {
                let q = (c * 255.0).round();
                assert!((q - v as f64).abs() <= 1.0, "{v} -> {q}");
            }
        }
    }

    #[test]
    fn rejects_wrong_channels() {
        let g = PixelGrid::filled(2, 2, 1, 0.5);
        assert!(rgb_to_cielab(&g).is_err());
    }

    #[test]
    fn eight_bit_and_unit_inputs_agree() {
        let g8 = PixelGrid::from_fn_n(2, 1, |_, c| if c == 0 { [255.0, 0.0, 0.0] } else { [10.0, 20.0, 30.0] });
        let gu = g8.map(|v| v / 255.0);
        let a = rgb_to_cielab(&g8).unwrap();
        let b = rgb_to_cielab(&gu).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
