//! Sensor noise and tone mapping.

use rand_distr::{Distribution, StandardNormal};

use crate::color::linear_to_srgb;
use crate::error::{Error, Result};
use crate::grid::PixelGrid;
use crate::rng::KeyedRng;

const TAG_NOISE: u64 = 3;

/// Adds `N(0, beta1 * I + beta2)` to every channel, then clamps to [0, 1].
pub fn add_sensor_noise(image: &PixelGrid, beta1: f64, beta2: f64, seed: u64) -> Result<PixelGrid> {
    if !(beta1 >= 0.0 && beta2 >= 0.0) {
        return Err(Error::Config(format!("noise parameters must be >= 0, got beta1={beta1}, beta2={beta2}")));
    }
    let mut out = image.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        let var = beta1 * v.max(0.0) + beta2;
        let n = if var > 0.0 {
            let mut rng = KeyedRng::new(seed, &[TAG_NOISE, i as u64]);
            let z: f64 = StandardNormal.sample(&mut rng);
            z * var.sqrt()
        } else {
            0.0
        };
        *v = (*v + n).clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Exposure, clamp, sRGB encoding and 8-bit quantization.
pub fn tone_map(image: &PixelGrid, exposure: f64) -> PixelGrid<u8> {
    image.map(|v| {
        let x = (v * exposure).clamp(0.0, 1.0);
        let x = if x.is_nan() { 0.0 } else { x };
        (linear_to_srgb(x) * 255.0).round() as u8
    })
}
