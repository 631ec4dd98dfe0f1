//! Night relighting: light-source activation, emissive faces, path tracing
//! and the sensor model.

mod activation;
mod bvh;
mod emitters;
mod lights;
mod noise;
mod render;
mod vec3;

pub use activation::{draw_activations, group_probabilities, ActivationDraw};
pub use emitters::assign_emitters;
pub use lights::{
    attach_masks, measure_light_sample, parse_sidecar, read_sidecar, sidecar_string, write_sidecar, LightInstance,
    LightMeasurement,
};
pub use noise::{add_sensor_noise, tone_map};
pub use render::{render, RenderSettings};
