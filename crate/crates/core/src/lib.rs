//! Day-to-night street scene synthesis.
//!
//! A daytime RGB image with depth, normals and semantic labels is turned into
//! a relightable triangle mesh: depth is denoised with a class-aware
//! bilateral filter, refined against the normals by gradient descent, warped
//! into a grid-sheet mesh whose spurious faces are removed and filled back
//! in, and finally path traced with annotated light sources switched on.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod camera;
pub mod classes;
pub mod color;
pub mod config;
pub mod error;
pub mod filters;
pub mod grid;
pub mod io;
pub mod mesh;
pub mod pipeline;
pub mod refine;
pub mod relight;
pub mod rng;
pub mod validate;

pub use camera::CameraModel;
pub use config::{PipelineConfig, Profile};
pub use error::{Error, Result};
pub use filters::UncertainMap;
pub use grid::{InstanceGrid, LabelGrid, PixelGrid};
pub use mesh::{MeshSheet, SceneMesh};
