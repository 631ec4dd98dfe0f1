//! Normal-guided depth refinement.
//!
//! Depth is optimized per pixel against three terms: agreement between the
//! normals implied by depth and a reference normal map, continuity of the
//! depth gradient vectors with those reference normals (masked by the
//! uncertainty map), and fidelity to the initial depth estimate.

mod adam;
mod geometry;
mod loss;

pub use adam::{refine_depth, write_loss_trace, Refinement};
pub use geometry::{depth_gradients, normal_from_depth};
pub use loss::{
    continuity_loss, depth_loss, loss_gradient, normal_loss, total_loss, LossBreakdown, LossWeights,
    RefineInputs,
};
