//! Pre-optimization depth filters: semantic/color guided smoothing and the
//! uncertainty detector that marks likely depth discontinuities.

mod bilateral;
mod variance;

pub use bilateral::cross_bilateral_filter;
pub use variance::{flag_uncertain_regions, UncertainMap};
