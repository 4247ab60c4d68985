//! Concrete sc-Banach spaces: weighted coefficient spaces cut along a
//! ladder of truncations, and a weighted Sobolev scale on a line grid.

mod grid;
mod point;
pub mod regularity;
mod truncated;
mod weights;

pub use grid::{cosine_bump, cutoff, gamma, GridLineScale};
pub use point::ScalePoint;
pub use regularity::{point_of_regularity, smooth_point, RegularityConfig, RegularityEstimate};
pub use truncated::{Component, Extent, TruncatedScale};
pub use weights::{circle_frequency, WeightKind, WeightSequence};
