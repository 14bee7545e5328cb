//! Consistent convolutional generators over spatial stochastic processes.
//!
//! A generator built only from consistent layers maps the infinite latent
//! field to an infinite image: any patch can be generated on its own, in any
//! order, and matches the corresponding region of any larger generation bit
//! for bit. The crate provides the layers, exact index geometry, tiled
//! generation, and instruments that check these properties.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod latent;
pub mod layers;
pub mod network;
pub mod png_out;
pub mod report;
pub mod tensor;
pub mod tiling;
pub mod weights;

pub use error::{Error, Result};
pub use latent::LatentField;
pub use network::{ForwardOutput, Generator, MultiScaleSpec, NetworkSpec};
pub use tensor::{max_abs_diff, PhaseIndex, Rect, Tensor3};
pub use weights::WeightStore;
