//! Self-supervised node representations learned by predicting masked-node
//! latents from an exponential-moving-average teacher.

pub mod error;
pub mod data;
pub mod encoder;
pub mod eval;
pub mod graph;
pub mod ssl;
pub mod tensor;

pub use error::{Error, Result};
pub use graph::{Graph, Split};
pub use tensor::Tensor;

// `std::time::Instant` panics on wasm32-unknown-unknown.
#[cfg(not(target_arch = "wasm32"))]
pub(crate) use std::time::Instant;
#[cfg(target_arch = "wasm32")]
pub(crate) use web_time::Instant;
