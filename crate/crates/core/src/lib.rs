pub mod baseline;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod impairments;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod rx;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations used by the pipeline and the CLI.
pub type Tensor = nn::Tensor<f64>;
pub type ResourceGrid = dsp::ResourceGrid<f64>;
pub type TimeFrame = dsp::TimeFrame<f64>;
pub type Ofdm = dsp::Ofdm<f64>;
pub type NeuralReceiver = rx::NeuralReceiver<f64>;
pub type AdamState = nn::AdamState<f64>;
