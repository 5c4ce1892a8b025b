//! Reverse-mode building blocks. Each layer returns a cache from `forward`
//! and consumes it in `backward`; there is no global tape.

mod adam;
mod bridge;
mod checkpoint;
mod conv;
mod gradcheck;
mod loss;
mod param;
mod resnet;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use bridge::FftBridge;
pub use checkpoint::{Checkpoint, StoredParam, MAGIC as CHECKPOINT_MAGIC, VERSION as CHECKPOINT_VERSION};
pub use conv::{Conv2d, ConvCache};
pub use gradcheck::{grad_check, grad_check_piecewise, GradCheckOptions, GradCheckReport, ParamCheck};
pub use loss::{bce_with_logits, sigmoid};
pub use param::{he_uniform, name_seed, Module, Param};
pub use resnet::{ResBlock, ResBlockCache, ResStack};
pub use tensor::{relu, relu_backward, Tensor};
