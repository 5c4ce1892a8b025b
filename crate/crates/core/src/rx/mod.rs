//! Neural receivers: HybridDeepRx (time-domain network, FFT bridge,
//! frequency-domain network) and the frequency-domain-only DeepRx.

mod config;
mod model;

pub use config::{
    HybridConfig, ReceiverKind, DEFAULT_PRE_HEAD_GAIN, DESK_POST_FFT_DILATIONS, DESK_POST_FFT_FILTERS,
    DESK_PRE_FFT_FILTERS, PAPER_POST_FFT_DILATIONS, PAPER_POST_FFT_FILTERS, PAPER_PRE_FFT_FILTERS,
};
pub use model::{
    assemble_post_input, assemble_pre_input, count_bit_errors, deeprx_forward, grid_tensor, hybrid_forward,
    grad_check_receiver, llr_to_bits, randomize_biases, tensor_grid, ForwardCache, NeuralReceiver, PreFftNet,
};
