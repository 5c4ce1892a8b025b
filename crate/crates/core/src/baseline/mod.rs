//! Classical receiver chain: pilot LS estimation, LMMSE equalization,
//! max-log demapping, and closed-form AWGN references.

mod demap;
mod estimate;
mod lmmse;
mod theory;

pub use demap::{max_log_llr, LlrGrid, LLR_CLAMP};
pub use estimate::{estimate_noise_var, interpolate_channel, ls_estimate};
pub use lmmse::{lmmse_equalize, EqualizedGrid, EPS};
pub use theory::{awgn_ber_theory, awgn_snr_for_ber};

