//! Transmitter and propagation impairments plus EVM measurement.

mod channel;
mod evm;
mod pa;
mod reference;

pub use channel::{apply_awgn, apply_taps, apply_tdl, noise_variance, ChannelKind, ChannelProfile, TapSet, TDL_A};
pub use evm::{best_linear_gain, compute_evm};
pub use pa::{
    apply_pa, default_fit, dither_pa, drive_level, fit_pa_polynomial, PaKind, PaModel, PaPolynomial, PaReference,
    DEFAULT_DITHER_DELTA, DEFAULT_FIT_POINTS, DEFAULT_FIT_RANGE_FACTOR, DEFAULT_KAPPA, DEFAULT_ORDER,
};
pub use reference::{calibrate_kappa, reference_evm, ReferenceGrid};
