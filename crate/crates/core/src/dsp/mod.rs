//! Complex baseband primitives: DFT, QAM, CP-OFDM framing and DMRS grids.

mod config;
mod dmrs;
mod fft;
mod grid;
mod ofdm;
mod qam;

pub use config::{LinkConfig, Modulation, Profile, NB_MAX};
pub use dmrs::{DmrsLayout, ReRole, DEFAULT_PILOT_STRIDE, DEFAULT_PILOT_SYMBOL};
pub use fft::{dft, Direction, Fft};
pub use grid::{GridKind, ResourceGrid, TimeFrame};
pub use ofdm::{bit_index, build_tx_grid, ofdm_demodulate, ofdm_modulate, payload_len, Ofdm, TxSlot};
pub use qam::{index_to_bits, qam_hard_demap, qam_map, Constellation};
