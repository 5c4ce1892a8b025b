use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::config::LinkConfig;
use crate::rng::splitmix64;
use crate::scalar::Real;

pub const DEFAULT_PILOT_SYMBOL: usize = 2;
pub const DEFAULT_PILOT_STRIDE: usize = 2;

/// Single-symbol pilot pattern: pilots on every `stride`-th subcarrier of
/// `pilot_symbol`; the remaining REs of that symbol are reserved (zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmrsLayout {
    pub pilot_symbol: usize,
    pub pilot_stride: usize,
    /// `[re, im]` of each pilot, in subcarrier order.
    pub pilot_values: Vec<[f64; 2]>,
    pub seed: u64,
    pub num_subcarriers: usize,
    pub num_symbols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReRole {
    Data,
    Pilot(usize),
    Reserved,
}

impl DmrsLayout {
    pub fn new(config: &LinkConfig, seed: u64) -> Self {
        Self::with_pattern(config, DEFAULT_PILOT_SYMBOL, DEFAULT_PILOT_STRIDE, seed)
    }

    pub fn with_pattern(config: &LinkConfig, pilot_symbol: usize, pilot_stride: usize, seed: u64) -> Self {
        assert!(pilot_stride >= 1 && pilot_symbol < config.num_symbols);
        let count = config.num_data_subcarriers.div_ceil(pilot_stride);
        let mut state = seed;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pilot_values = (0..count)
            .map(|_| {
                let r = splitmix64(&mut state);
                let re = if r & 1 == 0 { h } else { -h };
                let im = if r & 2 == 0 { h } else { -h };
                [re, im]
            })
            .collect();
        DmrsLayout {
            pilot_symbol,
            pilot_stride,
            pilot_values,
            seed,
            num_subcarriers: config.num_data_subcarriers,
            num_symbols: config.num_symbols,
        }
    }

    pub fn role(&self, subcarrier: usize, symbol: usize) -> ReRole {
        if symbol != self.pilot_symbol {
            ReRole::Data
        } else if subcarrier % self.pilot_stride == 0 {
            ReRole::Pilot(subcarrier / self.pilot_stride)
        } else {
            ReRole::Reserved
        }
    }

    pub fn is_data(&self, subcarrier: usize, symbol: usize) -> bool {
        self.role(subcarrier, symbol) == ReRole::Data
    }

    pub fn pilot_subcarriers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_subcarriers).step_by(self.pilot_stride)
    }

    pub fn pilot<T: Real>(&self, pilot_index: usize) -> Complex<T> {
        let [re, im] = self.pilot_values[pilot_index];
        Complex::new(T::lit(re), T::lit(im))
    }

    pub fn data_re_count(&self) -> usize {
        self.num_subcarriers * (self.num_symbols - 1)
    }
}
