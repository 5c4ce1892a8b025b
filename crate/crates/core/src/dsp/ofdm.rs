use num_complex::Complex;

use super::config::LinkConfig;
use super::dmrs::{DmrsLayout, ReRole};
use super::fft::{Direction, Fft};
use super::grid::{GridKind, ResourceGrid, TimeFrame};
use super::qam::qam_map;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Flat index into an `N_D x N_symb x N_B` bit tensor.
#[inline]
pub fn bit_index(subcarrier: usize, symbol: usize, bit: usize, num_symbols: usize, nb: usize) -> usize {
    (subcarrier * num_symbols + symbol) * nb + bit
}

/// Transmit grid together with the training labels it defines.
#[derive(Debug, Clone)]
pub struct TxSlot<T> {
    pub grid: ResourceGrid<T>,
    /// `N_D x N_symb x N_B`, zero-padded on the bit axis.
    pub labels: Vec<u8>,
    /// True exactly on data REs and bit positions below bits-per-symbol.
    pub mask: Vec<bool>,
}

/// Number of payload bits a TTI carries.
pub fn payload_len(config: &LinkConfig, layout: &DmrsLayout) -> usize {
    layout.data_re_count() * config.bits_per_symbol()
}

/// Place payload symbols, DMRS pilots and reserved zeros on the grid.
/// Payload bits fill data REs in time order (symbol by symbol, lowest
/// subcarrier first).
pub fn build_tx_grid<T: Real>(config: &LinkConfig, layout: &DmrsLayout, payload: &[u8]) -> Result<TxSlot<T>> {
    let (nd, ns, nb) = (config.num_data_subcarriers, config.num_symbols, config.nb_max);
    let k = config.bits_per_symbol();
    let expected = payload_len(config, layout);
    if payload.len() != expected {
        return Err(Error::Argument(format!(
            "payload has {} bits, layout carries {expected}",
            payload.len()
        )));
    }
    let mut grid = ResourceGrid::zeros(nd, ns, GridKind::TxSymbols);
    let mut labels = vec![0u8; nd * ns * nb];
    let mut mask = vec![false; nd * ns * nb];
    let mut chunks = payload.chunks_exact(k);
    for sym in 0..ns {
        for sc in 0..nd {
            match layout.role(sc, sym) {
                ReRole::Data => {
                    let bits = chunks.next().expect("payload length checked");
                    grid.set(sc, sym, qam_map(bits, config.modulation)?);
                    for (l, &b) in bits.iter().enumerate() {
                        let i = bit_index(sc, sym, l, ns, nb);
                        labels[i] = b;
                        mask[i] = true;
                    }
                }
                ReRole::Pilot(p) => grid.set(sc, sym, layout.pilot(p)),
                ReRole::Reserved => {}
            }
        }
    }
    Ok(TxSlot { grid, labels, mask })
}

/// CP-OFDM modulator/demodulator with a cached FFT plan.
#[derive(Debug, Clone)]
pub struct Ofdm<T> {
    config: LinkConfig,
    fft: Fft<T>,
    bins: Vec<usize>,
    tx_scale: T,
}

impl<T: Real> Ofdm<T> {
    pub fn new(config: &LinkConfig) -> Result<Self> {
        config.validate()?;
        Ok(Ofdm {
            config: config.clone(),
            fft: Fft::new(config.fft_size)?,
            bins: config.occupied_bins(),
            tx_scale: T::lit(config.tx_scale()),
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    pub fn valid_lengths(&self) -> Vec<usize> {
        (0..self.config.num_symbols)
            .map(|s| self.config.cp_of(s) + self.config.fft_size)
            .collect()
    }

    pub fn modulate(&self, grid: &ResourceGrid<T>) -> Result<TimeFrame<T>> {
        let c = &self.config;
        if grid.kind != GridKind::TxSymbols {
            return Err(Error::Argument(format!("cannot modulate a {:?} grid", grid.kind)));
        }
        if grid.shape() != (c.num_data_subcarriers, c.num_symbols) {
            return Err(Error::Shape(format!("grid {:?} does not match config", grid.shape())));
        }
        let n = c.fft_size;
        let zero = Complex::new(T::zero(), T::zero());
        let mut frame = TimeFrame::zeros(c.frame_rows(), self.valid_lengths());
        let mut buf = vec![zero; n];
        for sym in 0..c.num_symbols {
            buf.iter_mut().for_each(|v| *v = zero);
            for (sc, &bin) in self.bins.iter().enumerate() {
                buf[bin] = grid.get(sc, sym);
            }
            self.fft.process(&mut buf, Direction::Inverse);
            let cp = c.cp_of(sym);
            for row in 0..cp + n {
                let t = (row + n - cp) % n;
                frame.set(row, sym, buf[t].scale(self.tx_scale));
            }
        }
        Ok(frame)
    }

    pub fn demodulate(&self, frame: &TimeFrame<T>) -> Result<ResourceGrid<T>> {
        let c = &self.config;
        if frame.rows() != c.frame_rows() || frame.symbols() != c.num_symbols {
            return Err(Error::Shape(format!(
                "frame {}x{} does not match config",
                frame.rows(),
                frame.symbols()
            )));
        }
        let n = c.fft_size;
        let mut grid = ResourceGrid::zeros(c.num_data_subcarriers, c.num_symbols, GridKind::RxSymbols);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        let inv = T::one() / self.tx_scale;
        for sym in 0..c.num_symbols {
            let cp = c.cp_of(sym);
            for (t, v) in buf.iter_mut().enumerate() {
                *v = frame.get(cp + t, sym);
            }
            self.fft.process(&mut buf, Direction::Forward);
            for (sc, &bin) in self.bins.iter().enumerate() {
                grid.set(sc, sym, buf[bin].scale(inv));
            }
        }
        Ok(grid)
    }
}

pub fn ofdm_modulate<T: Real>(grid: &ResourceGrid<T>, config: &LinkConfig) -> Result<TimeFrame<T>> {
    Ofdm::new(config)?.modulate(grid)
}

pub fn ofdm_demodulate<T: Real>(frame: &TimeFrame<T>, config: &LinkConfig) -> Result<ResourceGrid<T>> {
    Ofdm::new(config)?.demodulate(frame)
}
