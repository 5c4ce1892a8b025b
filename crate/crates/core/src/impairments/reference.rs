//! Fixed 64-QAM reference signal used to anchor the backoff axis to EVM.

use num_complex::Complex64;
use rand::Rng;

use super::evm::compute_evm;
use super::pa::{apply_pa, PaPolynomial};
use crate::dsp::{index_to_bits, qam_map, GridKind, LinkConfig, Modulation, Ofdm, ResourceGrid, TimeFrame};
use crate::error::Result;
use crate::rng::{stream_rng, Stream};

const REFERENCE_SEED: u64 = 0x5EED_0E7A;
const REFERENCE_TTIS: usize = 16;

/// Fully loaded mini-profile 64-QAM TTIs (no pilots) and their waveforms.
#[derive(Debug, Clone)]
pub struct ReferenceGrid {
    pub config: LinkConfig,
    pub grids: Vec<ResourceGrid<f64>>,
    pub frames: Vec<TimeFrame<f64>>,
}

impl ReferenceGrid {
    pub fn new() -> Result<Self> {
        let config = LinkConfig::mini(Modulation::Qam64);
        let ofdm = Ofdm::new(&config)?;
        let mut grids = Vec::with_capacity(REFERENCE_TTIS);
        let mut frames = Vec::with_capacity(REFERENCE_TTIS);
        for t in 0..REFERENCE_TTIS {
            let mut rng = stream_rng(REFERENCE_SEED, t as u64, Stream::Payload);
            let data = (0..config.num_data_subcarriers * config.num_symbols)
                .map(|_| qam_map(&index_to_bits(rng.gen_range(0..64), 6), Modulation::Qam64))
                .collect::<Result<Vec<Complex64>>>()?;
            let grid =
                ResourceGrid::from_vec(config.num_data_subcarriers, config.num_symbols, data, GridKind::TxSymbols)?;
            frames.push(ofdm.modulate(&grid)?);
            grids.push(grid);
        }
        Ok(ReferenceGrid { config, grids, frames })
    }

    fn stacked(&self, grids: &[ResourceGrid<f64>]) -> Result<ResourceGrid<f64>> {
        let rows = self.config.num_data_subcarriers * grids.len();
        let data = grids.iter().flat_map(|g| g.data.iter().copied()).collect();
        ResourceGrid::from_vec(rows, self.config.num_symbols, data, GridKind::RxSymbols)
    }
}

/// EVM (percent) of the reference signal through `poly` at `backoff_db`,
/// pooled over all reference TTIs.
pub fn reference_evm(reference: &ReferenceGrid, poly: &PaPolynomial, backoff_db: f64, kappa: f64) -> Result<f64> {
    let ofdm = Ofdm::new(&reference.config)?;
    let rx = reference
        .frames
        .iter()
        .map(|f| ofdm.demodulate(&apply_pa(f, poly, backoff_db, kappa)))
        .collect::<Result<Vec<_>>>()?;
    compute_evm(&reference.stacked(&reference.grids)?, &reference.stacked(&rx)?)
}

/// Bisection for the drive constant that yields `target_evm` percent at
/// `backoff_db`.
pub fn calibrate_kappa(
    reference: &ReferenceGrid,
    poly: &PaPolynomial,
    backoff_db: f64,
    target_evm: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (0.05, 5.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if reference_evm(reference, poly, backoff_db, mid)? < target_evm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
