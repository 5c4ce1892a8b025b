use num_complex::Complex64;
use rand::Rng;

use super::spec::{DatasetSpec, PaChoice, SnrMode};
use crate::baseline::ls_estimate;
use crate::dsp::{build_tx_grid, payload_len, DmrsLayout, GridKind, LinkConfig, Ofdm, ResourceGrid, TimeFrame};
use crate::error::{Error, Result};
use crate::impairments::{apply_awgn, apply_pa, apply_tdl, best_linear_gain, default_fit, dither_pa, ChannelKind, PaPolynomial, PaReference};
use crate::rng::{derive_seed, stream_rng, Stream};

/// One training or evaluation example.
#[derive(Debug, Clone, PartialEq)]
pub struct TtiRecord {
    pub tti_index: u64,
    pub snr_db: f64,
    pub backoff_db: f64,
    pub pa_seed: u64,
    pub rx_frame: TimeFrame<f64>,
    pub raw_ls: ResourceGrid<f64>,
    /// Genie channel: the PA's best linear gain for this TTI times the
    /// multipath response.
    pub known_channel: ResourceGrid<f64>,
    pub labels: Vec<u8>,
    pub mask: Vec<bool>,
}

/// Shared, precomputed state for generating the TTIs of one spec.
#[derive(Debug, Clone)]
pub struct Generator {
    spec: DatasetSpec,
    link: LinkConfig,
    layout: DmrsLayout,
    ofdm: Ofdm<f64>,
    /// One polynomial per PA seed (empty for a linear chain).
    amplifiers: Vec<PaPolynomial>,
}

impl Generator {
    pub fn new(spec: &DatasetSpec) -> Result<Self> {
        spec.validate()?;
        let link = spec.link();
        let layout = DmrsLayout::with_pattern(&link, spec.pilot_symbol(), spec.pilot_stride(), spec.dmrs_seed);
        let amplifiers = match spec.pa {
            PaChoice::Linear => Vec::new(),
            PaChoice::Nominal => vec![default_fit(&PaReference::default())?],
            PaChoice::Dithered => {
                let base = default_fit(&PaReference::default())?;
                spec.pa_seeds
                    .iter()
                    .map(|&s| dither_pa(&base, spec.dither_delta, s))
                    .collect::<Result<_>>()?
            }
        };
        Ok(Generator {
            spec: spec.clone(),
            ofdm: Ofdm::new(&link)?,
            link,
            layout,
            amplifiers,
        })
    }

    pub fn spec(&self) -> &DatasetSpec {
        &self.spec
    }

    pub fn link(&self) -> &LinkConfig {
        &self.link
    }

    pub fn layout(&self) -> &DmrsLayout {
        &self.layout
    }

    fn snr_for(&self, index: u64) -> f64 {
        let [lo, hi] = self.spec.snr_range_db;
        match self.spec.snr_mode {
            SnrMode::Uniform if hi > lo => stream_rng(self.spec.master_seed, index, Stream::Snr).gen_range(lo..hi),
            SnrMode::Uniform => lo,
            SnrMode::Grid => {
                let grid = self.spec.snr_grid();
                grid[index as usize % grid.len()]
            }
        }
    }

    fn backoff_for(&self, index: u64) -> f64 {
        match self.spec.backoff_max_db {
            Some(max) if max > self.spec.backoff_db => {
                stream_rng(self.spec.master_seed, index, Stream::Backoff).gen_range(self.spec.backoff_db..max)
            }
            _ => self.spec.backoff_db,
        }
    }

    pub fn tti(&self, index: u64) -> Result<TtiRecord> {
        self.tti_at(index, self.snr_for(index), self.backoff_for(index))
    }

    /// TTI `index` with SNR and backoff overridden. Payload, PA choice,
    /// fading and the unit-variance noise draw depend only on `index`, so
    /// sweeps over SNR or backoff use common random numbers.
    pub fn tti_at(&self, index: u64, snr_db: f64, backoff_db: f64) -> Result<TtiRecord> {
        let spec = &self.spec;
        if index >= spec.num_ttis as u64 {
            return Err(Error::Argument(format!("TTI index {index} >= {}", spec.num_ttis)));
        }
        let seed = spec.master_seed;
        let mut rng = stream_rng(seed, index, Stream::Payload);
        let bits: Vec<u8> = (0..payload_len(&self.link, &self.layout)).map(|_| rng.gen_range(0..2u8)).collect();
        let slot = build_tx_grid::<f64>(&self.link, &self.layout, &bits)?;
        let tx = self.ofdm.modulate(&slot.grid)?;

        let slot_pa = (index as usize) % spec.pa_seeds.len();
        let amplifier = match spec.pa {
            PaChoice::Linear => None,
            PaChoice::Nominal => self.amplifiers.first(),
            PaChoice::Dithered => self.amplifiers.get(slot_pa),
        };
        let (amplified, gain) = match amplifier {
            None => (tx, Complex64::new(1.0, 0.0)),
            Some(poly) => {
                let y = apply_pa(&tx, poly, backoff_db, spec.kappa);
                let gain = best_linear_gain(&slot.grid, &self.ofdm.demodulate(&y)?)?;
                (y, gain)
            }
        };

        let (faded, response) = match spec.channel.kind {
            ChannelKind::Awgn => (amplified, None),
            ChannelKind::Tdl => {
                let (f, h) = apply_tdl(&amplified, &spec.channel, &self.link, derive_seed(seed ^ spec.channel.seed, index, Stream::Channel))?;
                (f, Some(h))
            }
        };
        let rx_frame = apply_awgn(&faded, snr_db, &self.link, derive_seed(seed, index, Stream::Noise));
        let rx_grid = self.ofdm.demodulate(&rx_frame)?;
        let raw_ls = ls_estimate(&rx_grid, &self.layout);
        let (nd, ns) = (self.link.num_data_subcarriers, self.link.num_symbols);
        let known_channel = match response {
            None => ResourceGrid::from_vec(nd, ns, vec![gain; nd * ns], GridKind::ChannelEstimate)?,
            Some(h) => {
                let mut k = h.with_kind(GridKind::ChannelEstimate);
                k.data.iter_mut().for_each(|v| *v *= gain);
                k
            }
        };
        Ok(TtiRecord {
            tti_index: index,
            snr_db,
            backoff_db,
            pa_seed: spec.pa_seeds[slot_pa],
            rx_frame,
            raw_ls,
            known_channel,
            labels: slot.labels,
            mask: slot.mask,
        })
    }
}

/// Convenience wrapper building a [`Generator`] for a single record.
pub fn generate_tti(spec: &DatasetSpec, tti_index: u64) -> Result<TtiRecord> {
    Generator::new(spec)?.tti(tti_index)
}
