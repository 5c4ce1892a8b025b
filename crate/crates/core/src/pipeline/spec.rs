use serde::{Deserialize, Serialize};

use crate::dsp::{LinkConfig, Modulation, Profile, DEFAULT_PILOT_STRIDE, DEFAULT_PILOT_SYMBOL};
use crate::error::{Error, Result};
use crate::impairments::{ChannelProfile, DEFAULT_DITHER_DELTA, DEFAULT_KAPPA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrMode {
    /// Independent uniform draw per TTI from the range.
    Uniform,
    /// TTI `i` uses grid point `i mod len`, grid `lo, lo + step, ..., hi`.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaChoice {
    /// Fitted reference polynomial, dithered per PA seed.
    Dithered,
    /// Fitted reference polynomial without dithering.
    Nominal,
    /// No amplifier.
    Linear,
}

/// Recipe for a reproducible set of TTIs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub profile: Profile,
    pub modulation: Modulation,
    pub num_ttis: usize,
    pub snr_range_db: [f64; 2],
    pub snr_mode: SnrMode,
    pub snr_step_db: f64,
    pub pa: PaChoice,
    pub pa_seeds: Vec<u64>,
    pub dither_delta: f64,
    pub kappa: f64,
    pub channel: ChannelProfile,
    /// Backoff of every TTI, or the lower end when `backoff_max_db` is set.
    pub backoff_db: f64,
    /// Draw each TTI's backoff uniformly from `[backoff_db, backoff_max_db]`.
    #[serde(default)]
    pub backoff_max_db: Option<f64>,
    pub dmrs_seed: u64,
    pub master_seed: u64,
}

impl DatasetSpec {
    /// Desk-scale training set: 2000 TTIs, 30 dithered PAs, SNR ~ U(0, 30) dB.
    pub fn mini_train(modulation: Modulation, backoff_db: f64, master_seed: u64) -> Self {
        DatasetSpec {
            profile: Profile::Mini,
            modulation,
            num_ttis: 2000,
            snr_range_db: [0.0, 30.0],
            snr_mode: SnrMode::Uniform,
            snr_step_db: 2.0,
            pa: PaChoice::Dithered,
            pa_seeds: (0..30).collect(),
            dither_delta: DEFAULT_DITHER_DELTA,
            kappa: DEFAULT_KAPPA,
            channel: ChannelProfile::awgn(),
            backoff_db,
            backoff_max_db: None,
            dmrs_seed: 1,
            master_seed,
        }
    }

    /// Desk-scale validation set: 1600 TTIs, 10 further PAs, SNR grid
    /// {0, 2, ..., 30} dB.
    pub fn mini_val(modulation: Modulation, backoff_db: f64, master_seed: u64) -> Self {
        DatasetSpec {
            num_ttis: 1600,
            snr_mode: SnrMode::Grid,
            pa_seeds: (1000..1010).collect(),
            ..Self::mini_train(modulation, backoff_db, master_seed)
        }
    }

    /// Fixed-SNR evaluation set through the undithered PA.
    pub fn evaluation(modulation: Modulation, backoff_db: f64, snr_db: f64, num_ttis: usize, master_seed: u64) -> Self {
        DatasetSpec {
            num_ttis,
            snr_range_db: [snr_db, snr_db],
            snr_mode: SnrMode::Grid,
            pa: PaChoice::Nominal,
            pa_seeds: vec![0],
            ..Self::mini_train(modulation, backoff_db, master_seed)
        }
    }

    pub fn link(&self) -> LinkConfig {
        LinkConfig::for_profile(self.profile, self.modulation)
    }

    pub fn pilot_symbol(&self) -> usize {
        DEFAULT_PILOT_SYMBOL
    }

    pub fn pilot_stride(&self) -> usize {
        DEFAULT_PILOT_STRIDE
    }

    pub fn snr_grid(&self) -> Vec<f64> {
        let [lo, hi] = self.snr_range_db;
        if self.snr_step_db <= 0.0 || hi == lo {
            return vec![lo];
        }
        let n = ((hi - lo) / self.snr_step_db + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + i as f64 * self.snr_step_db).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.snr_range_db;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("SNR range [{lo}, {hi}] is invalid")));
        }
        if self.pa_seeds.is_empty() {
            return Err(Error::Config("at least one PA seed is required".into()));
        }
        if self.num_ttis == 0 {
            return Err(Error::Config("dataset has no TTIs".into()));
        }
        if let Some(max) = self.backoff_max_db {
            if !(max >= self.backoff_db) {
                return Err(Error::Config(format!("backoff range [{}, {max}] is invalid", self.backoff_db)));
            }
        }
        if !(self.dither_delta >= 0.0) || !(self.kappa > 0.0) {
            return Err(Error::Config("dither delta must be >= 0 and kappa > 0".into()));
        }
        self.link().validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialises")
    }
}

/// Training and validation must not share PA realisations.
pub fn check_disjoint(train: &DatasetSpec, val: &DatasetSpec) -> Result<()> {
    if train.pa == PaChoice::Dithered && val.pa == PaChoice::Dithered {
        if let Some(s) = train.pa_seeds.iter().find(|s| val.pa_seeds.contains(s)) {
            return Err(Error::Config(format!("PA seed {s} appears in both training and validation")));
        }
    }
    Ok(())
}
