use serde::{Deserialize, Serialize};

use crate::dsp::{LinkConfig, NB_MAX};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    /// Time-domain network, FFT bridge, frequency-domain network.
    Hybrid,
    /// Frequency-domain network only.
    DeepRx,
}

pub const DESK_PRE_FFT_FILTERS: [usize; 3] = [8, 16, 32];
pub const DESK_POST_FFT_FILTERS: [usize; 4] = [16, 32, 32, 16];
pub const PAPER_PRE_FFT_FILTERS: [usize; 3] = [64, 128, 256];
pub const PAPER_POST_FFT_FILTERS: [usize; 5] = [32, 64, 64, 32, 16];
/// `[subcarrier, symbol]` dilation per post-FFT block. Receptive-field
/// radius is `2 * sum(d)` = 16 on both axes, so every RE sees the pilot
/// symbol.
pub const DESK_POST_FFT_DILATIONS: [[usize; 2]; 4] = [[1, 1], [2, 2], [3, 3], [2, 2]];
pub const PAPER_POST_FFT_DILATIONS: [[usize; 2]; 5] = [[1, 1], [2, 2], [3, 3], [2, 2], [1, 1]];
/// Kernel scale of the pre-FFT output head relative to He-uniform.
pub const DEFAULT_PRE_HEAD_GAIN: f64 = 0.01;

/// Architecture description; serialised verbatim into checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub kind: ReceiverKind,
    pub link: LinkConfig,
    pub pre_fft_filters: Vec<usize>,
    pub post_fft_filters: Vec<usize>,
    /// Per-block dilation of the post-FFT stack; missing entries mean none.
    #[serde(default)]
    pub post_fft_dilations: Vec<[usize; 2]>,
    /// Feed `z + pre(z)` to the FFT bridge instead of `pre(z)`.
    pub global_skip: bool,
    pub output_bits: usize,
    pub pre_head_gain: f64,
    pub init_seed: u64,
}

impl HybridConfig {
    pub fn desk(kind: ReceiverKind, link: LinkConfig, init_seed: u64) -> Self {
        HybridConfig {
            kind,
            link,
            pre_fft_filters: DESK_PRE_FFT_FILTERS.to_vec(),
            post_fft_filters: DESK_POST_FFT_FILTERS.to_vec(),
            post_fft_dilations: DESK_POST_FFT_DILATIONS.to_vec(),
            global_skip: true,
            output_bits: NB_MAX,
            pre_head_gain: DEFAULT_PRE_HEAD_GAIN,
            init_seed,
        }
    }

    pub fn paper(kind: ReceiverKind, link: LinkConfig, init_seed: u64) -> Self {
        HybridConfig {
            pre_fft_filters: PAPER_PRE_FFT_FILTERS.to_vec(),
            post_fft_filters: PAPER_POST_FFT_FILTERS.to_vec(),
            post_fft_dilations: PAPER_POST_FFT_DILATIONS.to_vec(),
            ..Self::desk(kind, link, init_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        if self.output_bits != NB_MAX {
            return Err(Error::Config(format!("output bits must be {NB_MAX}")));
        }
        if self.post_fft_filters.is_empty() || self.post_fft_filters.contains(&0) {
            return Err(Error::Config("post-FFT filter list must be non-empty and positive".into()));
        }
        if self.post_fft_dilations.len() > self.post_fft_filters.len()
            || self.post_fft_dilations.iter().flatten().any(|&d| d == 0)
        {
            return Err(Error::Config("post-FFT dilations must be >= 1, one per block at most".into()));
        }
        if self.kind == ReceiverKind::Hybrid
            && (self.pre_fft_filters.is_empty() || self.pre_fft_filters.contains(&0))
        {
            return Err(Error::Config("pre-FFT filter list must be non-empty and positive".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}
