use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of bits per resource element carried by the LLR tensors.
pub const NB_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "qam16", alias = "QAM16")]
    Qam16,
    #[serde(rename = "qam64", alias = "QAM64")]
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qam16" | "16qam" | "16-qam" => Ok(Modulation::Qam16),
            "qam64" | "64qam" | "64-qam" => Ok(Modulation::Qam64),
            other => Err(Error::Argument(format!("unknown modulation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Desk-scale numerology used by tests and the default CLI runs.
    Mini,
    /// Full 5 MHz numerology (N = 512, 312 data subcarriers).
    Paper,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mini" => Ok(Profile::Mini),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Argument(format!("unknown profile `{other}`"))),
        }
    }
}

/// OFDM numerology of one TTI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub fft_size: usize,
    pub num_data_subcarriers: usize,
    pub num_symbols: usize,
    pub cp_long: usize,
    pub cp_short: usize,
    pub long_cp_symbols: Vec<usize>,
    pub subcarrier_spacing_hz: f64,
    pub modulation: Modulation,
    pub nb_max: usize,
}

impl LinkConfig {
    pub fn mini(modulation: Modulation) -> Self {
        LinkConfig {
            fft_size: 64,
            num_data_subcarriers: 36,
            num_symbols: 14,
            cp_long: 6,
            cp_short: 5,
            long_cp_symbols: vec![0, 7],
            subcarrier_spacing_hz: 15e3,
            modulation,
            nb_max: NB_MAX,
        }
    }

    pub fn paper(modulation: Modulation) -> Self {
        LinkConfig {
            fft_size: 512,
            num_data_subcarriers: 312,
            num_symbols: 14,
            cp_long: 40,
            cp_short: 36,
            long_cp_symbols: vec![0, 7],
            subcarrier_spacing_hz: 15e3,
            modulation,
            nb_max: NB_MAX,
        }
    }

    pub fn for_profile(profile: Profile, modulation: Modulation) -> Self {
        match profile {
            Profile::Mini => Self::mini(modulation),
            Profile::Paper => Self::paper(modulation),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.fft_size;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!("fft size {n} is not a power of two")));
        }
        if self.num_data_subcarriers == 0 || self.num_data_subcarriers > n - 1 {
            return Err(Error::Config(format!(
                "{} data subcarriers do not fit an FFT of {n} with DC unused",
                self.num_data_subcarriers
            )));
        }
        if self.num_symbols == 0 {
            return Err(Error::Config("TTI has no OFDM symbols".into()));
        }
        if self.cp_short > self.cp_long || self.cp_long >= n {
            return Err(Error::Config(format!(
                "cyclic prefixes must satisfy cp_short <= cp_long < N (got {} / {})",
                self.cp_short, self.cp_long
            )));
        }
        if let Some(&s) = self.long_cp_symbols.iter().find(|&&s| s >= self.num_symbols) {
            return Err(Error::Config(format!("long-CP symbol {s} outside the TTI")));
        }
        if self.nb_max != NB_MAX {
            return Err(Error::Config(format!("nb_max must be {NB_MAX}")));
        }
        Ok(())
    }

    pub fn cp_of(&self, symbol: usize) -> usize {
        if self.long_cp_symbols.contains(&symbol) {
            self.cp_long
        } else {
            self.cp_short
        }
    }

    /// Rows of the zero-padded time-domain frame, `cp_long + N`.
    pub fn frame_rows(&self) -> usize {
        self.cp_long + self.fft_size
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    /// FFT bin of each occupied subcarrier, lowest frequency first. The DC
    /// bin is skipped; the lower half of the block sits on negative
    /// frequencies.
    pub fn occupied_bins(&self) -> Vec<usize> {
        let n = self.fft_size;
        let lower = self.num_data_subcarriers / 2;
        (0..self.num_data_subcarriers)
            .map(|i| if i < lower { n - lower + i } else { i - lower + 1 })
            .collect()
    }

    /// Scale applied after the inverse DFT so that a grid of unit-energy
    /// symbols produces unit average sample power: `N / sqrt(N_D)`.
    pub fn tx_scale(&self) -> f64 {
        self.fft_size as f64 / (self.num_data_subcarriers as f64).sqrt()
    }

    /// Symbol duration including the cyclic prefix, in seconds.
    pub fn symbol_duration_s(&self, symbol: usize) -> f64 {
        (self.fft_size + self.cp_of(symbol)) as f64 / self.sample_rate_hz()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.fft_size as f64 * self.subcarrier_spacing_hz
    }
}
