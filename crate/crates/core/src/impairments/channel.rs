//! Propagation: AWGN and tapped-delay-line Rayleigh fading.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dsp::{GridKind, LinkConfig, ResourceGrid, TimeFrame};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Normalized delays and powers (dB) of the 3GPP TDL-A profile.
pub const TDL_A: [(f64, f64); 23] = [
    (0.0000, -13.4),
    (0.3819, 0.0),
    (0.4025, -2.2),
    (0.5868, -4.0),
    (0.4610, -6.0),
    (0.5375, -8.2),
    (0.6708, -9.9),
    (0.5750, -10.5),
    (0.7618, -7.5),
    (1.5375, -15.9),
    (1.8978, -6.6),
    (2.2242, -16.7),
    (2.1718, -12.4),
    (2.4942, -15.2),
    (2.5119, -10.8),
    (3.0582, -11.3),
    (4.0810, -12.7),
    (4.4579, -16.2),
    (4.5695, -18.3),
    (4.7966, -18.9),
    (5.0066, -16.6),
    (5.3043, -19.9),
    (9.6586, -29.7),
];

/// Sinusoids per tap in the sum-of-sinusoids fading generator.
const SOS_TERMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn,
    Tdl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub kind: ChannelKind,
    pub tap_delays_s: Vec<f64>,
    pub tap_powers_db: Vec<f64>,
    pub delay_spread_s: f64,
    pub max_doppler_hz: f64,
    pub seed: u64,
}

impl ChannelProfile {
    pub fn awgn() -> Self {
        ChannelProfile {
            kind: ChannelKind::Awgn,
            tap_delays_s: vec![],
            tap_powers_db: vec![],
            delay_spread_s: 0.0,
            max_doppler_hz: 0.0,
            seed: 0,
        }
    }

    /// TDL-A scaled to `delay_spread_s`.
    pub fn tdl_a(delay_spread_s: f64, max_doppler_hz: f64, seed: u64) -> Self {
        ChannelProfile {
            kind: ChannelKind::Tdl,
            tap_delays_s: TDL_A.iter().map(|&(d, _)| d * delay_spread_s).collect(),
            tap_powers_db: TDL_A.iter().map(|&(_, p)| p).collect(),
            delay_spread_s,
            max_doppler_hz,
            seed,
        }
    }

    /// Taps with explicit delays (seconds) and powers (dB).
    pub fn custom(delays_s: Vec<f64>, powers_db: Vec<f64>, max_doppler_hz: f64, seed: u64) -> Self {
        ChannelProfile {
            kind: ChannelKind::Tdl,
            tap_delays_s: delays_s,
            tap_powers_db: powers_db,
            delay_spread_s: 0.0,
            max_doppler_hz,
            seed,
        }
    }

    /// Taps on the sample grid: `(delay in samples, linear power)`, powers
    /// summing to one. Taps that round to the same sample are merged.
    pub fn sampled_taps(&self, sample_rate_hz: f64) -> Result<Vec<(usize, f64)>> {
        if self.tap_delays_s.len() != self.tap_powers_db.len() || self.tap_delays_s.is_empty() {
            return Err(Error::Config("tap delay and power lists must be non-empty and equal length".into()));
        }
        if self.tap_delays_s.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::Config("tap delays must be non-negative".into()));
        }
        let total: f64 = self.tap_powers_db.iter().map(|p| 10f64.powf(p / 10.0)).sum();
        let mut taps: Vec<(usize, f64)> = Vec::new();
        for (&d, &p) in self.tap_delays_s.iter().zip(&self.tap_powers_db) {
            let delay = (d * sample_rate_hz).round() as usize;
            let power = 10f64.powf(p / 10.0) / total;
            match taps.iter_mut().find(|(t, _)| *t == delay) {
                Some(tap) => tap.1 += power,
                None => taps.push((delay, power)),
            }
        }
        taps.sort_by_key(|t| t.0);
        Ok(taps)
    }
}

/// Add circular complex Gaussian noise so that the per-data-RE SNR after
/// demodulation equals `snr_db`. `snr_db = +inf` leaves the frame unchanged.
pub fn apply_awgn(frame: &TimeFrame<f64>, snr_db: f64, config: &LinkConfig, seed: u64) -> TimeFrame<f64> {
    if snr_db == f64::INFINITY {
        return frame.clone();
    }
    let var = noise_variance(snr_db, config);
    let sd = (var / 2.0).sqrt();
    let normal = Normal::new(0.0, sd).expect("finite noise level");
    let mut rng = stream_rng(seed, 0, Stream::Noise);
    let mut out = frame.clone();
    out.map_active(|_, _, z| z + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)));
    out
}

/// Per-sample noise variance giving per-RE SNR `snr_db`.
pub fn noise_variance(snr_db: f64, config: &LinkConfig) -> f64 {
    10f64.powf(-snr_db / 10.0) * config.fft_size as f64 / config.num_data_subcarriers as f64
}

/// Rayleigh block-fading taps for one TTI: `coeffs[tap][symbol]`.
fn fading_taps(
    taps: &[(usize, f64)],
    config: &LinkConfig,
    max_doppler_hz: f64,
    seed: u64,
) -> Vec<Vec<Complex64>> {
    let mut rng = stream_rng(seed, 0, Stream::Channel);
    let mut t = 0.0;
    let times: Vec<f64> = (0..config.num_symbols)
        .map(|s| {
            let start = t;
            t += config.symbol_duration_s(s);
            start
        })
        .collect();
    let tau = std::f64::consts::TAU;
    taps.iter()
        .map(|&(_, power)| {
            let terms: Vec<(f64, f64)> = (0..SOS_TERMS)
                .map(|_| (rng.gen_range(0.0..tau), rng.gen_range(0.0..tau)))
                .collect();
            let amp = (power / SOS_TERMS as f64).sqrt();
            times
                .iter()
                .map(|&time| {
                    terms.iter().fold(Complex64::new(0.0, 0.0), |acc, &(angle, phase)| {
                        acc + Complex64::from_polar(amp, tau * max_doppler_hz * angle.cos() * time + phase)
                    })
                })
                .collect()
        })
        .collect()
}

/// Tap coefficients per symbol: `(delay in samples, coefficient per symbol)`.
pub type TapSet = Vec<(usize, Vec<Complex64>)>;

/// Convolve the TTI waveform with a tapped delay line whose coefficients are
/// constant within each symbol. Returns the faded frame and the exact
/// frequency response on every (subcarrier, symbol).
pub fn apply_tdl(
    frame: &TimeFrame<f64>,
    profile: &ChannelProfile,
    config: &LinkConfig,
    seed: u64,
) -> Result<(TimeFrame<f64>, ResourceGrid<f64>)> {
    let taps = profile.sampled_taps(config.sample_rate_hz())?;
    let coeffs = fading_taps(&taps, config, profile.max_doppler_hz, seed);
    let set: TapSet = taps.iter().map(|t| t.0).zip(coeffs).collect();
    apply_taps(frame, &set, config)
}

/// Deterministic core of [`apply_tdl`].
pub fn apply_taps(
    frame: &TimeFrame<f64>,
    taps: &TapSet,
    config: &LinkConfig,
) -> Result<(TimeFrame<f64>, ResourceGrid<f64>)> {
    let max_delay = taps.iter().map(|t| t.0).max().unwrap_or(0);
    if max_delay > config.cp_short {
        return Err(Error::Config(format!(
            "tap delay of {max_delay} samples exceeds the short cyclic prefix ({})",
            config.cp_short
        )));
    }
    // serialize the active samples into one stream
    let ns = frame.symbols();
    let mut stream = Vec::with_capacity(frame.active_len());
    let mut owner = Vec::with_capacity(frame.active_len());
    for s in 0..ns {
        for r in 0..frame.valid_len[s] {
            stream.push(frame.get(r, s));
            owner.push(s);
        }
    }
    let mut out = frame.clone();
    let mut pos = 0;
    for s in 0..ns {
        for r in 0..frame.valid_len[s] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (d, h) in taps {
                if pos >= *d {
                    acc += h[s] * stream[pos - d];
                }
            }
            out.set(r, s, acc);
            pos += 1;
        }
    }
    debug_assert_eq!(owner.len(), pos);

    let n = config.fft_size as f64;
    let bins = config.occupied_bins();
    let mut h = ResourceGrid::zeros(config.num_data_subcarriers, ns, GridKind::ChannelEstimate);
    for (sc, &bin) in bins.iter().enumerate() {
        for s in 0..ns {
            let v = taps.iter().fold(Complex64::new(0.0, 0.0), |acc, (d, c)| {
                acc + c[s] * Complex64::from_polar(1.0, -std::f64::consts::TAU * (bin * d) as f64 / n)
            });
            h.set(sc, s, v);
        }
    }
    Ok((out, h))
}
