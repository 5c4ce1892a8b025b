use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::{awgn_ber_theory, awgn_snr_for_ber};
use crate::dsp::{LinkConfig, Modulation, Profile};
use crate::error::{Error, Result};
use crate::impairments::ChannelProfile;
use crate::nn::Checkpoint;
use crate::pipeline::{evaluate_records, pooled, DatasetSpec, Generator, PaChoice, Receiver, RxContext};
use crate::rx::NeuralReceiver;

/// Receivers a sweep can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverName {
    LmmseKnown,
    LmmseEst,
    Deeprx,
    Hybrid,
    /// Closed-form AWGN curve; needs no simulation.
    Theory,
}

impl ReceiverName {
    pub fn as_str(self) -> &'static str {
        match self {
            ReceiverName::LmmseKnown => "lmmse_known",
            ReceiverName::LmmseEst => "lmmse_est",
            ReceiverName::Deeprx => "deeprx",
            ReceiverName::Hybrid => "hybrid",
            ReceiverName::Theory => "theory",
        }
    }

    pub fn is_neural(self) -> bool {
        matches!(self, ReceiverName::Deeprx | ReceiverName::Hybrid)
    }
}

fn default_ceiling() -> f64 {
    30.0
}

fn default_tolerance() -> f64 {
    0.1
}

/// BER and backoff sweep configuration. Every evaluation TTI is drawn from
/// `eval_seed`, and TTI `i` shares payload and noise across all sweep points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub receivers: Vec<ReceiverName>,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    pub modulation: Modulation,
    #[serde(default = "ChannelProfile::awgn")]
    pub channel: ChannelProfile,
    #[serde(default = "default_pa")]
    pub pa: PaChoice,
    /// SNR grid of the BER sweep.
    pub snr_grid_db: Vec<f64>,
    /// Operating backoff of the BER sweep.
    pub backoff_db: f64,
    pub backoff_grid_db: Vec<f64>,
    pub target_ber: Vec<f64>,
    /// Receiver name (`hybrid`, `deeprx`) to checkpoint file.
    #[serde(default)]
    pub checkpoints: BTreeMap<ReceiverName, PathBuf>,
    pub ttis_per_point: usize,
    pub eval_seed: u64,
    #[serde(default = "default_ceiling")]
    pub snr_ceiling_db: f64,
    #[serde(default = "default_tolerance")]
    pub snr_tolerance_db: f64,
}

fn default_profile() -> Profile {
    Profile::Mini
}

fn default_pa() -> PaChoice {
    PaChoice::Nominal
}

impl SweepSpec {
    pub fn new(receivers: Vec<ReceiverName>, modulation: Modulation) -> Self {
        SweepSpec {
            receivers,
            profile: Profile::Mini,
            modulation,
            channel: ChannelProfile::awgn(),
            pa: PaChoice::Nominal,
            snr_grid_db: (0..=15).map(|i| 2.0 * i as f64).collect(),
            backoff_db: 3.0,
            backoff_grid_db: vec![1.0, 2.0, 3.0, 4.0, 6.0],
            target_ber: vec![0.1, 0.01],
            checkpoints: BTreeMap::new(),
            ttis_per_point: 100,
            eval_seed: 777,
            snr_ceiling_db: default_ceiling(),
            snr_tolerance_db: default_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.receivers.is_empty() {
            return Err(Error::Config("sweep lists no receivers".into()));
        }
        if self.snr_grid_db.is_empty() || self.backoff_grid_db.is_empty() || self.target_ber.is_empty() {
            return Err(Error::Config("sweep grids must be non-empty".into()));
        }
        if self.ttis_per_point == 0 {
            return Err(Error::Config("ttis_per_point must be positive".into()));
        }
        if self.target_ber.iter().any(|&t| !(t > 0.0 && t < 0.5)) {
            return Err(Error::Config("target BER must lie in (0, 0.5)".into()));
        }
        if !(self.snr_tolerance_db > 0.0 && self.snr_ceiling_db > 0.0) {
            return Err(Error::Config("SNR ceiling and tolerance must be positive".into()));
        }
        for r in &self.receivers {
            if r.is_neural() && !self.checkpoints.contains_key(r) {
                return Err(Error::Config(format!("receiver `{}` needs a checkpoint", r.as_str())));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sweep spec serialises")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        crate::pipeline::sha256_hex(self.to_json().as_bytes())
    }

    /// Generator for evaluation TTIs at any (SNR, backoff) point.
    pub fn generator(&self) -> Result<Generator> {
        let spec = DatasetSpec {
            profile: self.profile,
            channel: self.channel.clone(),
            pa: self.pa,
            ..DatasetSpec::evaluation(self.modulation, self.backoff_db, 0.0, self.ttis_per_point, self.eval_seed)
        };
        Generator::new(&spec)
    }
}

/// A receiver ready to run, or the closed-form curve.
pub enum SweepReceiver {
    Simulated(Receiver),
    Theory,
}

/// One receiver by name; neural receivers come from `checkpoint` and must
/// match `link`.
pub fn load_receiver(name: ReceiverName, checkpoint: Option<&Path>, link: &LinkConfig) -> Result<SweepReceiver> {
    Ok(match name {
        ReceiverName::LmmseKnown => SweepReceiver::Simulated(Receiver::LmmseKnown),
        ReceiverName::LmmseEst => SweepReceiver::Simulated(Receiver::LmmseEst),
        ReceiverName::Theory => SweepReceiver::Theory,
        ReceiverName::Hybrid | ReceiverName::Deeprx => {
            let named = |msg: String| Error::Config(format!("receiver `{}`: {msg}", name.as_str()));
            let path = checkpoint.ok_or_else(|| named("no checkpoint given".into()))?;
            let ck = Checkpoint::load(path).map_err(|e| named(e.to_string()))?;
            let model = NeuralReceiver::<f64>::from_checkpoint(&ck).map_err(|e| named(e.to_string()))?;
            if model.config().link != *link {
                return Err(named("checkpoint was trained for a different link configuration".into()));
            }
            let rx = Receiver::Neural(Box::new(model));
            if rx.name() != name.as_str() {
                return Err(named(format!("checkpoint holds a `{}` model", rx.name())));
            }
            SweepReceiver::Simulated(rx)
        }
    })
}

/// Load every receiver of the sweep.
pub fn load_receivers(spec: &SweepSpec) -> Result<Vec<(ReceiverName, SweepReceiver)>> {
    spec.validate()?;
    let link = spec.generator()?.link().clone();
    spec.receivers
        .iter()
        .map(|&name| Ok((name, load_receiver(name, spec.checkpoints.get(&name).map(PathBuf::as_path), &link)?)))
        .collect()
}

/// Pooled BER of `rx` over the sweep's evaluation TTIs at one point.
pub fn ber_at(
    rx: &Receiver,
    generator: &Generator,
    ctx: &RxContext,
    ttis: usize,
    snr_db: f64,
    backoff_db: f64,
) -> Result<crate::pipeline::BerRow> {
    let records = (0..ttis as u64)
        .map(|i| generator.tti_at(i, snr_db, backoff_db))
        .collect::<Result<Vec<_>>>()?;
    Ok(pooled(&evaluate_records(rx, &records, ctx)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerSweepRow {
    pub receiver: ReceiverName,
    pub snr_db: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub bit_count: u64,
}

/// BER of every receiver over the SNR grid at the operating backoff. Rows
/// are ordered by receiver, then SNR.
pub fn run_ber_sweep(spec: &SweepSpec, receivers: &[(ReceiverName, SweepReceiver)]) -> Result<Vec<BerSweepRow>> {
    spec.validate()?;
    let generator = spec.generator()?;
    let ctx = RxContext::new(generator.spec())?;
    let mut rows = Vec::with_capacity(receivers.len() * spec.snr_grid_db.len());
    for (name, rx) in receivers {
        for &snr in &spec.snr_grid_db {
            rows.push(match rx {
                SweepReceiver::Theory => BerSweepRow {
                    receiver: *name,
                    snr_db: snr,
                    ber: awgn_ber_theory(snr, spec.modulation),
                    bit_errors: 0,
                    bit_count: 0,
                },
                SweepReceiver::Simulated(rx) => {
                    let r = ber_at(rx, &generator, &ctx, spec.ttis_per_point, snr, spec.backoff_db)?;
                    BerSweepRow {
                        receiver: *name,
                        snr_db: snr,
                        ber: r.ber,
                        bit_errors: r.bit_errors,
                        bit_count: r.bit_count,
                    }
                }
            });
        }
    }
    rows.sort_by(|a, b| a.receiver.cmp(&b.receiver).then(a.snr_db.total_cmp(&b.snr_db)));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackoffSweepRow {
    pub receiver: ReceiverName,
    pub backoff_db: f64,
    pub target_ber: f64,
    /// `None` when the target is not met at the SNR ceiling.
    pub snr_needed_db: Option<f64>,
}

/// Smallest SNR in `[0, ceiling]` with `ber(snr) <= target`, assuming BER
/// falls with SNR. Bisection runs a fixed number of halvings so the probed
/// points depend only on the ceiling and tolerance.
pub fn required_snr(
    mut ber: impl FnMut(f64) -> Result<f64>,
    target: f64,
    ceiling: f64,
    tolerance: f64,
) -> Result<Option<f64>> {
    if ber(ceiling)? > target {
        return Ok(None);
    }
    if ber(0.0)? <= target {
        return Ok(Some(0.0));
    }
    let (mut lo, mut hi) = (0.0, ceiling);
    let steps = (ceiling / tolerance).log2().ceil().max(0.0) as usize;
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if ber(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Required SNR per receiver, backoff and target. Rows are ordered by
/// receiver, target, then backoff.
pub fn run_backoff_sweep(
    spec: &SweepSpec,
    receivers: &[(ReceiverName, SweepReceiver)],
) -> Result<Vec<BackoffSweepRow>> {
    spec.validate()?;
    let generator = spec.generator()?;
    let ctx = RxContext::new(generator.spec())?;
    let mut rows = Vec::new();
    for (name, rx) in receivers {
        for &target in &spec.target_ber {
            for &backoff in &spec.backoff_grid_db {
                let snr = match rx {
                    SweepReceiver::Theory => {
                        let s = awgn_snr_for_ber(target, spec.modulation);
                        (s <= spec.snr_ceiling_db).then_some(s.max(0.0))
                    }
                    SweepReceiver::Simulated(rx) => required_snr(
                        |snr| Ok(ber_at(rx, &generator, &ctx, spec.ttis_per_point, snr, backoff)?.ber),
                        target,
                        spec.snr_ceiling_db,
                        spec.snr_tolerance_db,
                    )?,
                };
                rows.push(BackoffSweepRow {
                    receiver: *name,
                    backoff_db: backoff,
                    target_ber: target,
                    snr_needed_db: snr,
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.receiver
            .cmp(&b.receiver)
            .then(b.target_ber.total_cmp(&a.target_ber))
            .then(a.backoff_db.total_cmp(&b.backoff_db))
    });
    Ok(rows)
}

fn header(hash: &str, seed: u64, columns: &str) -> String {
    format!("# config_sha256={hash} seed={seed}\n{columns}\n")
}

pub fn ber_sweep_csv(spec: &SweepSpec, rows: &[BerSweepRow]) -> String {
    let mut out = header(&spec.config_hash(), spec.eval_seed, "receiver,snr_db,ber,bit_errors,bit_count");
    for r in rows {
        out += &format!("{},{},{:e},{},{}\n", r.receiver.as_str(), r.snr_db, r.ber, r.bit_errors, r.bit_count);
    }
    out
}

pub fn backoff_sweep_csv(spec: &SweepSpec, rows: &[BackoffSweepRow]) -> String {
    let mut out = header(&spec.config_hash(), spec.eval_seed, "receiver,backoff_db,target_ber,snr_needed_db");
    for r in rows {
        let snr = r.snr_needed_db.map_or_else(|| "saturated".to_string(), |s| format!("{s}"));
        out += &format!("{},{},{},{}\n", r.receiver.as_str(), r.backoff_db, r.target_ber, snr);
    }
    out
}
