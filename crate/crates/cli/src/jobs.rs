//! JSON job descriptions accepted through `--config`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use hybridrx::dsp::{Modulation, Profile};
use hybridrx::eval::ReceiverName;
use hybridrx::impairments::PaModel;
use hybridrx::pipeline::{DatasetSpec, TrainHyper};
use hybridrx::rx::{HybridConfig, ReceiverKind};
use serde::{Deserialize, Serialize};

/// `train`: model, data recipes and optimizer settings. Missing parts take
/// the desk defaults for `receiver` at `modulation` and `backoff_db`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainJob {
    pub receiver: ReceiverKind,
    #[serde(default = "default_modulation")]
    pub modulation: Modulation,
    #[serde(default = "default_backoff")]
    pub backoff_db: f64,
    #[serde(default)]
    pub model: Option<HybridConfig>,
    #[serde(default)]
    pub train: Option<DatasetSpec>,
    #[serde(default)]
    pub val: Option<DatasetSpec>,
    #[serde(default)]
    pub hyper: TrainHyper,
}

/// `eval`: receivers scored on one dataset, generated from `dataset` or
/// read from `dataset_file`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalJob {
    pub receivers: Vec<ReceiverName>,
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
    #[serde(default)]
    pub dataset_file: Option<PathBuf>,
    #[serde(default)]
    pub checkpoints: BTreeMap<ReceiverName, PathBuf>,
}

/// `evm`: backoff grid and amplifier; the default is the fitted reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvmJob {
    #[serde(default = "default_backoffs")]
    pub backoffs_db: Vec<f64>,
    #[serde(default)]
    pub pa: Option<PaModel>,
}

/// `grad-check`: coordinates probed per parameter tensor and tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradCheckJob {
    #[serde(default = "default_receivers")]
    pub receivers: Vec<ReceiverKind>,
    #[serde(default = "default_coords")]
    pub coords_per_param: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub profile: Option<Profile>,
}

impl Default for GradCheckJob {
    fn default() -> Self {
        GradCheckJob {
            receivers: default_receivers(),
            coords_per_param: default_coords(),
            tolerance: default_tolerance(),
            step: default_step(),
            profile: None,
        }
    }
}

impl Default for EvmJob {
    fn default() -> Self {
        EvmJob {
            backoffs_db: default_backoffs(),
            pa: None,
        }
    }
}

fn default_modulation() -> Modulation {
    Modulation::Qam16
}

fn default_backoff() -> f64 {
    3.0
}

fn default_backoffs() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0, 6.0]
}

fn default_receivers() -> Vec<ReceiverKind> {
    vec![ReceiverKind::Hybrid, ReceiverKind::DeepRx]
}

fn default_coords() -> usize {
    50
}

fn default_tolerance() -> f64 {
    1e-4
}

fn default_step() -> f64 {
    1e-5
}
