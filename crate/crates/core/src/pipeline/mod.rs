//! Dataset generation and persistence, training, and BER evaluation.

mod dataset;
mod evaluate;
mod generate;
mod receivers;
mod spec;
mod train;

pub use dataset::{generate_dataset, manifest_path, sha256_hex, Dataset, Manifest, MAGIC as DATASET_MAGIC, VERSION as DATASET_VERSION};
pub use evaluate::{evaluate, evaluate_records, pooled, BerCounter, BerRow};
pub use generate::{generate_tti, Generator, TtiRecord};
pub use receivers::{Receiver, RxContext};
pub use spec::{check_disjoint, DatasetSpec, PaChoice, SnrMode};
pub use train::{metrics_csv, run_hash, train, EpochMetrics, TrainHyper, TrainResult, CHECKPOINT_FILE, METRICS_FILE, TIMING_FILE};
