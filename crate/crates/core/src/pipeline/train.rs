use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::spec::check_disjoint;
use crate::error::{Error, Result};
use crate::nn::{bce_with_logits, AdamConfig, AdamState, Module, Tensor};
use crate::rng::{stream_rng, Stream};
use crate::rx::{assemble_pre_input, grid_tensor, HybridConfig, NeuralReceiver};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub grad_clip: f64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            lr: 1e-3,
            batch_size: 8,
            epochs: 20,
            seed: 0,
            grad_clip: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub split: String,
    pub loss: f64,
    pub ber: f64,
}

pub struct TrainResult {
    /// Weights of the epoch with the lowest validation loss.
    pub model: NeuralReceiver<f64>,
    pub best_epoch: usize,
    pub metrics: Vec<EpochMetrics>,
    /// Wall-clock seconds per epoch, kept apart from the deterministic log.
    pub wall_seconds: Vec<f64>,
    pub checkpoint: Option<PathBuf>,
}

pub const METRICS_FILE: &str = "metrics.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const CHECKPOINT_FILE: &str = "model.ckpt";

struct Example {
    z: Tensor<f64>,
    ls: Tensor<f64>,
    labels: Vec<u8>,
    mask: Vec<bool>,
}

fn examples(ds: &Dataset) -> Vec<Example> {
    ds.records
        .iter()
        .map(|r| Example {
            z: assemble_pre_input(&r.rx_frame),
            ls: grid_tensor(&r.raw_ls),
            labels: r.labels.clone(),
            mask: r.mask.clone(),
        })
        .collect()
}

/// Mean loss and pooled masked BER.
fn assess(model: &NeuralReceiver<f64>, data: &[Example]) -> Result<(f64, f64)> {
    let (mut loss, mut errors, mut bits) = (0.0, 0u64, 0u64);
    for ex in data {
        let (logits, _) = model.forward(&ex.z, &ex.ls)?;
        loss += bce_with_logits(&logits, &ex.labels, &ex.mask)?.0;
        for ((&l, &b), &m) in logits.data.iter().zip(&ex.labels).zip(&ex.mask) {
            if m {
                bits += 1;
                errors += ((l > 0.0) as u8 != b) as u64;
            }
        }
    }
    Ok((loss / data.len() as f64, errors as f64 / bits.max(1) as f64))
}

/// Metrics log; the first line records the run hash and seed.
pub fn metrics_csv(metrics: &[EpochMetrics], run_hash: &str, seed: u64) -> String {
    let mut s = format!("# config_sha256={run_hash} seed={seed}\nepoch,split,loss,ber\n");
    for m in metrics {
        writeln!(s, "{},{},{:e},{:e}", m.epoch, m.split, m.loss, m.ber).expect("write to string");
    }
    s
}

/// SHA-256 over the model, dataset and optimizer settings of a run.
pub fn run_hash(config: &HybridConfig, train_set: &Dataset, val_set: &Dataset, hyper: &TrainHyper) -> String {
    let joined = format!(
        "{}\n{}\n{}\n{}",
        config.to_json(),
        train_set.spec.to_json(),
        val_set.spec.to_json(),
        serde_json::to_string(hyper).expect("hyper serialises")
    );
    super::dataset::sha256_hex(joined.as_bytes())
}

/// Adam on masked BCE with per-epoch validation. Epoch 0 records the
/// untrained model; the returned model has the best validation loss.
/// With `out_dir`, writes the best checkpoint, `metrics.csv` and
/// `timing.csv` there.
pub fn train(
    config: &HybridConfig,
    train_set: &Dataset,
    val_set: &Dataset,
    hyper: &TrainHyper,
    out_dir: Option<&Path>,
) -> Result<TrainResult> {
    check_disjoint(&train_set.spec, &val_set.spec)?;
    if hyper.batch_size == 0 || !(hyper.lr > 0.0) {
        return Err(Error::Config("batch size and learning rate must be positive".into()));
    }
    if train_set.records.is_empty() || val_set.records.is_empty() {
        return Err(Error::Config("training and validation sets must be non-empty".into()));
    }
    let run_hash = run_hash(config, train_set, val_set, hyper);
    let mut model = NeuralReceiver::<f64>::new(config)?;
    let mut adam = AdamState::new(
        &model,
        AdamConfig {
            lr: hyper.lr,
            ..AdamConfig::default()
        },
    );
    let train_data = examples(train_set);
    let val_data = examples(val_set);

    let mut metrics = Vec::new();
    let mut wall = Vec::new();
    let start = Instant::now();
    let (tl, tb) = assess(&model, &train_data)?;
    let (vl, vb) = assess(&model, &val_data)?;
    metrics.push(EpochMetrics { epoch: 0, split: "train".into(), loss: tl, ber: tb });
    metrics.push(EpochMetrics { epoch: 0, split: "val".into(), loss: vl, ber: vb });
    wall.push(start.elapsed().as_secs_f64());
    let mut best = (vl, 0usize, model.clone(), adam.clone());

    let mut order: Vec<usize> = (0..train_data.len()).collect();
    let mut step = 0u64;
    for epoch in 1..=hyper.epochs {
        let t0 = Instant::now();
        order.shuffle(&mut stream_rng(hyper.seed, epoch as u64, Stream::Shuffle));
        let (mut loss_sum, mut errors, mut bits) = (0.0, 0u64, 0u64);
        for batch in order.chunks(hyper.batch_size) {
            model.zero_grad();
            for &i in batch {
                let ex = &train_data[i];
                let (logits, cache) = model.forward(&ex.z, &ex.ls)?;
                let (loss, g) = bce_with_logits(&logits, &ex.labels, &ex.mask)?;
                if !loss.is_finite() {
                    return Err(Error::Diverged {
                        step,
                        lr: hyper.lr,
                        detail: format!("non-finite loss on TTI {}", train_set.records[i].tti_index),
                    });
                }
                model.backward(&cache, &g)?;
                loss_sum += loss;
                for ((&l, &b), &m) in logits.data.iter().zip(&ex.labels).zip(&ex.mask) {
                    if m {
                        bits += 1;
                        errors += ((l > 0.0) as u8 != b) as u64;
                    }
                }
            }
            model.scale_grads(1.0 / batch.len() as f64);
            let norm = model.clip_grad_norm(hyper.grad_clip);
            if !norm.is_finite() {
                return Err(Error::Diverged {
                    step,
                    lr: hyper.lr,
                    detail: "non-finite gradient norm".into(),
                });
            }
            adam.step(&mut model);
            step += 1;
        }
        metrics.push(EpochMetrics {
            epoch,
            split: "train".into(),
            loss: loss_sum / train_data.len() as f64,
            ber: errors as f64 / bits.max(1) as f64,
        });
        let (vl, vb) = assess(&model, &val_data)?;
        metrics.push(EpochMetrics { epoch, split: "val".into(), loss: vl, ber: vb });
        if vl < best.0 {
            best = (vl, epoch, model.clone(), adam.clone());
        }
        wall.push(t0.elapsed().as_secs_f64());
    }

    let (_, best_epoch, best_model, best_adam) = best;
    let checkpoint = match out_dir {
        None => None,
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let ck = dir.join(CHECKPOINT_FILE);
            best_model.checkpoint(Some(&best_adam)).save(&ck)?;
            let mpath = dir.join(METRICS_FILE);
            std::fs::write(&mpath, metrics_csv(&metrics, &run_hash, hyper.seed)).map_err(|e| Error::io(&mpath, e))?;
            let mut timing = format!("# config_sha256={run_hash} seed={}\nepoch,wall_seconds\n", hyper.seed);
            for (e, w) in wall.iter().enumerate() {
                writeln!(timing, "{e},{w:.3}").expect("write to string");
            }
            let tpath = dir.join(TIMING_FILE);
            std::fs::write(&tpath, timing).map_err(|e| Error::io(&tpath, e))?;
            Some(ck)
        }
    };
    Ok(TrainResult {
        model: best_model,
        best_epoch,
        metrics,
        wall_seconds: wall,
        checkpoint,
    })
}
