use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::generate::TtiRecord;
use super::receivers::{Receiver, RxContext};
use crate::error::Result;
use crate::rx::count_bit_errors;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerRow {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bit_count: u64,
    pub ber: f64,
}

impl BerRow {
    /// Binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        if self.bit_count == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bit_count as f64).sqrt()
    }
}

/// Accumulates masked bit errors per SNR value.
#[derive(Debug, Clone, Default)]
pub struct BerCounter {
    rows: Vec<BerRow>,
}

impl BerCounter {
    pub fn add(&mut self, snr_db: f64, errors: u64, bits: u64) {
        let row = match self.rows.iter_mut().find(|r| r.snr_db.to_bits() == snr_db.to_bits()) {
            Some(r) => r,
            None => {
                self.rows.push(BerRow {
                    snr_db,
                    bit_errors: 0,
                    bit_count: 0,
                    ber: 0.0,
                });
                self.rows.last_mut().expect("just pushed")
            }
        };
        row.bit_errors += errors;
        row.bit_count += bits;
    }

    /// Rows sorted by SNR.
    pub fn finish(mut self) -> Vec<BerRow> {
        for r in &mut self.rows {
            r.ber = if r.bit_count > 0 { r.bit_errors as f64 / r.bit_count as f64 } else { 0.0 };
        }
        self.rows.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        self.rows
    }
}

pub fn evaluate_records<'a>(
    receiver: &Receiver,
    records: impl IntoIterator<Item = &'a TtiRecord>,
    ctx: &RxContext,
) -> Result<Vec<BerRow>> {
    let mut counter = BerCounter::default();
    for r in records {
        let llr = receiver.detect(r, ctx)?;
        let (e, n) = count_bit_errors(&llr, &r.labels, &r.mask);
        counter.add(r.snr_db, e, n);
    }
    Ok(counter.finish())
}

/// Per-SNR BER of `receiver` over a dataset, masked bits only.
pub fn evaluate(receiver: &Receiver, dataset: &Dataset) -> Result<Vec<BerRow>> {
    evaluate_records(receiver, &dataset.records, &RxContext::new(&dataset.spec)?)
}

/// Pool rows into one overall BER.
pub fn pooled(rows: &[BerRow]) -> BerRow {
    let e: u64 = rows.iter().map(|r| r.bit_errors).sum();
    let n: u64 = rows.iter().map(|r| r.bit_count).sum();
    BerRow {
        snr_db: f64::NAN,
        bit_errors: e,
        bit_count: n,
        ber: if n > 0 { e as f64 / n as f64 } else { 0.0 },
    }
}
