use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impairments::{reference_evm, PaModel, ReferenceGrid};
use crate::pipeline::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvmRow {
    pub backoff_db: f64,
    pub evm_percent: f64,
}

/// EVM of the fixed 64-QAM reference signal through the undithered PA, in
/// grid order.
pub fn report_evm(backoffs_db: &[f64], pa: &PaModel) -> Result<Vec<EvmRow>> {
    if backoffs_db.is_empty() {
        return Err(Error::Config("backoff grid is empty".into()));
    }
    let reference = ReferenceGrid::new()?;
    let poly = pa.polynomial()?;
    backoffs_db
        .iter()
        .map(|&b| {
            Ok(EvmRow {
                backoff_db: b,
                evm_percent: reference_evm(&reference, &poly, b, pa.kappa)?,
            })
        })
        .collect()
}

pub fn evm_csv(pa: &PaModel, rows: &[EvmRow]) -> Result<String> {
    let hash = sha256_hex(serde_json::to_string(pa)?.as_bytes());
    let mut out = format!("# config_sha256={hash} seed=0\nbackoff_db,evm_percent\n");
    for r in rows {
        out += &format!("{},{}\n", r.backoff_db, r.evm_percent);
    }
    Ok(out)
}
