use serde::{Deserialize, Serialize};

use super::pathloss::{invert_path_loss, RmaParams};
use crate::error::{Error, Result};

/// Thermal noise density in dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// One receiver column of the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetColumn {
    pub name: String,
    pub pa_output_power_dbm: f64,
    pub pa_backoff_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetParams {
    pub columns: Vec<BudgetColumn>,
    /// Column the distance gains are reported against.
    pub baseline: String,
    pub ue_coupling_loss_db: f64,
    pub ue_antenna_gain_db: f64,
    pub bandwidth_hz: f64,
    pub bs_noise_figure_db: f64,
    pub snr_requirement_db: f64,
    pub bs_coupling_loss_db: f64,
    pub bs_antenna_gain_db: f64,
    pub rma: RmaParams,
}

impl LinkBudgetParams {
    /// The 3.5 GHz uplink example: LMMSE at 26 dBm / 4 dB backoff against
    /// HybridDeepRx at 29 dBm / 1 dB backoff.
    pub fn table2() -> Self {
        LinkBudgetParams {
            columns: vec![
                BudgetColumn {
                    name: "lmmse".into(),
                    pa_output_power_dbm: 26.0,
                    pa_backoff_db: 4.0,
                },
                BudgetColumn {
                    name: "hybrid".into(),
                    pa_output_power_dbm: 29.0,
                    pa_backoff_db: 1.0,
                },
            ],
            baseline: "lmmse".into(),
            ue_coupling_loss_db: 4.0,
            ue_antenna_gain_db: 0.0,
            bandwidth_hz: 5e6,
            bs_noise_figure_db: 2.0,
            snr_requirement_db: 19.0,
            bs_coupling_loss_db: 3.0,
            bs_antenna_gain_db: 20.0,
            rma: RmaParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Config("bandwidth must be positive".into()));
        }
        if self.columns.is_empty() {
            return Err(Error::Config("link budget needs at least one column".into()));
        }
        if !self.columns.iter().any(|c| c.name == self.baseline) {
            return Err(Error::Config(format!("baseline column `{}` not found", self.baseline)));
        }
        self.rma.validate()
    }

    pub fn noise_power_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_HZ + 10.0 * self.bandwidth_hz.log10()
    }

    /// Noise + noise figure + SNR requirement + BS coupling loss.
    pub fn sensitivity_dbm(&self) -> f64 {
        self.noise_power_dbm() + self.bs_noise_figure_db + self.snr_requirement_db + self.bs_coupling_loss_db
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub name: String,
    pub pa_output_power_dbm: f64,
    pub pa_backoff_db: f64,
    pub eirp_dbm: f64,
    pub noise_power_dbm: f64,
    pub sensitivity_dbm: f64,
    pub max_path_loss_db: f64,
    /// `None` when the path loss is not reached inside the model validity range.
    pub max_distance_los_m: Option<f64>,
    pub max_distance_nlos_m: Option<f64>,
    pub distance_gain_los_percent: Option<f64>,
    pub distance_gain_nlos_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetReport {
    pub params: LinkBudgetParams,
    pub rows: Vec<BudgetRow>,
}

pub fn link_budget(params: &LinkBudgetParams) -> Result<LinkBudgetReport> {
    params.validate()?;
    let noise = params.noise_power_dbm();
    let sensitivity = params.sensitivity_dbm();
    let mut rows = params
        .columns
        .iter()
        .map(|c| {
            let eirp = c.pa_output_power_dbm - params.ue_coupling_loss_db + params.ue_antenna_gain_db;
            let mpl = eirp - sensitivity + params.bs_antenna_gain_db;
            Ok(BudgetRow {
                name: c.name.clone(),
                pa_output_power_dbm: c.pa_output_power_dbm,
                pa_backoff_db: c.pa_backoff_db,
                eirp_dbm: eirp,
                noise_power_dbm: noise,
                sensitivity_dbm: sensitivity,
                max_path_loss_db: mpl,
                max_distance_los_m: invert_path_loss(mpl, &params.rma, true)?,
                max_distance_nlos_m: invert_path_loss(mpl, &params.rma, false)?,
                distance_gain_los_percent: None,
                distance_gain_nlos_percent: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = rows.iter().find(|r| r.name == params.baseline).cloned().expect("validated");
    let gain = |d: Option<f64>, b: Option<f64>| Some(100.0 * (d? / b? - 1.0));
    for r in &mut rows {
        r.distance_gain_los_percent = gain(r.max_distance_los_m, base.max_distance_los_m);
        r.distance_gain_nlos_percent = gain(r.max_distance_nlos_m, base.max_distance_nlos_m);
    }
    Ok(LinkBudgetReport {
        params: params.clone(),
        rows,
    })
}
