use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Rural-macro scenario parameters (TR 38.901 defaults).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmaParams {
    pub carrier_ghz: f64,
    pub bs_height_m: f64,
    pub ut_height_m: f64,
    pub street_width_m: f64,
    pub building_height_m: f64,
}

impl Default for RmaParams {
    fn default() -> Self {
        RmaParams {
            carrier_ghz: 3.5,
            bs_height_m: 35.0,
            ut_height_m: 1.5,
            street_width_m: 20.0,
            building_height_m: 5.0,
        }
    }
}

pub const MIN_DISTANCE_M: f64 = 10.0;
pub const MAX_DISTANCE_LOS_M: f64 = 10_000.0;
pub const MAX_DISTANCE_NLOS_M: f64 = 5_000.0;

impl RmaParams {
    pub fn validate(&self) -> Result<()> {
        let ok = (10.0..=150.0).contains(&self.bs_height_m)
            && (1.0..=10.0).contains(&self.ut_height_m)
            && (5.0..=50.0).contains(&self.street_width_m)
            && (5.0..=50.0).contains(&self.building_height_m)
            && self.carrier_ghz > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("RMa parameters outside validity: {self:?}")))
        }
    }

    /// Breakpoint distance `2π h_BS h_UT f_c / c`.
    pub fn breakpoint_m(&self) -> f64 {
        std::f64::consts::TAU * self.bs_height_m * self.ut_height_m * self.carrier_ghz * 1e9 / SPEED_OF_LIGHT
    }

    pub fn max_distance(&self, los: bool) -> f64 {
        if los {
            MAX_DISTANCE_LOS_M
        } else {
            MAX_DISTANCE_NLOS_M
        }
    }

    fn pl1(&self, d3: f64) -> f64 {
        let h = self.building_height_m;
        20.0 * (40.0 * std::f64::consts::PI * d3 * self.carrier_ghz / 3.0).log10()
            + (0.03 * h.powf(1.72)).min(10.0) * d3.log10()
            - (0.044 * h.powf(1.72)).min(14.77)
            + 0.002 * h.log10() * d3
    }

    fn d3(&self, d2: f64) -> f64 {
        d2.hypot(self.bs_height_m - self.ut_height_m)
    }

    fn los(&self, d2: f64) -> f64 {
        let bp = self.breakpoint_m();
        if d2 <= bp {
            self.pl1(self.d3(d2))
        } else {
            self.pl1(self.d3(bp)) + 40.0 * (self.d3(d2) / self.d3(bp)).log10()
        }
    }

    fn nlos_prime(&self, d2: f64) -> f64 {
        let (w, h, hbs, hut, fc) = (
            self.street_width_m,
            self.building_height_m,
            self.bs_height_m,
            self.ut_height_m,
            self.carrier_ghz,
        );
        161.04 - 7.1 * w.log10() + 7.5 * h.log10() - (24.37 - 3.7 * (h / hbs).powi(2)) * hbs.log10()
            + (43.42 - 3.1 * hbs.log10()) * (self.d3(d2).log10() - 3.0)
            + 20.0 * fc.log10()
            - (3.2 * (11.75 * hut).log10().powi(2) - 4.97)
    }
}

/// RMa path loss in dB at ground distance `distance_m`. NLOS is
/// `max(PL_LOS, PL'_NLOS)`.
pub fn rma_path_loss(distance_m: f64, params: &RmaParams, los: bool) -> Result<f64> {
    params.validate()?;
    if !(MIN_DISTANCE_M..=params.max_distance(los)).contains(&distance_m) {
        return Err(Error::Domain(format!(
            "distance {distance_m} m outside [{MIN_DISTANCE_M}, {}] m",
            params.max_distance(los)
        )));
    }
    let los_pl = params.los(distance_m);
    Ok(if los { los_pl } else { los_pl.max(params.nlos_prime(distance_m)) })
}

/// Largest distance whose path loss does not exceed `path_loss_db`, by
/// bisection to 1 mm. `None` when the loss is reached beyond the validity
/// range or already below its start.
pub fn invert_path_loss(path_loss_db: f64, params: &RmaParams, los: bool) -> Result<Option<f64>> {
    let (mut lo, mut hi) = (MIN_DISTANCE_M, params.max_distance(los));
    if rma_path_loss(lo, params, los)? > path_loss_db || rma_path_loss(hi, params, los)? < path_loss_db {
        return Ok(None);
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if rma_path_loss(mid, params, los)? <= path_loss_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}
