//! Memoryless power-amplifier models: an analytic modified-Rapp reference,
//! its odd-order polynomial fit, coefficient dithering and backoff control.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dsp::TimeFrame;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Polynomial order of the default fit.
pub const DEFAULT_ORDER: usize = 17;
/// Fit range in units of the saturating input amplitude `V_sat / G`.
pub const DEFAULT_FIT_RANGE_FACTOR: f64 = 1.5;
pub const DEFAULT_FIT_POINTS: usize = 2000;
/// Drive calibration so the undithered default model gives 8.0 % EVM at
/// 3 dB backoff on the reference 64-QAM grid (see `calibrate_kappa`).
pub const DEFAULT_KAPPA: f64 = 0.892_371_295_6;
/// Relative coefficient dither. The fitted coefficients cancel by up to two
/// orders of magnitude near the fit edge, so the perturbation is kept small
/// enough that every dithered model stays near the nominal EVM.
pub const DEFAULT_DITHER_DELTA: f64 = 0.001;

/// Modified-Rapp AM-AM with a two-parameter AM-PM curve.
///
/// AM-AM: `g(r) = G r / (1 + (G r / V_sat)^(2p))^(1/(2p))`.
/// AM-PM: `psi(u) = A u^q1 / (1 + (u / B)^q2)` evaluated on the normalized
/// drive `u = G r / V_sat`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaReference {
    pub gain: f64,
    pub v_sat: f64,
    pub smoothness: f64,
    pub am_pm_a: f64,
    pub am_pm_b: f64,
    pub am_pm_q1: f64,
    pub am_pm_q2: f64,
}

impl Default for PaReference {
    fn default() -> Self {
        PaReference {
            gain: 16.0,
            v_sat: 1.0,
            smoothness: 3.0,
            am_pm_a: 0.3,
            am_pm_b: 0.7,
            am_pm_q1: 2.0,
            am_pm_q2: 4.0,
        }
    }
}

impl PaReference {
    /// A distortion-free amplifier with gain `gain`.
    pub fn linear(gain: f64) -> Self {
        PaReference {
            gain,
            v_sat: f64::INFINITY,
            smoothness: 1.0,
            am_pm_a: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0 && self.v_sat > 0.0 && self.smoothness >= 1.0) {
            return Err(Error::Config(format!("invalid PA reference parameters {self:?}")));
        }
        Ok(())
    }

    /// Input amplitude at which the linear extrapolation reaches `V_sat`.
    pub fn v_sat_in(&self) -> f64 {
        self.v_sat / self.gain
    }

    /// Output amplitude and phase shift (radians) for input amplitude `r`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let u = self.gain * r / self.v_sat;
        let two_p = 2.0 * self.smoothness;
        let amp = self.gain * r / (1.0 + u.powf(two_p)).powf(1.0 / two_p);
        let phase = if self.am_pm_a == 0.0 || u == 0.0 {
            0.0
        } else {
            self.am_pm_a * u.powf(self.am_pm_q1) / (1.0 + (u / self.am_pm_b).powf(self.am_pm_q2))
        };
        (amp, phase)
    }

    pub fn response(&self, r: f64) -> Complex64 {
        let (amp, phase) = self.eval(r);
        Complex64::from_polar(amp, phase)
    }
}

/// `z -> sum_k c_k |z|^(k-1) z` over odd `k`, with the input amplitude held
/// at `fit_range` beyond the fitted interval and the output magnitude
/// clamped at `v_sat`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaPolynomial {
    /// `c_1, c_3, ..., c_order`.
    pub coefficients: Vec<Complex64>,
    pub fit_range: f64,
    pub v_sat: f64,
    /// Saturating input amplitude of the reference the fit came from.
    pub v_sat_in: f64,
}

impl PaPolynomial {
    pub fn order(&self) -> usize {
        2 * self.coefficients.len() - 1
    }

    pub fn small_signal_gain(&self) -> Complex64 {
        self.coefficients[0]
    }

    /// Complex gain `P(r) / r` for amplitude `r` inside the fit range.
    pub fn gain_at(&self, r: f64) -> Complex64 {
        let r2 = r * r;
        // Horner in r^2
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * r2 + c)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let a = z.norm();
        if a == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let held = a.min(self.fit_range);
        let out = self.gain_at(held) * z.scale(held / a);
        let m = out.norm();
        if m > self.v_sat {
            out.scale(self.v_sat / m)
        } else {
            out
        }
    }

    /// RMS of the complex-gain error against `model` on `num_points` points
    /// of `(0, fit_range]`, relative to the model's small-signal gain.
    pub fn gain_residual(&self, model: &PaReference, num_points: usize) -> f64 {
        let mut acc = 0.0;
        for i in 1..=num_points {
            let r = self.fit_range * i as f64 / num_points as f64;
            let err = self.gain_at(r) - model.response(r) / r;
            acc += err.norm_sqr();
        }
        (acc / num_points as f64).sqrt() / model.gain
    }
}

/// Least-squares fit of an odd-order polynomial to the reference response on
/// `[0, fit_range]`.
pub fn fit_pa_polynomial(
    model: &PaReference,
    order: usize,
    fit_range: f64,
    num_points: usize,
) -> Result<PaPolynomial> {
    model.validate()?;
    if order % 2 == 0 || order == 0 {
        return Err(Error::Argument(format!("polynomial order {order} must be odd")));
    }
    if !(fit_range > 0.0) {
        return Err(Error::Argument(format!("fit range {fit_range} must be positive")));
    }
    let terms = order.div_ceil(2);
    if num_points < terms {
        return Err(Error::Fitting {
            reason: format!("{num_points} samples cannot determine {terms} coefficients"),
            condition: f64::INFINITY,
        });
    }
    // Columns use the normalized amplitude r / fit_range to keep the
    // system well scaled.
    let design = DMatrix::from_fn(num_points, terms, |i, k| {
        let x = i as f64 / (num_points - 1).max(1) as f64;
        x.powi(2 * k as i32 + 1)
    });
    let targets: Vec<Complex64> = (0..num_points)
        .map(|i| model.response(fit_range * i as f64 / (num_points - 1).max(1) as f64))
        .collect();
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < 1e12) {
        return Err(Error::Fitting {
            reason: "rank-deficient design matrix".into(),
            condition,
        });
    }
    let solve = |b: DVector<f64>| -> Result<DVector<f64>> {
        svd.solve(&b, 0.0).map_err(|e| Error::Fitting {
            reason: e.to_string(),
            condition,
        })
    };
    let re = solve(DVector::from_iterator(num_points, targets.iter().map(|t| t.re)))?;
    let im = solve(DVector::from_iterator(num_points, targets.iter().map(|t| t.im)))?;
    let coefficients = (0..terms)
        .map(|k| Complex64::new(re[k], im[k]) / fit_range.powi(2 * k as i32 + 1))
        .collect();
    Ok(PaPolynomial {
        coefficients,
        fit_range,
        v_sat: model.v_sat,
        v_sat_in: model.v_sat_in(),
    })
}

/// Fit with the default order, range and sampling.
pub fn default_fit(model: &PaReference) -> Result<PaPolynomial> {
    fit_pa_polynomial(
        model,
        DEFAULT_ORDER,
        DEFAULT_FIT_RANGE_FACTOR * model.v_sat_in(),
        DEFAULT_FIT_POINTS,
    )
}

/// Perturb each coefficient by complex Gaussian noise whose per-component
/// standard deviation is `delta * |c_k| / sqrt(2)`.
pub fn dither_pa(poly: &PaPolynomial, delta: f64, seed: u64) -> Result<PaPolynomial> {
    if !(delta >= 0.0) {
        return Err(Error::Argument(format!("dither delta {delta} must be non-negative")));
    }
    let mut rng = stream_rng(seed, 0, Stream::Dither);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let coefficients = poly
        .coefficients
        .iter()
        .map(|&c| {
            let sd = delta * c.norm() / std::f64::consts::SQRT_2;
            let e = Complex64::new(unit.sample(&mut rng), unit.sample(&mut rng));
            c + e * sd
        })
        .collect();
    Ok(PaPolynomial {
        coefficients,
        ..poly.clone()
    })
}

/// RMS input amplitude for a given backoff.
pub fn drive_level(poly: &PaPolynomial, backoff_db: f64, kappa: f64) -> f64 {
    kappa * poly.v_sat_in * 10f64.powf(-backoff_db / 20.0)
}

/// Pass a unit-power frame through the PA at `backoff_db`.
///
/// The frame is scaled to the drive level, amplified, and divided by the
/// small-signal gain and the drive scaling so the linear part of the output
/// has unit gain. Padded rows stay zero.
pub fn apply_pa(frame: &TimeFrame<f64>, poly: &PaPolynomial, backoff_db: f64, kappa: f64) -> TimeFrame<f64> {
    let s = drive_level(poly, backoff_db, kappa);
    let norm = (poly.small_signal_gain() * s).inv();
    let mut out = frame.clone();
    out.map_active(|_, _, z| poly.eval(z * s) * norm);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaKind {
    Reference,
    Polynomial,
}

/// Serializable PA description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaModel {
    pub kind: PaKind,
    pub reference: PaReference,
    /// `[re, im]` pairs for `c_1, c_3, ...`.
    pub coefficients: Vec<[f64; 2]>,
    pub v_sat: f64,
    pub fit_range: f64,
    pub kappa: f64,
}

impl PaModel {
    pub fn from_polynomial(reference: PaReference, poly: &PaPolynomial, kappa: f64) -> Self {
        PaModel {
            kind: PaKind::Polynomial,
            reference,
            coefficients: poly.coefficients.iter().map(|c| [c.re, c.im]).collect(),
            v_sat: poly.v_sat,
            fit_range: poly.fit_range,
            kappa,
        }
    }

    /// Default reference, fitted with the default settings.
    pub fn default_fitted() -> Result<Self> {
        let reference = PaReference::default();
        let poly = default_fit(&reference)?;
        Ok(Self::from_polynomial(reference, &poly, DEFAULT_KAPPA))
    }

    /// Polynomial realization; a `reference` model is fitted on demand.
    pub fn polynomial(&self) -> Result<PaPolynomial> {
        match self.kind {
            PaKind::Reference => default_fit(&self.reference),
            PaKind::Polynomial => {
                if self.coefficients.is_empty() {
                    return Err(Error::Config("PA model has no coefficients".into()));
                }
                Ok(PaPolynomial {
                    coefficients: self.coefficients.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                    fit_range: self.fit_range,
                    v_sat: self.v_sat,
                    v_sat_in: self.reference.v_sat_in(),
                })
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: PaModel = serde_json::from_str(s)?;
        m.reference.validate()?;
        Ok(m)
    }
}
