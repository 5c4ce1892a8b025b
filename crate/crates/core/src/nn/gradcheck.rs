use rand::seq::index::sample;
use rand::SeedableRng;

use super::param::Module;
use crate::rng::SimRng;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct GradCheckOptions {
    pub step: f64,
    pub coords_per_param: usize,
    /// Denominator floor for the relative error, so coordinates whose true
    /// gradient vanishes are compared absolutely.
    pub abs_floor: f64,
    /// The floor is raised to `roundoff_units * eps * |loss| / step`, the
    /// difference quotient's rounding resolution scaled up. With a relative
    /// tolerance `tol`, errors under `roundoff_units * tol` loss ulps per
    /// step are treated as rounding.
    pub roundoff_units: f64,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            step: 1e-5,
            coords_per_param: 50,
            abs_floor: 1e-6,
            roundoff_units: 1e6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamCheck {
    pub name: String,
    /// Coordinates compared.
    pub coords: usize,
    /// Candidates rejected because a probe changed the activation pattern.
    pub skipped: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub params: Vec<ParamCheck>,
    pub max_rel_error: f64,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance && self.max_rel_error.is_finite()
    }

    pub fn skipped(&self) -> usize {
        self.params.iter().map(|p| p.skipped).sum()
    }

    pub fn worst(&self) -> Option<&ParamCheck> {
        self.params.iter().max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

/// Compare analytic parameter gradients with central differences.
///
/// `eval(model, true)` must return the loss and leave `∂loss/∂θ` in the
/// parameter gradients (grad buffers are zeroed beforehand);
/// `eval(model, false)` must return the loss only. All coordinates are used
/// when a parameter has fewer than `coords_per_param` entries.
pub fn grad_check<T: Real, M: Module<T>>(
    model: &mut M,
    mut eval: impl FnMut(&mut M, bool) -> T,
    options: &GradCheckOptions,
) -> GradCheckReport {
    grad_check_piecewise(model, |m, g| (eval(m, g), 0), options)
}

/// Step shrinks by 10x this many times before a coordinate is rejected.
const STEP_REFINEMENTS: usize = 3;

/// [`grad_check`] for piecewise-smooth models. `eval` also returns a
/// fingerprint of the activation pattern (which side of each kink every
/// unit is on). A coordinate whose `±h` probes change the fingerprint
/// straddles a kink, where the central difference does not estimate the
/// derivative; the step is shrunk, and if every step straddles a kink the
/// coordinate is rejected and replaced by a fresh one. A
/// parameter left with no valid coordinate reports an infinite error.
pub fn grad_check_piecewise<T: Real, M: Module<T>>(
    model: &mut M,
    mut eval: impl FnMut(&mut M, bool) -> (T, u64),
    options: &GradCheckOptions,
) -> GradCheckReport {
    model.zero_grad();
    let (_, pattern) = eval(model, true);
    let mut analytic: Vec<(String, Vec<f64>)> = Vec::new();
    model.visit(&mut |p| {
        analytic.push((p.name.clone(), p.grad.data.iter().map(|g| g.to_f64_lossy()).collect()));
    });
    let mut rng = SimRng::seed_from_u64(options.seed);
    let eps = T::epsilon().to_f64_lossy();
    let mut params = Vec::with_capacity(analytic.len());
    for (pi, (name, grad)) in analytic.iter().enumerate() {
        let n = grad.len();
        let candidates = sample(&mut rng, n, n.min(4 * options.coords_per_param)).into_vec();
        let (mut worst, mut used, mut skipped) = (0.0f64, 0usize, 0usize);
        for ci in candidates {
            if used == options.coords_per_param.min(n) {
                break;
            }
            let Some((numeric, floor)) = (0..STEP_REFINEMENTS).find_map(|k| {
                let step = options.step * 0.1f64.powi(k as i32);
                let (f_plus, p_plus) = perturbed(model, &mut eval, pi, ci, T::lit(step));
                let (f_minus, p_minus) = perturbed(model, &mut eval, pi, ci, T::lit(-step));
                let scale = f_plus.to_f64_lossy().abs().max(f_minus.to_f64_lossy().abs());
                let floor = options.abs_floor.max(options.roundoff_units * eps * scale / step);
                (p_plus == pattern && p_minus == pattern)
                    .then(|| ((f_plus - f_minus).to_f64_lossy() / (2.0 * step), floor))
            }) else {
                skipped += 1;
                continue;
            };
            used += 1;
            let a = grad[ci];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        }
        params.push(ParamCheck {
            name: name.clone(),
            coords: used,
            skipped,
            max_rel_error: if used == 0 && n > 0 { f64::INFINITY } else { worst },
        });
    }
    let max_rel_error = params.iter().map(|p| p.max_rel_error).fold(0.0, f64::max);
    GradCheckReport { params, max_rel_error }
}

fn perturbed<T: Real, M: Module<T>>(
    model: &mut M,
    eval: &mut impl FnMut(&mut M, bool) -> (T, u64),
    param: usize,
    coord: usize,
    delta: T,
) -> (T, u64) {
    let mut original = T::zero();
    nudge(model, param, coord, |v| {
        original = *v;
        *v += delta;
    });
    let f = eval(model, false);
    nudge(model, param, coord, |v| *v = original);
    f
}

fn nudge<T: Real, M: Module<T>>(model: &mut M, param: usize, coord: usize, mut f: impl FnMut(&mut T)) {
    let mut i = 0;
    model.visit_mut(&mut |p| {
        if i == param {
            f(&mut p.value.data[coord]);
        }
        i += 1;
    });
}
