use num_complex::Complex64;

use crate::dsp::ResourceGrid;
use crate::error::{Error, Result};

/// Denominator guard for vanishing channels.
pub const EPS: f64 = 1e-12;

/// Output of the per-RE LMMSE equalizer.
///
/// `symbols` is the (biased) LMMSE estimate `x̂ = β x + e`. `bias` holds
/// `β = |H|^2 / (|H|^2 + σ^2)` and `noise_var` the error variance of the
/// unbiased estimate `x̂ / β`, i.e. `(1 - β) / β = σ^2 / |H|^2`.
#[derive(Debug, Clone)]
pub struct EqualizedGrid {
    pub symbols: ResourceGrid<f64>,
    pub bias: Vec<f64>,
    pub noise_var: Vec<f64>,
}

impl EqualizedGrid {
    /// Wrap already unbiased symbols with a common noise variance.
    pub fn unbiased(symbols: ResourceGrid<f64>, noise_var: f64) -> Self {
        let n = symbols.data.len();
        EqualizedGrid {
            symbols,
            bias: vec![1.0; n],
            noise_var: vec![noise_var; n],
        }
    }

    pub fn unbiased_symbol(&self, i: usize) -> Complex64 {
        let b = self.bias[i];
        if b > 0.0 {
            self.symbols.data[i] / b
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

pub fn lmmse_equalize(rx: &ResourceGrid<f64>, channel: &ResourceGrid<f64>, noise_var: f64) -> Result<EqualizedGrid> {
    if rx.shape() != channel.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", rx.shape(), channel.shape())));
    }
    if !(noise_var >= 0.0) {
        return Err(Error::Argument(format!("noise variance {noise_var} must be non-negative")));
    }
    let n = rx.data.len();
    let mut symbols = rx.clone();
    let mut bias = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n);
    for (i, (y, h)) in rx.data.iter().zip(&channel.data).enumerate() {
        let g = h.norm_sqr();
        let den = g + noise_var + EPS;
        symbols.data[i] = h.conj() * y / den;
        bias.push(g / den);
        var.push((noise_var + EPS) / g.max(EPS));
    }
    Ok(EqualizedGrid {
        symbols,
        bias,
        noise_var: var,
    })
}
