use crate::dsp::{bit_index, Constellation, Modulation, NB_MAX};

use super::lmmse::EqualizedGrid;

pub const LLR_CLAMP: f64 = 40.0;

/// LLRs on an `N_D x N_symb x N_B` lattice. Positive means bit 1 is more
/// likely, so `sigmoid(L) = P(b = 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrGrid {
    pub subcarriers: usize,
    pub symbols: usize,
    pub values: Vec<f64>,
}

impl LlrGrid {
    pub fn zeros(subcarriers: usize, symbols: usize) -> Self {
        LlrGrid {
            subcarriers,
            symbols,
            values: vec![0.0; subcarriers * symbols * NB_MAX],
        }
    }

    pub fn get(&self, subcarrier: usize, symbol: usize, bit: usize) -> f64 {
        self.values[bit_index(subcarrier, symbol, bit, self.symbols, NB_MAX)]
    }
}

/// Max-log demapping of the unbiased equalizer output.
///
/// `L_l = (min_{s: b_l=0} |x - s|^2 - min_{s: b_l=1} |x - s|^2) / σ²`,
/// clamped to `±LLR_CLAMP`.
pub fn max_log_llr(eq: &EqualizedGrid, modulation: Modulation) -> LlrGrid {
    let constellation = Constellation::<f64>::new(modulation);
    let k = modulation.bits_per_symbol();
    let (nd, ns) = eq.symbols.shape();
    let mut out = LlrGrid::zeros(nd, ns);
    let mut d2 = vec![0.0; constellation.points.len()];
    for sc in 0..nd {
        for sym in 0..ns {
            let i = eq.symbols.index(sc, sym);
            let x = eq.unbiased_symbol(i);
            let inv = 1.0 / eq.noise_var[i];
            for (d, p) in d2.iter_mut().zip(&constellation.points) {
                *d = (x - p).norm_sqr();
            }
            for l in 0..k {
                let (mut m0, mut m1) = (f64::INFINITY, f64::INFINITY);
                for (idx, &d) in d2.iter().enumerate() {
                    if constellation.bit(idx, l) == 0 {
                        m0 = m0.min(d);
                    } else {
                        m1 = m1.min(d);
                    }
                }
                let llr = ((m0 - m1) * inv).clamp(-LLR_CLAMP, LLR_CLAMP);
                out.values[bit_index(sc, sym, l, ns, NB_MAX)] = llr;
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) fn exact_log_map(x: num_complex::Complex64, noise_var: f64, modulation: Modulation) -> Vec<f64> {
    let c = Constellation::<f64>::new(modulation);
    (0..modulation.bits_per_symbol())
        .map(|l| {
            let (mut s0, mut s1) = (0.0, 0.0);
            for (idx, p) in c.points.iter().enumerate() {
                let w = (-(x - p).norm_sqr() / noise_var).exp();
                if c.bit(idx, l) == 0 {
                    s0 += w;
                } else {
                    s1 += w;
                }
            }
            (s1 / s0).ln()
        })
        .collect()
}
