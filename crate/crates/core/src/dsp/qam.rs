//! Gray-mapped square QAM following the 3GPP bit-to-symbol convention.
//!
//! Bit patterns are indexed as integers with `b0` as the most significant
//! bit, so index order is lexicographic order of the bit vector.

use num_complex::Complex;

use super::config::Modulation;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn pm(bit: u8) -> f64 {
    1.0 - 2.0 * f64::from(bit)
}

fn map_f64(bits: &[u8], modulation: Modulation) -> Complex<f64> {
    match modulation {
        Modulation::Qam16 => {
            let s = 1.0 / 10f64.sqrt();
            Complex::new(
                s * pm(bits[0]) * (2.0 - pm(bits[2])),
                s * pm(bits[1]) * (2.0 - pm(bits[3])),
            )
        }
        Modulation::Qam64 => {
            let s = 1.0 / 42f64.sqrt();
            Complex::new(
                s * pm(bits[0]) * (4.0 - pm(bits[2]) * (2.0 - pm(bits[4]))),
                s * pm(bits[1]) * (4.0 - pm(bits[3]) * (2.0 - pm(bits[5]))),
            )
        }
    }
}

/// Map one group of bits to a unit-average-energy constellation point.
pub fn qam_map<T: Real>(bits: &[u8], modulation: Modulation) -> Result<Complex<T>> {
    let k = modulation.bits_per_symbol();
    if bits.len() != k {
        return Err(Error::Argument(format!(
            "{modulation:?} maps {k} bits per symbol, got {}",
            bits.len()
        )));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::Argument("bits must be 0 or 1".into()));
    }
    let p = map_f64(bits, modulation);
    Ok(Complex::new(T::lit(p.re), T::lit(p.im)))
}

pub fn index_to_bits(index: usize, k: usize) -> Vec<u8> {
    (0..k).map(|l| ((index >> (k - 1 - l)) & 1) as u8).collect()
}

/// All points of a constellation, indexed by bit pattern.
#[derive(Debug, Clone)]
pub struct Constellation<T> {
    pub modulation: Modulation,
    pub points: Vec<Complex<T>>,
}

impl<T: Real> Constellation<T> {
    pub fn new(modulation: Modulation) -> Self {
        let k = modulation.bits_per_symbol();
        let points = (0..modulation.order())
            .map(|i| qam_map(&index_to_bits(i, k), modulation).expect("valid bit pattern"))
            .collect();
        Constellation { modulation, points }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    /// Index of the nearest point; ties go to the smaller index.
    pub fn nearest(&self, symbol: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_d = (symbol - self.points[0]).norm_sqr();
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let d = (symbol - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Bit of position `l` (0 = first/most significant) of point `index`.
    #[inline]
    pub fn bit(&self, index: usize, l: usize) -> u8 {
        ((index >> (self.bits_per_symbol() - 1 - l)) & 1) as u8
    }
}

/// Hard decision: bits of the nearest constellation point.
pub fn qam_hard_demap<T: Real>(symbol: Complex<T>, modulation: Modulation) -> Vec<u8> {
    let c = Constellation::<T>::new(modulation);
    index_to_bits(c.nearest(symbol), modulation.bits_per_symbol())
}
