use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    TxSymbols,
    RxSymbols,
    ChannelEstimate,
}

/// Complex values on the (subcarrier, OFDM symbol) lattice, subcarrier-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid<T> {
    subcarriers: usize,
    symbols: usize,
    pub data: Vec<Complex<T>>,
    pub kind: GridKind,
}

impl<T: Real> ResourceGrid<T> {
    pub fn zeros(subcarriers: usize, symbols: usize, kind: GridKind) -> Self {
        ResourceGrid {
            subcarriers,
            symbols,
            data: vec![Complex::new(T::zero(), T::zero()); subcarriers * symbols],
            kind,
        }
    }

    pub fn from_vec(
        subcarriers: usize,
        symbols: usize,
        data: Vec<Complex<T>>,
        kind: GridKind,
    ) -> Result<Self> {
        if data.len() != subcarriers * symbols {
            return Err(Error::Shape(format!(
                "grid {subcarriers}x{symbols} needs {} values, got {}",
                subcarriers * symbols,
                data.len()
            )));
        }
        Ok(ResourceGrid {
            subcarriers,
            symbols,
            data,
            kind,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.subcarriers, self.symbols)
    }

    #[inline]
    pub fn index(&self, subcarrier: usize, symbol: usize) -> usize {
        debug_assert!(subcarrier < self.subcarriers && symbol < self.symbols);
        subcarrier * self.symbols + symbol
    }

    #[inline]
    pub fn get(&self, subcarrier: usize, symbol: usize) -> Complex<T> {
        self.data[self.index(subcarrier, symbol)]
    }

    #[inline]
    pub fn set(&mut self, subcarrier: usize, symbol: usize, value: Complex<T>) {
        let i = self.index(subcarrier, symbol);
        self.data[i] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn with_kind(mut self, kind: GridKind) -> Self {
        self.kind = kind;
        self
    }

    /// Element-wise product, used to form `H ⊙ X`.
    pub fn hadamard(&self, other: &ResourceGrid<T>) -> Result<ResourceGrid<T>> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(ResourceGrid {
            data,
            ..self.clone()
        })
    }
}

/// One TTI of time-domain samples: `(cp_long + N)` rows by `N_symb` columns.
/// Each column holds `[CP | body | zero padding]`; symbols with the short CP
/// are zero-padded at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrame<T> {
    rows: usize,
    symbols: usize,
    /// Sample-major: `data[row * symbols + symbol]`.
    pub data: Vec<Complex<T>>,
    pub valid_len: Vec<usize>,
}

impl<T: Real> TimeFrame<T> {
    pub fn zeros(rows: usize, valid_len: Vec<usize>) -> Self {
        let symbols = valid_len.len();
        TimeFrame {
            rows,
            symbols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * symbols],
            valid_len,
        }
    }

    pub fn from_vec(rows: usize, valid_len: Vec<usize>, data: Vec<Complex<T>>) -> Result<Self> {
        let symbols = valid_len.len();
        if data.len() != rows * symbols || valid_len.iter().any(|&v| v > rows) {
            return Err(Error::Shape(format!(
                "time frame {rows}x{symbols} inconsistent with {} samples",
                data.len()
            )));
        }
        Ok(TimeFrame {
            rows,
            symbols,
            data,
            valid_len,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    #[inline]
    pub fn get(&self, row: usize, symbol: usize) -> Complex<T> {
        self.data[row * self.symbols + symbol]
    }

    #[inline]
    pub fn set(&mut self, row: usize, symbol: usize, value: Complex<T>) {
        self.data[row * self.symbols + symbol] = value;
    }

    #[inline]
    pub fn is_active(&self, row: usize, symbol: usize) -> bool {
        row < self.valid_len[symbol]
    }

    /// Apply `f` to every active (non-padding) sample.
    pub fn map_active(&mut self, mut f: impl FnMut(usize, usize, Complex<T>) -> Complex<T>) {
        for row in 0..self.rows {
            for s in 0..self.symbols {
                if row < self.valid_len[s] {
                    let i = row * self.symbols + s;
                    self.data[i] = f(row, s, self.data[i]);
                }
            }
        }
    }

    pub fn active_samples(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        (0..self.rows).flat_map(move |r| {
            (0..self.symbols).filter_map(move |s| self.is_active(r, s).then(|| self.get(r, s)))
        })
    }

    pub fn active_len(&self) -> usize {
        self.valid_len.iter().sum()
    }

    /// Mean power of the active samples.
    pub fn active_power(&self) -> T {
        let n = self.active_len();
        if n == 0 {
            return T::zero();
        }
        self.active_samples().fold(T::zero(), |a, v| a + v.norm_sqr()) / T::from_usize_lossy(n)
    }

    /// Whether every padded row is exactly zero.
    pub fn padding_is_zero(&self) -> bool {
        (0..self.rows).all(|r| {
            (0..self.symbols).all(|s| self.is_active(r, s) || self.get(r, s) == Complex::new(T::zero(), T::zero()))
        })
    }
}
