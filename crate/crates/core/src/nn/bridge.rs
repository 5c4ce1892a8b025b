use num_complex::Complex;

use super::tensor::Tensor;
use crate::dsp::{Direction, Fft, LinkConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fixed linear layer from the zero-padded time frame
/// `(cp_long + N) x N_symb x 2` to the occupied subcarriers
/// `N_D x N_symb x 2`: CP removal, forward DFT, bin extraction and the
/// receiver normalisation `sqrt(N_D) / N`.
#[derive(Debug, Clone)]
pub struct FftBridge<T> {
    config: LinkConfig,
    fft: Fft<T>,
    bins: Vec<usize>,
    scale: T,
}

impl<T: Real> FftBridge<T> {
    pub fn new(config: &LinkConfig) -> Result<Self> {
        config.validate()?;
        Ok(FftBridge {
            config: config.clone(),
            fft: Fft::new(config.fft_size)?,
            bins: config.occupied_bins(),
            scale: T::lit(1.0 / config.tx_scale()),
        })
    }

    pub fn input_shape(&self) -> [usize; 3] {
        [self.config.frame_rows(), self.config.num_symbols, 2]
    }

    pub fn output_shape(&self) -> [usize; 3] {
        [self.config.num_data_subcarriers, self.config.num_symbols, 2]
    }

    fn check(&self, t: &Tensor<T>, expected: [usize; 3]) -> Result<()> {
        if t.shape() != expected {
            return Err(Error::Shape(format!("bridge expects {expected:?}, got {:?}", t.shape())));
        }
        Ok(())
    }

    pub fn forward(&self, z: &Tensor<T>) -> Result<Tensor<T>> {
        self.check(z, self.input_shape())?;
        let (n, ns) = (self.config.fft_size, self.config.num_symbols);
        let mut out = Tensor::zeros(&self.output_shape());
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        for sym in 0..ns {
            let cp = self.config.cp_of(sym);
            for (t, v) in buf.iter_mut().enumerate() {
                *v = Complex::new(z.at(cp + t, sym, 0), z.at(cp + t, sym, 1));
            }
            self.fft.process(&mut buf, Direction::Forward);
            for (sc, &bin) in self.bins.iter().enumerate() {
                let v = buf[bin].scale(self.scale);
                *out.at_mut(sc, sym, 0) = v.re;
                *out.at_mut(sc, sym, 1) = v.im;
            }
        }
        Ok(out)
    }

    /// Exact adjoint of [`forward`](Self::forward): `scale * N * IDFT` of the
    /// scattered gradient, placed on the retained rows; CP and padding rows
    /// receive zero.
    pub fn backward(&self, g: &Tensor<T>) -> Result<Tensor<T>> {
        self.check(g, self.output_shape())?;
        let (n, ns) = (self.config.fft_size, self.config.num_symbols);
        let mut dz = Tensor::zeros(&self.input_shape());
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; n];
        let s = self.scale * T::from_usize_lossy(n);
        for sym in 0..ns {
            buf.iter_mut().for_each(|v| *v = zero);
            for (sc, &bin) in self.bins.iter().enumerate() {
                buf[bin] = Complex::new(g.at(sc, sym, 0), g.at(sc, sym, 1));
            }
            self.fft.process(&mut buf, Direction::Inverse);
            let cp = self.config.cp_of(sym);
            for (t, v) in buf.iter().enumerate() {
                *dz.at_mut(cp + t, sym, 0) = v.re * s;
                *dz.at_mut(cp + t, sym, 1) = v.im * s;
            }
        }
        Ok(dz)
    }
}
