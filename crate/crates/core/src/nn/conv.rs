use super::param::{he_uniform, name_seed, Module, Param};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Same-padded stride-1 cross-correlation with bias, optionally dilated.
///
/// Kernel shape `(kh, kw, in, out)`; flattened it is the `K x out` matrix
/// with `K = kh * kw * in`, matching the im2col row layout. Tap `(ky, kx)`
/// reads the input at offset `((ky - kh/2) * dh, (kx - kw/2) * dw)`.
#[derive(Debug, Clone)]
pub struct Conv2d<T> {
    pub weight: Param<T>,
    pub bias: Param<T>,
    kh: usize,
    kw: usize,
    dilation: [usize; 2],
    cin: usize,
    cout: usize,
}

/// Saved forward state: the im2col matrix (`H*W x K`) and the input shape.
#[derive(Debug, Clone)]
pub struct ConvCache<T> {
    col: Vec<T>,
    h: usize,
    w: usize,
}

impl<T: Real> Conv2d<T> {
    /// He-uniform kernel scaled by `gain`, zero bias.
    pub fn new(name: &str, kernel: usize, cin: usize, cout: usize, gain: f64, seed: u64) -> Self {
        assert!(kernel % 2 == 1, "same padding needs an odd kernel");
        let shape = [kernel, kernel, cin, cout];
        let w = he_uniform(&shape, kernel * kernel * cin, gain, name_seed(seed, name));
        Conv2d {
            weight: Param::new(format!("{name}.weight"), w),
            bias: Param::new(format!("{name}.bias"), Tensor::zeros(&[cout])),
            kh: kernel,
            kw: kernel,
            dilation: [1, 1],
            cin,
            cout,
        }
    }

    /// Same layer with tap spacing `[dh, dw]` (both >= 1).
    pub fn with_dilation(mut self, dilation: [usize; 2]) -> Self {
        assert!(dilation.iter().all(|&d| d >= 1), "dilation must be >= 1");
        self.dilation = dilation;
        self
    }

    pub fn dilation(&self) -> [usize; 2] {
        self.dilation
    }

    pub fn in_channels(&self) -> usize {
        self.cin
    }

    pub fn out_channels(&self) -> usize {
        self.cout
    }

    pub fn kernel_size(&self) -> usize {
        self.kh
    }

    fn k(&self) -> usize {
        self.kh * self.kw * self.cin
    }

    fn im2col(&self, x: &Tensor<T>, h: usize, w: usize) -> Vec<T> {
        let k = self.k();
        if self.kh == 1 {
            return x.data.clone();
        }
        let (ph, pw) = (self.kh / 2, self.kw / 2);
        let (dh, dw) = (self.dilation[0] as isize, self.dilation[1] as isize);
        let mut col = vec![T::zero(); h * w * k];
        for y in 0..h {
            for xx in 0..w {
                let row = &mut col[(y * w + xx) * k..(y * w + xx + 1) * k];
                for ky in 0..self.kh {
                    let sy = y as isize + (ky as isize - ph as isize) * dh;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    for kx in 0..self.kw {
                        let sx = xx as isize + (kx as isize - pw as isize) * dw;
                        if sx < 0 || sx >= w as isize {
                            continue;
                        }
                        let src = (sy as usize * w + sx as usize) * self.cin;
                        let dst = (ky * self.kw + kx) * self.cin;
                        row[dst..dst + self.cin].copy_from_slice(&x.data[src..src + self.cin]);
                    }
                }
            }
        }
        col
    }

    fn col2im(&self, dcol: &[T], h: usize, w: usize) -> Tensor<T> {
        let k = self.k();
        if self.kh == 1 {
            return Tensor::from_vec(&[h, w, self.cin], dcol.to_vec()).expect("shape");
        }
        let (ph, pw) = (self.kh / 2, self.kw / 2);
        let (dh, dw) = (self.dilation[0] as isize, self.dilation[1] as isize);
        let mut dx = Tensor::zeros(&[h, w, self.cin]);
        for y in 0..h {
            for xx in 0..w {
                let row = &dcol[(y * w + xx) * k..(y * w + xx + 1) * k];
                for ky in 0..self.kh {
                    let sy = y as isize + (ky as isize - ph as isize) * dh;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    for kx in 0..self.kw {
                        let sx = xx as isize + (kx as isize - pw as isize) * dw;
                        if sx < 0 || sx >= w as isize {
                            continue;
                        }
                        let dst = (sy as usize * w + sx as usize) * self.cin;
                        let src = (ky * self.kw + kx) * self.cin;
                        for c in 0..self.cin {
                            dx.data[dst + c] += row[src + c];
                        }
                    }
                }
            }
        }
        dx
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, ConvCache<T>)> {
        let (h, w, c) = x.hwc()?;
        if c != self.cin {
            return Err(Error::Shape(format!(
                "{} expects {} input channels, got {c}",
                self.weight.name, self.cin
            )));
        }
        let k = self.k();
        let col = self.im2col(x, h, w);
        let mut out = Tensor::zeros(&[h, w, self.cout]);
        for row in out.data.chunks_exact_mut(self.cout) {
            row.copy_from_slice(&self.bias.value.data);
        }
        T::gemm(
            h * w,
            k,
            self.cout,
            T::one(),
            &col,
            (k as isize, 1),
            &self.weight.value.data,
            (self.cout as isize, 1),
            T::one(),
            &mut out.data,
            (self.cout as isize, 1),
        );
        Ok((out, ConvCache { col, h, w }))
    }

    /// Accumulates kernel and bias gradients; returns the input gradient.
    pub fn backward(&mut self, cache: &ConvCache<T>, dy: &Tensor<T>) -> Tensor<T> {
        let (h, w) = (cache.h, cache.w);
        let (k, m, n) = (self.k(), h * w, self.cout);
        debug_assert_eq!(dy.len(), m * n);
        for row in dy.data.chunks_exact(n) {
            for (b, &g) in self.bias.grad.data.iter_mut().zip(row) {
                *b += g;
            }
        }
        // dW (K x n) += col^T (K x m) * dy (m x n)
        T::gemm(
            k,
            m,
            n,
            T::one(),
            &cache.col,
            (1, k as isize),
            &dy.data,
            (n as isize, 1),
            T::one(),
            &mut self.weight.grad.data,
            (n as isize, 1),
        );
        // dcol (m x K) = dy (m x n) * W^T (n x K)
        let mut dcol = vec![T::zero(); m * k];
        T::gemm(
            m,
            n,
            k,
            T::one(),
            &dy.data,
            (n as isize, 1),
            &self.weight.value.data,
            (1, n as isize),
            T::zero(),
            &mut dcol,
            (k as isize, 1),
        );
        self.col2im(&dcol, h, w)
    }
}

impl<T: Real> Module<T> for Conv2d<T> {
    fn visit(&self, f: &mut dyn FnMut(&Param<T>)) {
        f(&self.weight);
        f(&self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param<T>)) {
        f(&mut self.weight);
        f(&mut self.bias);
    }
}
