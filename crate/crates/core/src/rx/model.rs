use num_complex::Complex;

use super::config::{HybridConfig, ReceiverKind};
use crate::baseline::LlrGrid;
use crate::dsp::{ResourceGrid, TimeFrame};
use crate::error::{Error, Result};
use crate::nn::{bce_with_logits, Checkpoint, Conv2d, ConvCache, FftBridge, Module, Param, ResBlockCache, ResStack, Tensor};
use crate::scalar::Real;

/// `(cp_long + N) x N_symb x 2` tensor of a time frame: real, imaginary.
pub fn assemble_pre_input<T: Real>(frame: &TimeFrame<f64>) -> Tensor<T> {
    let (rows, ns) = (frame.rows(), frame.symbols());
    let mut t = Tensor::zeros(&[rows, ns, 2]);
    for (i, v) in frame.data.iter().enumerate() {
        t.data[2 * i] = T::lit(v.re);
        t.data[2 * i + 1] = T::lit(v.im);
    }
    t
}

/// Grid as an `N_D x N_symb x 2` tensor.
pub fn grid_tensor<T: Real>(grid: &ResourceGrid<f64>) -> Tensor<T> {
    let (nd, ns) = grid.shape();
    let mut t = Tensor::zeros(&[nd, ns, 2]);
    for (i, v) in grid.data.iter().enumerate() {
        t.data[2 * i] = T::lit(v.re);
        t.data[2 * i + 1] = T::lit(v.im);
    }
    t
}

pub fn tensor_grid<T: Real>(t: &Tensor<T>, kind: crate::dsp::GridKind) -> Result<ResourceGrid<f64>> {
    let (nd, ns, c) = t.hwc()?;
    if c != 2 {
        return Err(Error::Shape(format!("expected 2 channels, got {c}")));
    }
    let data = t
        .data
        .chunks_exact(2)
        .map(|p| Complex::new(p[0].to_f64_lossy(), p[1].to_f64_lossy()))
        .collect();
    ResourceGrid::from_vec(nd, ns, data, kind)
}

/// Channels `[freq_re, freq_im, ls_re, ls_im]`.
pub fn assemble_post_input<T: Real>(freq: &Tensor<T>, raw_ls: &Tensor<T>) -> Result<Tensor<T>> {
    let (nd, ns, c) = freq.hwc()?;
    if c != 2 || raw_ls.shape() != freq.shape() {
        return Err(Error::Shape(format!("post input from {:?} and {:?}", freq.shape(), raw_ls.shape())));
    }
    let mut t = Tensor::zeros(&[nd, ns, 4]);
    for i in 0..nd * ns {
        t.data[4 * i..4 * i + 2].copy_from_slice(&freq.data[2 * i..2 * i + 2]);
        t.data[4 * i + 2..4 * i + 4].copy_from_slice(&raw_ls.data[2 * i..2 * i + 2]);
    }
    Ok(t)
}

/// Time-domain residual stack followed by a linear 1x1 head with two
/// filters, so the output has the shape of the input.
#[derive(Debug, Clone)]
pub struct PreFftNet<T> {
    pub stack: ResStack<T>,
    pub head: Conv2d<T>,
}

impl<T: Real> Module<T> for PreFftNet<T> {
    fn visit(&self, f: &mut dyn FnMut(&Param<T>)) {
        self.stack.visit(f);
        self.head.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param<T>)) {
        self.stack.visit_mut(f);
        self.head.visit_mut(f);
    }
}

/// HybridDeepRx, or DeepRx when the pre-FFT network is absent.
#[derive(Debug, Clone)]
pub struct NeuralReceiver<T> {
    config: HybridConfig,
    pub pre: Option<PreFftNet<T>>,
    bridge: FftBridge<T>,
    pub post: ResStack<T>,
    pub head: Conv2d<T>,
}

pub struct ForwardCache<T> {
    pre: Option<(Vec<ResBlockCache<T>>, ConvCache<T>)>,
    post: Vec<ResBlockCache<T>>,
    head: ConvCache<T>,
}

impl<T: Real> ForwardCache<T> {
    /// Fingerprint of which side of its kink every ReLU input lies on.
    pub fn activation_pattern(&self) -> u64 {
        let mut state = 0xcbf2_9ce4_8422_2325;
        let pre = self.pre.iter().flat_map(|(blocks, _)| blocks);
        for b in pre.chain(&self.post) {
            b.fold_activation_pattern(&mut state);
        }
        state
    }
}

impl<T: Real> NeuralReceiver<T> {
    pub fn new(config: &HybridConfig) -> Result<Self> {
        config.validate()?;
        let seed = config.init_seed;
        let pre = match config.kind {
            ReceiverKind::Hybrid => {
                let last = *config.pre_fft_filters.last().expect("validated");
                Some(PreFftNet {
                    stack: ResStack::new("pre", 2, &config.pre_fft_filters, seed),
                    head: Conv2d::new("pre.head", 1, last, 2, config.pre_head_gain, seed),
                })
            }
            ReceiverKind::DeepRx => None,
        };
        let last = *config.post_fft_filters.last().expect("validated");
        Ok(NeuralReceiver {
            config: config.clone(),
            pre,
            bridge: FftBridge::new(&config.link)?,
            post: ResStack::dilated("post", 4, &config.post_fft_filters, &config.post_fft_dilations, seed),
            head: Conv2d::new("post.head", 1, last, config.output_bits, 1.0, seed),
        })
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    pub fn bridge(&self) -> &FftBridge<T> {
        &self.bridge
    }

    /// Pre-FFT network output (same shape as `z`); `None` for DeepRx.
    pub fn pre_fft_forward(&self, z: &Tensor<T>) -> Result<Option<Tensor<T>>> {
        match &self.pre {
            None => Ok(None),
            Some(p) => {
                let (h, _) = p.stack.forward(z)?;
                Ok(Some(p.head.forward(&h)?.0))
            }
        }
    }

    /// Logits `N_D x N_symb x N_B` for the pre-FFT input `z` and the raw LS
    /// estimate tensor.
    pub fn forward(&self, z: &Tensor<T>, raw_ls: &Tensor<T>) -> Result<(Tensor<T>, ForwardCache<T>)> {
        let expected = self.bridge.input_shape();
        if z.shape() != expected {
            return Err(Error::Shape(format!("pre-FFT input {:?}, expected {expected:?}", z.shape())));
        }
        let (bridge_in, pre) = match &self.pre {
            None => (None, None),
            Some(p) => {
                let (h, sc) = p.stack.forward(z)?;
                let (mut out, hc) = p.head.forward(&h)?;
                if self.config.global_skip {
                    out.add_assign(z)?;
                }
                (Some(out), Some((sc, hc)))
            }
        };
        let freq = self.bridge.forward(bridge_in.as_ref().unwrap_or(z))?;
        let post_in = assemble_post_input(&freq, raw_ls)?;
        let (h, post) = self.post.forward(&post_in)?;
        let (logits, head) = self.head.forward(&h)?;
        Ok((logits, ForwardCache { pre, post, head }))
    }

    /// Accumulate `∂loss/∂θ` given `∂loss/∂logits`.
    pub fn backward(&mut self, cache: &ForwardCache<T>, dlogits: &Tensor<T>) -> Result<()> {
        let dh = self.head.backward(&cache.head, dlogits);
        let dpost = self.post.backward(&cache.post, &dh);
        if let (Some(p), Some((sc, hc))) = (&mut self.pre, &cache.pre) {
            let (nd, ns, _) = dpost.hwc()?;
            let mut dfreq = Tensor::zeros(&[nd, ns, 2]);
            for i in 0..nd * ns {
                dfreq.data[2 * i] = dpost.data[4 * i];
                dfreq.data[2 * i + 1] = dpost.data[4 * i + 1];
            }
            let dz = self.bridge.backward(&dfreq)?;
            let dh = p.head.backward(hc, &dz);
            p.stack.backward(sc, &dh);
        }
        Ok(())
    }

    /// Forward, masked BCE and backward for one TTI; returns the loss.
    pub fn accumulate_gradients(&mut self, z: &Tensor<T>, raw_ls: &Tensor<T>, labels: &[u8], mask: &[bool]) -> Result<T> {
        let (logits, cache) = self.forward(z, raw_ls)?;
        let (loss, g) = bce_with_logits(&logits, labels, mask)?;
        self.backward(&cache, &g)?;
        Ok(loss)
    }

    pub fn loss(&self, z: &Tensor<T>, raw_ls: &Tensor<T>, labels: &[u8], mask: &[bool]) -> Result<T> {
        let (logits, _) = self.forward(z, raw_ls)?;
        Ok(bce_with_logits(&logits, labels, mask)?.0)
    }

    /// LLRs for a received frame and its raw LS pilot estimates.
    pub fn detect(&self, frame: &TimeFrame<f64>, raw_ls: &ResourceGrid<f64>) -> Result<LlrGrid> {
        let (logits, _) = self.forward(&assemble_pre_input(frame), &grid_tensor(raw_ls))?;
        let (nd, ns, _) = logits.hwc()?;
        Ok(LlrGrid {
            subcarriers: nd,
            symbols: ns,
            values: logits.data.iter().map(|v| v.to_f64_lossy()).collect(),
        })
    }

    pub fn checkpoint(&self, optimizer: Option<&crate::nn::AdamState<T>>) -> Checkpoint {
        Checkpoint::capture(&self.config.to_json(), self, optimizer)
    }

    /// Rebuild a receiver from a checkpoint's architecture header and weights.
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let config = HybridConfig::from_json(&ck.architecture)?;
        let mut model = Self::new(&config)?;
        ck.restore(&mut model)?;
        Ok(model)
    }
}

impl<T: Real> Module<T> for NeuralReceiver<T> {
    fn visit(&self, f: &mut dyn FnMut(&Param<T>)) {
        if let Some(p) = &self.pre {
            p.visit(f);
        }
        self.post.visit(f);
        self.head.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param<T>)) {
        if let Some(p) = &mut self.pre {
            p.visit_mut(f);
        }
        self.post.visit_mut(f);
        self.head.visit_mut(f);
    }
}

pub fn hybrid_forward<T: Real>(frame: &TimeFrame<f64>, raw_ls: &ResourceGrid<f64>, model: &NeuralReceiver<T>) -> Result<LlrGrid> {
    if model.config.kind != ReceiverKind::Hybrid {
        return Err(Error::Argument("hybrid_forward needs a hybrid model".into()));
    }
    model.detect(frame, raw_ls)
}

pub fn deeprx_forward<T: Real>(frame: &TimeFrame<f64>, raw_ls: &ResourceGrid<f64>, model: &NeuralReceiver<T>) -> Result<LlrGrid> {
    if model.config.kind != ReceiverKind::DeepRx {
        return Err(Error::Argument("deeprx_forward needs a DeepRx model".into()));
    }
    model.detect(frame, raw_ls)
}

/// Hard decisions on masked positions: 1 iff the LLR is strictly positive.
/// Unmasked positions are 0.
pub fn llr_to_bits(llr: &LlrGrid, mask: &[bool]) -> Vec<u8> {
    llr.values
        .iter()
        .zip(mask)
        .map(|(&l, &m)| (m && l > 0.0) as u8)
        .collect()
}

/// Bit errors and compared bits over masked positions.
pub fn count_bit_errors(llr: &LlrGrid, labels: &[u8], mask: &[bool]) -> (u64, u64) {
    let mut errors = 0;
    let mut total = 0;
    for ((&l, &b), &m) in llr.values.iter().zip(labels).zip(mask) {
        if m {
            total += 1;
            errors += ((l > 0.0) as u8 != b) as u64;
        }
    }
    (errors, total)
}

/// Finite-difference check of every parameter of `model` on one example,
/// using the masked BCE loss and rejecting probes that cross a ReLU kink.
pub fn grad_check_receiver(
    model: &mut NeuralReceiver<f64>,
    z: &Tensor<f64>,
    raw_ls: &Tensor<f64>,
    labels: &[u8],
    mask: &[bool],
    options: &crate::nn::GradCheckOptions,
) -> crate::nn::GradCheckReport {
    crate::nn::grad_check_piecewise(
        model,
        |m, with_grad| {
            let (logits, cache) = m.forward(z, raw_ls).expect("shapes validated");
            let (loss, g) = bce_with_logits(&logits, labels, mask).expect("shapes validated");
            if with_grad {
                m.backward(&cache, &g).expect("shapes validated");
            }
            (loss, cache.activation_pattern())
        },
        options,
    )
}

/// Draw every bias uniformly from `[-scale, scale]` so that no
/// pre-activation sits exactly on a ReLU kink (padded rows are exact zeros).
pub fn randomize_biases<T: Real, M: Module<T> + ?Sized>(model: &mut M, scale: f64, seed: u64) {
    use rand::{Rng, SeedableRng};
    let mut rng = crate::rng::SimRng::seed_from_u64(seed);
    model.visit_mut(&mut |p| {
        if p.name.ends_with(".bias") {
            p.value.data.iter_mut().for_each(|v| *v = T::lit(rng.gen_range(-scale..scale)));
        }
    });
}
