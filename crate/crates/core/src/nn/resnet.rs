use super::conv::{Conv2d, ConvCache};
use super::param::{Module, Param};
use super::tensor::{relu, relu_backward, Tensor};
use crate::error::Result;
use crate::scalar::Real;

/// Pre-activation residual block without normalisation:
/// `y = shortcut(x) + conv2(relu(conv1(relu(x))))`, where the shortcut is a
/// 1x1 projection when the channel count changes.
#[derive(Debug, Clone)]
pub struct ResBlock<T> {
    pub conv1: Conv2d<T>,
    pub conv2: Conv2d<T>,
    pub proj: Option<Conv2d<T>>,
}

#[derive(Debug, Clone)]
pub struct ResBlockCache<T> {
    x: Tensor<T>,
    c1: ConvCache<T>,
    h1: Tensor<T>,
    c2: ConvCache<T>,
    cp: Option<ConvCache<T>>,
}

impl<T: Real> ResBlockCache<T> {
    /// Fold the sign of every ReLU input of the block into `state` (FNV-1a).
    pub fn fold_activation_pattern(&self, state: &mut u64) {
        for v in self.x.data.iter().chain(&self.h1.data) {
            *state ^= (*v > T::zero()) as u64;
            *state = state.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

impl<T: Real> ResBlock<T> {
    pub fn new(name: &str, cin: usize, cout: usize, seed: u64) -> Self {
        Self::dilated(name, cin, cout, [1, 1], seed)
    }

    /// Both 3x3 convolutions use `dilation`; the projection is unaffected.
    pub fn dilated(name: &str, cin: usize, cout: usize, dilation: [usize; 2], seed: u64) -> Self {
        ResBlock {
            conv1: Conv2d::new(&format!("{name}.conv1"), 3, cin, cout, 1.0, seed).with_dilation(dilation),
            conv2: Conv2d::new(&format!("{name}.conv2"), 3, cout, cout, 1.0, seed).with_dilation(dilation),
            proj: (cin != cout).then(|| Conv2d::new(&format!("{name}.proj"), 1, cin, cout, 1.0, seed)),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.conv2.out_channels()
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, ResBlockCache<T>)> {
        let (h1, c1) = self.conv1.forward(&relu(x))?;
        let (mut y, c2) = self.conv2.forward(&relu(&h1))?;
        let cp = match &self.proj {
            Some(p) => {
                let (s, cache) = p.forward(x)?;
                y.add_assign(&s)?;
                Some(cache)
            }
            None => {
                y.add_assign(x)?;
                None
            }
        };
        Ok((
            y,
            ResBlockCache {
                x: x.clone(),
                c1,
                h1,
                c2,
                cp,
            },
        ))
    }

    pub fn backward(&mut self, cache: &ResBlockCache<T>, dy: &Tensor<T>) -> Tensor<T> {
        let da1 = self.conv2.backward(&cache.c2, dy);
        let dh1 = relu_backward(&cache.h1, &da1);
        let da0 = self.conv1.backward(&cache.c1, &dh1);
        let mut dx = relu_backward(&cache.x, &da0);
        let ds = match (&mut self.proj, &cache.cp) {
            (Some(p), Some(c)) => p.backward(c, dy),
            _ => dy.clone(),
        };
        dx.add_assign(&ds).expect("shortcut shape");
        dx
    }
}

impl<T: Real> Module<T> for ResBlock<T> {
    fn visit(&self, f: &mut dyn FnMut(&Param<T>)) {
        self.conv1.visit(f);
        self.conv2.visit(f);
        if let Some(p) = &self.proj {
            p.visit(f);
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param<T>)) {
        self.conv1.visit_mut(f);
        self.conv2.visit_mut(f);
        if let Some(p) = &mut self.proj {
            p.visit_mut(f);
        }
    }
}

/// A chain of residual blocks.
#[derive(Debug, Clone)]
pub struct ResStack<T> {
    pub blocks: Vec<ResBlock<T>>,
}

impl<T: Real> ResStack<T> {
    pub fn new(name: &str, cin: usize, filters: &[usize], seed: u64) -> Self {
        Self::dilated(name, cin, filters, &[], seed)
    }

    /// Block `i` uses `dilations[i]`, or no dilation past the end of the list.
    pub fn dilated(name: &str, cin: usize, filters: &[usize], dilations: &[[usize; 2]], seed: u64) -> Self {
        let mut c = cin;
        let blocks = filters
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let d = dilations.get(i).copied().unwrap_or([1, 1]);
                let b = ResBlock::dilated(&format!("{name}.block{i}"), c, f, d, seed);
                c = f;
                b
            })
            .collect();
        ResStack { blocks }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Vec<ResBlockCache<T>>)> {
        let mut caches = Vec::with_capacity(self.blocks.len());
        let mut cur = x.clone();
        for b in &self.blocks {
            let (y, c) = b.forward(&cur)?;
            caches.push(c);
            cur = y;
        }
        Ok((cur, caches))
    }

    pub fn backward(&mut self, caches: &[ResBlockCache<T>], dy: &Tensor<T>) -> Tensor<T> {
        let mut g = dy.clone();
        for (b, c) in self.blocks.iter_mut().zip(caches).rev() {
            g = b.backward(c, &g);
        }
        g
    }
}

impl<T: Real> Module<T> for ResStack<T> {
    fn visit(&self, f: &mut dyn FnMut(&Param<T>)) {
        self.blocks.iter().for_each(|b| b.visit(f));
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param<T>)) {
        self.blocks.iter_mut().for_each(|b| b.visit_mut(f));
    }
}
