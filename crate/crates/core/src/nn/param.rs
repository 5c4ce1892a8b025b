use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;

use super::tensor::Tensor;
use crate::rng::{splitmix64, SimRng};
use crate::scalar::Real;

/// A named trainable tensor with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Param<T> {
    pub name: String,
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
}

impl<T: Real> Param<T> {
    pub fn new(name: impl Into<String>, value: Tensor<T>) -> Self {
        let grad = Tensor::zeros(value.shape());
        Param {
            name: name.into(),
            value,
            grad,
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.data.iter_mut().for_each(|g| *g = T::zero());
    }
}

/// Anything that owns parameters. Visiting order is the canonical ordering
/// of θ and must not depend on runtime state.
pub trait Module<T: Real> {
    fn visit(&self, f: &mut dyn FnMut(&Param<T>));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param<T>));

    fn zero_grad(&mut self) {
        self.visit_mut(&mut |p| p.zero_grad());
    }

    fn num_parameters(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |p| n += p.value.len());
        n
    }

    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.visit(&mut |p| names.push(p.name.clone()));
        names
    }

    fn grad_norm(&self) -> T {
        let mut acc = T::zero();
        self.visit(&mut |p| acc += p.grad.dot(&p.grad));
        acc.sqrt()
    }

    /// Rescale all gradients so their joint L2 norm is at most `max_norm`.
    /// Returns the norm before clipping.
    fn clip_grad_norm(&mut self, max_norm: T) -> T {
        let norm = self.grad_norm();
        if norm > max_norm {
            let s = max_norm / norm;
            self.visit_mut(&mut |p| p.grad.data.iter_mut().for_each(|g| *g *= s));
        }
        norm
    }

    fn scale_grads(&mut self, s: T) {
        self.visit_mut(&mut |p| p.grad.data.iter_mut().for_each(|g| *g *= s));
    }
}

/// Seed derived from a layer name, so initialisation does not depend on
/// construction order.
pub fn name_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01B3);
    }
    let mut s = seed ^ h;
    splitmix64(&mut s)
}

/// He-uniform samples `U(-sqrt(6 / fan_in), sqrt(6 / fan_in)) * gain`.
pub fn he_uniform<T: Real>(shape: &[usize], fan_in: usize, gain: f64, seed: u64) -> Tensor<T> {
    let limit = (6.0 / fan_in as f64).sqrt() * gain;
    let mut t = Tensor::zeros(shape);
    if limit > 0.0 {
        let mut rng = SimRng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-limit, limit);
        t.data.iter_mut().for_each(|v| *v = T::lit(dist.sample(&mut rng)));
    }
    t
}
