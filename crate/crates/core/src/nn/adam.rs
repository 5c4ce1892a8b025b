use serde::{Deserialize, Serialize};

use super::param::Module;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment buffers, one per parameter in visiting order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub t: u64,
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new<M: Module<T> + ?Sized>(model: &M, config: AdamConfig) -> Self {
        let mut m = Vec::new();
        model.visit(&mut |p| m.push(vec![T::zero(); p.value.len()]));
        AdamState {
            config,
            t: 0,
            v: m.clone(),
            m,
        }
    }

    /// One bias-corrected update from the gradients currently held by `model`.
    pub fn step<M: Module<T> + ?Sized>(&mut self, model: &mut M) {
        self.t += 1;
        let c = self.config;
        let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
        let bc1 = T::one() - T::lit(c.beta1.powi(self.t as i32));
        let bc2 = T::one() - T::lit(c.beta2.powi(self.t as i32));
        let (lr, eps) = (T::lit(c.lr), T::lit(c.eps));
        let mut i = 0;
        let (ms, vs) = (&mut self.m, &mut self.v);
        model.visit_mut(&mut |p| {
            let (m, v) = (&mut ms[i], &mut vs[i]);
            assert_eq!(m.len(), p.value.len(), "moment shape drift for {}", p.name);
            for (((w, &g), m), v) in p.value.data.iter_mut().zip(&p.grad.data).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (T::one() - b1) * g;
                *v = b2 * *v + (T::one() - b2) * g * g;
                *w -= lr * (*m / bc1) / ((*v / bc2).sqrt() + eps);
            }
            i += 1;
        });
    }
}
