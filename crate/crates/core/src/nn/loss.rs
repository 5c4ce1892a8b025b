use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Masked binary cross-entropy on logits, averaged over the masked count.
///
/// Per element `max(L, 0) - L b + ln(1 + exp(-|L|))`, which equals
/// `-[b ln σ(L) + (1 - b) ln(1 - σ(L))]` without overflow. The gradient is
/// `(σ(L) - b) / #mask` on masked positions and zero elsewhere.
pub fn bce_with_logits<T: Real>(logits: &Tensor<T>, labels: &[u8], mask: &[bool]) -> Result<(T, Tensor<T>)> {
    if labels.len() != logits.len() || mask.len() != logits.len() {
        return Err(Error::Shape(format!(
            "logits {}, labels {}, mask {}",
            logits.len(),
            labels.len(),
            mask.len()
        )));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::Argument("empty bit mask".into()));
    }
    let inv = T::one() / T::from_usize_lossy(count);
    let mut grad = Tensor::zeros(logits.shape());
    let mut loss = T::zero();
    for (i, &l) in logits.data.iter().enumerate() {
        if !mask[i] {
            continue;
        }
        let b = if labels[i] != 0 { T::one() } else { T::zero() };
        loss += l.max(T::zero()) - l * b + (-l.abs()).exp().ln_1p();
        grad.data[i] = (sigmoid(l) - b) * inv;
    }
    Ok((loss * inv, grad))
}

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}
