//! Iterative radix-2 FFT.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = sum_n x_n exp(-j 2 pi k n / N)`
    Forward,
    /// `x_n = (1/N) sum_k X_k exp(+j 2 pi k n / N)`
    Inverse,
}

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Debug, Clone)]
pub struct Fft<T> {
    len: usize,
    twiddles: Vec<Complex<T>>,
    bitrev: Vec<usize>,
}

impl<T: Real> Fft<T> {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Config(format!("DFT length {len} is not a power of two")));
        }
        let bits = len.trailing_zeros();
        let bitrev = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..len / 2)
            .map(|k| {
                let angle = -2.0 * std::f64::consts::PI * k as f64 / len as f64;
                Complex::new(T::lit(angle.cos()), T::lit(angle.sin()))
            })
            .collect();
        Ok(Fft {
            len,
            twiddles,
            bitrev,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place transform. Panics if `data.len()` differs from the plan.
    pub fn process(&self, data: &mut [Complex<T>], direction: Direction) {
        assert_eq!(data.len(), self.len, "buffer length does not match FFT plan");
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let inverse = direction == Direction::Inverse;
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
        if inverse {
            let scale = T::one() / T::from_usize_lossy(n);
            for x in data.iter_mut() {
                *x = x.scale(scale);
            }
        }
    }
}

/// One-shot DFT of `x`.
pub fn dft<T: Real>(x: &[Complex<T>], direction: Direction) -> Result<Vec<Complex<T>>> {
    let plan = Fft::new(x.len())?;
    let mut out = x.to_vec();
    plan.process(&mut out, direction);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn direct_dft(x: &[C]) -> Vec<C> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(C::new(0.0, 0.0), |acc, (t, &v)| {
                    let a = -2.0 * std::f64::consts::PI * ((k * t) % n) as f64 / n as f64;
                    acc + v * C::new(a.cos(), a.sin())
                })
            })
            .collect()
    }

    fn random(n: usize, seed: u64) -> Vec<C> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    #[test]
    fn impulse_and_constant() {
        let mut d = vec![C::new(0.0, 0.0); 8];
        d[0] = C::new(1.0, 0.0);
        for v in dft(&d, Direction::Forward).unwrap() {
            assert!((v - C::new(1.0, 0.0)).norm() < 1e-15);
        }
        let ones = vec![C::new(1.0, 0.0); 8];
        let out = dft(&ones, Direction::Forward).unwrap();
        assert!((out[0] - C::new(8.0, 0.0)).norm() < 1e-14);
        assert!(out[1..].iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn matches_direct_summation() {
        let x = random(16, 3);
        let fast = dft(&x, Direction::Forward).unwrap();
        for (a, b) in fast.iter().zip(direct_dft(&x)) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(dft(&random(12, 0), Direction::Forward), Err(Error::Config(_))));
        assert!(Fft::<f64>::new(0).is_err());
    }

    #[test]
    fn round_trip_and_parseval() {
        for &n in &[1usize, 2, 64, 512] {
            let x = random(n, n as u64);
            let f = dft(&x, Direction::Forward).unwrap();
            let e_t: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let e_f: f64 = f.iter().map(|v| v.norm_sqr()).sum();
            assert!((e_f - n as f64 * e_t).abs() <= 1e-10 * e_f.max(1e-300));
            let back = dft(&f, Direction::Inverse).unwrap();
            let err: f64 = back.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum();
            assert!(err.sqrt() <= 1e-12 * e_t.sqrt());
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let x: Vec<Complex<f32>> =
            (0..32).map(|i| Complex::new((i as f32 * 0.3).sin(), (i as f32).cos())).collect();
        let back = dft(&dft(&x, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() < 1e-5);
        }
    }
}
