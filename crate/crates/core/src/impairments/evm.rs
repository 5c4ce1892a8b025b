use num_complex::Complex64;

use crate::dsp::ResourceGrid;
use crate::error::{Error, Result};

/// Complex scalar `a` minimizing `sum |rx - a tx|^2` over REs where `tx` is
/// nonzero.
pub fn best_linear_gain(tx: &ResourceGrid<f64>, rx: &ResourceGrid<f64>) -> Result<Complex64> {
    if tx.shape() != rx.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", tx.shape(), rx.shape())));
    }
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for (x, y) in tx.data.iter().zip(&rx.data) {
        if x.norm_sqr() > 0.0 {
            num += x.conj() * y;
            den += x.norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(Error::Argument("transmit grid is all zero".into()));
    }
    Ok(num / den)
}

/// Error vector magnitude in percent after removing the best complex
/// scalar gain.
pub fn compute_evm(tx: &ResourceGrid<f64>, rx: &ResourceGrid<f64>) -> Result<f64> {
    let a = best_linear_gain(tx, rx)?;
    if a.norm() == 0.0 {
        return Err(Error::Argument("received grid is orthogonal to the transmit grid".into()));
    }
    let (mut err, mut ref_power) = (0.0, 0.0);
    for (x, y) in tx.data.iter().zip(&rx.data) {
        if x.norm_sqr() > 0.0 {
            err += (y / a - x).norm_sqr();
            ref_power += x.norm_sqr();
        }
    }
    Ok(100.0 * (err / ref_power).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::GridKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn qpsk_grid(rows: usize, rng: &mut ChaCha8Rng) -> ResourceGrid<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let data = (0..rows * 14)
            .map(|_| Complex64::new(if rng.gen() { h } else { -h }, if rng.gen() { h } else { -h }))
            .collect();
        ResourceGrid::from_vec(rows, 14, data, GridKind::TxSymbols).unwrap()
    }

    #[test]
    fn identity_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tx = qpsk_grid(36, &mut rng);
        assert!(compute_evm(&tx, &tx).unwrap() < 1e-12);
        let mut rx = tx.clone();
        rx.data.iter_mut().for_each(|v| *v *= Complex64::new(2.0, 0.0));
        assert!(compute_evm(&tx, &rx).unwrap() < 1e-12);
        rx.data.iter_mut().for_each(|v| *v *= Complex64::from_polar(1.0, 0.7));
        assert!(compute_evm(&tx, &rx).unwrap() < 1e-12);
    }

    #[test]
    fn zero_tx_is_rejected() {
        let z = ResourceGrid::<f64>::zeros(4, 14, GridKind::TxSymbols);
        assert!(matches!(compute_evm(&z, &z), Err(Error::Argument(_))));
    }

    #[test]
    fn white_noise_gives_ten_percent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tx = qpsk_grid(312, &mut rng);
        let n = Normal::new(0.0, (0.01f64 / 2.0).sqrt()).unwrap();
        let mut rx = tx.clone();
        rx.data
            .iter_mut()
            .for_each(|v| *v += Complex64::new(n.sample(&mut rng), n.sample(&mut rng)));
        let evm = compute_evm(&tx, &rx).unwrap();
        assert!((evm - 10.0).abs() < 0.5, "{evm}");
    }
}
