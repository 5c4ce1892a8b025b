use crate::dsp::Modulation;

/// Exact bit error probability of Gray-mapped square QAM on AWGN at
/// per-symbol SNR `snr_db` (Es/N0).
///
/// Each quadrature is a Gray-coded sqrt(M)-PAM; for bit `k` of a PAM
/// dimension the error probability is the alternating erfc series of
/// Cho and Yoon.
pub fn awgn_ber_theory(snr_db: f64, modulation: Modulation) -> f64 {
    if snr_db == f64::NEG_INFINITY {
        return 0.5;
    }
    let m = modulation.order() as f64;
    let side = m.sqrt() as usize;
    let bits_per_dim = side.trailing_zeros() as usize;
    let es_n0 = 10f64.powf(snr_db / 10.0);
    let arg = (3.0 * es_n0 / (2.0 * (m - 1.0))).sqrt();
    let mut total = 0.0;
    for k in 1..=bits_per_dim {
        let pow = 1usize << (k - 1);
        let upper = (1.0 - 1.0 / (1u64 << k) as f64) * side as f64;
        let mut pk = 0.0;
        for i in 0..upper as usize {
            let q = (i * pow) as f64 / side as f64;
            let sign = if (q.floor() as i64) % 2 == 0 { 1.0 } else { -1.0 };
            let weight = pow as f64 - (q + 0.5).floor();
            pk += sign * weight * libm::erfc((2 * i + 1) as f64 * arg);
        }
        total += pk / side as f64;
    }
    (total / bits_per_dim as f64).clamp(0.0, 0.5)
}

/// SNR (dB) at which the theoretical BER equals `target`, by bisection.
pub fn awgn_snr_for_ber(target: f64, modulation: Modulation) -> f64 {
    let (mut lo, mut hi) = (-20.0, 60.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if awgn_ber_theory(mid, modulation) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
