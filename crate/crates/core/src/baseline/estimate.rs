use num_complex::Complex64;

use crate::dsp::{DmrsLayout, GridKind, ReRole, ResourceGrid};

/// Raw least-squares estimates `Y / p` on pilot REs; exactly zero elsewhere.
pub fn ls_estimate(rx: &ResourceGrid<f64>, layout: &DmrsLayout) -> ResourceGrid<f64> {
    let (nd, ns) = rx.shape();
    let mut out = ResourceGrid::zeros(nd, ns, GridKind::ChannelEstimate);
    for sc in layout.pilot_subcarriers() {
        if let ReRole::Pilot(p) = layout.role(sc, layout.pilot_symbol) {
            let pilot: Complex64 = layout.pilot(p);
            out.set(sc, layout.pilot_symbol, rx.get(sc, layout.pilot_symbol) / pilot);
        }
    }
    out
}

/// Linear interpolation across subcarriers between pilots (nearest pilot
/// beyond the edges), then the same estimate on every symbol.
pub fn interpolate_channel(raw: &ResourceGrid<f64>, layout: &DmrsLayout) -> ResourceGrid<f64> {
    let (nd, ns) = raw.shape();
    let pilots: Vec<(usize, Complex64)> = layout
        .pilot_subcarriers()
        .map(|sc| (sc, raw.get(sc, layout.pilot_symbol)))
        .collect();
    let mut column = vec![Complex64::new(0.0, 0.0); nd];
    if let (Some(&first), Some(&last)) = (pilots.first(), pilots.last()) {
        for (sc, v) in column.iter_mut().enumerate() {
            *v = if sc <= first.0 {
                first.1
            } else if sc >= last.0 {
                last.1
            } else {
                let right = pilots.iter().position(|&(p, _)| p >= sc).expect("interior subcarrier");
                let (x0, y0) = pilots[right - 1];
                let (x1, y1) = pilots[right];
                let t = (sc - x0) as f64 / (x1 - x0) as f64;
                y0 * (1.0 - t) + y1 * t
            };
        }
    }
    let mut out = ResourceGrid::zeros(nd, ns, GridKind::ChannelEstimate);
    for (sc, &v) in column.iter().enumerate() {
        for sym in 0..ns {
            out.set(sc, sym, v);
        }
    }
    out
}

/// Noise variance from the second difference of neighbouring pilot
/// estimates: `r_k = h_k - (h_{k-1} + h_{k+1}) / 2` has variance `1.5 sigma^2`
/// on a channel that is affine across the pilot triple.
pub fn estimate_noise_var(raw: &ResourceGrid<f64>, layout: &DmrsLayout) -> f64 {
    let h: Vec<Complex64> = layout
        .pilot_subcarriers()
        .map(|sc| raw.get(sc, layout.pilot_symbol))
        .collect();
    if h.len() < 3 {
        return 1e-10;
    }
    let acc: f64 = h.windows(3).map(|w| (w[1] - (w[0] + w[2]) * 0.5).norm_sqr()).sum();
    (acc / (h.len() - 2) as f64 / 1.5).max(1e-10)
}
