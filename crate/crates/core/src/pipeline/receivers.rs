use super::generate::TtiRecord;
use super::spec::DatasetSpec;
use crate::baseline::{estimate_noise_var, interpolate_channel, lmmse_equalize, max_log_llr, LlrGrid};
use crate::dsp::{DmrsLayout, LinkConfig, Ofdm};
use crate::error::Result;
use crate::rx::{NeuralReceiver, ReceiverKind};

/// Static link knowledge shared by all receivers of a dataset.
#[derive(Debug, Clone)]
pub struct RxContext {
    pub link: LinkConfig,
    pub layout: DmrsLayout,
    pub ofdm: Ofdm<f64>,
}

impl RxContext {
    pub fn new(spec: &DatasetSpec) -> Result<Self> {
        let link = spec.link();
        let layout = DmrsLayout::with_pattern(&link, spec.pilot_symbol(), spec.pilot_stride(), spec.dmrs_seed);
        Ok(RxContext {
            ofdm: Ofdm::new(&link)?,
            link,
            layout,
        })
    }
}

pub enum Receiver {
    /// LMMSE with the genie channel and the true noise level.
    LmmseKnown,
    /// LMMSE with interpolated pilot estimates and estimated noise level.
    LmmseEst,
    Neural(Box<NeuralReceiver<f64>>),
}

impl Receiver {
    pub fn name(&self) -> &'static str {
        match self {
            Receiver::LmmseKnown => "lmmse_known",
            Receiver::LmmseEst => "lmmse_est",
            Receiver::Neural(m) => match m.config().kind {
                ReceiverKind::Hybrid => "hybrid",
                ReceiverKind::DeepRx => "deeprx",
            },
        }
    }

    pub fn detect(&self, record: &TtiRecord, ctx: &RxContext) -> Result<LlrGrid> {
        match self {
            Receiver::LmmseKnown => {
                let y = ctx.ofdm.demodulate(&record.rx_frame)?;
                let var = 10f64.powf(-record.snr_db / 10.0);
                let eq = lmmse_equalize(&y, &record.known_channel, if var.is_finite() { var } else { 0.0 })?;
                Ok(max_log_llr(&eq, ctx.link.modulation))
            }
            Receiver::LmmseEst => {
                let y = ctx.ofdm.demodulate(&record.rx_frame)?;
                let h = interpolate_channel(&record.raw_ls, &ctx.layout);
                let var = estimate_noise_var(&record.raw_ls, &ctx.layout);
                let eq = lmmse_equalize(&y, &h, var)?;
                Ok(max_log_llr(&eq, ctx.link.modulation))
            }
            Receiver::Neural(m) => m.detect(&record.rx_frame, &record.raw_ls),
        }
    }
}
