use serde::Serialize;

use super::log::SimLog;

/// Settling band as a fraction of the largest reference magnitude.
const SETTLE_BAND: f64 = 0.02;

/// Summary of one run. Tracking errors use the true output, not the
/// measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub controller: String,
    pub samples: usize,
    /// `sqrt(mean ‖e‖²)`
    pub rms_error: f64,
    /// `max ‖e‖∞`
    pub peak_error: f64,
    /// Time after which `‖e‖∞` stays within 2% of the peak reference.
    /// `None` for an all-zero reference.
    pub settle_time: Option<f64>,
    pub max_eps_tdc: f64,
    pub max_eps_indi: f64,
    pub envelope_violations: usize,
}

pub fn compute_metrics(log: &SimLog) -> Metrics {
    let outputs = log.true_outputs();
    let errors: Vec<_> = log
        .records
        .iter()
        .zip(&outputs)
        .map(|(r, y)| &r.reference - y)
        .collect();
    let n = errors.len().max(1) as f64;
    let rms_error = (errors.iter().map(|e| e.norm_squared()).sum::<f64>() / n).sqrt();
    let peak_error = errors.iter().map(|e| e.amax()).fold(0.0, f64::max);
    let ref_peak = log.records.iter().map(|r| r.reference.amax()).fold(0.0, f64::max);
    let settle_time = (ref_peak > 0.0).then(|| {
        let band = SETTLE_BAND * ref_peak;
        match errors.iter().rposition(|e| e.amax() > band) {
            Some(i) if i + 1 < errors.len() => log.records[i + 1].t,
            Some(i) => log.records[i].t,
            None => 0.0,
        }
    });
    let max_norm = |f: fn(&super::SampleRecord) -> f64| log.records.iter().map(f).fold(0.0, f64::max);
    Metrics {
        controller: log.meta.controller.clone(),
        samples: log.records.len(),
        rms_error,
        peak_error,
        settle_time,
        max_eps_tdc: max_norm(|r| r.eps_tdc.norm()),
        max_eps_indi: max_norm(|r| r.eps_indi.norm()),
        envelope_violations: log.envelope_violations,
    }
}
