//! Batch runs over sample periods and model mismatch, executed in parallel
//! and returned in sweep order.

use rayon::prelude::*;
use serde::Serialize;

use super::engine::run_scenario;
use super::metrics::compute_metrics;
use super::scenario::Scenario;
use super::SimError;
use crate::dynamics::Mismatch;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdeRow {
    pub sample_period: f64,
    pub max_eps_tdc: f64,
    pub max_eps_indi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MismatchRow {
    pub controller: String,
    pub f_scale: f64,
    pub g_scale: f64,
    pub rms_error: f64,
    pub peak_error: f64,
    pub max_eps_tdc: f64,
}

/// Max TDE error over the run for each sample period. Substeps are scaled
/// so the integration step stays that of `s`.
pub fn tde_error_sweep(s: &Scenario, sample_periods: &[f64]) -> Result<Vec<TdeRow>, SimError> {
    let h = s.sample_period / f64::from(s.substeps);
    sample_periods
        .par_iter()
        .map(|&ts| {
            let mut run = s.clone();
            run.sample_period = ts;
            run.substeps = ((ts / h).round() as u32).max(1);
            run.compare_with = None;
            let m = compute_metrics(&run_scenario(&run)?);
            Ok(TdeRow {
                sample_period: ts,
                max_eps_tdc: m.max_eps_tdc,
                max_eps_indi: m.max_eps_indi,
            })
        })
        .collect()
}

/// Tracking metrics for every `(controller, f scale)` pair, controller-major.
/// The truth plant's `G` is scaled by `g_scale`; controllers keep the
/// nominal model.
pub fn mismatch_sweep(
    s: &Scenario,
    f_scales: &[f64],
    g_scale: f64,
    controllers: &[String],
) -> Result<Vec<MismatchRow>, SimError> {
    let points: Vec<(&String, f64)> = controllers
        .iter()
        .flat_map(|c| f_scales.iter().map(move |&f| (c, f)))
        .collect();
    points
        .par_iter()
        .map(|&(kind, f_scale)| {
            let mut run = s.with_controller(kind);
            run.mismatch = Mismatch { f_scale, g_scale };
            let m = compute_metrics(&run_scenario(&run)?);
            Ok(MismatchRow {
                controller: kind.clone(),
                f_scale,
                g_scale,
                rms_error: m.rms_error,
                peak_error: m.peak_error,
                max_eps_tdc: m.max_eps_tdc,
            })
        })
        .collect()
}
