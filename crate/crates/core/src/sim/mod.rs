//! Fixed-step closed-loop simulation.
//!
//! The plant is integrated with RK4 on a substep grid. The controller runs
//! every `tₛ` and its command is held in between. Noise, reference and
//! diagnostics are all evaluated at the sampling instants, so a log has one
//! record per instant including `t = 0` and `t = T`.

mod compare;
mod engine;
mod log;
mod metrics;
pub mod reference;
mod scenario;
mod sweep;

pub use compare::{compare_logs, Comparison, SignalDeviation, COMMAND_TOLERANCE};
pub use engine::{rk4_step, run_scenario, run_scenario_with, SimOptions};
pub use log::{LogMeta, SampleRecord, SimLog, SubstepRecord, LOG_SCHEMA};
pub use metrics::{compute_metrics, Metrics};
pub use reference::{smooth_doublet, ReferenceShape, ReferenceSpec};
pub use scenario::{
    config_hash, ActuatorSpec, AeroSpec, ControllerSpec, EnvelopeMode, NoiseSpec, PidSpec,
    PlantSpec, Prepared, Scenario,
};
pub use sweep::{mismatch_sweep, tde_error_sweep, MismatchRow, TdeRow};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("controller failed at t = {t} s: {source}")]
    Control {
        t: f64,
        source: crate::control::ControlError,
    },

    #[error("simulation diverged at t = {t} s: {detail}")]
    Divergence { t: f64, detail: String },

    #[error("left the model envelope at t = {t} s: {detail}")]
    Envelope { t: f64, detail: String },
}

impl SimError {
    pub(crate) fn invalid(section: &str, err: impl std::fmt::Display) -> Self {
        SimError::InvalidScenario(format!("{section}: {err}"))
    }

    /// Scenario problems are configuration errors; everything else happened
    /// while running.
    pub fn is_config_error(&self) -> bool {
        matches!(self, SimError::InvalidScenario(_))
    }
}
