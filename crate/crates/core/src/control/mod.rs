//! Controller family: NDI, INDI (`G₀` and `ḡ` forms), TDC and incremental
//! PI/PID, plus the gain map from desired error dynamics to PI(D) gains.
//!
//! [`laws`] holds the per-step control laws as pure functions of an explicit
//! [`ControllerMemory`]. [`strategy`] wraps each law behind the [`Controller`]
//! trait so a scenario can pick one by name from the [`ControllerRegistry`].

mod gains;
pub mod laws;
mod registry;
pub mod strategy;

pub use gains::{
    map_indi_to_pi, map_indi_to_pid, map_pid_to_indi, DesiredErrorDynamics, EffectorBlendingGain,
    PidGains,
};
pub use laws::{
    finite_diff, incremental_pi_step, incremental_pid_step, indi_control_g0, indi_control_gbar,
    indi_discrete_step, indi_discrete_step_second_order, ndi_control, positional_pi, tdc_control,
    time_delay_estimate, virtual_control, ControllerMemory,
};
pub use registry::{ControllerFactory, ControllerRegistry, ControllerSetup};
pub use strategy::{AccelerationSource, ControlOutput, Controller, SampleSignals};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Largest condition number accepted when inverting an effectiveness matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("control effectiveness matrix is singular (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("gain `{name}` is invalid: {reason}")]
    InvalidGain { name: &'static str, reason: String },

    #[error("second-order gain map requires a derivative gain k_D")]
    MissingDerivativeGain,

    #[error("dimension mismatch in `{what}`: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown controller `{name}` (available: {available})")]
    UnknownController { name: String, available: String },
}

pub(crate) fn check_dim(what: &'static str, v: &DVector<f64>, expected: usize) -> Result<(), ControlError> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(ControlError::Dimension {
            what,
            expected,
            got: v.len(),
        })
    }
}

/// Solves `m x = rhs`, refusing ill-conditioned `m`.
pub(crate) fn solve_checked(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>, ControlError> {
    if m.nrows() != rhs.len() || !m.is_square() {
        return Err(ControlError::Dimension {
            what: "effectiveness matrix",
            expected: rhs.len(),
            got: m.nrows(),
        });
    }
    let sv = m.singular_values();
    let (max, min) = (sv.max(), sv.min());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition.is_finite() && condition < MAX_CONDITION) {
        return Err(ControlError::Singular { condition });
    }
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or(ControlError::Singular { condition })
}
