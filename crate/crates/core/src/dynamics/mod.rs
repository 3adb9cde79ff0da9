//! Continuous-time plant models.
//!
//! Everything in here is a pure derivative evaluation: the rigid-body
//! rotational model, the pitch-plane launcher model and the first-order
//! actuator. The [`Plant`] trait is what the simulation engine and the
//! controllers see.

mod actuator;
mod longitudinal;
mod plant;
mod rotational;

pub use actuator::{actuator_step, ActuatorState};
pub use longitudinal::{
    eval_long_coeffs, long_dynamics, AeroCoefficients, EnvelopeViolation, LongitudinalModel,
    ALPHA_ENVELOPE, MACH_ENVELOPE,
};
pub use plant::{Mismatch, Plant};
pub use rotational::{rot_dynamics, AeroMoment, MomentFn, RotationalModel};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("inertia matrix is singular (condition number {condition:e})")]
    SingularInertia { condition: f64 },

    #[error("inertia matrix must have I_xy = I_yz = 0 and symmetric I_xz, got {0}")]
    InertiaStructure(String),

    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("non-finite input to `{0}`")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<(), DynamicsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::NonPositive { name, value })
    }
}
