//! First-order actuator `δ/δ_c = K_a / (τ_a s + 1)` with optional limits.

use serde::{Deserialize, Serialize};

use super::DynamicsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorState {
    /// Current output δ, rad.
    pub deflection: f64,
    pub gain: f64,
    /// τ_a, s
    pub time_constant: f64,
    #[serde(default)]
    pub position_limits: Option<(f64, f64)>,
    /// rad/s
    #[serde(default)]
    pub rate_limit: Option<f64>,
}

impl ActuatorState {
    pub fn new(deflection: f64, gain: f64, time_constant: f64) -> Result<Self, DynamicsError> {
        let state = Self {
            deflection,
            gain,
            time_constant,
            position_limits: None,
            rate_limit: None,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        super::require_positive("time_constant", self.time_constant)?;
        if !(self.gain.is_finite() && self.deflection.is_finite()) {
            return Err(DynamicsError::NonFinite("ActuatorState"));
        }
        if let Some((lo, hi)) = self.position_limits {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(DynamicsError::NonPositive {
                    name: "position_limits width",
                    value: hi - lo,
                });
            }
        }
        if let Some(r) = self.rate_limit {
            super::require_positive("rate_limit", r)?;
        }
        Ok(())
    }

    pub fn with_deflection(mut self, deflection: f64) -> Self {
        self.deflection = self.clamp_position(deflection);
        self
    }

    fn clamp_position(&self, d: f64) -> f64 {
        match self.position_limits {
            Some((lo, hi)) => d.clamp(lo, hi),
            None => d,
        }
    }
}

/// Advances the actuator over `dt` with the command held constant, using the
/// exact solution `δ⁺ = K_a δ_c + (δ − K_a δ_c) e^{−dt/τ_a}`, then applies the
/// rate and position limits if configured.
pub fn actuator_step(state: &ActuatorState, command: f64, dt: f64) -> ActuatorState {
    debug_assert!(dt > 0.0, "actuator_step needs dt > 0");
    let target = state.gain * command;
    let mut next = target + (state.deflection - target) * (-dt / state.time_constant).exp();
    if let Some(r) = state.rate_limit {
        let max_move = r * dt;
        next = next.clamp(state.deflection - max_move, state.deflection + max_move);
    }
    ActuatorState {
        deflection: state.clamp_position(next),
        ..*state
    }
}
