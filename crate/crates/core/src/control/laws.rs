//! Per-step control laws.
//!
//! Every law is a pure function of its inputs. Sampled laws read the
//! previous-sample quantities from a [`ControllerMemory`]; the caller owns
//! the memory and threads it from one sample to the next.
//!
//! The discrete INDI step and the incremental PI step evaluate their
//! increments in the same order (rate term first, then proportional term) so
//! their outputs agree to rounding.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gains::{DesiredErrorDynamics, EffectorBlendingGain, PidGains};
use super::{solve_checked, ControlError};
use crate::dynamics::Plant;

/// Signals at sample `k − 1` consumed by the incremental laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerMemory {
    /// δ(k−1)
    pub delta: DVector<f64>,
    /// e(k−1)
    pub error: DVector<f64>,
    /// ė(k−1)
    pub error_rate: DVector<f64>,
    /// ë(k−1)
    pub error_accel: DVector<f64>,
    /// ω̇(k−1), the measured (or estimated) output derivative
    pub accel: DVector<f64>,
}

impl ControllerMemory {
    /// Memory before the first incremental step: δ(−1) is the initial/trim
    /// deflection, e(−1) the first measured error, ė(−1) = ë(−1) = 0 and
    /// ω̇(−1) = 0.
    pub fn initial(delta: DVector<f64>, first_error: DVector<f64>) -> Self {
        let n = first_error.len();
        Self {
            delta,
            error: first_error,
            error_rate: DVector::zeros(n),
            error_accel: DVector::zeros(n),
            accel: DVector::zeros(n),
        }
    }
}

/// `ν = ẏ_d + k_P e`.
pub fn virtual_control(
    err: &DVector<f64>,
    y_d_dot: &DVector<f64>,
    dyn_: &DesiredErrorDynamics,
) -> DVector<f64> {
    y_d_dot + dyn_.k_p().component_mul(err)
}

/// NDI input transformation `δ = G(x)⁻¹ [ν − f(x)]` against the given model.
pub fn ndi_control(
    model: &dyn Plant,
    x: &DVector<f64>,
    nu: &DVector<f64>,
) -> Result<DVector<f64>, ControlError> {
    let rhs = nu - model.drift(x);
    solve_checked(&model.effectiveness(x), &rhs)
}

/// Classical INDI, `δ = δ(t−λ) + G₀⁻¹ [ν − ω̇(t−λ)]`.
pub fn indi_control_g0(
    mem: &ControllerMemory,
    nu: &DVector<f64>,
    g0: &DMatrix<f64>,
) -> Result<DVector<f64>, ControlError> {
    let increment = solve_checked(g0, &(nu - &mem.accel))?;
    Ok(&mem.delta + increment)
}

/// INDI with the fixed blending gain, `δ = δ(t−λ) + ḡ⁻¹ [ν − ω̇(t−λ)]`.
pub fn indi_control_gbar(
    mem: &ControllerMemory,
    nu: &DVector<f64>,
    gbar: &EffectorBlendingGain,
) -> DVector<f64> {
    &mem.delta + gbar.solve(&(nu - &mem.accel))
}

/// Time-delay estimate `H̄ = ω̇(t−λ) − ḡ δ(t−λ)`.
pub fn time_delay_estimate(mem: &ControllerMemory, gbar: &EffectorBlendingGain) -> DVector<f64> {
    &mem.accel - gbar.apply(&mem.delta)
}

/// Time-delay control, `δ = ḡ⁻¹ [ν − H̄]` with `H̄` from [`time_delay_estimate`].
pub fn tdc_control(
    mem: &ControllerMemory,
    nu: &DVector<f64>,
    gbar: &EffectorBlendingGain,
) -> DVector<f64> {
    let h_bar = time_delay_estimate(mem, gbar);
    gbar.solve(&(nu - h_bar))
}

/// Sampled INDI, `δ(k) = δ(k−1) + ḡ⁻¹ ė(k−1) + ḡ⁻¹ k_P e(k−1)`.
pub fn indi_discrete_step(
    mem: &ControllerMemory,
    dyn_: &DesiredErrorDynamics,
    gbar: &EffectorBlendingGain,
) -> DVector<f64> {
    let rate = gbar.solve(&mem.error_rate);
    let prop = gbar.solve(&dyn_.k_p().component_mul(&mem.error));
    &mem.delta + (rate + prop)
}

/// Sampled INDI for relative degree two,
/// `δ(k) = δ(k−1) + ḡ⁻¹ [ë + k_D ė + k_P e](k−1)`.
pub fn indi_discrete_step_second_order(
    mem: &ControllerMemory,
    dyn_: &DesiredErrorDynamics,
    gbar: &EffectorBlendingGain,
) -> Result<DVector<f64>, ControlError> {
    let k_d = dyn_.k_d().ok_or(ControlError::MissingDerivativeGain)?;
    let accel = gbar.solve(&mem.error_accel);
    let rate = gbar.solve(&k_d.component_mul(&mem.error_rate));
    let prop = gbar.solve(&dyn_.k_p().component_mul(&mem.error));
    Ok(&mem.delta + (accel + (rate + prop)))
}

/// Incremental PI, `δ(k) = δ(k−1) + K tₛ (ė(k−1) + T_I⁻¹ e(k−1))`.
pub fn incremental_pi_step(mem: &ControllerMemory, gains: &PidGains) -> DVector<f64> {
    let kts = gains.k.map(|k| k * gains.ts);
    let rate = kts.component_mul(&mem.error_rate);
    let prop = kts.component_mul(&mem.error.component_div(&gains.t_i));
    &mem.delta + (rate + prop)
}

/// Incremental PID, `δ(k) = δ(k−1) + K tₛ (T_D ë(k−1) + ė(k−1) + T_I⁻¹ e(k−1))`.
pub fn incremental_pid_step(
    mem: &ControllerMemory,
    gains: &PidGains,
) -> Result<DVector<f64>, ControlError> {
    let t_d = gains.t_d.as_ref().ok_or(ControlError::MissingDerivativeGain)?;
    let kts = gains.k.map(|k| k * gains.ts);
    let accel = kts.component_mul(&t_d.component_mul(&mem.error_accel));
    let rate = kts.component_mul(&mem.error_rate);
    let prop = kts.component_mul(&mem.error.component_div(&gains.t_i));
    Ok(&mem.delta + (accel + (rate + prop)))
}

/// Positional discrete PI, `δ(k) = K (e(k−1) + T_I⁻¹ Σᵢ tₛ e(i)) + δ_DC` over
/// `errors = [e(0), …, e(k−1)]`.
pub fn positional_pi(gains: &PidGains, errors: &[DVector<f64>]) -> DVector<f64> {
    let n = gains.k.len();
    let Some(last) = errors.last() else {
        return gains.delta_dc.clone();
    };
    let integral = errors
        .iter()
        .fold(DVector::zeros(n), |acc: DVector<f64>, e| acc + e * gains.ts);
    gains.k.component_mul(&(last + integral.component_div(&gains.t_i))) + &gains.delta_dc
}

/// Backward difference `[e(k) − e(k−1)] / tₛ`.
pub fn finite_diff(e_k: &DVector<f64>, e_km1: &DVector<f64>, ts: f64) -> DVector<f64> {
    (e_k - e_km1) / ts
}
