//! Pitch-plane launcher model with polynomial aerodynamic coefficients.
//!
//! State `x = (α, q)`, single elevator input `u`:
//!
//! ```text
//! α̇ = q + C₁ [C_z(α, M) + b_z(M) u]      C₁ = q̄ S / (m V_T)
//! q̇ =     C₂ [C_m(α, M) + b_m(M) u]      C₂ = q̄ S d / I_yy
//! ```
//!
//! The coefficient fits are valid for |α| ≤ 10° and 1.8 ≤ M ≤ 2.6.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::plant::{Mismatch, Plant};
use super::DynamicsError;

pub const ALPHA_ENVELOPE: (f64, f64) = (-10.0 * std::f64::consts::PI / 180.0, 10.0 * std::f64::consts::PI / 180.0);
pub const MACH_ENVELOPE: (f64, f64) = (1.8, 2.6);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroCoefficients {
    pub c_z: f64,
    pub c_m: f64,
    pub b_z: f64,
    pub b_m: f64,
}

fn phi_z1(a: f64) -> f64 {
    -288.7 * a * a * a + 50.32 * a * a.abs() - 23.89 * a
}

fn phi_z2(a: f64) -> f64 {
    -13.53 * a * a.abs() + 4.185 * a
}

fn phi_m1(a: f64) -> f64 {
    303.1 * a * a * a - 246.3 * a * a.abs() - 37.56 * a
}

fn phi_m2(a: f64) -> f64 {
    71.51 * a * a.abs() + 10.01 * a
}

pub fn eval_long_coeffs(alpha: f64, mach: f64) -> Result<AeroCoefficients, DynamicsError> {
    if !(alpha.is_finite() && mach.is_finite()) {
        return Err(DynamicsError::NonFinite("eval_long_coeffs"));
    }
    Ok(AeroCoefficients {
        c_z: phi_z1(alpha) + phi_z2(alpha) * mach,
        c_m: phi_m1(alpha) + phi_m2(alpha) * mach,
        b_z: 1.6238 * mach - 6.7240,
        b_m: 12.0393 * mach - 48.2246,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeViolation {
    pub alpha: f64,
    pub mach: f64,
}

impl std::fmt::Display for EnvelopeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "alpha = {:.4} rad, mach = {:.3} outside the fitted envelope",
            self.alpha, self.mach
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalModel {
    /// q̄, Pa
    pub dynamic_pressure: f64,
    /// S, m²
    pub area: f64,
    /// d, m
    pub ref_length: f64,
    /// m, kg
    pub mass: f64,
    /// V_T, m/s
    pub velocity: f64,
    /// I_yy, kg·m²
    pub pitch_inertia: f64,
    pub mach: f64,
    mismatch: Mismatch,
}

impl LongitudinalModel {
    pub fn new(
        dynamic_pressure: f64,
        area: f64,
        ref_length: f64,
        mass: f64,
        velocity: f64,
        pitch_inertia: f64,
        mach: f64,
    ) -> Result<Self, DynamicsError> {
        use super::require_positive as pos;
        pos("dynamic_pressure", dynamic_pressure)?;
        pos("area", area)?;
        pos("ref_length", ref_length)?;
        pos("mass", mass)?;
        pos("velocity", velocity)?;
        pos("pitch_inertia", pitch_inertia)?;
        pos("mach", mach)?;
        Ok(Self {
            dynamic_pressure,
            area,
            ref_length,
            mass,
            velocity,
            pitch_inertia,
            mach,
            mismatch: Mismatch::default(),
        })
    }

    pub fn with_mismatch(mut self, mismatch: Mismatch) -> Self {
        self.mismatch = mismatch;
        self
    }

    pub fn mismatch(&self) -> Mismatch {
        self.mismatch
    }

    pub fn c1(&self) -> f64 {
        self.dynamic_pressure * self.area / (self.mass * self.velocity)
    }

    pub fn c2(&self) -> f64 {
        self.dynamic_pressure * self.area * self.ref_length / self.pitch_inertia
    }

    /// `(f₁(α), f₂(α))` of the state-space form, mismatch applied.
    pub fn drift_terms(&self, alpha: f64) -> (f64, f64) {
        let c = coeffs_unchecked(alpha, self.mach);
        let s = self.mismatch.f_scale;
        (s * self.c1() * c.c_z, s * self.c2() * c.c_m)
    }

    /// `(g₁, g₂)` of the state-space form, mismatch applied.
    pub fn input_gains(&self) -> (f64, f64) {
        let c = coeffs_unchecked(0.0, self.mach);
        let s = self.mismatch.g_scale;
        (s * self.c1() * c.b_z, s * self.c2() * c.b_m)
    }

    pub fn check_envelope(&self, alpha: f64) -> Option<EnvelopeViolation> {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        if inside(alpha, ALPHA_ENVELOPE) && inside(self.mach, MACH_ENVELOPE) {
            None
        } else {
            Some(EnvelopeViolation {
                alpha,
                mach: self.mach,
            })
        }
    }
}

// Non-finite α propagates as NaN; the engine reports it as divergence.
fn coeffs_unchecked(alpha: f64, mach: f64) -> AeroCoefficients {
    eval_long_coeffs(alpha, mach).unwrap_or(AeroCoefficients {
        c_z: f64::NAN,
        c_m: f64::NAN,
        b_z: f64::NAN,
        b_m: f64::NAN,
    })
}

/// `(α̇, q̇)` for state `(α, q)` and elevator deflection `u`.
pub fn long_dynamics(model: &LongitudinalModel, x: (f64, f64), u: f64) -> (f64, f64) {
    let (alpha, q) = x;
    let (f1, f2) = model.drift_terms(alpha);
    let (g1, g2) = model.input_gains();
    (q + f1 + g1 * u, f2 + g2 * u)
}

impl Plant for LongitudinalModel {
    fn name(&self) -> &'static str {
        "longitudinal"
    }

    fn state_names(&self) -> Vec<String> {
        vec!["alpha".into(), "q".into()]
    }

    fn input_names(&self) -> Vec<String> {
        vec!["delta_e".into()]
    }

    fn rate_indices(&self) -> Vec<usize> {
        vec![1]
    }

    fn derivative(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let (ad, qd) = long_dynamics(self, (x[0], x[1]), u[0]);
        DVector::from_column_slice(&[ad, qd])
    }

    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, self.drift_terms(x[0]).1)
    }

    fn effectiveness(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.input_gains().1)
    }

    fn mismatched(&self, mismatch: Mismatch) -> Box<dyn Plant> {
        Box::new(self.clone().with_mismatch(mismatch))
    }

    fn envelope(&self, x: &DVector<f64>) -> Option<EnvelopeViolation> {
        self.check_envelope(x[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model() -> LongitudinalModel {
        LongitudinalModel::new(130_500.0, 0.0409, 0.2286, 204.0, 632.0, 247.4, 2.0).unwrap()
    }

    #[test]
    fn zero_alpha_has_zero_coefficients() {
        for mach in [1.8, 2.0, 2.6, 5.0] {
            let c = eval_long_coeffs(0.0, mach).unwrap();
            assert_eq!((c.c_z, c.c_m), (0.0, 0.0));
        }
    }

    #[test]
    fn control_derivatives_at_mach_two() {
        let c = eval_long_coeffs(0.3, 2.0).unwrap();
        assert_relative_eq!(c.b_z, -3.4764, epsilon = 1e-12);
        assert_relative_eq!(c.b_m, -24.1460, epsilon = 1e-12);
    }

    #[test]
    fn normal_force_polynomial_at_point_one_radian() {
        // independent evaluation of the printed cubic fits
        let a: f64 = 0.1;
        let phi_z1 = -288.7 * a.powi(3) + 50.32 * a * a.abs() - 23.89 * a;
        let phi_z2 = -13.53 * a * a.abs() + 4.185 * a;
        assert_relative_eq!(phi_z1, -2.1745, epsilon = 1e-12);
        let c = eval_long_coeffs(a, 2.0).unwrap();
        assert_relative_eq!(c.c_z, phi_z1 + 2.0 * phi_z2, epsilon = 1e-13);
        let phi_m1 = 303.1 * a.powi(3) - 246.3 * a * a - 37.56 * a;
        let phi_m2 = 71.51 * a * a + 10.01 * a;
        assert_relative_eq!(c.c_m, phi_m1 + 2.0 * phi_m2, epsilon = 1e-13);
    }

    #[test]
    fn non_finite_inputs_are_rejected() {
        assert!(eval_long_coeffs(f64::NAN, 2.0).is_err());
        assert!(eval_long_coeffs(0.1, f64::INFINITY).is_err());
    }

    #[test]
    fn rejects_non_positive_parameters() {
        let err = LongitudinalModel::new(1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 2.0).unwrap_err();
        assert_eq!(err, DynamicsError::NonPositive { name: "mass", value: 0.0 });
    }

    #[test]
    fn equilibrium_and_kinematic_coupling() {
        let m = model();
        assert_eq!(long_dynamics(&m, (0.0, 0.0), 0.0), (0.0, 0.0));
        assert_eq!(long_dynamics(&m, (0.0, 0.5), 0.0), (0.5, 0.0));
    }

    #[test]
    fn pure_input_response_is_linear_in_u() {
        let m = model();
        let (ad, qd) = long_dynamics(&m, (0.0, 0.0), 0.01);
        assert_relative_eq!(ad, m.c1() * -3.4764 * 0.01, max_relative = 1e-12);
        assert_relative_eq!(qd, m.c2() * -24.1460 * 0.01, max_relative = 1e-12);
    }

    #[test]
    fn state_space_form_matches_physical_form() {
        let m = model();
        for &(a, q, u) in &[(0.05, 0.1, 0.02), (-0.12, -0.3, 0.1), (0.17, 0.0, -0.05)] {
            let c = eval_long_coeffs(a, m.mach).unwrap();
            let ad = q + m.dynamic_pressure * m.area / (m.mass * m.velocity) * (c.c_z + c.b_z * u);
            let qd = m.dynamic_pressure * m.area * m.ref_length / m.pitch_inertia * (c.c_m + c.b_m * u);
            let (ad2, qd2) = long_dynamics(&m, (a, q), u);
            assert_relative_eq!(ad, ad2, max_relative = 1e-13);
            assert_relative_eq!(qd, qd2, max_relative = 1e-13);
        }
    }

    #[test]
    fn envelope_bounds() {
        let m = model();
        assert!(m.check_envelope(0.17).is_none());
        assert!(m.check_envelope(0.18).is_some());
        let fast = LongitudinalModel::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3.0).unwrap();
        assert!(fast.check_envelope(0.0).is_some());
    }

    #[test]
    fn mismatch_scales_drift_and_effectiveness_only() {
        let m = model();
        let p = m.clone().with_mismatch(Mismatch { f_scale: 1.3, g_scale: 0.5 });
        let (f1, f2) = m.drift_terms(0.1);
        let (pf1, pf2) = p.drift_terms(0.1);
        assert_relative_eq!(pf1, 1.3 * f1);
        assert_relative_eq!(pf2, 1.3 * f2);
        assert_relative_eq!(p.input_gains().1, 0.5 * m.input_gains().1);
        assert_eq!(long_dynamics(&p, (0.0, 0.7), 0.0).0, 0.7);
    }

    proptest! {
        #[test]
        fn coefficients_are_odd_in_alpha(a in -0.5f64..0.5, mach in 1.5f64..3.0) {
            let p = eval_long_coeffs(a, mach).unwrap();
            let n = eval_long_coeffs(-a, mach).unwrap();
            prop_assert!((p.c_z + n.c_z).abs() <= 1e-12 * p.c_z.abs().max(1e-300));
            prop_assert!((p.c_m + n.c_m).abs() <= 1e-12 * p.c_m.abs().max(1e-300));
        }

        #[test]
        fn pitch_acceleration_derivative_wrt_input(
            a in -0.17f64..0.17, q in -1.0f64..1.0, u in -0.2f64..0.2,
        ) {
            let m = model();
            let h = 1e-6;
            let fd = (long_dynamics(&m, (a, q), u + h).1 - long_dynamics(&m, (a, q), u - h).1) / (2.0 * h);
            let exact = m.c2() * eval_long_coeffs(a, m.mach).unwrap().b_m;
            prop_assert!(((fd - exact) / exact).abs() <= 1e-6);
        }
    }
}
