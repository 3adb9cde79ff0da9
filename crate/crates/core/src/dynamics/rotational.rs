use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::plant::{Mismatch, Plant};
use super::DynamicsError;

/// Largest inertia condition number accepted at construction.
const MAX_CONDITION: f64 = 1e12;

/// User-supplied `ω ↦ M_a`.
pub type MomentFn = Arc<dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync>;

/// Aerodynamic moment of the airframe, `M_a`, as a function of body rates.
#[derive(Clone)]
pub enum AeroMoment {
    Zero,
    /// `M_a = D ω + m0` in N·m.
    Linear {
        damping: Matrix3<f64>,
        bias: Vector3<f64>,
    },
    /// Moments built from coefficients: `M_a = S Q [b C_l, c̄ C_m, b C_n]`
    /// with `C = c0 + C_ω ω`.
    Coefficients {
        area: f64,
        dynamic_pressure: f64,
        span: f64,
        chord: f64,
        c0: Vector3<f64>,
        c_rate: Matrix3<f64>,
    },
    Custom(MomentFn),
}

impl AeroMoment {
    pub fn eval(&self, omega: &Vector3<f64>) -> Vector3<f64> {
        match self {
            AeroMoment::Zero => Vector3::zeros(),
            AeroMoment::Linear { damping, bias } => damping * omega + bias,
            AeroMoment::Coefficients {
                area,
                dynamic_pressure,
                span,
                chord,
                c0,
                c_rate,
            } => {
                let c = c0 + c_rate * omega;
                let sq = area * dynamic_pressure;
                Vector3::new(sq * span * c.x, sq * chord * c.y, sq * span * c.z)
            }
            AeroMoment::Custom(f) => f(omega),
        }
    }
}

impl fmt::Debug for AeroMoment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AeroMoment::Zero => write!(f, "Zero"),
            AeroMoment::Linear { damping, bias } => f
                .debug_struct("Linear")
                .field("damping", damping)
                .field("bias", bias)
                .finish(),
            AeroMoment::Coefficients { c0, c_rate, .. } => f
                .debug_struct("Coefficients")
                .field("c0", c0)
                .field("c_rate", c_rate)
                .finish_non_exhaustive(),
            AeroMoment::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Three-axis rigid-body rotational dynamics,
/// `ω̇ = I⁻¹(M_a + (M_c)_δ δ − ω × Iω) = f(ω) + G(ω) δ`.
#[derive(Debug, Clone)]
pub struct RotationalModel {
    inertia: Matrix3<f64>,
    inertia_inv: Matrix3<f64>,
    aero: AeroMoment,
    control_effectiveness: Matrix3<f64>,
    g: Matrix3<f64>,
    mismatch: Mismatch,
}

impl RotationalModel {
    /// Rejects inertia matrices with products of inertia other than `I_xz`
    /// and singular inertia. `control_effectiveness` is `(M_c)_δ` in N·m/rad.
    pub fn new(
        inertia: Matrix3<f64>,
        aero: AeroMoment,
        control_effectiveness: Matrix3<f64>,
    ) -> Result<Self, DynamicsError> {
        if inertia.iter().chain(control_effectiveness.iter()).any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite("RotationalModel::new"));
        }
        let off_plane = [inertia[(0, 1)], inertia[(1, 0)], inertia[(1, 2)], inertia[(2, 1)]];
        if off_plane.iter().any(|&v| v != 0.0) || inertia[(0, 2)] != inertia[(2, 0)] {
            return Err(DynamicsError::InertiaStructure(format!("{inertia}")));
        }
        for (name, v) in [("I_xx", inertia[(0, 0)]), ("I_yy", inertia[(1, 1)]), ("I_zz", inertia[(2, 2)])] {
            super::require_positive(name, v)?;
        }
        let condition = condition_number(&inertia);
        if !(condition.is_finite() && condition < MAX_CONDITION) {
            return Err(DynamicsError::SingularInertia { condition });
        }
        let inertia_inv = inertia
            .try_inverse()
            .ok_or(DynamicsError::SingularInertia { condition })?;
        Ok(Self {
            inertia,
            inertia_inv,
            aero,
            control_effectiveness,
            g: inertia_inv * control_effectiveness,
            mismatch: Mismatch::default(),
        })
    }

    pub fn inertia(&self) -> &Matrix3<f64> {
        &self.inertia
    }

    pub fn control_effectiveness(&self) -> &Matrix3<f64> {
        &self.control_effectiveness
    }

    pub fn aero(&self) -> &AeroMoment {
        &self.aero
    }

    pub fn mismatch(&self) -> Mismatch {
        self.mismatch
    }

    pub fn with_mismatch(mut self, mismatch: Mismatch) -> Self {
        self.mismatch = mismatch;
        self
    }

    /// `f(ω) = I⁻¹(M_a − ω × Iω)`, scaled by the configured mismatch.
    pub fn drift(&self, omega: &Vector3<f64>) -> Vector3<f64> {
        let gyro = omega.cross(&(self.inertia * omega));
        self.inertia_inv * (self.aero.eval(omega) - gyro) * self.mismatch.f_scale
    }

    /// `G = I⁻¹ (M_c)_δ`. Independent of ω for this model.
    pub fn effectiveness(&self) -> Matrix3<f64> {
        self.g * self.mismatch.g_scale
    }
}

/// Body angular acceleration for rates `omega` and deflections `delta`.
pub fn rot_dynamics(
    model: &RotationalModel,
    omega: &Vector3<f64>,
    delta: &Vector3<f64>,
) -> Vector3<f64> {
    model.drift(omega) + model.effectiveness() * delta
}

pub(crate) fn condition_number(m: &Matrix3<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

impl Plant for RotationalModel {
    fn name(&self) -> &'static str {
        "rotational"
    }

    fn state_names(&self) -> Vec<String> {
        vec!["p".into(), "q".into(), "r".into()]
    }

    fn input_names(&self) -> Vec<String> {
        vec!["delta_a".into(), "delta_e".into(), "delta_r".into()]
    }

    fn rate_indices(&self) -> Vec<usize> {
        vec![0, 1, 2]
    }

    fn derivative(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let omega = Vector3::new(x[0], x[1], x[2]);
        let delta = Vector3::new(u[0], u[1], u[2]);
        let w = rot_dynamics(self, &omega, &delta);
        DVector::from_column_slice(w.as_slice())
    }

    fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        let f = RotationalModel::drift(self, &Vector3::new(x[0], x[1], x[2]));
        DVector::from_column_slice(f.as_slice())
    }

    fn effectiveness(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let g = RotationalModel::effectiveness(self);
        DMatrix::from_column_slice(3, 3, g.as_slice())
    }

    fn mismatched(&self, mismatch: Mismatch) -> Box<dyn Plant> {
        Box::new(self.clone().with_mismatch(mismatch))
    }
}
