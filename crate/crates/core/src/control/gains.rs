use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::ControlError;

fn all_positive(name: &'static str, v: &DVector<f64>) -> Result<(), ControlError> {
    if v.is_empty() {
        return Err(ControlError::InvalidGain {
            name,
            reason: "empty".into(),
        });
    }
    match v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        Some(bad) => Err(ControlError::InvalidGain {
            name,
            reason: format!("entries must be > 0, got {bad}"),
        }),
        None => Ok(()),
    }
}

fn all_nonzero(name: &'static str, v: &DVector<f64>) -> Result<(), ControlError> {
    match v.iter().find(|x| **x == 0.0 || !x.is_finite()) {
        Some(bad) => Err(ControlError::InvalidGain {
            name,
            reason: format!("entries must be finite and nonzero, got {bad}"),
        }),
        None if v.is_empty() => Err(ControlError::InvalidGain {
            name,
            reason: "empty".into(),
        }),
        None => Ok(()),
    }
}

/// Diagonal gains of the desired error dynamics, `ė + k_P e = 0`, or
/// `ë + k_D ė + k_P e = 0` when `k_D` is present.
///
/// Positive entries make `s + k_P` (resp. `s² + k_D s + k_P`) Hurwitz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesiredErrorDynamics {
    k_p: DVector<f64>,
    k_d: Option<DVector<f64>>,
}

impl DesiredErrorDynamics {
    pub fn first_order(k_p: DVector<f64>) -> Result<Self, ControlError> {
        all_positive("k_P", &k_p)?;
        Ok(Self { k_p, k_d: None })
    }

    pub fn second_order(k_p: DVector<f64>, k_d: DVector<f64>) -> Result<Self, ControlError> {
        all_positive("k_P", &k_p)?;
        all_positive("k_D", &k_d)?;
        super::check_dim("k_D", &k_d, k_p.len())?;
        Ok(Self { k_p, k_d: Some(k_d) })
    }

    pub fn k_p(&self) -> &DVector<f64> {
        &self.k_p
    }

    pub fn k_d(&self) -> Option<&DVector<f64>> {
        self.k_d.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.k_p.len()
    }
}

/// Fixed diagonal surrogate `ḡ` for the control-effectiveness matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectorBlendingGain {
    values: DVector<f64>,
}

impl EffectorBlendingGain {
    /// `ḡ₂ = diag(k_G1, …, k_Gn)`.
    pub fn diagonal(values: DVector<f64>) -> Result<Self, ControlError> {
        all_nonzero("gbar", &values)?;
        Ok(Self { values })
    }

    /// `ḡ₁ = k_G I_n`.
    pub fn scalar(k_g: f64, n: usize) -> Result<Self, ControlError> {
        Self::diagonal(DVector::from_element(n, k_g))
    }

    /// `ḡ = k_G ĝ` per axis, from a best estimate of the effectiveness diagonal.
    pub fn from_estimate(g_hat: &DVector<f64>, k_g: &DVector<f64>) -> Result<Self, ControlError> {
        super::check_dim("k_G", k_g, g_hat.len())?;
        Self::diagonal(g_hat.component_mul(k_g))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `ḡ⁻¹ v`, one correctly rounded division per axis.
    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        v.component_div(&self.values)
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        v.component_mul(&self.values)
    }
}

/// Incremental PI(D) gain set `<K, T_I, T_D, δ_DC>` at sample period `ts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub k: DVector<f64>,
    pub t_i: DVector<f64>,
    #[serde(default)]
    pub t_d: Option<DVector<f64>>,
    pub delta_dc: DVector<f64>,
    pub ts: f64,
}

impl PidGains {
    pub fn validate(&self) -> Result<(), ControlError> {
        all_nonzero("K", &self.k)?;
        all_nonzero("T_I", &self.t_i)?;
        super::check_dim("T_I", &self.t_i, self.k.len())?;
        super::check_dim("delta_dc", &self.delta_dc, self.k.len())?;
        if let Some(td) = &self.t_d {
            super::check_dim("T_D", td, self.k.len())?;
        }
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(ControlError::InvalidGain {
                name: "ts",
                reason: format!("sample period must be > 0, got {}", self.ts),
            });
        }
        Ok(())
    }

    pub fn with_trim(mut self, delta_dc: DVector<f64>) -> Self {
        self.delta_dc = delta_dc;
        self
    }
}

fn check_ts(ts: f64) -> Result<(), ControlError> {
    if ts > 0.0 && ts.is_finite() {
        Ok(())
    } else {
        Err(ControlError::InvalidGain {
            name: "ts",
            reason: format!("sample period must be > 0, got {ts}"),
        })
    }
}

/// First-order map: `K = (ḡ tₛ)⁻¹`, `T_I = k_P⁻¹`.
pub fn map_indi_to_pi(
    dyn_: &DesiredErrorDynamics,
    gbar: &EffectorBlendingGain,
    ts: f64,
) -> Result<PidGains, ControlError> {
    check_ts(ts)?;
    super::check_dim("gbar", gbar.values(), dyn_.dim())?;
    let n = dyn_.dim();
    // (1/tₛ)/ḡ rather than 1/(ḡ tₛ): for tₛ = 0.01 the first factor is
    // exactly 100.
    let rate = 1.0 / ts;
    Ok(PidGains {
        k: gbar.values().map(|g| rate / g),
        t_i: dyn_.k_p().map(|kp| 1.0 / kp),
        t_d: None,
        delta_dc: DVector::zeros(n),
        ts,
    })
}

/// Second-order map: `K = k_D (ḡ tₛ)⁻¹`, `T_I = k_D k_P⁻¹`, `T_D = k_D⁻¹`.
pub fn map_indi_to_pid(
    dyn_: &DesiredErrorDynamics,
    gbar: &EffectorBlendingGain,
    ts: f64,
) -> Result<PidGains, ControlError> {
    check_ts(ts)?;
    let k_d = dyn_.k_d().ok_or(ControlError::MissingDerivativeGain)?;
    super::check_dim("gbar", gbar.values(), dyn_.dim())?;
    let n = dyn_.dim();
    let rate = 1.0 / ts;
    Ok(PidGains {
        k: k_d.zip_map(gbar.values(), |kd, g| kd * (rate / g)),
        t_i: k_d.zip_map(dyn_.k_p(), |kd, kp| kd / kp),
        t_d: Some(k_d.map(|kd| 1.0 / kd)),
        delta_dc: DVector::zeros(n),
        ts,
    })
}

/// Inverts either map: recovers `(k_P, k_D, ḡ)` from a PI(D) gain set.
pub fn map_pid_to_indi(
    gains: &PidGains,
) -> Result<(DesiredErrorDynamics, EffectorBlendingGain), ControlError> {
    gains.validate()?;
    let ts = gains.ts;
    match &gains.t_d {
        None => {
            let gbar = gains.k.map(|k| 1.0 / (k * ts));
            let k_p = gains.t_i.map(|ti| 1.0 / ti);
            Ok((
                DesiredErrorDynamics::first_order(k_p)?,
                EffectorBlendingGain::diagonal(gbar)?,
            ))
        }
        Some(t_d) => {
            let k_d = t_d.map(|td| 1.0 / td);
            let gbar = k_d.zip_map(&gains.k, |kd, k| kd / (k * ts));
            let k_p = k_d.zip_map(&gains.t_i, |kd, ti| kd / ti);
            Ok((
                DesiredErrorDynamics::second_order(k_p, k_d)?,
                EffectorBlendingGain::diagonal(gbar)?,
            ))
        }
    }
}
