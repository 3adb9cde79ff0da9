//! Scenario schema: plant, controller, timing, reference, noise, mismatch.

use nalgebra::{DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::reference::ReferenceSpec;
use super::SimError;
use crate::control::{
    map_indi_to_pi, map_indi_to_pid, AccelerationSource, Controller, ControllerRegistry,
    ControllerSetup, DesiredErrorDynamics, EffectorBlendingGain, PidGains,
};
use crate::dynamics::{
    ActuatorState, AeroMoment, LongitudinalModel, Mismatch, Plant, RotationalModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum PlantSpec {
    Longitudinal {
        dynamic_pressure: f64,
        area: f64,
        ref_length: f64,
        mass: f64,
        velocity: f64,
        pitch_inertia: f64,
        mach: f64,
    },
    Rotational {
        /// Row-major, kg·m².
        inertia: [[f64; 3]; 3],
        /// `(M_c)_δ`, row-major, N·m/rad.
        control_effectiveness: [[f64; 3]; 3],
        #[serde(default)]
        aero: AeroSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AeroSpec {
    #[default]
    Zero,
    Linear {
        damping: [[f64; 3]; 3],
        bias: [f64; 3],
    },
    Coefficients {
        area: f64,
        dynamic_pressure: f64,
        span: f64,
        chord: f64,
        c0: [f64; 3],
        c_rate: [[f64; 3]; 3],
    },
}

fn mat3(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

impl PlantSpec {
    /// The nominal plant, as the controller knows it.
    pub fn build(&self) -> Result<Box<dyn Plant>, SimError> {
        let plant: Box<dyn Plant> = match self {
            PlantSpec::Longitudinal {
                dynamic_pressure,
                area,
                ref_length,
                mass,
                velocity,
                pitch_inertia,
                mach,
            } => Box::new(
                LongitudinalModel::new(
                    *dynamic_pressure,
                    *area,
                    *ref_length,
                    *mass,
                    *velocity,
                    *pitch_inertia,
                    *mach,
                )
                .map_err(|e| SimError::invalid("plant", e))?,
            ),
            PlantSpec::Rotational {
                inertia,
                control_effectiveness,
                aero,
            } => {
                let aero = match aero {
                    AeroSpec::Zero => AeroMoment::Zero,
                    AeroSpec::Linear { damping, bias } => AeroMoment::Linear {
                        damping: mat3(damping),
                        bias: Vector3::from(*bias),
                    },
                    AeroSpec::Coefficients {
                        area,
                        dynamic_pressure,
                        span,
                        chord,
                        c0,
                        c_rate,
                    } => AeroMoment::Coefficients {
                        area: *area,
                        dynamic_pressure: *dynamic_pressure,
                        span: *span,
                        chord: *chord,
                        c0: Vector3::from(*c0),
                        c_rate: mat3(c_rate),
                    },
                };
                Box::new(
                    RotationalModel::new(mat3(inertia), aero, mat3(control_effectiveness))
                        .map_err(|e| SimError::invalid("plant", e))?,
                )
            }
        };
        Ok(plant)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PlantSpec::Longitudinal { .. } => "longitudinal",
            PlantSpec::Rotational { .. } => "rotational",
        }
    }
}

/// Explicit PI(D) gains. When absent they are mapped from `k_p`, `k_d` and ḡ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidSpec {
    pub k: Vec<f64>,
    pub t_i: Vec<f64>,
    #[serde(default)]
    pub t_d: Option<Vec<f64>>,
    #[serde(default)]
    pub delta_dc: Option<Vec<f64>>,
}

fn one() -> Vec<f64> {
    vec![1.0]
}

/// Gain vectors of length one are broadcast over all channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    /// Registry name, e.g. `INDI_GBAR`.
    pub kind: String,
    /// k_P, rad/s
    pub k_p: Vec<f64>,
    #[serde(default)]
    pub k_d: Option<Vec<f64>>,
    /// Multiplies the model effectiveness estimate to give ḡ.
    #[serde(default = "one")]
    pub k_g: Vec<f64>,
    /// Explicit ḡ diagonal; overrides `k_g`.
    #[serde(default)]
    pub gbar: Option<Vec<f64>>,
    #[serde(default)]
    pub pid: Option<PidSpec>,
    #[serde(default)]
    pub acceleration_source: AccelerationSource,
    /// Run NDI as continuous state feedback inside the integrator.
    #[serde(default)]
    pub continuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorSpec {
    #[serde(default = "unit")]
    pub gain: f64,
    /// τ_a, s
    pub time_constant: f64,
    #[serde(default)]
    pub position_limits: Option<(f64, f64)>,
    #[serde(default)]
    pub rate_limit: Option<f64>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation on each measured rate, rad/s.
    #[serde(default)]
    pub rate_sd: Vec<f64>,
    /// Standard deviation on the synthesized output derivative, rad/s².
    /// Only used with the plant-derivative acceleration source.
    #[serde(default)]
    pub accel_sd: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMode {
    Off,
    /// Count samples outside the model's validity envelope.
    #[default]
    Warn,
    /// Abort the run on the first sample outside it.
    Strict,
}

fn default_ts() -> f64 {
    0.01
}

fn default_substeps() -> u32 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantSpec,
    pub controller: ControllerSpec,
    /// No actuator means the command is applied directly.
    #[serde(default)]
    pub actuator: Option<ActuatorSpec>,
    /// tₛ, s
    #[serde(default = "default_ts")]
    pub sample_period: f64,
    /// RK4 steps per sample period.
    #[serde(default = "default_substeps")]
    pub substeps: u32,
    /// s
    pub duration: f64,
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Applied to the truth plant only.
    #[serde(default)]
    pub mismatch: Mismatch,
    #[serde(default)]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default)]
    pub initial_deflection: Option<Vec<f64>>,
    #[serde(default)]
    pub envelope: EnvelopeMode,
    /// Second controller to run on the same scenario for an equivalence check.
    #[serde(default)]
    pub compare_with: Option<String>,
}

fn broadcast(what: &str, v: &[f64], n: usize) -> Result<DVector<f64>, SimError> {
    match v.len() {
        1 => Ok(DVector::from_element(n, v[0])),
        len if len == n => Ok(DVector::from_column_slice(v)),
        len => Err(SimError::InvalidScenario(format!(
            "{what}: expected 1 or {n} values, got {len}"
        ))),
    }
}

fn broadcast_or_zero(what: &str, v: &[f64], n: usize) -> Result<DVector<f64>, SimError> {
    if v.is_empty() {
        Ok(DVector::zeros(n))
    } else {
        broadcast(what, v, n)
    }
}

/// A scenario resolved into runnable parts.
pub struct Prepared {
    pub nominal: Box<dyn Plant>,
    pub truth: Box<dyn Plant>,
    pub setup: ControllerSetup,
    pub controller: Box<dyn Controller>,
    pub actuators: Option<Vec<ActuatorState>>,
    pub x0: DVector<f64>,
    pub delta0: DVector<f64>,
    pub rate_sd: DVector<f64>,
    pub accel_sd: DVector<f64>,
    pub samples: usize,
}

impl Scenario {
    /// Number of sample periods in the run.
    pub fn sample_count(&self) -> Result<usize, SimError> {
        let ts = self.sample_period;
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(SimError::InvalidScenario(format!(
                "sample_period must be positive, got {ts}"
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SimError::InvalidScenario(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        let n = (self.duration / ts).round();
        if n < 1.0 || (n * ts - self.duration).abs() > 1e-9 * self.duration.max(ts) {
            return Err(SimError::InvalidScenario(format!(
                "duration {} is not a positive multiple of sample_period {ts}",
                self.duration
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.prepare(&ControllerRegistry::builtin()).map(|_| ())
    }

    pub fn prepare(&self, registry: &ControllerRegistry) -> Result<Prepared, SimError> {
        let samples = self.sample_count()?;
        if self.substeps == 0 {
            return Err(SimError::InvalidScenario("substeps must be at least 1".into()));
        }
        let m = self.mismatch;
        if !(m.f_scale.is_finite() && m.g_scale.is_finite()) {
            return Err(SimError::InvalidScenario("mismatch scales must be finite".into()));
        }
        let nominal = self.plant.build()?;
        let truth = nominal.mismatched(m);
        let (nx, nc) = (nominal.state_dim(), nominal.channels());
        self.reference.validate(nc).map_err(SimError::InvalidScenario)?;

        let x0 = match &self.initial_state {
            None => DVector::zeros(nx),
            Some(v) if v.len() == nx && v.iter().all(|x| x.is_finite()) => DVector::from_column_slice(v),
            Some(v) => {
                return Err(SimError::InvalidScenario(format!(
                    "initial_state: expected {nx} finite values, got {v:?}"
                )))
            }
        };
        let delta0 = match &self.initial_deflection {
            None => DVector::zeros(nc),
            Some(v) => broadcast("initial_deflection", v, nc)?,
        };

        let c = &self.controller;
        let k_p = broadcast("controller.k_p", &c.k_p, nc)?;
        let dynamics = match &c.k_d {
            None => DesiredErrorDynamics::first_order(k_p),
            Some(k_d) => DesiredErrorDynamics::second_order(k_p, broadcast("controller.k_d", k_d, nc)?),
        }
        .map_err(|e| SimError::invalid("controller", e))?;

        let gbar = match &c.gbar {
            Some(g) => EffectorBlendingGain::diagonal(broadcast("controller.gbar", g, nc)?),
            None => {
                let g_hat = nominal.effectiveness(&x0).diagonal();
                EffectorBlendingGain::from_estimate(&g_hat, &broadcast("controller.k_g", &c.k_g, nc)?)
            }
        }
        .map_err(|e| SimError::invalid("controller", e))?;

        let pid = match &c.pid {
            Some(p) => PidGains {
                k: broadcast("controller.pid.k", &p.k, nc)?,
                t_i: broadcast("controller.pid.t_i", &p.t_i, nc)?,
                t_d: p
                    .t_d
                    .as_ref()
                    .map(|t| broadcast("controller.pid.t_d", t, nc))
                    .transpose()?,
                delta_dc: match &p.delta_dc {
                    Some(d) => broadcast("controller.pid.delta_dc", d, nc)?,
                    None => DVector::zeros(nc),
                },
                ts: self.sample_period,
            },
            None if dynamics.k_d().is_some() => map_indi_to_pid(&dynamics, &gbar, self.sample_period)
                .map_err(|e| SimError::invalid("controller", e))?,
            None => map_indi_to_pi(&dynamics, &gbar, self.sample_period)
                .map_err(|e| SimError::invalid("controller", e))?,
        };

        let setup = ControllerSetup {
            dynamics,
            gbar,
            pid,
            source: c.acceleration_source,
        };
        let controller = registry
            .build(&c.kind, &setup)
            .map_err(|e| SimError::invalid("controller", e))?;
        if let Some(other) = &self.compare_with {
            registry
                .build(other, &setup)
                .map_err(|e| SimError::invalid("compare_with", e))?;
        }

        let actuators = match &self.actuator {
            None => None,
            Some(a) => Some(
                (0..nc)
                    .map(|i| {
                        let st = ActuatorState {
                            deflection: delta0[i],
                            gain: a.gain,
                            time_constant: a.time_constant,
                            position_limits: a.position_limits,
                            rate_limit: a.rate_limit,
                        };
                        st.validate().map(|_| st.with_deflection(delta0[i]))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| SimError::invalid("actuator", e))?,
            ),
        };

        if c.continuous {
            if !controller.supports_continuous() {
                return Err(SimError::InvalidScenario(format!(
                    "controller.continuous is not available for {}",
                    c.kind
                )));
            }
            if actuators.is_some() {
                return Err(SimError::InvalidScenario(
                    "controller.continuous needs a scenario without actuator".into(),
                ));
            }
        }

        let rate_sd = broadcast_or_zero("noise.rate_sd", &self.noise.rate_sd, nc)?;
        let accel_sd = broadcast_or_zero("noise.accel_sd", &self.noise.accel_sd, nc)?;
        if rate_sd.iter().chain(accel_sd.iter()).any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(SimError::InvalidScenario("noise standard deviations must be >= 0".into()));
        }

        Ok(Prepared {
            nominal,
            truth,
            setup,
            controller,
            actuators,
            x0,
            delta0,
            rate_sd,
            accel_sd,
            samples,
        })
    }

    /// Same scenario with a different controller.
    pub fn with_controller(&self, kind: &str) -> Self {
        let mut s = self.clone();
        s.controller.kind = kind.to_string();
        s.compare_with = None;
        s
    }
}

/// First 16 hex digits of the SHA-256 of the scenario's canonical JSON.
pub fn config_hash(s: &Scenario) -> String {
    let text = serde_json::to_string(s).expect("scenario serializes");
    hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
}
