//! Controllers as interchangeable strategies.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::gains::{DesiredErrorDynamics, EffectorBlendingGain, PidGains};
use super::laws::{self, ControllerMemory};
use super::ControlError;
use crate::dynamics::Plant;

/// Where the incremental laws get `ω̇(k−1)` and the reference rate from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccelerationSource {
    /// Backward differences of the sampled measurement and reference. Under
    /// this source the INDI step is exactly the sampled law driven by `ė(k−1)`.
    #[default]
    FiniteDifference,
    /// Truth-plant derivative plus configured noise, with the analytic
    /// reference rate.
    PlantDerivative,
}

/// What a controller sees at one sampling instant.
#[derive(Debug, Clone, Copy)]
pub struct SampleSignals<'a> {
    /// Measured state (noisy rates).
    pub state: &'a DVector<f64>,
    /// `e = y_d − y` from the measured output.
    pub error: &'a DVector<f64>,
    /// Reference rate entering `ν`.
    pub reference_rate: &'a DVector<f64>,
    pub memory: &'a ControllerMemory,
    /// The controller's (nominal) plant knowledge.
    pub model: &'a dyn Plant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub delta: DVector<f64>,
    /// Virtual control, for laws that form one.
    pub nu: Option<DVector<f64>>,
}

pub trait Controller: Send + Sync {
    fn name(&self) -> &'static str;

    fn command(&self, signals: &SampleSignals<'_>) -> Result<ControlOutput, ControlError>;

    /// Whether the law can run inside the integrator as a continuous-time
    /// state feedback.
    fn supports_continuous(&self) -> bool {
        false
    }

    /// Continuous-time command from the true state. Only called when
    /// [`Controller::supports_continuous`] is true.
    fn continuous_command(
        &self,
        _model: &dyn Plant,
        _state: &DVector<f64>,
        _error: &DVector<f64>,
        _reference_rate: &DVector<f64>,
    ) -> Result<ControlOutput, ControlError> {
        unimplemented!("{} has no continuous-time form", self.name())
    }
}

#[derive(Debug, Clone)]
pub struct Ndi {
    pub dynamics: DesiredErrorDynamics,
}

impl Controller for Ndi {
    fn name(&self) -> &'static str {
        "NDI"
    }

    fn command(&self, s: &SampleSignals<'_>) -> Result<ControlOutput, ControlError> {
        self.continuous_command(s.model, s.state, s.error, s.reference_rate)
    }

    fn supports_continuous(&self) -> bool {
        true
    }

    fn continuous_command(
        &self,
        model: &dyn Plant,
        state: &DVector<f64>,
        error: &DVector<f64>,
        reference_rate: &DVector<f64>,
    ) -> Result<ControlOutput, ControlError> {
        let nu = laws::virtual_control(error, reference_rate, &self.dynamics);
        let delta = laws::ndi_control(model, state, &nu)?;
        Ok(ControlOutput { delta, nu: Some(nu) })
    }
}

/// Classical INDI, scheduling `G₀` from the nominal model at the measured state.
#[derive(Debug, Clone)]
pub struct IndiG0 {
    pub dynamics: DesiredErrorDynamics,
}

impl Controller for IndiG0 {
    fn name(&self) -> &'static str {
        "INDI_G0"
    }

    fn command(&self, s: &SampleSignals<'_>) -> Result<ControlOutput, ControlError> {
        let nu = laws::virtual_control(s.error, s.reference_rate, &self.dynamics);
        let g0 = s.model.effectiveness(s.state);
        let delta = laws::indi_control_g0(s.memory, &nu, &g0)?;
        Ok(ControlOutput { delta, nu: Some(nu) })
    }
}

#[derive(Debug, Clone)]
pub struct IndiGbar {
    pub dynamics: DesiredErrorDynamics,
    pub gbar: EffectorBlendingGain,
    pub source: AccelerationSource,
}

impl Controller for IndiGbar {
    fn name(&self) -> &'static str {
        "INDI_GBAR"
    }

    fn command(&self, s: &SampleSignals<'_>) -> Result<ControlOutput, ControlError> {
        let nu = laws::virtual_control(s.error, s.reference_rate, &self.dynamics);
        let delta = match self.source {
            AccelerationSource::FiniteDifference => {
                laws::indi_discrete_step(s.memory, &self.dynamics, &self.gbar)
            }
            AccelerationSource::PlantDerivative => laws::indi_control_gbar(s.memory, &nu, &self.gbar),
        };
        Ok(ControlOutput { delta, nu: Some(nu) })
    }
}

#[derive(Debug, Clone)]
pub struct Tdc {
    pub dynamics: DesiredErrorDynamics,
    pub gbar: EffectorBlendingGain,
}

impl Controller for Tdc {
    fn name(&self) -> &'static str {
        "TDC"
    }

    fn command(&self, s: &SampleSignals<'_>) -> Result<ControlOutput, ControlError> {
        let nu = laws::virtual_control(s.error, s.reference_rate, &self.dynamics);
        let delta = laws::tdc_control(s.memory, &nu, &self.gbar);
        Ok(ControlOutput { delta, nu: Some(nu) })
    }
}

#[derive(Debug, Clone)]
pub struct IncrementalPi {
    pub gains: PidGains,
}

impl Controller for IncrementalPi {
    fn name(&self) -> &'static str {
        "PI_INCR"
    }

    fn command(&self, s: &SampleSignals<'_>) -> Result<ControlOutput, ControlError> {
        Ok(ControlOutput {
            delta: laws::incremental_pi_step(s.memory, &self.gains),
            nu: None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct IncrementalPid {
    pub gains: PidGains,
}

impl Controller for IncrementalPid {
    fn name(&self) -> &'static str {
        "PID_INCR"
    }

    fn command(&self, s: &SampleSignals<'_>) -> Result<ControlOutput, ControlError> {
        Ok(ControlOutput {
            delta: laws::incremental_pid_step(s.memory, &self.gains)?,
            nu: None,
        })
    }
}
