use std::collections::BTreeMap;

use super::gains::{DesiredErrorDynamics, EffectorBlendingGain, PidGains};
use super::strategy::{
    AccelerationSource, Controller, IncrementalPi, IncrementalPid, IndiG0, IndiGbar, Ndi, Tdc,
};
use super::ControlError;

/// Everything a factory may need to build a controller.
#[derive(Debug, Clone)]
pub struct ControllerSetup {
    pub dynamics: DesiredErrorDynamics,
    pub gbar: EffectorBlendingGain,
    /// PI(D) gains, explicit or mapped from `dynamics` and `gbar`.
    pub pid: PidGains,
    pub source: AccelerationSource,
}

pub type ControllerFactory = fn(&ControllerSetup) -> Result<Box<dyn Controller>, ControlError>;

struct Entry {
    description: &'static str,
    factory: ControllerFactory,
}

/// Name → controller factory table.
pub struct ControllerRegistry {
    entries: BTreeMap<String, Entry>,
}

impl ControllerRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Registry with the six built-in laws.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("NDI", "nonlinear dynamic inversion against the nominal model", |s| {
            Ok(Box::new(Ndi {
                dynamics: s.dynamics.clone(),
            }))
        });
        r.register("INDI_G0", "incremental NDI with model effectiveness G0", |s| {
            Ok(Box::new(IndiG0 {
                dynamics: s.dynamics.clone(),
            }))
        });
        r.register("INDI_GBAR", "incremental NDI with fixed blending gain gbar", |s| {
            Ok(Box::new(IndiGbar {
                dynamics: s.dynamics.clone(),
                gbar: s.gbar.clone(),
                source: s.source,
            }))
        });
        r.register("TDC", "time-delay control via time-delay estimation", |s| {
            Ok(Box::new(Tdc {
                dynamics: s.dynamics.clone(),
                gbar: s.gbar.clone(),
            }))
        });
        r.register("PI_INCR", "incremental (velocity-form) PI", |s| {
            s.pid.validate()?;
            Ok(Box::new(IncrementalPi { gains: s.pid.clone() }))
        });
        r.register("PID_INCR", "incremental (velocity-form) PID", |s| {
            s.pid.validate()?;
            if s.pid.t_d.is_none() {
                return Err(ControlError::MissingDerivativeGain);
            }
            Ok(Box::new(IncrementalPid { gains: s.pid.clone() }))
        });
        r
    }

    /// Registers `factory` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: &str, description: &'static str, factory: ControllerFactory) {
        self.entries.insert(
            name.to_string(),
            Entry {
                description,
                factory,
            },
        );
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn describe(&self) -> Vec<(&str, &'static str)> {
        self.entries
            .iter()
            .map(|(k, e)| (k.as_str(), e.description))
            .collect()
    }

    pub fn build(&self, name: &str, setup: &ControllerSetup) -> Result<Box<dyn Controller>, ControlError> {
        match self.entries.get(name) {
            Some(e) => (e.factory)(setup),
            None => Err(ControlError::UnknownController {
                name: name.to_string(),
                available: self.names().join(", "),
            }),
        }
    }
}

impl Default for ControllerRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
