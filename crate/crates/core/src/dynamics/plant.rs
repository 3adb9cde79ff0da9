use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::EnvelopeViolation;

/// Multiplicative perturbation of a plant's drift `f` and effectiveness `G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mismatch {
    pub f_scale: f64,
    pub g_scale: f64,
}

impl Default for Mismatch {
    fn default() -> Self {
        Self {
            f_scale: 1.0,
            g_scale: 1.0,
        }
    }
}

/// A square plant seen through its controlled rate channels.
///
/// The controlled output `y` is the subset of the state listed by
/// [`Plant::rate_indices`], with one input per output. Along those channels
/// `ẏ = drift(x) + effectiveness(x) u`.
pub trait Plant: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    fn state_names(&self) -> Vec<String>;

    fn input_names(&self) -> Vec<String>;

    /// State components that are body rates: the controlled output and the
    /// channels that receive measurement noise.
    fn rate_indices(&self) -> Vec<usize>;

    fn derivative(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;

    fn drift(&self, x: &DVector<f64>) -> DVector<f64>;

    fn effectiveness(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Copy of this plant with `mismatch` applied to its drift and effectiveness.
    fn mismatched(&self, mismatch: Mismatch) -> Box<dyn Plant>;

    fn envelope(&self, _x: &DVector<f64>) -> Option<EnvelopeViolation> {
        None
    }

    fn state_dim(&self) -> usize {
        self.state_names().len()
    }

    fn channels(&self) -> usize {
        self.rate_indices().len()
    }

    fn output(&self, x: &DVector<f64>) -> DVector<f64> {
        let idx = self.rate_indices();
        DVector::from_iterator(idx.len(), idx.iter().map(|&i| x[i]))
    }

    fn output_names(&self) -> Vec<String> {
        let names = self.state_names();
        self.rate_indices().into_iter().map(|i| names[i].clone()).collect()
    }

    /// `ẏ` along the controlled channels.
    fn output_rate(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let xdot = self.derivative(x, u);
        let idx = self.rate_indices();
        DVector::from_iterator(idx.len(), idx.iter().map(|&i| xdot[i]))
    }
}
