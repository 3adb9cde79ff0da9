//! Reference signals `y_d(t)` with analytic derivatives.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceShape {
    Zero,
    Step {
        amplitude: f64,
        #[serde(default)]
        start: f64,
    },
    /// Up, across, and back down with raised-cosine edges:
    /// `0 → A → −A → 0`, each edge lasting `edge_time`, with flat
    /// plateaus of `plateau` seconds at ±A.
    SmoothDoublet {
        amplitude: f64,
        start: f64,
        edge_time: f64,
        plateau: f64,
    },
    /// Piecewise-linear through `[t, y]` points, held flat outside.
    Table { points: Vec<[f64; 2]> },
}

/// Reference on one output axis; the other axes track zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    #[serde(default)]
    pub axis: usize,
    pub shape: ReferenceShape,
}

impl ReferenceSpec {
    pub fn new(axis: usize, shape: ReferenceShape) -> Self {
        Self { axis, shape }
    }

    pub fn validate(&self, channels: usize) -> Result<(), String> {
        if self.axis >= channels {
            return Err(format!(
                "reference.axis = {} but the plant has {channels} controlled channel(s)",
                self.axis
            ));
        }
        match &self.shape {
            ReferenceShape::Zero => Ok(()),
            ReferenceShape::Step { amplitude, start } => {
                finite(&[*amplitude, *start]).map_err(|_| "reference step must be finite".into())
            }
            ReferenceShape::SmoothDoublet {
                amplitude,
                start,
                edge_time,
                plateau,
            } => {
                finite(&[*amplitude, *start, *edge_time, *plateau])
                    .map_err(|_| "reference doublet must be finite".to_string())?;
                if *edge_time <= 0.0 || *plateau < 0.0 || *start < 0.0 {
                    return Err("doublet needs edge_time > 0, plateau >= 0, start >= 0".into());
                }
                Ok(())
            }
            ReferenceShape::Table { points } => {
                if points.is_empty() {
                    return Err("reference table needs at least one point".into());
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return Err("reference table must be finite".into());
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err("reference table times must be strictly increasing".into());
                }
                Ok(())
            }
        }
    }

    /// `(y_d, ẏ_d)` on the configured axis.
    pub fn scalar(&self, t: f64) -> (f64, f64) {
        match &self.shape {
            ReferenceShape::Zero => (0.0, 0.0),
            ReferenceShape::Step { amplitude, start } => {
                if t >= *start {
                    (*amplitude, 0.0)
                } else {
                    (0.0, 0.0)
                }
            }
            ReferenceShape::SmoothDoublet { .. } => smooth_doublet(t, self),
            ReferenceShape::Table { points } => table(t, points),
        }
    }

    pub fn eval(&self, t: f64, channels: usize) -> (DVector<f64>, DVector<f64>) {
        let (y, yd) = self.scalar(t);
        let mut ys = DVector::zeros(channels);
        let mut yds = DVector::zeros(channels);
        ys[self.axis] = y;
        yds[self.axis] = yd;
        (ys, yds)
    }

    /// End of the last transition, if the shape has one.
    pub fn active_until(&self) -> Option<f64> {
        match &self.shape {
            ReferenceShape::Zero => None,
            ReferenceShape::Step { start, .. } => Some(*start),
            ReferenceShape::SmoothDoublet {
                start,
                edge_time,
                plateau,
                ..
            } => Some(start + 3.0 * edge_time + 2.0 * plateau),
            ReferenceShape::Table { points } => points.last().map(|p| p[0]),
        }
    }
}

fn finite(v: &[f64]) -> Result<(), ()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(())
    }
}

/// Raised-cosine ramp from 0 to 1 over `width` and its derivative.
fn ramp(tau: f64, width: f64) -> (f64, f64) {
    let phase = PI * tau / width;
    (0.5 * (1.0 - phase.cos()), 0.5 * PI / width * phase.sin())
}

/// Smoothed rate doublet. `y_d` is C¹ and `ẏ_d` is its exact derivative.
///
/// Falls back to `(0, 0)` for specs that are not doublets.
pub fn smooth_doublet(t: f64, spec: &ReferenceSpec) -> (f64, f64) {
    let ReferenceShape::SmoothDoublet {
        amplitude: a,
        start,
        edge_time: te,
        plateau,
    } = spec.shape
    else {
        return (0.0, 0.0);
    };
    let up = start;
    let across = up + te + plateau;
    let down = across + te + plateau;
    if t < up {
        (0.0, 0.0)
    } else if t < up + te {
        let (r, dr) = ramp(t - up, te);
        (a * r, a * dr)
    } else if t < across {
        (a, 0.0)
    } else if t < across + te {
        let (r, dr) = ramp(t - across, te);
        (a - 2.0 * a * r, -2.0 * a * dr)
    } else if t < down {
        (-a, 0.0)
    } else if t < down + te {
        let (r, dr) = ramp(t - down, te);
        (-a + a * r, a * dr)
    } else {
        (0.0, 0.0)
    }
}

fn table(t: f64, points: &[[f64; 2]]) -> (f64, f64) {
    let first = points[0];
    let last = points[points.len() - 1];
    if t <= first[0] {
        return (first[1], 0.0);
    }
    if t >= last[0] {
        return (last[1], 0.0);
    }
    let i = points.partition_point(|p| p[0] <= t) - 1;
    let (p0, p1) = (points[i], points[i + 1]);
    let slope = (p1[1] - p0[1]) / (p1[0] - p0[0]);
    (p0[1] + slope * (t - p0[0]), slope)
}
