use serde::Serialize;

use super::log::SimLog;
use super::SimError;

/// Largest command deviation accepted as "identical closed-loop response".
pub const COMMAND_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalDeviation {
    pub signal: String,
    pub max_abs: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub controller_a: String,
    pub controller_b: String,
    pub signals: Vec<SignalDeviation>,
    /// Max |δ_c,A − δ_c,B| over all samples and inputs.
    pub command_deviation: f64,
    /// Max |x_A − x_B| over all samples and states.
    pub state_deviation: f64,
    pub pass: bool,
}

/// Per-column deviation between two logs on the same time grid. Columns
/// that are empty in either log (e.g. `nu` for PI) are skipped.
pub fn compare_logs(a: &SimLog, b: &SimLog) -> Result<Comparison, SimError> {
    let (ca, cb) = (a.columns(), b.columns());
    if a.column_names() != b.column_names() || a.records.len() != b.records.len() {
        return Err(SimError::InvalidScenario(
            "logs differ in layout or length and cannot be compared".into(),
        ));
    }
    if a.records.iter().zip(&b.records).any(|(x, y)| x.t != y.t) {
        return Err(SimError::InvalidScenario("logs use different time grids".into()));
    }
    let mut signals = Vec::new();
    for ((name, va), (_, vb)) in ca.iter().zip(&cb).skip(1) {
        let diffs: Option<Vec<f64>> = va
            .iter()
            .zip(vb)
            .map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).abs()))
            .collect();
        let Some(diffs) = diffs else { continue };
        let n = diffs.len().max(1) as f64;
        signals.push(SignalDeviation {
            signal: name.clone(),
            max_abs: diffs.iter().copied().fold(0.0, f64::max),
            rms: (diffs.iter().map(|d| d * d).sum::<f64>() / n).sqrt(),
        });
    }
    let max_over = |pick: fn(&super::SampleRecord) -> &nalgebra::DVector<f64>| {
        a.records
            .iter()
            .zip(&b.records)
            .map(|(x, y)| (pick(x) - pick(y)).amax())
            .fold(0.0, f64::max)
    };
    let command_deviation = max_over(|r| &r.command);
    let state_deviation = max_over(|r| &r.state);
    Ok(Comparison {
        controller_a: a.meta.controller.clone(),
        controller_b: b.meta.controller.clone(),
        signals,
        command_deviation,
        state_deviation,
        pass: command_deviation <= COMMAND_TOLERANCE,
    })
}
